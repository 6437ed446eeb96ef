#include "mpp/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "mpp/error.hpp"

namespace mpp {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::InvalidConfig, what);
}

// Hand pose in technique coordinates: the two pointing coordinates and the
// precision coordinate, each normalized against the calibration volume.
struct HandCommand {
    double u = 0.5;
    double v = 0.5;
    double h = 0.0;
};

Point3 pose_to_hand(const TechniqueConfig& cfg, const HandCommand& c, Point3 shoulder) {
    const auto& vol = cfg.volume;
    if (cfg.adjustment == Adjustment::Vertical) {
        return {vol.planar_x.lo + c.u * vol.planar_x.span(), vol.vertical.lo + c.h * vol.vertical.span(),
                vol.planar_z.lo + c.v * vol.planar_z.span()};
    }
    const double r = vol.radial.lo + c.h * vol.radial.span();
    const double az = vol.azimuth.lo + c.u * vol.azimuth.span();
    const double el = vol.elevation.lo + c.v * vol.elevation.span();
    return shoulder + r * Point3{std::cos(el) * std::sin(az), std::sin(el), std::cos(el) * std::cos(az)};
}

// Pixels of pointer motion per unit of (u, v) at precision H.
Vec2 pixels_per_unit(const TechniqueConfig& cfg, double H) {
    if (cfg.mapping == Mapping::Absolute) return {cfg.display.width / H, cfg.display.height / H};
    return {cfg.gain_base / H, cfg.gain_base / H};
}

struct Goal {
    Vec2 position;
    Vec2 velocity;
};

class Loop {
public:
    Loop(const TaskSpec& task, const TechniqueConfig& cfg, const ControllerPolicy& policy, const TremorModel& tremor)
        : task_(task),
          cfg_(cfg),
          policy_(policy),
          engine_(cfg),
          tremor_(tremor, policy.sample_rate),
          dt_(1.0 / policy.sample_rate) {
        log_.config = cfg;
        log_.task = task.kind;
        cmd_.h = initial_h();
        out_ = engine_.step(next_sample());
        log_.records.emplace_back(out_);
    }

    TrajectoryLog run() {
        for (std::size_t r = 0; r < task_.run_count(); ++r) {
            setup(run_start_position(r));
            play(static_cast<int>(r));
        }
        return std::move(log_);
    }

private:
    double initial_h() const {
        return policy_.strategy == ControllerPolicy::Strategy::Fixed ? policy_.h_fixed : policy_.h_coarse;
    }

    HandSample next_sample() {
        const Point3 hand = pose_to_hand(cfg_, cmd_, shoulder_) + tremor_.next();
        return {static_cast<double>(frame_++) * dt_, hand, shoulder_};
    }

    double next_t() const { return static_cast<double>(frame_) * dt_; }

    void advance() {
        out_ = engine_.step(next_sample());
        log_.records.emplace_back(out_);
    }

    void event(EventKind kind, double t, int run) { log_.records.emplace_back(LogEvent{kind, t, run, out_.pointer}); }

    Vec2 run_start_position(std::size_t r) const {
        if (task_.kind == TaskKind::Buttons) return task_.runs[r].start;
        if (task_.kind == TaskKind::Erase) return task_.start;
        const Track& tr = task_.tracks[r];
        return task_.display.clamp(tr.start - kTrackLeadIn * tr.unit());
    }

    // One proportional steering step toward `goal`; returns the pixel error
    // seen before the step.
    double steer(const Goal& goal, bool fine) {
        const Vec2 err = goal.position - out_.pointer;
        const double gain = fine ? policy_.correction_gain : policy_.approach_gain;
        const Vec2 ppu = pixels_per_unit(cfg_, out_.H);
        cmd_.u += (gain * err.x + goal.velocity.x * dt_) / ppu.x;
        cmd_.v -= (gain * err.y + goal.velocity.y * dt_) / ppu.y;
        cmd_.u = std::clamp(cmd_.u, -kCommandOvershoot, 1.0 + kCommandOvershoot);
        cmd_.v = std::clamp(cmd_.v, -kCommandOvershoot, 1.0 + kCommandOvershoot);
        return err.norm();
    }

    void move_h_toward(double target) { cmd_.h += policy_.h_rate * (target - cmd_.h); }

    bool hand_at_edge() const { return cmd_.u < 0.0 || cmd_.u > 1.0 || cmd_.v < 0.0 || cmd_.v > 1.0; }

    // Relative mapping only: the hand is near the edge of its pointing range
    // and the error asks for more travel in that direction.
    bool needs_clutch(Vec2 err) const {
        if (cfg_.mapping != Mapping::Relative) return false;
        constexpr double lo = kClutchEdge, hi = 1.0 - kClutchEdge;
        return (cmd_.u > hi && err.x > 0.0) || (cmd_.u < lo && err.x < 0.0) || (cmd_.v > hi && err.y < 0.0) ||
               (cmd_.v < lo && err.y > 0.0);
    }

    // Metres of hand travel per unit of (u, v) and per unit of h.
    Vec2 pointing_span_m() const {
        const auto& vol = cfg_.volume;
        if (cfg_.adjustment == Adjustment::Vertical) return {vol.planar_x.span(), vol.planar_z.span()};
        return {vol.radial.hi * vol.azimuth.span(), vol.radial.hi * vol.elevation.span()};
    }

    double precision_span_m() const {
        return cfg_.adjustment == Adjustment::Vertical ? cfg_.volume.vertical.span() : cfg_.volume.radial.span();
    }

    // One leg of a clutch stroke: a straight min-jerk move in (u, v, h) that
    // drifts toward the centre of the pointing range while moving along the
    // precision axis, with the sideways part kept below kClutchSlope so the
    // c-value detector reads it as precision-axis motion.
    void clutch_leg(double h_to) {
        const HandCommand from = cmd_;
        const double along_m = std::abs(h_to - from.h) * precision_span_m();
        const Vec2 span = pointing_span_m();
        const Vec2 want{0.5 - from.u, 0.5 - from.v};
        const double want_m = std::hypot(want.x * span.x, want.y * span.y);
        const double scale = want_m > 0.0 ? std::min(1.0, kClutchSlope * along_m / want_m) : 0.0;
        for (int k = 1; k <= kClutchFrames; ++k) {
            const double s = min_jerk(static_cast<double>(k) / kClutchFrames);
            cmd_.h = from.h + s * (h_to - from.h);
            cmd_.u = from.u + s * scale * want.x;
            cmd_.v = from.v + s * scale * want.y;
            advance();
        }
    }

    void clutch_stroke() {
        const double home = cmd_.h;
        clutch_leg(home >= 0.5 ? std::max(0.0, home - kClutchDepth) : std::min(1.0, home + kClutchDepth));
        clutch_leg(home);
    }

    void setup(Vec2 start) {
        fine_ = false;
        if (cfg_.mapping == Mapping::Relative) {
            // Bring the hand back to the middle of the volume before the run.
            const HandCommand from = cmd_;
            for (int k = 1; k <= kRecenterFrames; ++k) {
                const double s = min_jerk(static_cast<double>(k) / kRecenterFrames);
                cmd_.u = from.u + s * (0.5 - from.u);
                cmd_.v = from.v + s * (0.5 - from.v);
                move_h_toward(initial_h());
                advance();
            }
        }
        for (int k = 0; k < kSetupFrames; ++k) {
            if (steer({start, {}}, false) < kSetupTolerancePx) break;
            move_h_toward(initial_h());
            advance();
        }
        engine_.warp_pointer(start);
        out_.pointer = engine_.last_output() ? engine_.last_output()->pointer : start;
    }

    double target_h(double error_px) {
        if (policy_.strategy == ControllerPolicy::Strategy::Fixed) return policy_.h_fixed;
        if (!fine_ && error_px < policy_.switch_radius_px) fine_ = true;
        if (fine_ && (error_px > 2.0 * policy_.switch_radius_px || hand_at_edge())) fine_ = false;
        return fine_ ? policy_.h_fine : policy_.h_coarse;
    }

    // Follows the graph in drawing order at coarse precision: steers at the
    // first vertex not yet erased with a feed-forward along the local stroke
    // direction.
    void play_erase() {
        std::vector<std::vector<Vec2>> strokes;
        for (const auto& pl : task_.polylines) strokes.push_back(discretize({pl}));
        const double r2 = task_.eraser_radius * task_.eraser_radius;
        const auto span = static_cast<std::size_t>(std::ceil(task_.eraser_radius));
        std::vector<std::vector<char>> erased;
        for (const auto& s : strokes) erased.emplace_back(s.size(), 0);

        const double t0 = next_t();
        event(EventKind::RunStart, t0, 0);
        while (true) {
            std::optional<Goal> goal;
            for (std::size_t k = 0; k < strokes.size() && !goal; ++k) {
                const auto& st = strokes[k];
                for (std::size_t i = 0; i < st.size(); ++i) {
                    if (erased[k][i]) continue;
                    const Vec2 ahead = st[std::min(i + span, st.size() - 1)] - st[i];
                    const double len = ahead.norm();
                    const Vec2 lag = st[i] - out_.pointer;
                    const bool behind = lag.x * ahead.x + lag.y * ahead.y > 0.0;
                    const bool close = lag.norm() < 2.0 * task_.eraser_radius;
                    goal = Goal{st[i], close && behind && len > 0.0 ? (kEraseSpeed / len) * ahead : Vec2{}};
                    break;
                }
            }
            if (!goal) {
                event(EventKind::RunEnd, out_.t, 0);
                return;
            }
            if (needs_clutch(goal->position - out_.pointer)) {
                clutch_stroke();
            } else {
                move_h_toward(policy_.h_coarse);
                steer(*goal, false);
                advance();
            }
            for (std::size_t k = 0; k < strokes.size(); ++k) {
                for (std::size_t i = 0; i < strokes[k].size(); ++i) {
                    const Vec2 d = strokes[k][i] - out_.pointer;
                    if (d.x * d.x + d.y * d.y <= r2) erased[k][i] = 1;
                }
            }
            if (out_.t - t0 >= policy_.run_timeout_s) {
                event(EventKind::Timeout, out_.t, 0);
                return;
            }
        }
    }

    void play(int run) {
        if (task_.kind == TaskKind::Erase) {
            play_erase();
            return;
        }
        const double t0 = next_t();
        event(EventKind::RunStart, t0, run);
        const bool moving = task_.kind == TaskKind::HitMoving || task_.kind == TaskKind::TrackMoving;
        int dwell = 0;
        while (true) {
            const double t = next_t();
            Goal goal;
            if (moving) {
                const Track& tr = task_.tracks[static_cast<std::size_t>(run)];
                const double elapsed = t - t0;
                goal.position = tr.position_at(elapsed + dt_);
                if (elapsed + dt_ < tr.duration()) goal.velocity = tr.speed * tr.unit();
            } else {
                goal.position = task_.runs[static_cast<std::size_t>(run)].buttons
                                    [static_cast<std::size_t>(task_.runs[static_cast<std::size_t>(run)].target)]
                                        .center();
            }

            if (needs_clutch(goal.position - out_.pointer)) {
                clutch_stroke();
                if (!moving && out_.t - t0 >= policy_.run_timeout_s) {
                    event(EventKind::Timeout, out_.t, run);
                    return;
                }
                if (moving && out_.t - t0 >= task_.tracks[static_cast<std::size_t>(run)].duration()) {
                    event(EventKind::RunEnd, out_.t, run);
                    return;
                }
                continue;
            }

            const double err = (goal.position - out_.pointer).norm();
            move_h_toward(target_h(err));
            steer(goal, fine_ || policy_.strategy == ControllerPolicy::Strategy::Fixed);
            advance();

            if (moving) {
                if (out_.t - t0 >= task_.tracks[static_cast<std::size_t>(run)].duration()) {
                    event(EventKind::RunEnd, out_.t, run);
                    return;
                }
                continue;
            }

            const ButtonRun& br = task_.runs[static_cast<std::size_t>(run)];
            const double miss = (br.buttons[static_cast<std::size_t>(br.target)].center() - out_.pointer).norm();
            dwell = miss <= policy_.stop_radius_px ? dwell + 1 : 0;
            if (dwell >= policy_.dwell_frames) {
                event(EventKind::Select, out_.t, run);
                dwell = 0;
                if (topmost_button(br, out_.pointer) == br.target) {
                    event(EventKind::RunEnd, out_.t, run);
                    return;
                }
            }
            if (out_.t - t0 >= policy_.run_timeout_s) {
                event(EventKind::Timeout, out_.t, run);
                return;
            }
        }
    }

    static constexpr double kTrackLeadIn = 150.0;
    static constexpr double kCommandOvershoot = 0.05;
    static constexpr double kSetupTolerancePx = 3.0;
    static constexpr int kRecenterFrames = 15;
    static constexpr int kSetupFrames = 90;
    static constexpr double kClutchEdge = 0.1;
    static constexpr double kClutchSlope = 0.27;  // tan(15 deg)
    static constexpr double kClutchDepth = 0.7;
    static constexpr int kClutchFrames = 12;
    static constexpr double kEraseSpeed = 450.0;  // px/s

    const TaskSpec& task_;
    const TechniqueConfig& cfg_;
    const ControllerPolicy& policy_;
    Engine engine_;
    TremorGenerator tremor_;
    double dt_;
    Point3 shoulder_{0.0, 1.4, 0.0};
    HandCommand cmd_;
    std::uint64_t frame_ = 0;
    FrameOutput out_;
    bool fine_ = false;
    TrajectoryLog log_;
};

}  // namespace

const char* to_string(PrimitiveKind k) {
    switch (k) {
        case PrimitiveKind::MinJerk: return "min_jerk";
        case PrimitiveKind::Hold: return "hold";
        case PrimitiveKind::RadialShift: return "radial_shift";
        case PrimitiveKind::VerticalShift: return "vertical_shift";
    }
    return "?";
}

const char* to_string(ControllerPolicy::Strategy s) {
    return s == ControllerPolicy::Strategy::Fixed ? "fixed" : "two_phase";
}

double min_jerk(double tau) {
    tau = std::clamp(tau, 0.0, 1.0);
    const double t3 = tau * tau * tau;
    return t3 * (10.0 - 15.0 * tau + 6.0 * tau * tau);
}

std::vector<HandSample> gen_primitive(const MotionPrimitive& p) {
    require(p.duration > 0.0 && p.sample_rate > 0.0, "primitive needs duration > 0 and sample_rate > 0");
    const auto n = static_cast<std::size_t>(std::llround(p.duration * p.sample_rate));
    std::vector<HandSample> out;
    out.reserve(n + 1);

    const Point3 ray = p.start - p.shoulder;
    const double r0 = ray.norm();
    const double r1 = distance(p.end, p.shoulder);
    if (p.kind == PrimitiveKind::RadialShift) require(r0 > kDegenerateRadius, "radial shift starts at the shoulder");

    for (std::size_t k = 0; k <= n; ++k) {
        const double tau = n == 0 ? 1.0 : static_cast<double>(k) / static_cast<double>(n);
        const double s = min_jerk(tau);
        Point3 hand;
        switch (p.kind) {
            case PrimitiveKind::MinJerk: hand = p.start + s * (p.end - p.start); break;
            case PrimitiveKind::Hold: hand = p.start; break;
            case PrimitiveKind::RadialShift: hand = p.shoulder + ((r0 + s * (r1 - r0)) / r0) * ray; break;
            case PrimitiveKind::VerticalShift:
                hand = {p.start.x, p.start.y + s * (p.end.y - p.start.y), p.start.z};
                break;
        }
        out.push_back({p.t0 + static_cast<double>(k) / p.sample_rate, hand, p.shoulder});
    }
    return out;
}

double TremorGenerator::Biquad::run(double x) {
    const double y = b0 * x + b2 * x2 - a1 * y1 - a2 * y2;
    x2 = x1;
    x1 = x;
    y2 = y1;
    y1 = y;
    return y;
}

TremorGenerator::TremorGenerator(const TremorModel& model, double sample_rate) : rng_(model.seed) {
    require(model.amplitude >= 0.0, "tremor amplitude must be >= 0");
    require(sample_rate > 0.0, "tremor sample rate must be > 0");
    silent_ = model.amplitude == 0.0;
    if (silent_) return;
    require(model.center_hz > 0.0 && model.center_hz < 0.5 * sample_rate,
            "tremor centre frequency must lie below Nyquist");
    require(model.bandwidth_hz > 0.0, "tremor bandwidth must be > 0");

    // RBJ band-pass, 0 dB peak gain.
    const double w0 = 2.0 * std::numbers::pi * model.center_hz / sample_rate;
    const double q = model.center_hz / model.bandwidth_hz;
    const double alpha = std::sin(w0) / (2.0 * q);
    const double a0 = 1.0 + alpha;
    Biquad proto;
    proto.b0 = alpha / a0;
    proto.b2 = -alpha / a0;
    proto.a1 = -2.0 * std::cos(w0) / a0;
    proto.a2 = (1.0 - alpha) / a0;

    // White-noise power gain = energy of the impulse response.
    Biquad probe = proto;
    double energy = 0.0;
    for (int k = 0; k < 1 << 14; ++k) {
        const double y = probe.run(k == 0 ? 1.0 : 0.0);
        energy += y * y;
    }
    const double per_axis = model.amplitude / std::sqrt(3.0);
    input_sigma_ = per_axis / std::sqrt(energy);
    for (auto& a : axes_) a = proto;

    // Settle the filters so the first samples already have stationary variance.
    for (int k = 0; k < 256; ++k) next();
}

double TremorGenerator::gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // Box-Muller on 53-bit uniforms; std::normal_distribution is not
    // reproducible across standard libraries.
    constexpr double scale = 1.0 / 9007199254740992.0;
    double u1 = 0.0;
    while (u1 == 0.0) u1 = static_cast<double>(rng_() >> 11) * scale;
    const double u2 = static_cast<double>(rng_() >> 11) * scale;
    const double mag = std::sqrt(-2.0 * std::log(u1));
    spare_ = mag * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return mag * std::cos(2.0 * std::numbers::pi * u2);
}

Point3 TremorGenerator::next() {
    if (silent_) return {};
    return {axes_[0].run(input_sigma_ * gaussian()), axes_[1].run(input_sigma_ * gaussian()),
            axes_[2].run(input_sigma_ * gaussian())};
}

std::vector<HandSample> add_tremor(std::vector<HandSample> samples, const TremorModel& model) {
    if (model.amplitude == 0.0 || samples.empty()) return samples;
    double rate = 30.0;
    if (samples.size() > 1) {
        const double span = samples.back().t - samples.front().t;
        if (span > 0.0) rate = static_cast<double>(samples.size() - 1) / span;
    }
    TremorGenerator gen(model, rate);
    for (auto& s : samples) s.hand = s.hand + gen.next();
    return samples;
}

void ControllerPolicy::validate() const {
    require(approach_gain > 0.0 && correction_gain > 0.0, "controller gains must be > 0");
    for (double h : {h_fixed, h_coarse, h_fine}) require(h >= 0.0 && h <= 1.0, "policy h values must lie in [0,1]");
    require(switch_radius_px > stop_radius_px, "switch_radius must exceed stop_radius");
    require(stop_radius_px > 0.0, "stop_radius must be > 0");
    require(dwell_frames >= 1, "dwell_frames must be >= 1");
    require(run_timeout_s > 0.0 && sample_rate > 0.0, "timeout and sample rate must be > 0");
    require(h_rate > 0.0 && h_rate <= 1.0, "h_rate must lie in (0,1]");
}

Point3 neutral_hand(const TechniqueConfig& cfg, Point3 shoulder) { return pose_to_hand(cfg, {0.5, 0.5, 0.5}, shoulder); }

TrajectoryLog run_controller(const TaskSpec& task, const TechniqueConfig& cfg, const ControllerPolicy& policy,
                             const TremorModel& tremor) {
    task.validate();
    cfg.validate();
    policy.validate();
    return Loop(task, cfg, policy, tremor).run();
}

}  // namespace mpp
