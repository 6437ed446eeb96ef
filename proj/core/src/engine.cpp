#include "mpp/engine.hpp"

#include <algorithm>
#include <cmath>

#include "mpp/error.hpp"

namespace mpp {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::InvalidConfig, what);
}

Vec2 area_point(const MappedArea& area, UV frac) {
    return {area.origin.x + frac.u * area.size.x, area.origin.y + frac.v * area.size.y};
}

// Screen fractions run x right / y down; v grows toward the top of the screen.
UV screen_fraction(UV uv) { return {uv.u, 1.0 - uv.v}; }

double clamp_origin(double origin, double size, double extent) {
    const double lo = std::min(0.0, extent - size);
    const double hi = std::max(0.0, extent - size);
    return std::clamp(origin, lo, hi);
}

}  // namespace

const char* to_string(Mapping m) { return m == Mapping::Absolute ? "absolute" : "relative"; }
const char* to_string(Adjustment a) { return a == Adjustment::Vertical ? "vertical" : "horizontal"; }
const char* to_string(ClutchInequality c) { return c == ClutchInequality::Below ? "below" : "above"; }

double Vec2::norm() const { return std::hypot(x, y); }

Vec2 DisplayGeometry::clamp(Vec2 p) const { return {std::clamp(p.x, 0.0, width), std::clamp(p.y, 0.0, height)}; }

bool DisplayGeometry::contains(Vec2 p) const { return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height; }

std::string TechniqueConfig::technique() const {
    std::string code;
    code += adjustment == Adjustment::Vertical ? 'V' : 'H';
    code += mapping == Mapping::Absolute ? 'A' : 'R';
    return code;
}

void TechniqueConfig::validate() const {
    volume.validate();
    require(display.width >= 1.0 && display.height >= 1.0, "display dimensions must be >= 1 px");
    require(clutch.window_n >= 1, "clutch.window_n must be >= 1");
    require(clutch.min_pairs >= 1, "clutch.min_pairs must be >= 1");
    require(clutch.window_n >= clutch.min_pairs, "clutch.window_n must be >= clutch.min_pairs");
    require(std::isfinite(clutch.tau) && clutch.tau >= 0.0, "clutch.tau must be a finite angle >= 0");
    require(gain_base > 0.0 && std::isfinite(gain_base), "gain_base must be > 0");
    require(smoothing_alpha > 0.0 && smoothing_alpha <= 1.0, "smoothing_alpha must lie in (0,1]");
    require(prediction_lead >= 0.0, "prediction_lead must be >= 0");
    require(speed_threshold >= 0.0, "speed_threshold must be >= 0");
    require(hysteresis_margin >= 0.0, "hysteresis_margin must be >= 0");
    require(feedback.circle_radius > 0.0, "feedback.circle_radius must be > 0");
    require(feedback.ring_gain >= 0.0, "feedback.ring_gain must be >= 0");
}

Rebase rebase_absolute(const MappedArea& area, UV frac, Vec2 pointer, double H_new, const DisplayGeometry& display) {
    (void)area;  // the new area depends only on the anchor, not on the old placement
    Rebase out;
    out.area.size = {display.width / H_new, display.height / H_new};
    const Vec2 anchored = pointer - Vec2{frac.u * out.area.size.x, frac.v * out.area.size.y};
    out.area.origin = {clamp_origin(anchored.x, out.area.size.x, display.width),
                       clamp_origin(anchored.y, out.area.size.y, display.height)};
    out.clamped = !(out.area.origin == anchored);
    return out;
}

bool detect_clutch(std::span<const HandSample> window, const ClutchParams& params, Adjustment adjustment,
                   bool prev_frozen) {
    double sum = 0.0;
    int moving = 0;
    for (std::size_t i = 0; i + 1 < window.size(); ++i) {
        const HandSample& a = window[i];
        const HandSample& b = window[i + 1];
        std::optional<CValueTrace> c;
        if (adjustment == Adjustment::Horizontal) {
            // Each point is measured against its own shoulder sample.
            c = c_value_hr(a.hand - a.shoulder, b.hand - b.shoulder, Point3{});
        } else {
            c = c_value_vr(a.hand, b.hand);
        }
        if (!c) continue;
        sum += c->theta;
        ++moving;
    }
    if (moving < params.min_pairs) return prev_frozen;
    const double mean = sum / moving;
    return params.inequality == ClutchInequality::Below ? mean < params.tau : mean > params.tau;
}

Vec2 apply_relative(Vec2 pointer, Vec2 delta, double H, double gain_base, bool frozen, const DisplayGeometry& display) {
    if (frozen) return pointer;
    const double scale = gain_base / H;
    return display.clamp({pointer.x + delta.x * scale, pointer.y + delta.y * scale});
}

FeedbackState compute_feedback(std::span<const FrameOutput> history, const TechniqueConfig& cfg) {
    FeedbackState fb;
    if (history.empty()) return fb;
    const FrameOutput& now = history.back();
    fb.circle_radius = cfg.feedback.circle_radius * now.H / cfg.scheme.max_H();
    fb.circle_clutching = now.frozen;
    fb.prediction_end = now.pointer;
    if (history.size() < 2) return fb;

    const FrameOutput& prev = history[history.size() - 2];
    const Vec2 step = now.pointer - prev.pointer;
    const double dt = now.t - prev.t;
    const double speed = dt > 0.0 ? step.norm() / dt : 0.0;
    if (speed > cfg.speed_threshold) {
        fb.rings = Rings{now.pointer, prev.pointer, cfg.feedback.ring_gain * speed};
    }
    fb.prediction_end = now.pointer + cfg.prediction_lead * step;
    return fb;
}

Engine::Engine(TechniqueConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    pointer_ = 0.5 * cfg_.display.size();
    area_ = {{0.0, 0.0}, cfg_.display.size()};
}

std::optional<FrameOutput> Engine::last_output() const {
    if (history_.empty()) return std::nullopt;
    return history_.back();
}

double Engine::precision_for(double h) {
    if (cfg_.scheme.kind() == PrecisionScheme::Kind::Segmented) {
        band_ = hysteresis_band(cfg_.scheme, h, band_, cfg_.hysteresis_margin);
        return cfg_.scheme.band_value(band_);
    }
    return cfg_.scheme.eval(h).H;
}

FrameOutput Engine::step(const HandSample& sample) {
    if (!std::isfinite(sample.t) || (last_t_ && !(sample.t > *last_t_))) {
        throw Error(ErrorCode::NonMonotonicTimestamp,
                    "sample t=" + std::to_string(sample.t) +
                        (last_t_ ? " does not follow t=" + std::to_string(*last_t_) : std::string(" is not finite")));
    }
    last_t_ = sample.t;

    const double alpha = cfg_.smoothing_alpha;
    const Point3 hand =
        smoothed_hand_ ? alpha * sample.hand + (1.0 - alpha) * *smoothed_hand_ : sample.hand;
    const HandSample smoothed{sample.t, hand, sample.shoulder};

    auto repeat_previous = [&] {
        FrameOutput repeat = history_.empty() ? FrameOutput{} : history_.back();
        if (history_.empty()) {
            repeat.pointer = pointer_;
            repeat.H = H_;
            repeat.feedback = compute_feedback(std::span(&repeat, 1), cfg_);
        }
        repeat.t = sample.t;
        return repeat;
    };
    if (!sample.hand.finite() || !sample.shoulder.finite()) return repeat_previous();
    // Smoothing would pull a hand-on-shoulder sample back to a valid radius;
    // judge degeneracy on the raw sample.
    if (cfg_.adjustment == Adjustment::Horizontal && distance(sample.hand, sample.shoulder) < kDegenerateRadius) {
        return repeat_previous();
    }

    Normalized norm;
    Projection proj;
    try {
        norm = cfg_.adjustment == Adjustment::Vertical ? normalize_vertical(smoothed, cfg_.volume)
                                                       : normalize_radial(smoothed, cfg_.volume);
        if (cfg_.adjustment == Adjustment::Vertical) {
            proj = project_planar(smoothed, cfg_.volume);
        } else {
            try {
                proj = project_spherical(smoothed, cfg_.volume);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::GimbalPole) throw;
                proj = {last_uv_.value_or(UV{0.5, 0.5}), true};
            }
        }
    } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateSample) throw;
        return repeat_previous();
    }
    smoothed_hand_ = hand;

    const bool first = frames_ == 0;
    const double H_prev = H_;
    H_ = precision_for(norm.h);
    const UV frac = screen_fraction(proj.uv);

    if (cfg_.mapping == Mapping::Absolute) {
        frozen_ = false;
        if (first) {
            const Vec2 size{cfg_.display.width / H_, cfg_.display.height / H_};
            const Vec2 centered = 0.5 * (cfg_.display.size() - size);
            area_ = {{clamp_origin(centered.x, size.x, cfg_.display.width),
                      clamp_origin(centered.y, size.y, cfg_.display.height)},
                     size};
            pointer_ = area_point(area_, frac);
        } else if (H_ != H_prev) {
            const Rebase rb = rebase_absolute(area_, frac, pointer_, H_, cfg_.display);
            area_ = rb.area;
            if (rb.clamped) pointer_ = area_point(area_, frac);
        } else {
            pointer_ = area_point(area_, frac);
        }
    } else {
        window_.push_back(smoothed);
        while (window_.size() > static_cast<std::size_t>(cfg_.clutch.window_n) + 1) window_.pop_front();
        const std::vector<HandSample> window(window_.begin(), window_.end());
        frozen_ = detect_clutch(window, cfg_.clutch, cfg_.adjustment, frozen_);
        if (!first) {
            const UV prev = screen_fraction(*last_uv_);
            const Vec2 delta{frac.u - prev.u, frac.v - prev.v};
            pointer_ = apply_relative(pointer_, delta, H_, cfg_.gain_base, frozen_, cfg_.display);
        }
    }
    pointer_ = cfg_.display.clamp(pointer_);
    last_uv_ = proj.uv;

    FrameOutput out;
    out.t = sample.t;
    out.pointer = pointer_;
    out.frozen = frozen_;
    out.h = norm.h;
    out.H = H_;
    out.uv = proj.uv;
    out.saturated = norm.saturated || proj.saturated;

    history_.push_back(out);
    while (history_.size() > 2) history_.pop_front();
    const std::vector<FrameOutput> hist(history_.begin(), history_.end());
    out.feedback = compute_feedback(hist, cfg_);
    history_.back() = out;
    ++frames_;
    return out;
}

void Engine::warp_pointer(Vec2 p) {
    p = cfg_.display.clamp(p);
    if (cfg_.mapping == Mapping::Absolute && last_uv_) {
        const UV frac = screen_fraction(*last_uv_);
        area_ = rebase_absolute(area_, frac, p, H_, cfg_.display).area;
        pointer_ = cfg_.display.clamp(area_point(area_, frac));
    } else {
        pointer_ = p;
    }
    if (!history_.empty()) {
        // Restart the motion history so the jump does not read as pointer speed.
        FrameOutput last = history_.back();
        last.pointer = pointer_;
        last.feedback = compute_feedback(std::span(&last, 1), cfg_);
        history_.assign(1, last);
    }
}

}  // namespace mpp
