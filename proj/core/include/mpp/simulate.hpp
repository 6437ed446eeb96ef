#pragma once

// Deterministic synthetic hand input: open-loop movement primitives, seeded
// physiological tremor, and a scripted closed-loop pointing controller that
// plays the evaluation tasks through an Engine.

#include <cstdint>
#include <random>
#include <vector>

#include "mpp/engine.hpp"
#include "mpp/tasks.hpp"

namespace mpp {

enum class PrimitiveKind { MinJerk, Hold, RadialShift, VerticalShift };

struct MotionPrimitive {
    PrimitiveKind kind = PrimitiveKind::MinJerk;
    Point3 start;
    Point3 end;
    Point3 shoulder{0.0, 1.4, 0.0};
    double duration = 1.0;     ///< s
    double sample_rate = 30.0; ///< Hz
    double t0 = 0.0;           ///< timestamp of the first sample
};

/// Minimum-jerk position profile 10t^3 - 15t^4 + 6t^5 on [0,1].
double min_jerk(double tau);

/// Samples at t0 + k / sample_rate for k = 0..round(duration * sample_rate),
/// both endpoints included. RadialShift keeps the direction of start from the
/// shoulder and moves to the radius of end; VerticalShift keeps x and z of
/// start and moves to end.y.
std::vector<HandSample> gen_primitive(const MotionPrimitive& p);

/// Band-limited hand tremor. `amplitude` is the RMS length of the 3-D
/// displacement vector.
struct TremorModel {
    double amplitude = 0.002;  ///< m
    double center_hz = 10.0;
    double bandwidth_hz = 4.0;
    std::uint64_t seed = 1;
    friend bool operator==(const TremorModel&, const TremorModel&) = default;
};

/// Streaming tremor source: white Gaussian noise through one RBJ band-pass
/// biquad per axis, scaled by the filter's exact noise gain.
class TremorGenerator {
public:
    TremorGenerator(const TremorModel& model, double sample_rate);
    Point3 next();

private:
    struct Biquad {
        double b0 = 0, b2 = 0, a1 = 0, a2 = 0;
        double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
        double run(double x);
    };
    double gaussian();

    std::mt19937_64 rng_;
    Biquad axes_[3];
    double input_sigma_ = 0.0;
    bool silent_ = false;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Adds tremor to the hand positions (shoulder untouched). The sample rate
/// is inferred from the timestamps.
std::vector<HandSample> add_tremor(std::vector<HandSample> samples, const TremorModel& model);

struct ControllerPolicy {
    enum class Strategy { Fixed, TwoPhase };

    double approach_gain = 0.35;    ///< fraction of the pixel error corrected per frame, coarse phase
    double correction_gain = 0.5;   ///< same, fine phase
    Strategy strategy = Strategy::TwoPhase;
    double h_fixed = 0.1;
    double h_coarse = 0.1;
    double h_fine = 0.9;
    double switch_radius_px = 60.0;
    double stop_radius_px = 1.5;
    int dwell_frames = 3;            ///< frames inside stop radius before clicking
    double run_timeout_s = 20.0;
    double sample_rate = 30.0;
    double h_rate = 0.3;             ///< fraction of the h gap closed per frame

    /// Throws Error(InvalidConfig).
    void validate() const;
    friend bool operator==(const ControllerPolicy&, const ControllerPolicy&) = default;
};

/// Closed loop over a fresh Engine(cfg) for any task kind. Button runs end
/// at the first hit or at the policy timeout; moving-object runs last for the
/// track duration; the erase task follows the graph in drawing order until
/// it is gone or the timeout passes.
TrajectoryLog run_controller(const TaskSpec& task, const TechniqueConfig& cfg, const ControllerPolicy& policy,
                             const TremorModel& tremor);

/// Neutral hand pose: the centre of the calibration volume for the given
/// technique, with the shoulder at `shoulder`.
Point3 neutral_hand(const TechniqueConfig& cfg, Point3 shoulder);

const char* to_string(PrimitiveKind k);
const char* to_string(ControllerPolicy::Strategy s);

}  // namespace mpp
