#pragma once

// Per-frame multi-precision pointing state machine.
//
// Four techniques come from crossing the mapping (absolute / relative) with
// the precision axis (vertical hand height / radial hand-shoulder distance):
//
//              Absolute  Relative
//   Vertical      VA        VR
//   Horizontal    HA        HR
//
// Absolute techniques keep the pointer fixed inside a re-anchored area when
// the precision changes; relative techniques freeze the pointer while the
// recent hand motion runs along the precision axis (clutching).

#include <deque>
#include <numbers>
#include <optional>
#include <span>
#include <string>

#include "mpp/geometry.hpp"
#include "mpp/precision.hpp"

namespace mpp {

enum class Mapping { Absolute, Relative };
enum class Adjustment { Vertical, Horizontal };
enum class ClutchInequality { Below, Above };

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
    friend bool operator==(const Vec2&, const Vec2&) = default;
    double norm() const;
};

/// Pointer coordinates are continuous pixels, origin top-left, covering
/// [0, width] x [0, height].
struct DisplayGeometry {
    double width = 3840.0;
    double height = 1080.0;

    Vec2 size() const { return {width, height}; }
    Vec2 clamp(Vec2 p) const;
    bool contains(Vec2 p) const;
    friend bool operator==(const DisplayGeometry&, const DisplayGeometry&) = default;
};

struct ClutchParams {
    int window_n = 5;  ///< pairs examined: current sample and N before it
    double tau = std::numbers::pi / 6.0;
    int min_pairs = 1;  ///< moving pairs needed before a new decision is taken
    ClutchInequality inequality = ClutchInequality::Below;
    friend bool operator==(const ClutchParams&, const ClutchParams&) = default;
};

struct FeedbackParams {
    double circle_radius = 40.0;  ///< px at the scheme's maximum H
    double ring_gain = 0.01;      ///< ring thickness px per (px/s)
    friend bool operator==(const FeedbackParams&, const FeedbackParams&) = default;
};

struct TechniqueConfig {
    Mapping mapping = Mapping::Absolute;
    Adjustment adjustment = Adjustment::Horizontal;
    PrecisionScheme scheme = PrecisionScheme::default_segmented();
    CalibrationVolume volume;
    DisplayGeometry display;
    ClutchParams clutch;
    FeedbackParams feedback;
    double gain_base = 3840.0;        ///< px per normalized unit at H = 1 (relative only)
    double smoothing_alpha = 0.5;     ///< 1 disables smoothing
    double prediction_lead = 1.0;     ///< frames
    double speed_threshold = 1000.0;  ///< px/s
    double hysteresis_margin = 0.02;

    /// Short technique code, e.g. "HA" or "VR".
    std::string technique() const;
    /// Throws Error(InvalidConfig).
    void validate() const;
    friend bool operator==(const TechniqueConfig&, const TechniqueConfig&) = default;
};

struct MappedArea {
    Vec2 origin;  ///< top-left, px
    Vec2 size;    ///< px
    friend bool operator==(const MappedArea&, const MappedArea&) = default;
};

struct Rings {
    Vec2 pos_now;
    Vec2 pos_prev;
    double thickness = 0.0;
    friend bool operator==(const Rings&, const Rings&) = default;
};

struct FeedbackState {
    double circle_radius = 1.0;
    bool circle_clutching = false;
    std::optional<Rings> rings;
    Vec2 prediction_end;
    friend bool operator==(const FeedbackState&, const FeedbackState&) = default;
};

struct FrameOutput {
    double t = 0.0;
    Vec2 pointer;
    bool frozen = false;
    double h = 0.0;
    double H = 1.0;
    UV uv;
    FeedbackState feedback;
    bool saturated = false;
    friend bool operator==(const FrameOutput&, const FrameOutput&) = default;
};

struct Rebase {
    MappedArea area;
    bool clamped = false;  ///< origin had to move to keep the area on screen
};

/// Resizes the absolute-mapping area to display/H_new and anchors it so that
/// `pointer` keeps the same fractional position `frac` (screen-oriented,
/// x right, y down) inside the new area.
Rebase rebase_absolute(const MappedArea& area, UV frac, Vec2 pointer, double H_new, const DisplayGeometry& display);

/// Mean c-value over the adjacent pairs of `window`; returns prev_frozen when
/// fewer than params.min_pairs pairs are moving.
bool detect_clutch(std::span<const HandSample> window, const ClutchParams& params, Adjustment adjustment,
                   bool prev_frozen);

/// Linear CD mapping: pointer += delta * gain_base / H unless frozen.
Vec2 apply_relative(Vec2 pointer, Vec2 delta, double H, double gain_base, bool frozen, const DisplayGeometry& display);

/// `history` is oldest-first and ends with the frame being decorated, whose
/// pointer/H/frozen are already final.
FeedbackState compute_feedback(std::span<const FrameOutput> history, const TechniqueConfig& cfg);

class Engine {
public:
    explicit Engine(TechniqueConfig cfg);

    /// Throws Error(NonMonotonicTimestamp). A degenerate sample (hand on the
    /// shoulder) is skipped and the previous output is repeated.
    FrameOutput step(const HandSample& sample);

    /// Places the pointer at `p` without moving the hand (task run setup).
    void warp_pointer(Vec2 p);

    const TechniqueConfig& config() const { return cfg_; }
    const MappedArea& area() const { return area_; }
    std::optional<FrameOutput> last_output() const;
    std::size_t frames() const { return frames_; }

private:
    double precision_for(double h);

    TechniqueConfig cfg_;
    std::size_t frames_ = 0;
    std::optional<double> last_t_;
    std::optional<Point3> smoothed_hand_;
    std::optional<UV> last_uv_;
    int band_ = -1;
    double H_ = 1.0;
    bool frozen_ = false;
    Vec2 pointer_;
    MappedArea area_;
    std::deque<HandSample> window_;
    std::deque<FrameOutput> history_;  ///< last two outputs
};

const char* to_string(Mapping m);
const char* to_string(Adjustment a);
const char* to_string(ClutchInequality c);

}  // namespace mpp
