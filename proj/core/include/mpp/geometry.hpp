#pragma once

// Hand-space geometry shared by every technique.
//
// Frame convention (inherited by all modules): right-handed, meters,
// y vertical (up), z depth toward the display, x to the user's right.

#include <cmath>
#include <numbers>
#include <optional>

namespace mpp {

struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend Point3 operator+(Point3 a, Point3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Point3 operator-(Point3 a, Point3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Point3 operator*(double s, Point3 p) { return {s * p.x, s * p.y, s * p.z}; }
    friend bool operator==(const Point3&, const Point3&) = default;

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline double distance(Point3 a, Point3 b) { return (a - b).norm(); }

struct HandSample {
    double t = 0.0;  ///< seconds, strictly increasing within a stream
    Point3 hand;
    Point3 shoulder;

    friend bool operator==(const HandSample&, const HandSample&) = default;
};

struct Range {
    double lo = 0.0;
    double hi = 1.0;

    double span() const { return hi - lo; }
    bool valid() const { return std::isfinite(lo) && std::isfinite(hi) && hi > lo; }
    friend bool operator==(const Range&, const Range&) = default;
};

/// The region of hand space mapped onto the unit square / unit interval.
/// Vertical and planar bounds are absolute; radial and angular bounds are
/// measured from the shoulder joint.
struct CalibrationVolume {
    Range vertical{0.8, 1.7};    ///< hand.y, meters
    Range radial{0.15, 0.65};    ///< |hand - shoulder|, meters
    Range planar_x{-0.4, 0.4};   ///< hand.x, meters
    Range planar_z{0.2, 0.8};    ///< hand.z, meters
    Range azimuth{-std::numbers::pi / 3.0, std::numbers::pi / 3.0};     ///< radians, 0 = straight ahead
    Range elevation{-std::numbers::pi / 6.0, std::numbers::pi / 4.0};   ///< radians, 0 = shoulder height

    bool valid() const;
    /// Throws Error(InvalidConfig) naming the offending range.
    void validate() const;
    friend bool operator==(const CalibrationVolume&, const CalibrationVolume&) = default;
};

struct Normalized {
    double h = 0.0;          ///< in [0,1]
    bool saturated = false;  ///< raw value fell outside the calibrated range
};

struct UV {
    double u = 0.0;
    double v = 0.0;
    friend bool operator==(const UV&, const UV&) = default;
};

struct Projection {
    UV uv;
    bool saturated = false;
};

Normalized normalize_vertical(const HandSample& s, const CalibrationVolume& vol);

/// Throws Error(DegenerateSample) when the hand sits on the shoulder.
Normalized normalize_radial(const HandSample& s, const CalibrationVolume& vol);

/// u follows hand.x, v follows hand.z (forward moves the pointer up).
Projection project_planar(const HandSample& s, const CalibrationVolume& vol);

/// u follows azimuth = atan2(dx, dz), v follows elevation = asin(dy / r).
/// Throws Error(DegenerateSample) or Error(GimbalPole).
Projection project_spherical(const HandSample& s, const CalibrationVolume& vol);

/// Side lengths and angle of one c-value evaluation. For the vertical
/// formula D1, D2 and C are zero and B is the vertical displacement.
struct CValueTrace {
    double A = 0.0;
    double B = 0.0;
    double C = 0.0;
    double D1 = 0.0;
    double D2 = 0.0;
    double theta = 0.0;  ///< radians in [0, pi]
};

/// Law-of-cosines angle between the displacement and the longer
/// shoulder ray. nullopt means the pair is stationary (A or B ~ 0).
std::optional<CValueTrace> c_value_hr(Point3 pt1, Point3 pt2, Point3 shoulder);

/// Angle between the displacement and the vertical axis.
/// nullopt means the pair is stationary.
std::optional<CValueTrace> c_value_vr(Point3 pt1, Point3 pt2);

/// Clamps a cosine into [lo, hi]; drift beyond 1e-9 is logged to stderr once.
double clamp_cosine(double c, double lo = -1.0, double hi = 1.0);

inline constexpr double kDegenerateRadius = 1e-6;
inline constexpr double kStationaryLength = 1e-9;
inline constexpr double kPoleTolerance = 1e-6;

}  // namespace mpp
