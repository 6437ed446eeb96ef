#include "mpp/geometry.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <string>

#include "mpp/error.hpp"

namespace mpp {

namespace {

struct Unit {
    double value;
    bool saturated;
};

Unit unit_interval(double raw, const Range& r) {
    const double x = (raw - r.lo) / r.span();
    if (x < 0.0) return {0.0, true};
    if (x > 1.0) return {1.0, true};
    return {x, false};
}

std::atomic<bool> g_cosine_warned{false};

}  // namespace

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::DegenerateSample: return "DegenerateSample";
        case ErrorCode::GimbalPole: return "GimbalPole";
        case ErrorCode::InvalidScheme: return "InvalidScheme";
        case ErrorCode::WrongSchemeKind: return "WrongSchemeKind";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::NonMonotonicTimestamp: return "NonMonotonicTimestamp";
        case ErrorCode::IncompleteRun: return "IncompleteRun";
        case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

bool CalibrationVolume::valid() const {
    return vertical.valid() && radial.valid() && radial.lo > 0.0 && planar_x.valid() &&
           planar_z.valid() && azimuth.valid() && elevation.valid();
}

void CalibrationVolume::validate() const {
    auto check = [](const Range& r, const char* name) {
        if (!r.valid()) {
            throw Error(ErrorCode::InvalidConfig,
                        std::string("volume range '") + name + "' must satisfy hi > lo");
        }
    };
    check(vertical, "vertical");
    check(radial, "radial");
    check(planar_x, "planar_x");
    check(planar_z, "planar_z");
    check(azimuth, "azimuth");
    check(elevation, "elevation");
    if (radial.lo <= 0.0) throw Error(ErrorCode::InvalidConfig, "volume radial range must start above 0");
}

Normalized normalize_vertical(const HandSample& s, const CalibrationVolume& vol) {
    const auto n = unit_interval(s.hand.y, vol.vertical);
    return {n.value, n.saturated};
}

Normalized normalize_radial(const HandSample& s, const CalibrationVolume& vol) {
    const double r = distance(s.hand, s.shoulder);
    if (r <= kDegenerateRadius) throw Error(ErrorCode::DegenerateSample, "hand coincides with shoulder");
    const auto n = unit_interval(r, vol.radial);
    return {n.value, n.saturated};
}

Projection project_planar(const HandSample& s, const CalibrationVolume& vol) {
    const auto u = unit_interval(s.hand.x, vol.planar_x);
    const auto v = unit_interval(s.hand.z, vol.planar_z);
    return {{u.value, v.value}, u.saturated || v.saturated};
}

Projection project_spherical(const HandSample& s, const CalibrationVolume& vol) {
    const Point3 d = s.hand - s.shoulder;
    const double r = d.norm();
    if (r <= kDegenerateRadius) throw Error(ErrorCode::DegenerateSample, "hand coincides with shoulder");

    const double elevation = std::asin(std::clamp(d.y / r, -1.0, 1.0));
    if (std::numbers::pi / 2.0 - std::abs(elevation) <= kPoleTolerance) {
        throw Error(ErrorCode::GimbalPole, "hand directly above or below the shoulder");
    }
    const double azimuth = std::atan2(d.x, d.z);

    const auto u = unit_interval(azimuth, vol.azimuth);
    const auto v = unit_interval(elevation, vol.elevation);
    return {{u.value, v.value}, u.saturated || v.saturated};
}

double clamp_cosine(double c, double lo, double hi) {
    if ((c < lo - 1e-9 || c > hi + 1e-9) && !g_cosine_warned.exchange(true)) {
        std::fprintf(stderr, "mpp: arccos argument %.12g outside [%g, %g], clamping\n", c, lo, hi);
    }
    return std::clamp(c, lo, hi);
}

std::optional<CValueTrace> c_value_hr(Point3 pt1, Point3 pt2, Point3 shoulder) {
    CValueTrace tr;
    tr.A = distance(pt1, pt2);
    tr.D1 = distance(pt1, shoulder);
    tr.D2 = distance(pt2, shoulder);
    tr.B = std::max(tr.D1, tr.D2);
    tr.C = std::min(tr.D1, tr.D2);
    if (tr.A <= kStationaryLength || tr.B <= kStationaryLength) return std::nullopt;

    // (A^2 + B^2 - C^2) / 2AB, with B^2 - C^2 factored to keep precision
    // when the two radii are nearly equal.
    const double cosine = (tr.A * tr.A + (tr.B - tr.C) * (tr.B + tr.C)) / (2.0 * tr.A * tr.B);
    tr.theta = std::acos(clamp_cosine(cosine));
    return tr;
}

std::optional<CValueTrace> c_value_vr(Point3 pt1, Point3 pt2) {
    CValueTrace tr;
    tr.A = distance(pt1, pt2);
    if (tr.A <= kStationaryLength) return std::nullopt;
    tr.B = std::abs(pt1.y - pt2.y);
    tr.theta = std::acos(clamp_cosine(tr.B / tr.A, 0.0, 1.0));
    return tr;
}

}  // namespace mpp
