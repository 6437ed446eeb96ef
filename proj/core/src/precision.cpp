#include "mpp/precision.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mpp/error.hpp"

namespace mpp {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::InvalidScheme, what);
}

void check_knots(const std::vector<Knot>& knots, std::size_t min_count) {
    require(knots.size() >= min_count,
            "need at least " + std::to_string(min_count) + " knots, got " + std::to_string(knots.size()));
    for (std::size_t i = 0; i < knots.size(); ++i) {
        require(std::isfinite(knots[i].h) && std::isfinite(knots[i].H), "knot values must be finite");
        require(knots[i].H > 0.0, "H values must be strictly positive");
        require(knots[i].h >= 0.0 && knots[i].h <= 1.0, "knot h must lie in [0,1]");
        if (i > 0) require(knots[i].h > knots[i - 1].h, "knot h values must be strictly increasing");
    }
}

double sign(double x) { return (x > 0.0) - (x < 0.0); }

// Three-point end derivative, limited so the end interval stays monotone.
double pchip_end_slope(double h0, double h1, double m0, double m1) {
    double d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if (sign(d) != sign(m0)) {
        d = 0.0;
    } else if (sign(m0) != sign(m1) && std::abs(d) > 3.0 * std::abs(m0)) {
        d = 3.0 * m0;
    }
    return d;
}

}  // namespace

const char* to_string(PrecisionScheme::Kind kind) {
    switch (kind) {
        case PrecisionScheme::Kind::Segmented: return "segmented";
        case PrecisionScheme::Kind::Linear: return "linear";
        case PrecisionScheme::Kind::NonLinear: return "nonlinear";
    }
    return "?";
}

PrecisionScheme::PrecisionScheme(Kind kind, std::vector<Knot> knots) : kind_(kind), knots_(std::move(knots)) {}

PrecisionScheme PrecisionScheme::segmented(std::vector<Knot> bands) {
    check_knots(bands, 1);
    require(bands.front().h == 0.0, "first segmented band must start at h = 0");
    require(bands.back().h < 1.0, "segmented band starts must lie in [0,1)");
    return PrecisionScheme(Kind::Segmented, std::move(bands));
}

PrecisionScheme PrecisionScheme::linear(Knot k0, Knot k1) {
    check_knots({k0, k1}, 2);
    return PrecisionScheme(Kind::Linear, {k0, k1});
}

PrecisionScheme PrecisionScheme::nonlinear(std::vector<Knot> knots) {
    check_knots(knots, 2);
    for (std::size_t i = 1; i < knots.size(); ++i) {
        require(knots[i].H >= knots[i - 1].H, "nonlinear knot H values must be non-decreasing");
    }

    PrecisionScheme s(Kind::NonLinear, std::move(knots));
    const auto& k = s.knots_;
    const std::size_t n = k.size();
    std::vector<double> width(n - 1), secant(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        width[i] = k[i + 1].h - k[i].h;
        secant[i] = (k[i + 1].H - k[i].H) / width[i];
    }

    s.slopes_.assign(n, 0.0);
    if (n == 2) {
        s.slopes_[0] = s.slopes_[1] = secant[0];
        return s;
    }
    // Interior: weighted harmonic mean of neighbouring secants (Fritsch-Butland),
    // zero at local extrema and flat spots.
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (secant[i - 1] * secant[i] <= 0.0) continue;
        const double w1 = 2.0 * width[i] + width[i - 1];
        const double w2 = width[i] + 2.0 * width[i - 1];
        s.slopes_[i] = (w1 + w2) / (w1 / secant[i - 1] + w2 / secant[i]);
    }
    s.slopes_[0] = pchip_end_slope(width[0], width[1], secant[0], secant[1]);
    s.slopes_[n - 1] = pchip_end_slope(width[n - 2], width[n - 3], secant[n - 2], secant[n - 3]);
    return s;
}

PrecisionScheme PrecisionScheme::default_segmented() {
    return segmented({{0.0, 1.0}, {1.0 / 3.0, 4.0}, {2.0 / 3.0, 16.0}});
}

PrecisionScheme PrecisionScheme::default_linear() { return linear({0.0, 1.0}, {1.0, 16.0}); }

PrecisionScheme PrecisionScheme::default_nonlinear() {
    return nonlinear({{0.0, 1.0}, {0.5, 2.0}, {1.0, 16.0}});
}

int PrecisionScheme::band_of(double h) const {
    if (kind_ != Kind::Segmented) throw Error(ErrorCode::WrongSchemeKind, "band lookup needs a segmented scheme");
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), h,
                                     [](double x, const Knot& k) { return x < k.h; });
    return std::max(0, static_cast<int>(it - knots_.begin()) - 1);
}

double PrecisionScheme::band_value(int band) const {
    return knots_.at(static_cast<std::size_t>(band)).H;
}

double PrecisionScheme::min_H() const {
    return std::min_element(knots_.begin(), knots_.end(), [](auto& a, auto& b) { return a.H < b.H; })->H;
}

double PrecisionScheme::max_H() const {
    return std::max_element(knots_.begin(), knots_.end(), [](auto& a, auto& b) { return a.H < b.H; })->H;
}

PrecisionValue PrecisionScheme::eval(double h) const {
    h = std::clamp(h, 0.0, 1.0);
    switch (kind_) {
        case Kind::Segmented: {
            const int band = band_of(h);
            return {band_value(band), band};
        }
        case Kind::Linear: {
            const Knot& a = knots_[0];
            const Knot& b = knots_[1];
            const double H = a.H + (b.H - a.H) * (h - a.h) / (b.h - a.h);
            return {std::clamp(H, std::min(a.H, b.H), std::max(a.H, b.H)), std::nullopt};
        }
        case Kind::NonLinear:
            return {eval_pchip(h), std::nullopt};
    }
    return {};
}

double PrecisionScheme::eval_pchip(double h) const {
    if (h <= knots_.front().h) return knots_.front().H;
    if (h >= knots_.back().h) return knots_.back().H;

    const auto it = std::upper_bound(knots_.begin(), knots_.end(), h,
                                     [](double x, const Knot& k) { return x < k.h; });
    const std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
    const Knot& a = knots_[i];
    const Knot& b = knots_[i + 1];
    const double w = b.h - a.h;
    const double t = (h - a.h) / w;
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double h10 = t3 - 2.0 * t2 + t;
    const double h01 = -2.0 * t3 + 3.0 * t2;
    const double h11 = t3 - t2;
    // h00 = 1 - h01; this form is exact on flat segments, and the clamp keeps
    // rounding from stepping outside the segment's range.
    const double v = a.H + h01 * (b.H - a.H) + w * (h10 * slopes_[i] + h11 * slopes_[i + 1]);
    return std::clamp(v, std::min(a.H, b.H), std::max(a.H, b.H));
}

int hysteresis_band(const PrecisionScheme& scheme, double h, int prev_band, double margin) {
    if (scheme.kind() != PrecisionScheme::Kind::Segmented) {
        throw Error(ErrorCode::WrongSchemeKind, "hysteresis applies to segmented schemes only");
    }
    h = std::clamp(h, 0.0, 1.0);
    int band = scheme.band_of(h);
    if (prev_band < 0 || prev_band >= scheme.band_count() || band == prev_band) return band;

    const auto knots = scheme.knots();
    if (band > prev_band) {
        // Step back toward prev until h clears the lower breakpoint by margin.
        while (band > prev_band && h < knots[static_cast<std::size_t>(band)].h + margin) --band;
    } else {
        while (band < prev_band && h > knots[static_cast<std::size_t>(band) + 1].h - margin) ++band;
    }
    return band;
}

}  // namespace mpp
