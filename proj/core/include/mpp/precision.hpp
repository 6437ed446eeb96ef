#pragma once

// h -> H precision functions. h is the normalized hand position along the
// precision axis; H is the precision parameter (larger H = finer motion).

#include <optional>
#include <span>
#include <vector>

namespace mpp {

struct Knot {
    double h = 0.0;
    double H = 1.0;
    friend bool operator==(const Knot&, const Knot&) = default;
};

struct PrecisionValue {
    double H = 1.0;
    std::optional<int> band_index;  ///< Segmented schemes only
};

class PrecisionScheme {
public:
    enum class Kind { Segmented, Linear, NonLinear };

    /// Each knot opens a band [knot.h, next.h) carrying knot.H; the first
    /// band must start at h = 0 and the last one is closed at h = 1.
    static PrecisionScheme segmented(std::vector<Knot> bands);
    static PrecisionScheme linear(Knot k0, Knot k1);
    /// Monotone piecewise-cubic (PCHIP) through the knots. Two knots
    /// degenerate to the straight line.
    static PrecisionScheme nonlinear(std::vector<Knot> knots);

    /// The shipped defaults: {1,4,16} over thirds, (0,1)->(1,16), and
    /// (0,1),(0.5,2),(1,16).
    static PrecisionScheme default_segmented();
    static PrecisionScheme default_linear();
    static PrecisionScheme default_nonlinear();

    Kind kind() const { return kind_; }
    std::span<const Knot> knots() const { return knots_; }

    /// Total on all of R: h is clamped into [0,1] first.
    PrecisionValue eval(double h) const;

    int band_count() const { return static_cast<int>(knots_.size()); }
    /// Plain band lookup (Segmented only).
    int band_of(double h) const;
    double band_value(int band) const;

    double min_H() const;
    double max_H() const;

    friend bool operator==(const PrecisionScheme& a, const PrecisionScheme& b) {
        return a.kind_ == b.kind_ && a.knots_ == b.knots_;
    }

private:
    PrecisionScheme(Kind kind, std::vector<Knot> knots);
    double eval_pchip(double h) const;

    Kind kind_;
    std::vector<Knot> knots_;
    std::vector<double> slopes_;  ///< PCHIP derivatives at the knots
};

/// Band selection with a dead zone of `margin` around every breakpoint:
/// the previous band is kept until h crosses into a neighbour by more than
/// margin. prev_band < 0 means "no history" and yields the plain lookup.
/// Throws Error(WrongSchemeKind) for non-segmented schemes.
int hysteresis_band(const PrecisionScheme& scheme, double h, int prev_band, double margin = 0.02);

const char* to_string(PrecisionScheme::Kind kind);

}  // namespace mpp
