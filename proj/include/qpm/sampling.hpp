#pragma once

#include <cstddef>
#include <vector>

#include "qpm/lattice.hpp"

namespace qpm {

inline constexpr double kPoleGuard = 1e-12;

// Maps x into the fundamental period [-1/2, 1/2).
double reduce_phase(double x);

enum class PieceKind { Flat, Tangent, Linear, Power };

// One monotone piece on [lo, hi] of the fundamental period.
//   Flat:    offset
//   Tangent: offset + scale * tan(pi u)
//   Linear:  offset + scale * (u - center)
//   Power:   offset + scale * sign(u - center) * |u - center|^exponent
struct Piece {
    PieceKind kind = PieceKind::Flat;
    double lo = 0.0;
    double hi = 0.0;
    double scale = 0.0;
    double offset = 0.0;
    double center = 0.0;
    double exponent = 1.0;

    double value(double u) const;
    double slope(double u) const;
};

struct FlatInterval {
    double lo = 0.0;
    double length = 0.0;
    double value = 0.0;
    double hi() const { return lo + length; }
};

// Piecewise-smooth, non-decreasing, 1-periodic function with poles at +-1/2,
// optionally deformed by t * frac(x - 1/2).
class SamplingFunction {
public:
    explicit SamplingFunction(std::vector<Piece> pieces, double homotopy = 0.0);

    // scale * tan(pi x) + shift.
    static SamplingFunction maryland(double scale = 1.0, double shift = 0.0);

    // Flat pieces joined by linear ramps, with tangent branches of the given
    // scale towards the poles. Intervals must be sorted and carry increasing values.
    static SamplingFunction with_flat_pieces(std::vector<FlatInterval> intervals, double outer_scale);

    double eval(double x) const;
    double operator()(double x) const { return eval(x); }

    // Smallest (resp. largest) one-sided derivative at x; the two differ only at
    // joints between pieces.
    double derivative(double x) const;
    double derivative_max(double x) const;

    SamplingFunction with_homotopy(double t) const;
    double homotopy() const { return homotopy_; }

    const std::vector<Piece>& pieces() const { return pieces_; }
    std::vector<FlatInterval> flat_intervals() const;

    // Largest u in (-1/2, 1/2) with f(u) <= level (bisection on the reduced period).
    double preimage_sup_below(double level) const;
    // Smallest u in (-1/2, 1/2) with f(u) >= level.
    double preimage_inf_above(double level) const;

private:
    std::size_t piece_index(double u) const;
    double eval_reduced(double u) const;

    std::vector<Piece> pieces_;
    double homotopy_ = 0.0;
};

struct RegularityCertificate {
    bool regular = false;
    double phase = 0.0;        // reduced x0
    double value = 0.0;        // f(x0)
    double window_lo = 0.0;    // preimage of (f(x0) - 2, f(x0) + 2)
    double window_hi = 0.0;
    double d_min = 0.0;
    double d_max = 0.0;
    double inverse_slope_max = 0.0;  // sup |(1/(f - f(x0)))'| away from the unit window
    bool cr0 = false;
    bool cr1 = false;
    bool cr2 = false;
    double c_needed = 0.0;     // smallest constant for which (cr1), (cr2) hold
};

RegularityCertificate certify_regularity(const SamplingFunction& f, double x0, double c_reg,
                                         std::size_t grid = 10000);

struct FrequencyVector {
    std::vector<double> omega;
    double c_dio = 0.0;
    double tau_dio = 0.0;
    int scan_radius = 0;
    // (tau, largest certified constant) for every exponent that was scanned.
    std::vector<std::pair<double, double>> certificates;

    int dim() const { return static_cast<int>(omega.size()); }
    double dot(const Site& n) const;
};

// Scans 0 < |n|_inf <= scan_radius and certifies ||n.omega|| >= c |n|^-tau
// for tau in {d + 1.5, d + 2}.
FrequencyVector verify_diophantine(std::vector<double> omega, int scan_radius);

// Sites n of the box whose phase x + omega.n is not C_reg-regular. A phase
// inside the pole guard counts as regular.
std::vector<Site> singular_set(const SamplingFunction& f, const FrequencyVector& freq, double x,
                               const LatticeBox& box, double c_reg, std::size_t grid = 10000);

}  // namespace qpm
