#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qpm/frame.hpp"
#include "qpm/lattice.hpp"
#include "qpm/sampling.hpp"

namespace qpm {

// Finite restriction V + eps * W of a lattice operator: W holds the
// unscaled off-diagonal weights (zero diagonal, symmetric).
class FiniteOperator {
public:
    FiniteOperator(LatticeBox box, double eps, Eigen::VectorXd diagonal, Eigen::MatrixXd weights);

    const LatticeBox& box() const { return box_; }
    double eps() const { return eps_; }
    std::size_t size() const { return box_.size(); }
    const Eigen::VectorXd& diagonal() const { return diagonal_; }
    const Eigen::MatrixXd& weights() const { return weights_; }
    Eigen::MatrixXd matrix() const;

    FiniteOperator translated(const Site& by) const;
    FiniteOperator restricted(const LatticeBox& sub) const;

private:
    LatticeBox box_;
    double eps_;
    Eigen::VectorXd diagonal_;
    Eigen::MatrixXd weights_;
};

// Unit weights on nearest-neighbour bonds inside the box.
Eigen::MatrixXd nearest_neighbor_weights(const LatticeBox& box);

FiniteOperator build_h(const SamplingFunction& f, const FrequencyVector& freq, double eps, double x,
                       const LatticeBox& box);

// Second-largest |f(x + omega.n)| over the box; a site inside the pole guard
// counts as the (single) unbounded entry.
double largest_entry_bound(const SamplingFunction& f, const FrequencyVector& freq, double x,
                           const LatticeBox& box);

// Position of x inside the interpolation window: s = (x - x0) / omega1 on
// [x0, x0 + omega1], then linearly back to 0 over the rest of the period.
double interpolation_parameter(double x, double x0, double omega1);
double interpolation_slope(double x, double x0, double omega1);

// H'(x) on the extended block: bonds between R- and R0 (and inside R-) carry
// weight s, bonds between R0 and R+ (and inside R+) carry 1 - s; the diagonal
// is f evaluated at the true phase.
FiniteOperator interpolated_block(const SamplingFunction& f, const FrequencyVector& freq, double eps,
                                  double x, const BlockFrame& frame);
Eigen::MatrixXd interpolated_block_derivative(const SamplingFunction& f, const FrequencyVector& freq,
                                              double eps, double x, const BlockFrame& frame);

using HoppingProfile = std::function<double(double)>;

struct HoppingTerm {
    Site offset;
    HoppingProfile profile;
};

// Level j of a multi-scale hopping: entries phi_{m-n}(x + omega.(m+n)/2).
struct HoppingLevel {
    std::vector<HoppingTerm> terms;
};

class HoppingFamily {
public:
    // Level j (1-based) may only reach offsets with |m|_1 <= j * range.
    HoppingFamily(int dim, int range, std::vector<HoppingLevel> levels);
    static HoppingFamily laplacian(int dim);

    int dim() const { return dim_; }
    int range() const { return range_; }
    int depth() const { return static_cast<int>(levels_.size()); }
    const HoppingLevel& level(int j) const { return levels_.at(static_cast<std::size_t>(j - 1)); }

    Eigen::MatrixXd level_matrix(int j, const FrequencyVector& freq, double x, const LatticeBox& box) const;
    Eigen::MatrixXd matrix(double eps, const FrequencyVector& freq, double x, const LatticeBox& box) const;

    // max over levels of sum over offsets of (sup|phi| + eps sup|phi'|), sampled on the period.
    double norm_eps(double eps) const;

private:
    int dim_;
    int range_;
    std::vector<HoppingLevel> levels_;
};

struct CouplingEdge {
    Site a, b;
    int length;
};

struct CouplingGraph {
    std::vector<CouplingEdge> edges;
    // Shortest length among edges touching the site; 0 if isolated.
    int min_length_at(const Site& n) const;
};

// Edge m ~ n with length j when j is the first level at which the two sites couple at x0.
CouplingGraph coupling_graph(const HoppingFamily& family, const FrequencyVector& freq, double x0,
                             const LatticeBox& box);

// Operator dump: header lines "# site <i> <coords>", then "i j value" triplets
// for the nonzero upper triangle.
void write_triplets(std::ostream& os, const LatticeBox& box, const Eigen::MatrixXd& matrix,
                    double drop_below = 0.0);

}  // namespace qpm
