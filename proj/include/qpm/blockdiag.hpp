#pragma once

#include <functional>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qpm/lattice.hpp"
#include "qpm/operator.hpp"

namespace qpm {

// A(x, t): symmetric matrix whose diagonal is deformed by t * frac(. - 1/2).
using HomotopyFamily = std::function<Eigen::MatrixXd(double x, double t)>;

struct HomotopyOptions {
    int steps = 64;              // geometric t-steps before the final t = 0
    double floor_ratio = 1e-9;   // smallest nonzero t relative to t_max
    double t_max = 0.0;          // 0 selects t_max automatically
    double gap_floor = 1e-10;    // eigenvalues closer than this abort the continuation
    double match_floor = 0.5;    // smallest acceptable overlap between consecutive steps
};

// Eigenbasis whose column j is the eigenvector continued from e_j at large t.
struct LabeledFrame {
    Eigen::MatrixXd vectors;
    Eigen::VectorXd values;  // values(j) belongs to column j, not sorted
    double min_gap = 0.0;    // smallest spectral gap met along the t-path
    double min_match = 1.0;  // smallest overlap between consecutive t-steps
    double t_max = 0.0;
    int refinements = 0;
};

LabeledFrame homotopy_frame(const HomotopyFamily& family, double x, const HomotopyOptions& options = {});

struct DiagonalizerPath {
    std::vector<double> x;
    std::vector<LabeledFrame> frames;
    double kappa = 0.0;                 // min over the grid of the t-path gaps
    double min_adjacent_overlap = 1.0;  // min_j |<u_j(x_i), u_j(x_{i+1})>|
};

DiagonalizerPath diagonalize_homotopy(const HomotopyFamily& family, std::span<const double> x_grid,
                                      const HomotopyOptions& options = {});

struct JacobiReport {
    double min_gap = 0.0;
    double spread = 0.0;       // spread of the interior diagonal
    bool lower_end_relaxed = false;
    bool upper_end_relaxed = false;
};

// Separation of the spectrum of a Jacobi matrix with off-diagonal entries at
// least offdiag_floor and interior diagonal inside an interval of length
// spread_limit. One endpoint entry may leave the interval, or both if they
// leave on opposite sides.
JacobiReport jacobi_separation(const Eigen::MatrixXd& jacobi, double spread_limit, double offdiag_floor);

using Cluster = std::vector<Site>;

// min distance between the spectra of H restricted to two different clusters.
double cluster_separation(const FiniteOperator& h, std::span<const Cluster> clusters);

struct ClusterDecayReport {
    double eta = 0.0;
    std::vector<std::size_t> assignment;  // eigenvector k -> cluster index
    double constant = 0.0;       // max |psi(n)| (eta / eps)^dist(n, A)
    double eps_constant = 0.0;   // max |psi(n)| eps^-dist(n, A)
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
};

ClusterDecayReport cluster_decay_check(const FiniteOperator& h, std::span<const Cluster> clusters);

struct DropReport {
    FiniteOperator dropped;
    double eta = 0.0;
    double max_shift = 0.0;
    double constant = 0.0;  // max_shift * eta / eps^2
};

// Removes every bond between different clusters and measures the eigenvalue shift.
DropReport partial_2x2_drop(const FiniteOperator& h, std::span<const Cluster> clusters);

struct ProjectionDerivative {
    Eigen::MatrixXd derivative;  // dP/dt
    double gap = 0.0;
    double slope = 0.0;          // f'(t) of the rank-one entry
    double constant = 0.0;       // fitted C in |P'_mn| <= C |f'| gap^-1 (eps/eta)^(dist(A_m,k) + dist(k,A_n))
};

// P(t) is the spectral projection of eigenvalue number `branch` of a family
// that varies only in the diagonal entry at `site`.
ProjectionDerivative projection_derivative_bound(const std::function<FiniteOperator(double)>& family,
                                                 const Site& site, std::span<const Cluster> clusters,
                                                 std::size_t branch, double t0, double step = 1e-6);

struct ReachCertificate {
    bool certified = false;
    int steps = 0;
    std::map<Site, int> level;  // step at which each site of A u B is known (0 on B)
    std::vector<Site> unreached;
};

ReachCertificate ducp_reach(std::span<const Site> a, std::span<const Site> b, int dim);

struct ContinuationBound {
    double bound = 0.0;
    double observed = 0.0;
    Site witness;
    bool holds = false;
};

// Lower bound on max_B |psi| for an eigenfunction of H on A u B with norm >= 1
// there. potential_bound is W; eps_form uses the eps-scaled hopping version.
ContinuationBound unique_continuation_lower_bound(const FiniteOperator& h, const Eigen::VectorXd& psi,
                                                  double energy, std::span<const Site> a,
                                                  std::span<const Site> b, const ReachCertificate& reach,
                                                  double potential_bound, bool eps_form);

// Second largest |V| over the given sites: the bound W usable when one entry is huge.
double second_largest_potential(const FiniteOperator& h, std::span<const Site> sites);

}  // namespace qpm
