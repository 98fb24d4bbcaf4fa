#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "qpm/lattice.hpp"
#include "qpm/operator.hpp"

namespace qpm {

// Coefficients of E(eps) = sum eps^j E_j and psi(eps) = sum eps^j psi_j for the
// branch of V + eps Phi that starts at the basis vector e_base. Vectors use
// intermediate normalisation: <psi_j, e_base> = 0 for j >= 1.
struct SeriesCoefficients {
    std::size_t base = 0;
    std::vector<double> energies;
    std::vector<Eigen::VectorXd> vectors;

    int order() const { return static_cast<int>(energies.size()) - 1; }
    double energy_sum(double eps) const;
    Eigen::VectorXd vector_sum(double eps) const;
};

SeriesCoefficients rs_series(const Eigen::VectorXd& diagonal, const Eigen::MatrixXd& coupling,
                             std::size_t base, int order);
SeriesCoefficients rs_series(const FiniteOperator& h, const Site& base, int order);

// min over m != n of |V_m - V_n| (all pairs when base is npos).
double diagonal_separation(const Eigen::VectorXd& diagonal, std::size_t base = static_cast<std::size_t>(-1));

struct ConvergenceReport {
    std::vector<double> radii;  // |E_{j+1}| / |E_j|, NaN where E_j vanishes
    double growth = 0.0;        // max_j |E_j|^(1/j)
    double bound_constant = 0.0;  // smallest C with |E_j| <= (C ||Phi|| / delta)^j
    bool divergent = false;     // eps * growth >= 1
};

ConvergenceReport convergence_report(const SeriesCoefficients& series, double delta, double phi_norm,
                                     double eps);

struct BranchReport {
    double energy = 0.0;
    double slope = 0.0;
    Eigen::VectorXd vector;
    Eigen::VectorXd vector_slope;
    double delta = 0.0;
    // Measured deviations from the unperturbed branch and their a-priori bounds.
    double energy_dev = 0.0, energy_bound = 0.0;
    double slope_dev = 0.0, slope_bound = 0.0;
    double vector_dev = 0.0, vector_bound = 0.0;
    double vector_slope_dev = 0.0, vector_slope_bound = 0.0;
    bool within_bounds() const;
};

using OperatorPath = std::function<FiniteOperator(double)>;

// Follows the eigenpair of path(x) attached to site n near x0. phi_norm and
// phi_slope_norm bound the hopping operator and its x-derivative.
BranchReport isolated_branch(const OperatorPath& path, const Site& n, double x0, double phi_norm,
                             double phi_slope_norm, double step = 1e-6);

using MatrixPath = std::function<Eigen::MatrixXd(double)>;

struct SlopeReading {
    double value = 0.0;
    double slope = 0.0;
    double gap = 0.0;
};

// lambda_k'(t0) = psi^T A'(t0) psi with A' by a central difference.
SlopeReading hellmann_feynman(const MatrixPath& path, double t0, std::size_t k, double step = 1e-6);

// Rank-one family A + f(t) e_k e_k^T: lambda' = f'(t) |psi_k|^2.
double rank_one_slope(double f_slope, const Eigen::VectorXd& psi, std::size_t k);

}  // namespace qpm
