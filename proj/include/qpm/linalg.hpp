#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qpm {

struct EigenSystem {
    Eigen::VectorXd values;   // ascending
    Eigen::MatrixXd vectors;  // columns
};

EigenSystem sym_eig(const Eigen::MatrixXd& a);
Eigen::VectorXd sym_eigenvalues(const Eigen::MatrixXd& a);

// Smallest distance between consecutive sorted eigenvalues.
double min_gap(const Eigen::VectorXd& sorted_values);

// Number of eigenvalues < e of the symmetric tridiagonal matrix with the given
// diagonal and off-diagonal (Sturm sequence / LDL^T inertia).
std::size_t sturm_count(std::span<const double> diag, std::span<const double> off, double e);

// Eigenvalues inside [lo, hi) of a symmetric tridiagonal matrix by bisection.
std::vector<double> tridiagonal_eigenvalues_in(std::span<const double> diag, std::span<const double> off,
                                               double lo, double hi, double abs_tol = 1e-15);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  // root-mean-square residual
    std::size_t points = 0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

// Slope of log|value| against log(eps); the fitted eps-power.
LineFit fit_power(std::span<const double> eps, std::span<const double> values);

}  // namespace qpm
