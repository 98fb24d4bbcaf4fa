#include "qpm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qpm {

EigenSystem sym_eig(const Eigen::MatrixXd& a) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
    if (solver.info() != Eigen::Success) throw std::runtime_error("symmetric eigensolver failed");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

Eigen::VectorXd sym_eigenvalues(const Eigen::MatrixXd& a) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw std::runtime_error("symmetric eigensolver failed");
    return solver.eigenvalues();
}

double min_gap(const Eigen::VectorXd& v) {
    double g = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 1; i < v.size(); ++i) g = std::min(g, v(i) - v(i - 1));
    return g;
}

std::size_t sturm_count(std::span<const double> diag, std::span<const double> off, double e) {
    std::size_t count = 0;
    double d = 1.0;
    for (std::size_t i = 0; i < diag.size(); ++i) {
        const double b2 = i == 0 ? 0.0 : off[i - 1] * off[i - 1];
        d = (diag[i] - e) - (i == 0 ? 0.0 : b2 / d);
        if (d == 0.0) d = -std::numeric_limits<double>::min() * 1e6;
        if (d < 0.0) ++count;
    }
    return count;
}

namespace {

void bisect(std::span<const double> diag, std::span<const double> off, double lo, double hi,
            std::size_t count_lo, std::size_t count_hi, double tol, std::vector<double>& out) {
    if (count_hi == count_lo) return;
    const double width = hi - lo;
    if (width <= tol + 4 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi))) {
        out.insert(out.end(), count_hi - count_lo, 0.5 * (lo + hi));
        return;
    }
    const double mid = 0.5 * (lo + hi);
    const std::size_t count_mid = sturm_count(diag, off, mid);
    bisect(diag, off, lo, mid, count_lo, count_mid, tol, out);
    bisect(diag, off, mid, hi, count_mid, count_hi, tol, out);
}

}  // namespace

std::vector<double> tridiagonal_eigenvalues_in(std::span<const double> diag, std::span<const double> off,
                                               double lo, double hi, double abs_tol) {
    std::vector<double> out;
    if (!(hi > lo)) return out;
    bisect(diag, off, lo, hi, sturm_count(diag, off, lo), sturm_count(diag, off, hi), abs_tol, out);
    return out;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("line fit needs two or more points");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("line fit with coincident abscissae");
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    fit.points = x.size();
    return fit;
}

LineFit fit_power(std::span<const double> eps, std::span<const double> values) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        lx.push_back(std::log(eps[i]));
        ly.push_back(std::log(std::abs(values[i])));
    }
    return fit_line(lx, ly);
}

}  // namespace qpm
