#include "qpm/perturbation.hpp"

#include <cmath>
#include <limits>

#include "qpm/error.hpp"
#include "qpm/linalg.hpp"

namespace qpm {

double SeriesCoefficients::energy_sum(double eps) const {
    double e = 0.0, p = 1.0;
    for (double c : energies) {
        e += p * c;
        p *= eps;
    }
    return e;
}

Eigen::VectorXd SeriesCoefficients::vector_sum(double eps) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(vectors.front().size());
    double p = 1.0;
    for (const auto& c : vectors) {
        v += p * c;
        p *= eps;
    }
    return v;
}

SeriesCoefficients rs_series(const Eigen::VectorXd& diagonal, const Eigen::MatrixXd& coupling,
                             std::size_t base, int order) {
    const auto n = diagonal.size();
    const auto b = static_cast<Eigen::Index>(base);
    if (b >= n) throw Error(ErrorKind::RangeViolation, "base site outside the box");
    const double e0 = diagonal(b);
    Eigen::VectorXd resolvent(n);
    for (Eigen::Index m = 0; m < n; ++m) {
        if (m == b) {
            resolvent(m) = 0.0;
            continue;
        }
        const double gap = diagonal(m) - e0;
        if (std::abs(gap) < 1e-10) {
            throw Error(ErrorKind::DegenerateDiagonal, "|V_m - V_n| < 1e-10 at index " + std::to_string(m));
        }
        resolvent(m) = 1.0 / gap;
    }

    SeriesCoefficients s;
    s.base = base;
    s.energies.push_back(e0);
    s.vectors.push_back(Eigen::VectorXd::Unit(n, b));
    for (int k = 1; k <= order; ++k) {
        const Eigen::VectorXd phi_prev = coupling * s.vectors[static_cast<std::size_t>(k - 1)];
        double ek = phi_prev(b);
        for (int j = 1; j < k; ++j) {
            ek -= s.energies[static_cast<std::size_t>(j)] * s.vectors[static_cast<std::size_t>(k - j)](b);
        }
        s.energies.push_back(ek);
        Eigen::VectorXd rhs = -phi_prev;
        for (int j = 1; j <= k; ++j) {
            rhs += s.energies[static_cast<std::size_t>(j)] * s.vectors[static_cast<std::size_t>(k - j)];
        }
        s.vectors.push_back(resolvent.cwiseProduct(rhs));
    }
    return s;
}

SeriesCoefficients rs_series(const FiniteOperator& h, const Site& base, int order) {
    if (!h.box().contains(base)) throw Error(ErrorKind::RangeViolation, "base site outside the box");
    return rs_series(h.diagonal(), h.weights(), h.box().index(base), order);
}

double diagonal_separation(const Eigen::VectorXd& v, std::size_t base) {
    double d = std::numeric_limits<double>::infinity();
    const auto n = v.size();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (base != static_cast<std::size_t>(-1) && i != static_cast<Eigen::Index>(base)) continue;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j != i) d = std::min(d, std::abs(v(i) - v(j)));
        }
    }
    return d;
}

ConvergenceReport convergence_report(const SeriesCoefficients& series, double delta, double phi_norm,
                                     double eps) {
    ConvergenceReport r;
    const auto& e = series.energies;
    for (std::size_t j = 1; j + 1 < e.size(); ++j) {
        r.radii.push_back(std::abs(e[j]) > 0.0 ? std::abs(e[j + 1]) / std::abs(e[j])
                                              : std::numeric_limits<double>::quiet_NaN());
    }
    for (std::size_t j = 1; j < e.size(); ++j) {
        r.growth = std::max(r.growth, std::pow(std::abs(e[j]), 1.0 / static_cast<double>(j)));
    }
    r.bound_constant = phi_norm > 0.0 ? r.growth * delta / phi_norm : 0.0;
    r.divergent = eps * r.growth >= 1.0;
    return r;
}

bool BranchReport::within_bounds() const {
    return energy_dev <= energy_bound && slope_dev <= slope_bound && vector_dev <= vector_bound &&
           vector_slope_dev <= vector_slope_bound;
}

namespace {

struct Pair {
    double value;
    Eigen::VectorXd vector;
};

Pair branch_at(const FiniteOperator& h, Eigen::Index b, double window) {
    const auto sys = sym_eig(h.matrix());
    Eigen::Index best = 0;
    int close = 0;
    for (Eigen::Index k = 0; k < sys.values.size(); ++k) {
        if (std::abs(sys.vectors(b, k)) > std::abs(sys.vectors(b, best))) best = k;
        if (std::abs(sys.values(k) - h.diagonal()(b)) <= window) ++close;
    }
    if (close > 1) {
        throw Error(ErrorKind::BranchAmbiguity, std::to_string(close) + " eigenvalues within 2 eps ||phi||");
    }
    Eigen::VectorXd v = sys.vectors.col(best);
    if (v(b) < 0) v = -v;
    return {sys.values(best), v};
}

}  // namespace

BranchReport isolated_branch(const OperatorPath& path, const Site& n, double x0, double phi_norm,
                             double phi_slope_norm, double step) {
    const FiniteOperator h0 = path(x0);
    if (!h0.box().contains(n)) throw Error(ErrorKind::RangeViolation, "branch site outside the box");
    const auto b = static_cast<Eigen::Index>(h0.box().index(n));
    const double eps = h0.eps();
    const double window = 2.0 * eps * phi_norm;

    const FiniteOperator hp = path(x0 + step), hm = path(x0 - step);
    const Pair p0 = branch_at(h0, b, window);
    const Pair pp = branch_at(hp, b, window);
    const Pair pm = branch_at(hm, b, window);

    BranchReport r;
    r.energy = p0.value;
    r.vector = p0.vector;
    const Eigen::MatrixXd dh = (hp.matrix() - hm.matrix()) / (2.0 * step);
    r.slope = p0.vector.dot(dh * p0.vector);
    r.vector_slope = (pp.vector - pm.vector) / (2.0 * step);

    const Eigen::VectorXd dv = (hp.diagonal() - hm.diagonal()) / (2.0 * step);
    const double f_slope = dv(b);
    const double f_slope_max = dv.cwiseAbs().maxCoeff();
    r.delta = diagonal_separation(h0.diagonal(), static_cast<std::size_t>(b));
    const double ratio = eps * phi_norm / r.delta;

    r.energy_dev = std::abs(r.energy - h0.diagonal()(b));
    r.energy_bound = eps * phi_norm / r.delta;
    r.slope_dev = std::abs(r.slope - f_slope);
    r.slope_bound = eps * phi_slope_norm / r.delta + f_slope_max * ratio * ratio;
    r.vector_dev = (r.vector - Eigen::VectorXd::Unit(r.vector.size(), b)).norm();
    r.vector_bound = ratio;
    r.vector_slope_dev = r.vector_slope.norm();
    r.vector_slope_bound = 2.0 * (eps * phi_slope_norm / r.delta + 2.0 * ratio * f_slope_max / r.delta);
    return r;
}

SlopeReading hellmann_feynman(const MatrixPath& path, double t0, std::size_t k, double step) {
    const Eigen::MatrixXd a = path(t0);
    const auto sys = sym_eig(a);
    const auto kk = static_cast<Eigen::Index>(k);
    if (kk >= sys.values.size()) throw Error(ErrorKind::RangeViolation, "branch index out of range");
    double gap = std::numeric_limits<double>::infinity();
    if (kk > 0) gap = std::min(gap, sys.values(kk) - sys.values(kk - 1));
    if (kk + 1 < sys.values.size()) gap = std::min(gap, sys.values(kk + 1) - sys.values(kk));
    if (gap < 1e-8) throw Error(ErrorKind::GapTooSmall, "eigenvalue gap below 1e-8");
    const double h = step * std::max(1.0, std::abs(t0));
    const Eigen::MatrixXd da = (path(t0 + h) - path(t0 - h)) / (2.0 * h);
    const Eigen::VectorXd psi = sys.vectors.col(kk);
    return {sys.values(kk), psi.dot(da * psi), gap};
}

double rank_one_slope(double f_slope, const Eigen::VectorXd& psi, std::size_t k) {
    const double a = psi(static_cast<Eigen::Index>(k));
    return f_slope * a * a;
}

}  // namespace qpm
