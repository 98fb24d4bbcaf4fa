#include <cmath>
#include <random>

#include "doctest.h"
#include "qpm/error.hpp"
#include "qpm/linalg.hpp"
#include "qpm/perturbation.hpp"

using namespace qpm;

TEST_CASE("two-level series reproduces the closed-form eigenvalue") {
    const double gap = 1.0, eps = 0.05;
    Eigen::VectorXd v(2);
    v << 0.0, gap;
    Eigen::MatrixXd phi(2, 2);
    phi << 0, 1, 1, 0;
    const auto s = rs_series(v, phi, 0, 24);
    CHECK(s.energies[1] == 0.0);
    CHECK(s.energies[2] == doctest::Approx(-1.0 / gap));
    CHECK(s.energies[4] == doctest::Approx(1.0 / (gap * gap * gap)));
    const double exact = 0.5 * (gap - std::sqrt(gap * gap + 4 * eps * eps));
    CHECK(std::abs(s.energy_sum(eps) - exact) < 1e-15);
    for (int j = 1; j <= s.order(); ++j) CHECK(s.vectors[static_cast<std::size_t>(j)](0) == 0.0);
}

TEST_CASE("series error shrinks with the order on a random box") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int n = 7;
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = 1.3 * i + 0.4 * u(rng);
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i + 1 < n; ++i) phi(i, i + 1) = phi(i + 1, i) = 1.0 + 0.2 * u(rng);
    const double eps = 0.02;
    const Eigen::VectorXd exact = sym_eigenvalues(Eigen::MatrixXd(v.asDiagonal()) + eps * phi);
    const auto s = rs_series(v, phi, 3, 8);
    double prev = 1.0;
    for (int k = 2; k <= 8; k += 2) {
        SeriesCoefficients cut = s;
        cut.energies.resize(static_cast<std::size_t>(k + 1));
        const double err = std::abs(cut.energy_sum(eps) - exact(3));
        CHECK(err <= prev);
        prev = err;
    }
    CHECK(prev < 1e-14);
    // The summed vector is an eigenvector up to the same order.
    const Eigen::VectorXd psi = s.vector_sum(eps);
    const Eigen::VectorXd res = (Eigen::MatrixXd(v.asDiagonal()) + eps * phi) * psi - s.energy_sum(eps) * psi;
    CHECK(res.norm() < 1e-13);
}

TEST_CASE("degenerate diagonal is rejected") {
    Eigen::VectorXd v(3);
    v << 0.0, 1.0, 1e-12;
    Eigen::MatrixXd phi = Eigen::MatrixXd::Ones(3, 3);
    phi.diagonal().setZero();
    try {
        rs_series(v, phi, 0, 3);
        FAIL("degenerate diagonal accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegenerateDiagonal);
    }
}

TEST_CASE("convergence report flags a collapsing gap") {
    Eigen::MatrixXd phi(2, 2);
    phi << 0, 1, 1, 0;
    Eigen::VectorXd near(2), far(2);
    near << 0.0, 1e-4;
    far << 0.0, 1.0;
    const auto bad = convergence_report(rs_series(near, phi, 0, 10), 1e-4, 1.0, 1e-2);
    const auto good = convergence_report(rs_series(far, phi, 0, 10), 1.0, 1.0, 1e-2);
    CHECK(bad.divergent);
    CHECK_FALSE(good.divergent);
    CHECK(std::isnan(good.radii.front()));
    // Two-level coefficients grow like Catalan numbers, so C stays below 2.
    CHECK(good.bound_constant <= 2.0);
    CHECK(bad.growth > 1e3);
}

TEST_CASE("isolated branch stays within its bounds") {
    const double w = (std::sqrt(5.0) - 1.0) / 16.0;
    const auto f = SamplingFunction::maryland(3.0);
    const auto freq = verify_diophantine({w}, 100);
    const auto box = LatticeBox::interval(-4, 4);
    const OperatorPath path = [&](double x) { return build_h(f, freq, 1e-3, x, box); };
    const auto r = isolated_branch(path, Site{0}, 0.011, 2.0, 0.0);
    CHECK(r.within_bounds());
    CHECK(r.energy_dev < 1e-5);
    CHECK(r.slope == doctest::Approx(f.derivative(0.011)).epsilon(1e-4));
    CHECK(r.vector(4) > 0.99);
}

TEST_CASE("branch ambiguity when two diagonal entries nearly coincide") {
    Eigen::VectorXd v(3);
    v << 0.0, 1e-4, 3.0;
    const OperatorPath path = [&](double x) {
        Eigen::VectorXd d = v;
        d(0) += x;
        Eigen::MatrixXd w = Eigen::MatrixXd::Zero(3, 3);
        w(0, 1) = w(1, 0) = 1.0;
        return FiniteOperator(LatticeBox::interval(0, 2), 1e-2, d, w);
    };
    try {
        isolated_branch(path, Site{0}, 0.0, 1.0, 0.0);
        FAIL("ambiguous branch accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::BranchAmbiguity);
    }
}

TEST_CASE("Hellmann-Feynman slope matches the rank-one formula") {
    Eigen::MatrixXd base(3, 3);
    base << 0.0, 0.3, 0.0, 0.3, 1.0, 0.2, 0.0, 0.2, 2.5;
    auto f = [](double t) { return std::sinh(t); };
    const MatrixPath path = [&](double t) {
        Eigen::MatrixXd a = base;
        a(1, 1) += f(t);
        return a;
    };
    for (std::size_t k = 0; k < 3; ++k) {
        const auto r = hellmann_feynman(path, 0.4, k);
        const auto sys = sym_eig(path(0.4));
        const double expect = rank_one_slope(std::cosh(0.4), sys.vectors.col(static_cast<Eigen::Index>(k)), 1);
        CHECK(r.slope == doctest::Approx(expect).epsilon(1e-7));
        CHECK(r.slope >= 0.0);
    }
    const MatrixPath flat = [](double) { return Eigen::MatrixXd(Eigen::MatrixXd::Identity(2, 2)); };
    CHECK_THROWS_AS(hellmann_feynman(flat, 0.0, 0), Error);
}
