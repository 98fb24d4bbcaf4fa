#include <cmath>
#include <numbers>

#include "doctest.h"
#include "qpm/error.hpp"
#include "qpm/sampling.hpp"

using namespace qpm;

namespace {

constexpr double kPi = std::numbers::pi;

SamplingFunction staircase(double w) {
    // One flat piece of length 4.3 w centred at 0, steep tangent branches outside.
    return SamplingFunction::with_flat_pieces({{-2.15 * w, 4.3 * w, 0.0}}, 30.0);
}

// Brute-force Diophantine constant, written independently of the library scan.
double brute_dio(double w, int radius, double tau) {
    double best = 1e300;
    for (int n = 1; n <= radius; ++n) {
        const double x = n * w;
        best = std::min(best, std::abs(x - std::round(x)) * std::pow(n, tau));
    }
    return best;
}

}  // namespace

TEST_CASE("reduce_phase lands in the fundamental period") {
    for (double x : {-3.7, -0.5, 0.0, 0.49, 0.5, 1.25, 17.9}) {
        const double y = reduce_phase(x);
        CHECK(y >= -0.5);
        CHECK(y < 0.5);
        CHECK(std::abs(std::remainder(x - y, 1.0)) < 1e-12);
    }
}

TEST_CASE("tangent sampling function and its homotopy") {
    const auto f = SamplingFunction::maryland();
    CHECK(f(0.25) == doctest::Approx(1.0));
    CHECK(f(1.25) == doctest::Approx(1.0));
    CHECK(f(-0.1) == doctest::Approx(std::tan(-0.1 * kPi)));
    const auto g = f.with_homotopy(1.0);
    CHECK(g(0.25) == doctest::Approx(1.75));
    CHECK(g.derivative(0.25) == doctest::Approx(kPi * 2.0 + 1.0));
    CHECK_THROWS_AS(f(0.5), Error);
    CHECK_THROWS_AS(f(0.5 + 5e-13), Error);
    CHECK_NOTHROW(f(0.5 + 5e-11));
    try {
        f(-0.5);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::PoleProximity);
    }
}

TEST_CASE("piece validation") {
    Piece left{PieceKind::Tangent, -0.5, 0.0, 1.0, 0.0, 0.0, 1.0};
    Piece right{PieceKind::Tangent, 0.0, 0.5, 1.0, 1.0, 0.0, 1.0};
    try {
        SamplingFunction({left, right});
        FAIL("jump accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Discontinuous);
    }
    Piece decreasing{PieceKind::Tangent, -0.5, 0.5, -1.0, 0.0, 0.0, 1.0};
    try {
        SamplingFunction({decreasing});
        FAIL("decreasing accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NonMonotone);
    }
}

TEST_CASE("flat pieces are continuous and the derivative takes the smaller side") {
    const double w = 0.0772542;
    const auto f = staircase(w);
    const double a = -2.15 * w, b = 2.15 * w;
    CHECK(f(0.0) == 0.0);
    CHECK(f(a) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(f(a - 1e-9) < 0.0);
    CHECK(f(b + 1e-9) > 0.0);
    CHECK(f.derivative(a) == 0.0);
    const double c = std::cos(kPi * a);
    CHECK(f.derivative_max(a) == doctest::Approx(30.0 * kPi / (c * c)));
    // Monotone on a fine grid.
    double prev = f(-0.49);
    for (int i = 1; i < 2000; ++i) {
        const double v = f(-0.49 + 0.98 * i / 2000.0);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("regularity constant of tan matches its closed form") {
    // Window preimage of (-2, 2) is |x| < atan(2)/pi; sup f'/inf f' = sec^2 = 5 there.
    // Off |tan| < 1 the inverse slope pi / sin^2 peaks at 2 pi, i.e. ratio 2 < 5.
    const auto f = SamplingFunction::maryland();
    const auto cert = certify_regularity(f, 0.0, 5.01);
    CHECK(cert.regular);
    CHECK(cert.c_needed == doctest::Approx(5.0).epsilon(1e-3));
    CHECK(cert.window_hi == doctest::Approx(std::atan(2.0) / kPi).epsilon(1e-9));
    CHECK(cert.inverse_slope_max == doctest::Approx(2.0 * kPi).epsilon(1e-3));
    CHECK_FALSE(certify_regularity(f, 0.0, 4.9).regular);
}

TEST_CASE("points on or near a flat piece are singular") {
    const double w = 0.0772542;
    const auto f = staircase(w);
    CHECK_FALSE(certify_regularity(f, 0.0, 100.0).regular);
    CHECK_FALSE(certify_regularity(f, 2.2 * w, 100.0).regular);
    CHECK(certify_regularity(f, 0.3, 100.0).regular);
}

TEST_CASE("singular set of the staircase at the window start is one run of five sites") {
    const double w = (std::sqrt(5.0) - 1.0) / 16.0;
    const auto f = staircase(w);
    const auto freq = verify_diophantine({w}, 200);
    const auto sing = singular_set(f, freq, 0.0, LatticeBox::interval(-6, 6), 30.0, 2000);
    REQUIRE(sing.size() == 5);
    for (int i = 0; i < 5; ++i) CHECK(sing[static_cast<std::size_t>(i)][0] == -2 + i);
}

TEST_CASE("Diophantine scan") {
    const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
    SUBCASE("agrees with a brute-force oracle") {
        const auto freq = verify_diophantine({golden / 2.0}, 500);
        CHECK(freq.tau_dio == 2.5);
        CHECK(freq.c_dio == doctest::Approx(brute_dio(golden / 2.0, 500, 2.5)));
        CHECK(freq.certificates[1].second == doctest::Approx(brute_dio(golden / 2.0, 500, 3.0)));
    }
    SUBCASE("constant is non-increasing in the scan radius") {
        const auto small = verify_diophantine({golden / 4.0}, 100);
        const auto large = verify_diophantine({golden / 4.0}, 1000);
        CHECK(large.c_dio <= small.c_dio);
    }
    SUBCASE("rational frequencies are rejected") {
        try {
            verify_diophantine({0.25}, 10);
            FAIL("rational accepted");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::NearRational);
        }
        try {
            verify_diophantine({0.1, 0.2}, 5);
            FAIL("resonant pair accepted");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::NearRational);
        }
    }
    SUBCASE("ordering is enforced") {
        CHECK_THROWS_AS(verify_diophantine({0.3, 0.2}, 5), Error);
        CHECK_THROWS_AS(verify_diophantine({0.6}, 5), Error);
    }
}
