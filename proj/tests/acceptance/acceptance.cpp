// Acceptance suite: one PASS/FAIL line per criterion, with measured values.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "qpm/analysis.hpp"
#include "qpm/blockdiag.hpp"
#include "qpm/error.hpp"
#include "qpm/examples.hpp"
#include "qpm/linalg.hpp"
#include "qpm/movingblock.hpp"
#include "qpm/operator.hpp"
#include "qpm/perturbation.hpp"

using namespace qpm;

namespace {

// Pinned tolerances.
constexpr double kSeriesRelTol = 1e-8;
constexpr double kHfRelTol = 1e-6;
constexpr double kHfMinGap = 1e-4;
constexpr double kOrthoTol = 1e-10;
constexpr double kEndpointTol = 1e-8;
constexpr double kRegularColumnC = 10.0;
constexpr double kJacobiVariation = 0.5;
constexpr double kCorrectionExponentFloor = 1.8;  // the 2x2 correction must be O(eps^2)
constexpr double kResidualExponent = 3.0;
constexpr double kFitSlack = 0.1;                 // three-point log-log fit noise
constexpr double kMuBand1 = 0.2;
constexpr double kMuBand2 = 0.5;
constexpr double kSpikeBand1 = 0.3;
constexpr double kCovarianceTol = 1e-8;
constexpr double kIprFloor = 0.9;
constexpr double kRateBand = 0.2;
constexpr double kSpectrumTol = 1e-8;
constexpr double kResolvable = 1e-11;             // double-precision floor for residual entries

const double kGoldenSmall = (3.0 - std::sqrt(5.0)) / 2.0;

struct Outcome {
    bool passed = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// ---------------------------------------------------------------- 1
Outcome series_oracle() {
    const auto f = SamplingFunction::maryland(1.0, 0.0);  // slope >= pi >= 1
    const auto freq = verify_diophantine({kGoldenSmall}, 500);
    const double eps = 1e-2;
    const auto box = LatticeBox::interval(-4, 4);
    double worst = 0.0;
    int runs = 0;
    for (int i = 0; i < 32; ++i) {
        const double x = -0.5 + (i + 0.5) / 32.0;
        const auto h = build_h(f, freq, eps, x, box);
        const auto series = rs_series(h, Site{0}, 6);
        const auto es = sym_eig(h.matrix());
        Eigen::Index branch = 0;
        es.vectors.row(static_cast<Eigen::Index>(box.index(Site{0}))).cwiseAbs().maxCoeff(&branch);
        const double exact = es.values(branch);
        worst = std::max(worst, std::abs(series.energy_sum(eps) - exact) / std::abs(exact));
        ++runs;
    }
    return {worst < kSeriesRelTol, std::to_string(runs) + " phases, max relative error " + fmt("%.2e", worst)};
}

// ---------------------------------------------------------------- 2
Outcome hellmann_feynman_check() {
    std::mt19937_64 gen(2);
    std::normal_distribution<double> normal;
    auto random_sym = [&] {
        Eigen::MatrixXd m(8, 8);
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j <= i; ++j) m(i, j) = m(j, i) = normal(gen);
        return m;
    };
    int families = 0, rejected = 0;
    double worst = 0.0;
    while (families < 100) {
        const Eigen::MatrixXd a = random_sym(), b = random_sym(), c = random_sym();
        const MatrixPath path = [=](double t) -> Eigen::MatrixXd { return a + std::sin(t) * b + t * t * c; };
        const double t0 = std::uniform_real_distribution<double>(-1.0, 1.0)(gen);
        const auto values = sym_eigenvalues(path(t0));
        if (min_gap(values) < kHfMinGap) {
            ++rejected;
            continue;
        }
        ++families;
        const double g = min_gap(values);
        const double step = std::min(1e-3, 5e-3 * g);
        for (std::size_t k = 0; k < 8; ++k) {
            const auto reading = hellmann_feynman(path, t0, k, 1e-6);
            auto lam = [&](double t) { return sym_eigenvalues(path(t))(static_cast<Eigen::Index>(k)); };
            // Fourth-order central difference of the sorted eigenvalue.
            const double fd = (8.0 * (lam(t0 + step) - lam(t0 - step)) - (lam(t0 + 2 * step) - lam(t0 - 2 * step))) /
                              (12.0 * step);
            worst = std::max(worst, std::abs(reading.slope - fd) / std::max(std::abs(fd), 1e-3));
        }
    }
    return {worst < kHfRelTol,
            "100 families (" + std::to_string(rejected) + " redrawn for gap), max relative deviation " + fmt("%.2e", worst)};
}

// ---------------------------------------------------------------- 3
Outcome unique_continuation_check() {
    std::mt19937_64 gen(3);
    const std::vector<Site> a{Site{0}, Site{1}, Site{2}, Site{3}, Site{4}};
    const std::vector<Site> b{Site{-2}, Site{-1}, Site{5}, Site{6}};
    const auto reach = ducp_reach(a, b, 1);
    if (!reach.certified) return {false, "segment geometry not certified"};
    int pairs = 0, violations = 0;
    double tightest = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 500; ++trial) {
        const double w = std::uniform_real_distribution<double>(0.5, 20.0)(gen);
        // Alternate between H on A u B and H on a larger box renormalized on A u B.
        const auto box = trial % 2 ? LatticeBox::interval(-2, 6) : LatticeBox::interval(-5, 9);
        Eigen::VectorXd v(static_cast<Eigen::Index>(box.size()));
        for (auto& x : v) x = std::uniform_real_distribution<double>(-w, w)(gen);
        const FiniteOperator h(box, 1.0, v, nearest_neighbor_weights(box));
        const auto es = sym_eig(h.matrix());
        for (Eigen::Index k = 0; k < es.values.size(); ++k) {
            Eigen::VectorXd psi = es.vectors.col(k);
            double norm2 = 0.0;
            for (const auto& s : a) norm2 += std::pow(psi(static_cast<Eigen::Index>(box.index(s))), 2);
            for (const auto& s : b) norm2 += std::pow(psi(static_cast<Eigen::Index>(box.index(s))), 2);
            if (norm2 < 1e-20) continue;
            psi /= std::sqrt(norm2);
            const auto r = unique_continuation_lower_bound(h, psi, es.values(k), a, b, reach, w, false);
            ++pairs;
            if (!r.holds) ++violations;
            tightest = std::min(tightest, r.observed / r.bound);
        }
    }
    return {violations == 0, std::to_string(pairs) + " eigenpairs, N = " + std::to_string(reach.steps) +
                                 ", violations " + std::to_string(violations) + ", min observed/bound " +
                                 fmt("%.3g", tightest)};
}

// ---------------------------------------------------------------- 4
Outcome frame_quality() {
    const auto config = example("example1");
    std::vector<double> constants;
    double ortho = 0.0, endpoint = 0.0;
    for (double eps : config.eps_values) {
        const auto blocks = config.moving_blocks(eps);
        const auto& mb = blocks.front();
        const auto& fr = mb.frame();
        const auto xs = window_grid(fr.x0, fr.omega1, 128);
        const auto path = diagonalize_homotopy(mb.family(), xs);
        double c = 0.0;
        for (const auto& lf : path.frames) {
            const auto n = lf.vectors.rows();
            ortho = std::max(ortho, (lf.vectors.transpose() * lf.vectors - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff());
            for (std::size_t j = 0; j < fr.extended.size(); ++j) {
                if (fr.in_doubled(fr.extended.site(j))) continue;
                Eigen::VectorXd dev = lf.vectors.col(static_cast<Eigen::Index>(j));
                dev(static_cast<Eigen::Index>(j)) -= 1.0;
                c = std::max(c, dev.cwiseAbs().maxCoeff() / eps);
            }
        }
        constants.push_back(c);
        // Frames at the two ends of the window agree after one translation.
        const auto left = mb.base_frame(fr.x0);
        const auto right = mb.base_frame(fr.x0 + fr.omega1);
        const auto m = left.vectors.rows() - 1;
        endpoint = std::max(endpoint, (left.vectors.block(1, 1, m, m) - right.vectors.block(0, 0, m, m)).cwiseAbs().maxCoeff());
    }
    const double fitted = *std::max_element(constants.begin(), constants.end());
    const bool ok = ortho < kOrthoTol && endpoint < kEndpointTol && fitted < kRegularColumnC;
    return {ok, "orthogonality " + fmt("%.1e", ortho) + ", endpoint identity " + fmt("%.1e", endpoint) +
                    ", regular-column C " + fmt("%.3f", fitted) + " (128-point grid, 3 eps)"};
}

// ---------------------------------------------------------------- 5
Outcome jacobi_separation_check() {
    const auto config = example("example1");
    std::vector<double> cs, shifts, eps_list;
    std::string detail;
    for (double eps : config.eps_values) {
        const auto blocks = config.moving_blocks(eps);
        const auto& mb = blocks.front();
        const auto& fr = mb.frame();
        double c = std::numeric_limits<double>::infinity(), shift = 0.0, eta = 0.0;
        for (double y : window_grid(fr.x0, fr.omega1, 64)) {
            const auto lf = mb.base_frame(y);
            std::vector<double> singular;
            for (std::size_t j = 0; j < fr.extended.size(); ++j) {
                if (fr.in_doubled(fr.extended.site(j))) singular.push_back(lf.values(static_cast<Eigen::Index>(j)));
            }
            std::sort(singular.begin(), singular.end());
            for (std::size_t k = 1; k < singular.size(); ++k) c = std::min(c, (singular[k] - singular[k - 1]) / eps);
            // Cutting the run loose from its neighbours moves its eigenvalues by the 2x2 correction.
            std::vector<Cluster> clusters{Cluster(fr.doubled.begin(), fr.doubled.end())};
            for (const auto& s : fr.extended.sites()) {
                if (!fr.in_doubled(s)) clusters.push_back(Cluster{s});
            }
            const auto drop = partial_2x2_drop(mb.block_operator(y), clusters);
            shift = std::max(shift, drop.max_shift);
            eta = std::max(eta, drop.eta);
        }
        cs.push_back(c);
        shifts.push_back(shift);
        eps_list.push_back(eps);
        detail += fmt(" c(%.0e)=", eps) + fmt("%.4f", c);
    }
    const auto [lo, hi] = std::minmax_element(cs.begin(), cs.end());
    const double variation = (*hi - *lo) / *lo;
    const auto corr = fit_power(eps_list, shifts);
    const double fitted_c = shifts.back() / (eps_list.back() * eps_list.back());
    const bool ok = *lo > 0.0 && variation < kJacobiVariation && corr.slope >= kCorrectionExponentFloor;
    return {ok, "min gap / eps:" + detail + ", variation " + fmt("%.3f", variation) + "; correction exponent " +
                    fmt("%.2f", corr.slope) + ", C eta^-1 = " + fmt("%.3g", fitted_c)};
}

// ---------------------------------------------------------------- 6
namespace mp = boost::multiprecision;
using Real = mp::number<mp::cpp_bin_float<50>, mp::et_off>;
using RealGrid = std::vector<std::vector<Real>>;

// Cyclic Jacobi eigenvectors in 50-digit arithmetic; entries down to eps^11 stay resolvable.
RealGrid jacobi_vectors(RealGrid a) {
    const std::size_t n = a.size();
    RealGrid v(n, std::vector<Real>(n, Real(0)));
    for (std::size_t i = 0; i < n; ++i) v[i][i] = 1;
    for (int sweep = 0; sweep < 100; ++sweep) {
        Real off = 0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < Real("1e-95")) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (a[p][q] == 0) continue;
                const Real theta = (a[q][q] - a[p][p]) / (2 * a[p][q]);
                const Real t = (theta >= 0 ? 1 : -1) / (mp::abs(theta) + mp::sqrt(theta * theta + 1));
                const Real c = 1 / mp::sqrt(t * t + 1), s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const Real x = a[k][p], y = a[k][q];
                    a[k][p] = c * x - s * y;
                    a[k][q] = s * x + c * y;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const Real x = a[p][k], y = a[q][k];
                    a[p][k] = c * x - s * y;
                    a[q][k] = s * x + c * y;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const Real x = v[k][p], y = v[k][q];
                    v[k][p] = c * x - s * y;
                    v[k][q] = s * x + c * y;
                }
            }
        }
    }
    return v;
}

// Displayed eps-powers of U_M: a regular column decays with the distance to
// its own site, a column of the run with the distance to the run.
int displayed_power(const BlockFrame& fr, std::size_t row, std::size_t col) {
    const Site r = fr.extended.site(row), c = fr.extended.site(col);
    if (fr.in_doubled(c)) return distance_to_set(r, fr.doubled);
    return l1_norm(r - c);
}

Outcome power_pattern() {
    const auto config = example("example1");
    std::vector<Eigen::MatrixXd> envelopes;
    BlockFrame frame;
    for (double eps : config.eps_values) {
        const auto blocks = config.moving_blocks(eps);
        const auto& mb = blocks.front();
        frame = mb.frame();
        const auto n = static_cast<std::size_t>(frame.extended.size());
        Eigen::MatrixXd env = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (double y : window_grid(frame.x0, frame.omega1, 16)) {
            const auto lf = mb.base_frame(y);
            const Eigen::MatrixXd h = mb.block_operator(y).matrix();
            RealGrid hr(n, std::vector<Real>(n));
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) hr[i][j] = Real(h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            const auto v = jacobi_vectors(hr);
            // Label each precise eigenvector by the homotopy column it matches.
            for (std::size_t j = 0; j < n; ++j) {
                std::size_t best = 0;
                double overlap = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    Real o = 0;
                    for (std::size_t i = 0; i < n; ++i) o += v[i][k] * Real(lf.vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
                    const double od = std::abs(o.convert_to<double>());
                    if (od > overlap) {
                        overlap = od;
                        best = k;
                    }
                }
                for (std::size_t i = 0; i < n; ++i) {
                    auto& e = env(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                    e = std::max(e, mp::abs(v[i][best]).convert_to<double>());
                }
            }
        }
        envelopes.push_back(env);
    }
    const auto n = envelopes.front().rows();
    int matched = 0, better = 0, bad = 0;
    std::string first_bad;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            std::vector<double> vals;
            for (const auto& e : envelopes) vals.push_back(e(i, j));
            const double fitted = fit_power(config.eps_values, vals).slope;
            const long diff = std::lround(fitted) - displayed_power(frame, static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            if (diff == 0) {
                ++matched;
            } else if (diff == 1) {
                ++better;
            } else {
                ++bad;
                if (first_bad.empty()) {
                    first_bad = " first mismatch at (" + std::to_string(i) + "," + std::to_string(j) + "): " + fmt("%.2f", fitted);
                }
            }
        }
    }
    return {bad == 0, std::to_string(matched) + " entries at the displayed power, " + std::to_string(better) +
                          " one order better, " + std::to_string(bad) + " off pattern" + first_bad};
}

// ---------------------------------------------------------------- 7
Outcome residual_coupling() {
    const auto config = example("example1");
    // Edge key: (position in the run's reference block, hop offset).
    std::map<std::pair<int, int>, std::vector<double>> edges;
    for (double eps : config.eps_values) {
        const auto blocks = config.moving_blocks(eps);
        const auto& fr = blocks.front().frame();
        std::map<std::pair<int, int>, double> worst;
        for (double x : window_grid(fr.x0, fr.omega1, 16)) {
            const auto conj = conjugate_and_extract(blocks, config.analysis_box, x);
            const auto frame = assemble_u2(blocks, config.analysis_box, x);
            const auto anchor = run_anchor(frame, blocks);
            for (std::size_t i = 0; i < conj.box.size(); ++i) {
                const Site m = conj.box.site(i);
                const auto run = anchor(m);
                if (run.empty()) continue;
                const auto& copy = frame.copies[static_cast<std::size_t>(frame.owner[i])];
                const int ref = copy.reference(m)[0];
                for (std::size_t j = 0; j < conj.box.size(); ++j) {
                    const Site n = conj.box.site(j);
                    if (std::find(run.begin(), run.end(), n) != run.end()) continue;
                    auto& w = worst[{ref, n[0] - m[0]}];
                    w = std::max(w, std::abs(conj.h2(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
                }
            }
        }
        for (const auto& [k, v] : worst) edges[k].push_back(v);
    }
    double min_exp = std::numeric_limits<double>::infinity();
    int fitted = 0;
    std::pair<int, int> worst_edge{};
    for (const auto& [k, vals] : edges) {
        if (vals.size() != config.eps_values.size()) continue;
        // Entries at round-off level on every eps carry no exponent.
        if (*std::max_element(vals.begin(), vals.end()) < kResolvable) continue;
        std::vector<double> eps, v;
        for (std::size_t e = 0; e < vals.size(); ++e) {
            if (vals[e] >= kResolvable) {
                eps.push_back(config.eps_values[e]);
                v.push_back(vals[e]);
            }
        }
        if (eps.size() < 2) continue;
        ++fitted;
        const double s = fit_power(eps, v).slope;
        if (s < min_exp) {
            min_exp = s;
            worst_edge = k;
        }
    }
    return {fitted > 0 && min_exp >= kResidualExponent - kFitSlack,
            std::to_string(fitted) + " resolvable residual edges, min fitted exponent " + fmt("%.3f", min_exp) +
                " (site " + std::to_string(worst_edge.first) + ", hop " + std::to_string(worst_edge.second) + ")"};
}

// ---------------------------------------------------------------- 8
MuFit mu_for(const std::string& name, std::size_t block, double band) {
    const auto config = example(name);
    const auto& spec = config.blocks[block];
    std::vector<SlopeSweep> sweeps;
    for (double eps : config.eps_values) {
        const auto blocks = config.moving_blocks(eps);
        const auto& fr = blocks[block].frame();
        sweeps.push_back(block_slope_sweep(blocks[block], window_grid(fr.x0, fr.omega1, 64), spec.mu_window));
    }
    return fit_mu(spec.label, sweeps, spec.predicted_mu, band);
}

Outcome derivative_floor() {
    const auto one = mu_for("example1", 0, kMuBand1);
    const auto five = mu_for("example5", 0, kMuBand2);
    return {one.within_band() && five.within_band() && one.predicted == 2.0 && five.predicted == 4.0,
            "example1 mu " + fmt("%.3f", one.mu) + " (2 +- 0.2), example5 mu " + fmt("%.3f", five.mu) + " (4 +- 0.5)"};
}

// ---------------------------------------------------------------- 9
Outcome ids_spike() {
    const auto config = example("example1");
    const auto phases = sample_phases(256, 20240501);
    const std::vector<double> energies{0.0};
    std::vector<IdsCurve> curves;
    for (double eps : config.eps_values) {
        curves.push_back(compute_ids(config.sampling(), config.frequency(), eps, 401, phases, energies));
    }
    const auto fit = spike_fit(curves, 0.0, 3.0, 2.0);
    const bool ok = std::abs(fit.height_exponent() + 2.0) <= kSpikeBand1 && std::abs(fit.width_exponent() - 2.0) <= kSpikeBand1;
    return {ok, "height exponent " + fmt("%.3f", fit.height_exponent()) + ", FWHM exponent " +
                    fmt("%.3f", fit.width_exponent()) + ", half-mass width exponent " +
                    fmt("%.3f", fit.half_mass_width.slope)};
}

// ---------------------------------------------------------------- 10
double u2_covariance(const ExampleConfig& config, const std::vector<MovingBlock>& blocks, double x, const Site& n,
                     double shift_by_one) {
    const auto freq = config.frequency();
    const auto a = assemble_u2(blocks, config.analysis_box, x);
    const auto b = assemble_u2(blocks, config.analysis_box, x + freq.dot(n) + shift_by_one);
    // Interior sites only: copies near the faces across e1 are left out of the assembly.
    int margin = 0;
    for (const auto& mb : blocks) {
        for (int i = 0; i < config.dim(); ++i) {
            margin = std::max(margin, mb.frame().extended.hi()[i] - mb.frame().extended.lo()[i] + 1);
        }
    }
    const LatticeBox inner = config.dim() == 1 ? config.analysis_box : config.analysis_box.grown(-margin);
    double worst = 0.0;
    for (const auto& p : inner.sites()) {
        if (!b.box.contains(p) || !a.box.contains(p + n)) continue;
        for (const auto& q : inner.sites()) {
            if (!b.box.contains(q) || !a.box.contains(q + n)) continue;
            const double lhs = b.u(static_cast<Eigen::Index>(b.box.index(p)), static_cast<Eigen::Index>(b.box.index(q)));
            const double rhs = a.u(static_cast<Eigen::Index>(a.box.index(p + n)), static_cast<Eigen::Index>(a.box.index(q + n)));
            worst = std::max(worst, std::abs(lhs - rhs));
        }
    }
    return worst;
}

Outcome covariance() {
    double block_err = 0.0, u2_err = 0.0;
    bool sets_equal = true;
    int set_checks = 0;
    for (const std::string name : {"example1", "example2-thin"}) {
        const auto config = example(name);
        const auto freq = config.frequency();
        const auto blocks = config.moving_blocks(1e-2);
        const auto& mb = blocks.front();
        const auto& fr = mb.frame();
        for (double y : window_grid(fr.x0, fr.omega1, 8)) {
            // One block: U0(y + omega1) is U0(y) moved by -e1.
            const auto p = mb.at(y), q = mb.at(y + fr.omega1);
            if (q.support != p.support.shifted(-Site::axis(0))) block_err = std::max(block_err, 1.0);
            block_err = std::max(block_err, (p.frame.vectors - q.frame.vectors).cwiseAbs().maxCoeff());
            // Assembled frame: U2(x + omega.n) = T^-n U2(x) T^n, and period 1.
            u2_err = std::max(u2_err, u2_covariance(config, blocks, y, Site::axis(0), 0.0));
            u2_err = std::max(u2_err, u2_covariance(config, blocks, y, Site{}, 1.0));
            if (config.dim() > 1) u2_err = std::max(u2_err, u2_covariance(config, blocks, y, Site::axis(1), 0.0));
        }
        // Singular set: S(x + omega.n) = S(x) - n.
        const LatticeBox box = config.analysis_box;
        for (double x : {0.013, 0.2718, -0.377}) {
            for (const Site& n : {Site::axis(0), Site::axis(0, 3), Site::axis(config.dim() - 1, -2)}) {
                const auto base = singular_set(config.sampling(), freq, x, box, config.c_reg, 2000);
                const auto moved = singular_set(config.sampling(), freq, x + freq.dot(n), box.shifted(-n), config.c_reg, 2000);
                std::set<Site> lhs(moved.begin(), moved.end()), rhs;
                for (const auto& s : base) rhs.insert(s - n);
                sets_equal = sets_equal && lhs == rhs;
                ++set_checks;
            }
        }
    }
    const bool ok = block_err < kCovarianceTol && u2_err < kCovarianceTol && sets_equal;
    return {ok, "moving block " + fmt("%.1e", block_err) + ", U2 " + fmt("%.1e", u2_err) + ", singular sets " +
                    (sets_equal ? "identical" : "differ") + " in " + std::to_string(set_checks) + " shifts (d = 1, 2)"};
}

// ---------------------------------------------------------------- 11
Outcome localization() {
    const auto config = example("example1");
    const double eps = 1e-2;
    const auto blocks = config.moving_blocks(eps);
    const double x = 0.013;
    const auto conj = conjugate_and_extract(blocks, config.analysis_box, x);
    const auto frame = assemble_u2(blocks, config.analysis_box, x);
    const auto es = sym_eig(conj.h);
    const auto rows = localization_survey(conj.box, es, run_anchor(frame, blocks));
    const double target = std::abs(std::log(eps));
    double min_ipr = 1.0, worst_rate = 0.0;
    int ipr_fail = 0, rate_fail = 0;
    for (const auto& r : rows) {
        min_ipr = std::min(min_ipr, r.ipr);
        if (r.ipr < kIprFloor) ++ipr_fail;
        if (std::isfinite(r.profile.rate)) {
            const double dev = std::abs(r.profile.rate / target - 1.0);
            worst_rate = std::max(worst_rate, dev);
            if (dev > kRateBand) ++rate_fail;
        }
    }
    // Supplementary: the same survey in the conjugated basis.
    const auto es2 = sym_eig(conj.h2);
    double min_ipr2 = 1.0;
    for (Eigen::Index k = 0; k < es2.vectors.cols(); ++k) min_ipr2 = std::min(min_ipr2, ipr(es2.vectors.col(k)));
    const bool ok = ipr_fail == 0 && rate_fail == 0 && conj.spectrum_error < kSpectrumTol;
    return {ok, std::to_string(rows.size()) + " eigenvectors: min IPR " + fmt("%.3f", min_ipr) + " (" +
                    std::to_string(ipr_fail) + " below 0.9), decay rate off by up to " + fmt("%.0f%%", 100 * worst_rate) +
                    " (" + std::to_string(rate_fail) + " outside 20%), spectra H/H2 " + fmt("%.1e", conj.spectrum_error) +
                    "; H2 eigenvectors min IPR " + fmt("%.3f", min_ipr2)};
}

struct Criterion {
    int id;
    const char* title;
    double limit_s;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    std::set<int> known_failures;
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        if (!std::strcmp(argv[i], "--known-failure") && i + 1 < argc) known_failures.insert(std::atoi(argv[++i]));
        else if (!std::strcmp(argv[i], "--only") && i + 1 < argc) only.insert(std::atoi(argv[++i]));
    }
    const std::vector<Criterion> criteria{
        {1, "series vs exact branch", 1.0, series_oracle},
        {2, "Hellmann-Feynman slopes", 5.0, hellmann_feynman_check},
        {3, "unique continuation bound", 10.0, unique_continuation_check},
        {4, "homotopy frame quality", 30.0, frame_quality},
        {5, "singular block separation", 30.0, jacobi_separation_check},
        {6, "eps-power pattern of U_M", 60.0, power_pattern},
        {7, "residual coupling cost", 120.0, residual_coupling},
        {8, "derivative floor exponents", 300.0, derivative_floor},
        {9, "IDS spike scaling", 600.0, ids_spike},
        {10, "covariance identities", 30.0, covariance},
        {11, "localization diagnostics", 60.0, localization},
    };
    int unexpected = 0, passed = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && !only.count(c.id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs < c.limit_s;
        const bool ok = o.passed && in_time;
        std::printf("%s  criterion %2d  %-28s %s [%.2f s, limit %.0f s]%s\n", ok ? "PASS" : "FAIL", c.id, c.title,
                    o.detail.c_str(), secs, c.limit_s, ok || !known_failures.count(c.id) ? "" : " (known failure)");
        std::fflush(stdout);
        if (ok) ++passed;
        else if (!known_failures.count(c.id)) ++unexpected;
    }
    std::printf("%d passed, %d failed, %d unexpected\n", passed,
                static_cast<int>(only.empty() ? criteria.size() : only.size()) - passed, unexpected);
    return unexpected == 0 ? 0 : 1;
}
