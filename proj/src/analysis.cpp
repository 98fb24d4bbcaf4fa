#include "qpm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <thread>

#include <Eigen/Eigenvalues>

#include "qpm/error.hpp"
#include "qpm/operator.hpp"

namespace qpm {

std::vector<double> sample_phases(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> out(n);
    for (auto& x : out) x = unit(gen);
    return out;
}

namespace {

std::vector<double> box_spectrum(const SamplingFunction& f, const FrequencyVector& freq, double eps,
                                 std::size_t box_size, double x) {
    const LatticeBox box = LatticeBox::interval(0, static_cast<int>(box_size) - 1);
    for (int attempt = 0;; ++attempt) {
        try {
            const auto h = build_h(f, freq, eps, x, box);
            if (freq.dim() == 1) {
                const Eigen::VectorXd diag = h.matrix().diagonal();
                Eigen::VectorXd off = Eigen::VectorXd::Constant(diag.size() - 1, eps);
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
                solver.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
                return {solver.eigenvalues().begin(), solver.eigenvalues().end()};
            }
            const auto v = sym_eigenvalues(h.matrix());
            return {v.begin(), v.end()};
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::PoleProximity || attempt > 8) throw;
            x += 1e-9;
        }
    }
}

}  // namespace

IdsCurve compute_ids(const SamplingFunction& f, const FrequencyVector& freq, double eps, std::size_t box_size,
                     std::span<const double> phases, std::span<const double> energy_grid, unsigned threads) {
    if (freq.dim() != 1) throw Error(ErrorKind::ConfigInfeasible, "IDS boxes are one-dimensional");
    std::vector<std::vector<double>> spectra(phases.size());
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(phases.size())));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                for (std::size_t i = t; i < phases.size(); i += threads) {
                    spectra[i] = box_spectrum(f, freq, eps, box_size, phases[i]);
                }
            });
        }
    }
    IdsCurve ids;
    ids.box_size = box_size;
    ids.eps = eps;
    ids.samples = phases.size();
    for (const auto& s : spectra) ids.eigenvalues.insert(ids.eigenvalues.end(), s.begin(), s.end());
    std::sort(ids.eigenvalues.begin(), ids.eigenvalues.end());
    const double total = static_cast<double>(ids.eigenvalues.size());
    for (double e : energy_grid) {
        const auto below = std::upper_bound(ids.eigenvalues.begin(), ids.eigenvalues.end(), e) - ids.eigenvalues.begin();
        ids.energy.push_back(e);
        ids.value.push_back(total > 0 ? static_cast<double>(below) / total : 0.0);
    }
    return ids;
}

double ids_density(const IdsCurve& ids, double e, double bandwidth) {
    const auto& ev = ids.eigenvalues;
    const auto lo = std::lower_bound(ev.begin(), ev.end(), e - 8.0 * bandwidth);
    const auto hi = std::upper_bound(ev.begin(), ev.end(), e + 8.0 * bandwidth);
    double sum = 0.0;
    for (auto it = lo; it != hi; ++it) {
        const double z = (*it - e) / bandwidth;
        sum += std::exp(-0.5 * z * z);
    }
    const double norm = static_cast<double>(ev.size()) * bandwidth * std::sqrt(2.0 * std::numbers::pi);
    return ev.empty() ? 0.0 : sum / norm;
}

SpikeReading find_spike(const IdsCurve& ids, double e, double window, double mu) {
    constexpr double kWideBandwidth = 1e-2;
    SpikeReading r;
    r.eps = ids.eps;
    r.bandwidth = 0.5 * std::pow(ids.eps, mu);
    const auto& ev = ids.eigenvalues;
    const auto lo = std::lower_bound(ev.begin(), ev.end(), e - window);
    const auto hi = std::upper_bound(ev.begin(), ev.end(), e + window);
    if (lo == hi) throw Error(ErrorKind::PeakNotFound, "no eigenvalues near the energy");

    // Candidates are the eigenvalues themselves; the density is smooth between them.
    const std::size_t stride = std::max<std::size_t>(1, static_cast<std::size_t>(hi - lo) / 20000);
    double best = -1.0, at = e;
    for (auto it = lo; it < hi; it += static_cast<std::ptrdiff_t>(std::min<std::size_t>(stride, static_cast<std::size_t>(hi - it)))) {
        const double d = ids_density(ids, *it, r.bandwidth);
        if (d > best) {
            best = d;
            at = *it;
        }
    }
    for (int pass = 0; pass < 3; ++pass) {
        const double step = r.bandwidth * std::pow(0.1, pass) * 0.25;
        double centre = at;
        for (int k = -8; k <= 8; ++k) {
            const double d = ids_density(ids, centre + k * step, r.bandwidth);
            if (d > best) {
                best = d;
                at = centre + k * step;
            }
        }
    }
    r.location = at;
    r.height = best;
    r.background = ids_density(ids, at, kWideBandwidth);
    r.mass = static_cast<std::size_t>(std::upper_bound(ev.begin(), ev.end(), at + r.bandwidth) -
                                      std::lower_bound(ev.begin(), ev.end(), at - r.bandwidth));
    const std::size_t min_mass = std::max<std::size_t>(10, ev.size() / 1000);
    if (!(r.height >= 2.0 * r.background) || r.mass < min_mass) {
        throw Error(ErrorKind::PeakNotFound, "no peak above twice the background near E = " + std::to_string(e));
    }

    auto walk = [&](double dir) {
        const double step = r.bandwidth / 20.0;
        for (int k = 1; k <= 4000; ++k) {
            if (ids_density(ids, at + dir * k * step, r.bandwidth) < 0.5 * best) return (k - 0.5) * step;
        }
        return 4000.0 * step;
    };
    r.width = walk(-1.0) + walk(1.0);

    const auto near_lo = std::lower_bound(ev.begin(), ev.end(), at - 4.0 * r.bandwidth);
    const auto near_hi = std::upper_bound(ev.begin(), ev.end(), at + 4.0 * r.bandwidth);
    const auto count = near_hi - near_lo;
    const auto half = std::max<std::ptrdiff_t>(1, count / 2);
    r.half_mass_width = std::numeric_limits<double>::infinity();
    for (auto it = near_lo; it + half - 1 < near_hi; ++it) {
        r.half_mass_width = std::min(r.half_mass_width, *(it + half - 1) - *it);
    }
    return r;
}

SpikeFit spike_fit(std::span<const IdsCurve> curves, double e, double window_per_eps, double mu) {
    if (curves.size() < 3) throw Error(ErrorKind::ConfigInfeasible, "spike fit needs at least three eps values");
    SpikeFit fit;
    std::vector<double> eps, height, width, half_mass;
    for (const auto& c : curves) {
        fit.readings.push_back(find_spike(c, e, window_per_eps * c.eps, mu));
        eps.push_back(c.eps);
        height.push_back(fit.readings.back().height);
        width.push_back(fit.readings.back().width);
        half_mass.push_back(std::max(fit.readings.back().half_mass_width, 1e-300));
    }
    const auto [lo, hi] = std::minmax_element(eps.begin(), eps.end());
    if (*hi / *lo < 10.0 * (1.0 - 1e-9)) throw Error(ErrorKind::ConfigInfeasible, "eps values span less than a decade");
    fit.height = fit_power(eps, height);
    fit.width = fit_power(eps, width);
    fit.half_mass_width = fit_power(eps, half_mass);
    return fit;
}

DecayProfile decay_profile(const LatticeBox& box, const Eigen::VectorXd& psi, std::span<const Site> center,
                           double floor) {
    DecayProfile p;
    p.center.assign(center.begin(), center.end());
    std::vector<double> shell;
    for (std::size_t i = 0; i < box.size(); ++i) {
        const int d = distance_to_set(box.site(i), center);
        if (static_cast<std::size_t>(d) >= shell.size()) shell.resize(static_cast<std::size_t>(d) + 1, 0.0);
        shell[static_cast<std::size_t>(d)] = std::max(shell[static_cast<std::size_t>(d)], std::abs(psi(static_cast<Eigen::Index>(i))));
    }
    std::vector<double> dist, logs;
    for (std::size_t d = 0; d < shell.size(); ++d) {
        p.samples.emplace_back(static_cast<int>(d), shell[d]);
        if (shell[d] > floor) {
            dist.push_back(static_cast<double>(d));
            logs.push_back(std::log(shell[d]));
        }
    }
    if (dist.size() < 2) {
        p.rate = std::numeric_limits<double>::infinity();
        p.prefactor = shell.empty() ? 0.0 : shell.front();
        return p;
    }
    const auto line = fit_line(dist, logs);
    p.rate = -line.slope;
    p.prefactor = std::exp(line.intercept);
    p.residual = line.residual;
    return p;
}

double ipr(const Eigen::VectorXd& psi) { return psi.array().pow(4).sum(); }

std::vector<LocalizationRow> localization_survey(const LatticeBox& box, const EigenSystem& system,
                                                 const AnchorMap& anchor) {
    std::vector<LocalizationRow> rows;
    for (Eigen::Index k = 0; k < system.vectors.cols(); ++k) {
        const Eigen::VectorXd psi = system.vectors.col(k);
        Eigen::Index peak = 0;
        psi.cwiseAbs().maxCoeff(&peak);
        LocalizationRow r;
        r.index = static_cast<std::size_t>(k);
        r.value = system.values(k);
        r.ipr = ipr(psi);
        r.peak = box.site(static_cast<std::size_t>(peak));
        std::vector<Site> centre = anchor ? anchor(r.peak) : std::vector<Site>{};
        r.anchored = !centre.empty();
        if (centre.empty()) centre.push_back(r.peak);
        r.profile = decay_profile(box, psi, centre);
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace qpm
