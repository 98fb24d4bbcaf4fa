#include "qpm/blockdiag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "qpm/error.hpp"
#include "qpm/linalg.hpp"

namespace qpm {

namespace {

// Greedy maximal-overlap matching: perm[j] is the eigenvector index given to label j.
std::vector<Eigen::Index> match_columns(const Eigen::MatrixXd& overlap, double& weakest) {
    const auto n = overlap.rows();
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n), -1);
    std::vector<bool> row_used(static_cast<std::size_t>(n)), col_used(static_cast<std::size_t>(n));
    const Eigen::MatrixXd mag = overlap.cwiseAbs();
    weakest = 1.0;
    for (Eigen::Index round = 0; round < n; ++round) {
        double best = -1.0;
        Eigen::Index bi = 0, bj = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (row_used[static_cast<std::size_t>(i)]) continue;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (!col_used[static_cast<std::size_t>(j)] && mag(i, j) > best) {
                    best = mag(i, j);
                    bi = i;
                    bj = j;
                }
            }
        }
        row_used[static_cast<std::size_t>(bi)] = col_used[static_cast<std::size_t>(bj)] = true;
        perm[static_cast<std::size_t>(bi)] = bj;
        weakest = std::min(weakest, best);
    }
    return perm;
}

struct Step {
    Eigen::MatrixXd vectors;
    Eigen::VectorXd values;
    double weakest = 1.0;
};

Step relabel(const EigenSystem& sys, const Eigen::MatrixXd& previous) {
    Step s;
    const Eigen::MatrixXd overlap = previous.transpose() * sys.vectors;
    const auto perm = match_columns(overlap, s.weakest);
    const auto n = sys.values.size();
    s.vectors.resize(n, n);
    s.values.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::Index k = perm[static_cast<std::size_t>(j)];
        const double sign = overlap(j, k) < 0 ? -1.0 : 1.0;
        s.vectors.col(j) = sign * sys.vectors.col(k);
        s.values(j) = sys.values(k);
    }
    return s;
}

void check_gap(const EigenSystem& sys, double floor, double x, double t, double& smallest) {
    const double g = min_gap(sys.values);
    smallest = std::min(smallest, g);
    if (g < floor) {
        std::ostringstream msg;
        msg << "gap " << g << " at x = " << x << ", t = " << t;
        throw Error(ErrorKind::GapCollapse, msg.str());
    }
}

}  // namespace

LabeledFrame homotopy_frame(const HomotopyFamily& family, double x, const HomotopyOptions& options) {
    LabeledFrame frame;
    frame.min_gap = std::numeric_limits<double>::infinity();

    // Large t: the deformation dominates and every eigenvector sits on its own site.
    double t_max = options.t_max;
    EigenSystem sys;
    if (t_max > 0.0) {
        sys = sym_eig(family(x, t_max));
    } else {
        t_max = 1.0;
        for (int it = 0;; ++it) {
            sys = sym_eig(family(x, t_max));
            const auto n = sys.values.size();
            double weakest = 1.0;
            match_columns(Eigen::MatrixXd::Identity(n, n) * sys.vectors, weakest);
            if (weakest >= 0.9) break;
            if (it == 60) throw Error(ErrorKind::GapCollapse, "no diagonally dominant starting point");
            t_max *= 2.0;
        }
    }
    frame.t_max = t_max;
    const auto n = sys.values.size();
    check_gap(sys, options.gap_floor, x, t_max, frame.min_gap);
    Step current = relabel(sys, Eigen::MatrixXd::Identity(n, n));

    std::vector<double> schedule;
    const double ratio = std::pow(options.floor_ratio, 1.0 / (options.steps - 1));
    for (int k = 1; k < options.steps; ++k) schedule.push_back(t_max * std::pow(ratio, k));
    schedule.push_back(0.0);

    double t_prev = t_max;
    for (double t : schedule) {
        sys = sym_eig(family(x, t));
        check_gap(sys, options.gap_floor, x, t, frame.min_gap);
        Step next = relabel(sys, current.vectors);
        if (next.weakest < options.match_floor) {
            // One refinement: eight substeps between t_prev and t.
            ++frame.refinements;
            Step walk = current;
            for (int k = 1; k <= 8; ++k) {
                const double tk = t_prev + (t - t_prev) * k / 8.0;
                const EigenSystem sub = sym_eig(family(x, tk));
                check_gap(sub, options.gap_floor, x, tk, frame.min_gap);
                walk = relabel(sub, walk.vectors);
                if (walk.weakest < options.match_floor) {
                    std::ostringstream msg;
                    msg << "overlap " << walk.weakest << " between consecutive steps at x = " << x
                        << ", t = " << tk;
                    throw Error(ErrorKind::SignFlip, msg.str());
                }
                frame.min_match = std::min(frame.min_match, walk.weakest);
            }
            next = walk;
        } else {
            frame.min_match = std::min(frame.min_match, next.weakest);
        }
        current = std::move(next);
        t_prev = t;
    }
    frame.vectors = std::move(current.vectors);
    frame.values = std::move(current.values);
    return frame;
}

DiagonalizerPath diagonalize_homotopy(const HomotopyFamily& family, std::span<const double> x_grid,
                                      const HomotopyOptions& options) {
    DiagonalizerPath path;
    path.kappa = std::numeric_limits<double>::infinity();
    for (double x : x_grid) {
        path.x.push_back(x);
        path.frames.push_back(homotopy_frame(family, x, options));
        const auto& f = path.frames.back();
        path.kappa = std::min(path.kappa, f.min_gap);
        if (path.frames.size() > 1) {
            const auto& g = path.frames[path.frames.size() - 2];
            const Eigen::VectorXd overlaps = (g.vectors.transpose() * f.vectors).diagonal().cwiseAbs();
            path.min_adjacent_overlap = std::min(path.min_adjacent_overlap, overlaps.minCoeff());
        }
    }
    return path;
}

JacobiReport jacobi_separation(const Eigen::MatrixXd& j, double spread_limit, double offdiag_floor) {
    const auto n = j.rows();
    const double scale = std::max(1.0, j.cwiseAbs().maxCoeff());
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b < n; ++b) {
            if (std::abs(a - b) > 1 && std::abs(j(a, b)) > 1e-14 * scale) {
                throw Error(ErrorKind::HypothesisViolation,
                            "entry (" + std::to_string(a) + "," + std::to_string(b) + ") breaks the tridiagonal form");
            }
        }
        if (a + 1 < n && std::abs(j(a, a + 1)) < offdiag_floor) {
            throw Error(ErrorKind::HypothesisViolation,
                        "off-diagonal entry " + std::to_string(a) + " below the floor");
        }
    }
    JacobiReport r;
    if (n >= 3) {
        const Eigen::VectorXd interior = j.diagonal().segment(1, n - 2);
        const double lo = interior.minCoeff(), hi = interior.maxCoeff();
        r.spread = hi - lo;
        if (r.spread > spread_limit) {
            throw Error(ErrorKind::HypothesisViolation, "interior diagonal spread exceeds the interval length");
        }
        // The interval [lo, lo + spread_limit] may slide; pick the placement that
        // keeps the most endpoints inside.
        const double first = j(0, 0), last = j(n - 1, n - 1);
        const double window_lo = std::max(hi - spread_limit, std::min(lo, std::min(first, last)));
        const double window_hi = window_lo + spread_limit;
        const bool first_out = first < window_lo || first > window_hi;
        const bool last_out = last < window_lo || last > window_hi;
        if (first_out && last_out) {
            const bool opposite = (first < window_lo && last > window_hi) || (first > window_hi && last < window_lo);
            if (!opposite) {
                throw Error(ErrorKind::HypothesisViolation, "both endpoint entries leave on the same side");
            }
        }
        r.lower_end_relaxed = first_out;
        r.upper_end_relaxed = last_out;
    }
    r.min_gap = min_gap(sym_eigenvalues(j));
    return r;
}

namespace {

std::vector<std::size_t> cluster_of_sites(const LatticeBox& box, std::span<const Cluster> clusters) {
    std::vector<std::size_t> owner(box.size(), std::numeric_limits<std::size_t>::max());
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        for (const auto& s : clusters[c]) {
            if (!box.contains(s)) throw Error(ErrorKind::RangeViolation, "cluster site outside the box");
            auto& o = owner[box.index(s)];
            if (o != std::numeric_limits<std::size_t>::max()) {
                throw Error(ErrorKind::AssignmentAmbiguity, "clusters overlap at " + to_string(s, box.dim()));
            }
            o = c;
        }
    }
    for (std::size_t i = 0; i < owner.size(); ++i) {
        if (owner[i] == std::numeric_limits<std::size_t>::max()) {
            throw Error(ErrorKind::AssignmentAmbiguity, "site " + to_string(box.site(i), box.dim()) + " has no cluster");
        }
    }
    return owner;
}

FiniteOperator restrict_to(const FiniteOperator& h, const Cluster& c) {
    // Clusters need not be boxes: gather entries site by site.
    const auto n = static_cast<Eigen::Index>(c.size());
    Eigen::VectorXd diag(n);
    Eigen::MatrixXd w(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto gi = static_cast<Eigen::Index>(h.box().index(c[static_cast<std::size_t>(i)]));
        diag(i) = h.diagonal()(gi);
        for (Eigen::Index k = 0; k < n; ++k) {
            w(i, k) = h.weights()(gi, static_cast<Eigen::Index>(h.box().index(c[static_cast<std::size_t>(k)])));
        }
    }
    // The box below only sizes the operator; sites are addressed through the cluster.
    return {LatticeBox::interval(0, static_cast<int>(n) - 1), h.eps(), std::move(diag), std::move(w)};
}

}  // namespace

double cluster_separation(const FiniteOperator& h, std::span<const Cluster> clusters) {
    std::vector<Eigen::VectorXd> spectra;
    for (const auto& c : clusters) spectra.push_back(sym_eigenvalues(restrict_to(h, c).matrix()));
    double eta = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < spectra.size(); ++a) {
        for (std::size_t b = a + 1; b < spectra.size(); ++b) {
            for (Eigen::Index i = 0; i < spectra[a].size(); ++i) {
                eta = std::min(eta, (spectra[b].array() - spectra[a](i)).abs().minCoeff());
            }
        }
    }
    return eta;
}

ClusterDecayReport cluster_decay_check(const FiniteOperator& h, std::span<const Cluster> clusters) {
    const auto& box = h.box();
    const auto owner = cluster_of_sites(box, clusters);
    ClusterDecayReport r;
    r.eta = cluster_separation(h, clusters);
    const auto sys = sym_eig(h.matrix());
    r.values = sys.values;
    r.vectors = sys.vectors;
    const double eps = h.eps();
    for (Eigen::Index k = 0; k < sys.values.size(); ++k) {
        std::vector<double> mass(clusters.size(), 0.0);
        for (std::size_t i = 0; i < box.size(); ++i) {
            const double v = sys.vectors(static_cast<Eigen::Index>(i), k);
            mass[owner[i]] += v * v;
        }
        const auto best = static_cast<std::size_t>(std::max_element(mass.begin(), mass.end()) - mass.begin());
        if (mass[best] < 0.5) {
            throw Error(ErrorKind::AssignmentAmbiguity, "eigenvector " + std::to_string(k) + " has no dominant cluster");
        }
        r.assignment.push_back(best);
        for (std::size_t i = 0; i < box.size(); ++i) {
            const int dist = distance_to_set(box.site(i), clusters[best]);
            const double v = std::abs(sys.vectors(static_cast<Eigen::Index>(i), k));
            r.constant = std::max(r.constant, v * std::pow(r.eta / eps, dist));
            r.eps_constant = std::max(r.eps_constant, v * std::pow(eps, -dist));
        }
    }
    return r;
}

DropReport partial_2x2_drop(const FiniteOperator& h, std::span<const Cluster> clusters) {
    const auto owner = cluster_of_sites(h.box(), clusters);
    const double eta = cluster_separation(h, clusters);
    const double eps = h.eps();
    if (!(eps < eta)) throw Error(ErrorKind::HypothesisViolation, "coupling is not smaller than the cluster separation");
    Eigen::MatrixXd w = h.weights();
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        for (Eigen::Index j = 0; j < w.cols(); ++j) {
            if (owner[static_cast<std::size_t>(i)] != owner[static_cast<std::size_t>(j)]) w(i, j) = 0.0;
        }
    }
    if (h.weights().cwiseAbs().maxCoeff() > 1.0 + 1e-12) {
        throw Error(ErrorKind::HypothesisViolation, "hopping weights exceed one");
    }
    FiniteOperator dropped(h.box(), eps, h.diagonal(), std::move(w));
    const Eigen::VectorXd before = sym_eigenvalues(h.matrix());
    const Eigen::VectorXd after = sym_eigenvalues(dropped.matrix());
    const double shift = (before - after).cwiseAbs().maxCoeff();
    return {std::move(dropped), eta, shift, shift * eta / (eps * eps)};
}

ProjectionDerivative projection_derivative_bound(const std::function<FiniteOperator(double)>& family,
                                                 const Site& site, std::span<const Cluster> clusters,
                                                 std::size_t branch, double t0, double step) {
    const FiniteOperator h0 = family(t0);
    const auto& box = h0.box();
    const auto owner = cluster_of_sites(box, clusters);
    const double eta = cluster_separation(h0, clusters);
    const auto k = static_cast<Eigen::Index>(branch);

    auto projection = [&](const FiniteOperator& h, Eigen::VectorXd* values) {
        const auto sys = sym_eig(h.matrix());
        if (values) *values = sys.values;
        const Eigen::VectorXd v = sys.vectors.col(k);
        return Eigen::MatrixXd(v * v.transpose());
    };
    Eigen::VectorXd values;
    projection(h0, &values);
    double gap = std::numeric_limits<double>::infinity();
    if (k > 0) gap = std::min(gap, values(k) - values(k - 1));
    if (k + 1 < values.size()) gap = std::min(gap, values(k + 1) - values(k));
    if (gap < 1e-8) throw Error(ErrorKind::GapTooSmall, "isolated eigenvalue gap below 1e-8");

    const FiniteOperator hp = family(t0 + step), hm = family(t0 - step);
    ProjectionDerivative r;
    r.derivative = (projection(hp, nullptr) - projection(hm, nullptr)) / (2.0 * step);
    r.gap = gap;
    const auto ks = static_cast<Eigen::Index>(box.index(site));
    r.slope = (hp.diagonal()(ks) - hm.diagonal()(ks)) / (2.0 * step);

    const double eps = h0.eps();
    std::vector<int> reach(clusters.size());
    for (std::size_t c = 0; c < clusters.size(); ++c) reach[c] = distance_to_set(site, clusters[c]);
    for (std::size_t m = 0; m < box.size(); ++m) {
        for (std::size_t n = 0; n < box.size(); ++n) {
            const int dist = reach[owner[m]] + reach[owner[n]];
            const double scale = std::abs(r.slope) / gap * std::pow(eps / eta, dist);
            if (scale <= 0.0) continue;
            r.constant = std::max(r.constant, std::abs(r.derivative(static_cast<Eigen::Index>(m),
                                                                    static_cast<Eigen::Index>(n))) / scale);
        }
    }
    return r;
}

ReachCertificate ducp_reach(std::span<const Site> a, std::span<const Site> b, int dim) {
    std::set<Site> in_union(a.begin(), a.end());
    in_union.insert(b.begin(), b.end());
    ReachCertificate cert;
    for (const auto& s : b) cert.level[s] = 0;

    auto known_before = [&](const Site& s, int step) {
        if (!in_union.count(s)) return true;  // outside A u B the restricted eigenfunction vanishes
        auto it = cert.level.find(s);
        return it != cert.level.end() && it->second < step;
    };

    for (int step = 1;; ++step) {
        std::vector<Site> fresh;
        for (const auto& m : a) {
            if (cert.level.count(m)) continue;
            for (int axis = 0; axis < dim && std::find(fresh.begin(), fresh.end(), m) == fresh.end(); ++axis) {
                for (int sign : {-1, 1}) {
                    const Site n = m + Site::axis(axis, sign);
                    if (!in_union.count(n)) continue;
                    bool ok = known_before(n, step);
                    for (int ax2 = 0; ax2 < dim && ok; ++ax2) {
                        for (int s2 : {-1, 1}) {
                            const Site q = n + Site::axis(ax2, s2);
                            if (q != m && !known_before(q, step)) ok = false;
                        }
                    }
                    if (ok) {
                        fresh.push_back(m);
                        break;
                    }
                }
            }
        }
        if (fresh.empty()) break;
        for (const auto& m : fresh) cert.level[m] = step;
        cert.steps = step;
    }
    for (const auto& m : a) {
        if (!cert.level.count(m)) cert.unreached.push_back(m);
    }
    cert.certified = cert.unreached.empty();
    return cert;
}

ContinuationBound unique_continuation_lower_bound(const FiniteOperator& h, const Eigen::VectorXd& psi,
                                                  double energy, std::span<const Site> a,
                                                  std::span<const Site> b, const ReachCertificate& reach,
                                                  double potential_bound, bool eps_form) {
    if (!reach.certified) throw Error(ErrorKind::HypothesisViolation, "B does not satisfy DUCP for A");
    std::set<Site> sites(a.begin(), a.end());
    sites.insert(b.begin(), b.end());
    double norm2 = 0.0;
    for (const auto& s : sites) {
        if (!h.box().contains(s)) throw Error(ErrorKind::RangeViolation, "A u B leaves the operator box");
        const double v = psi(static_cast<Eigen::Index>(h.box().index(s)));
        norm2 += v * v;
    }
    if (std::sqrt(norm2) < 1.0 - 1e-12) throw Error(ErrorKind::NormTooSmall, "||psi|| < 1 on A u B");

    const int d = h.box().dim();
    const double count = static_cast<double>(sites.size());
    const double base = std::abs(energy) + potential_bound;
    const double n_steps = reach.steps;
    ContinuationBound r;
    if (eps_form) {
        const double eps = h.eps();
        r.bound = std::pow(eps / (std::pow(2.0, d) * eps + base), n_steps) / count;
    } else {
        r.bound = std::pow(std::pow(2.0, d) + base, -n_steps) / count;
    }
    for (const auto& s : b) {
        const double v = std::abs(psi(static_cast<Eigen::Index>(h.box().index(s))));
        if (v >= r.observed) {
            r.observed = v;
            r.witness = s;
        }
    }
    r.holds = r.observed >= r.bound;
    return r;
}

double second_largest_potential(const FiniteOperator& h, std::span<const Site> sites) {
    double first = 0.0, second = 0.0;
    for (const auto& s : sites) {
        const double v = std::abs(h.diagonal()(static_cast<Eigen::Index>(h.box().index(s))));
        if (v > first) {
            second = first;
            first = v;
        } else if (v > second) {
            second = v;
        }
    }
    return second;
}

}  // namespace qpm
