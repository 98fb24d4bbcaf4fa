#include "qpm/operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "qpm/error.hpp"

namespace qpm {

BlockRegion BlockFrame::region(const Site& n) const {
    if (!extended.contains(n)) return BlockRegion::Outside;
    if (n[0] == block.lo()[0]) return BlockRegion::Minus;
    if (n[0] == block.hi()[0] + 1) return BlockRegion::Plus;
    return BlockRegion::Core;
}

bool BlockFrame::in_doubled(const Site& n) const {
    return std::find(doubled.begin(), doubled.end(), n) != doubled.end();
}

FiniteOperator::FiniteOperator(LatticeBox box, double eps, Eigen::VectorXd diagonal,
                               Eigen::MatrixXd weights)
    : box_(box), eps_(eps), diagonal_(std::move(diagonal)), weights_(std::move(weights)) {
    const auto n = static_cast<Eigen::Index>(box_.size());
    if (diagonal_.size() != n || weights_.rows() != n || weights_.cols() != n) {
        throw Error(ErrorKind::RangeViolation, "operator data does not match its box");
    }
    if ((weights_ - weights_.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        throw Error(ErrorKind::NotSelfAdjoint, "hopping weights are not symmetric");
    }
}

Eigen::MatrixXd FiniteOperator::matrix() const {
    Eigen::MatrixXd h = eps_ * weights_;
    h.diagonal() += diagonal_;
    return h;
}

FiniteOperator FiniteOperator::translated(const Site& by) const {
    return {box_.shifted(by), eps_, diagonal_, weights_};
}

FiniteOperator FiniteOperator::restricted(const LatticeBox& sub) const {
    if (!box_.contains(sub)) throw Error(ErrorKind::RangeViolation, "restriction leaves the box");
    const auto sites = sub.sites();
    const auto n = static_cast<Eigen::Index>(sites.size());
    Eigen::VectorXd diag(n);
    Eigen::MatrixXd w(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto gi = static_cast<Eigen::Index>(box_.index(sites[static_cast<std::size_t>(i)]));
        diag(i) = diagonal_(gi);
        for (Eigen::Index j = 0; j < n; ++j) {
            w(i, j) = weights_(gi, static_cast<Eigen::Index>(box_.index(sites[static_cast<std::size_t>(j)])));
        }
    }
    return {sub, eps_, std::move(diag), std::move(w)};
}

Eigen::MatrixXd nearest_neighbor_weights(const LatticeBox& box) {
    const auto n = static_cast<Eigen::Index>(box.size());
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < box.size(); ++i) {
        const Site s = box.site(i);
        for (int axis = 0; axis < box.dim(); ++axis) {
            const Site t = s + Site::axis(axis);
            if (!box.contains(t)) continue;
            const auto j = static_cast<Eigen::Index>(box.index(t));
            w(static_cast<Eigen::Index>(i), j) = w(j, static_cast<Eigen::Index>(i)) = 1.0;
        }
    }
    return w;
}

FiniteOperator build_h(const SamplingFunction& f, const FrequencyVector& freq, double eps, double x,
                       const LatticeBox& box) {
    if (freq.dim() != box.dim()) throw Error(ErrorKind::RangeViolation, "frequency and box dimensions differ");
    Eigen::VectorXd diag(static_cast<Eigen::Index>(box.size()));
    for (std::size_t i = 0; i < box.size(); ++i) {
        const Site n = box.site(i);
        try {
            diag(static_cast<Eigen::Index>(i)) = f.eval(x + freq.dot(n));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::PoleProximity) throw;
            throw Error(ErrorKind::PoleProximity, "site " + to_string(n, box.dim()) + ": " + e.what());
        }
    }
    return {box, eps, std::move(diag), nearest_neighbor_weights(box)};
}

double largest_entry_bound(const SamplingFunction& f, const FrequencyVector& freq, double x,
                           const LatticeBox& box) {
    double first = 0.0, second = 0.0;
    for (const auto& n : box.sites()) {
        double v;
        try {
            v = std::abs(f.eval(x + freq.dot(n)));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::PoleProximity) throw;
            v = std::numeric_limits<double>::infinity();
        }
        if (v > first) {
            second = first;
            first = v;
        } else if (v > second) {
            second = v;
        }
    }
    return second;
}

double interpolation_parameter(double x, double x0, double omega1) {
    const double y = (x - x0) - std::floor(x - x0);
    if (y <= omega1) return y / omega1;
    return 1.0 - (y - omega1) / (1.0 - omega1);
}

double interpolation_slope(double x, double x0, double omega1) {
    const double y = (x - x0) - std::floor(x - x0);
    return y <= omega1 ? 1.0 / omega1 : -1.0 / (1.0 - omega1);
}

namespace {

// Weight of the bond p ~ q as an affine function a + b s of the interpolation parameter.
std::pair<double, double> bond_profile(const BlockFrame& frame, const Site& p, const Site& q) {
    const auto rp = frame.region(p), rq = frame.region(q);
    const bool minus = rp == BlockRegion::Minus || rq == BlockRegion::Minus;
    const bool plus = rp == BlockRegion::Plus || rq == BlockRegion::Plus;
    if (minus && plus) throw Error(ErrorKind::FrameMismatch, "bond joins R- and R+ directly");
    if (minus) return {0.0, 1.0};
    if (plus) return {1.0, -1.0};
    return {1.0, 0.0};
}

void check_frame(const BlockFrame& frame, const FrequencyVector& freq) {
    const auto& R = frame.block;
    if (frame.extended != LatticeBox(R.dim(), R.lo(), R.hi() + Site::axis(0))) {
        throw Error(ErrorKind::FrameMismatch, "R' is not R u (R + e1)");
    }
    if (R.extent(0) < 2) throw Error(ErrorKind::FrameMismatch, "block core R0 is empty");
    if (freq.dim() != R.dim() || std::abs(frame.omega1 - freq.omega.front()) > 1e-15) {
        throw Error(ErrorKind::FrameMismatch, "frame and frequency disagree");
    }
}

}  // namespace

FiniteOperator interpolated_block(const SamplingFunction& f, const FrequencyVector& freq, double eps,
                                  double x, const BlockFrame& frame) {
    check_frame(frame, freq);
    const double s = interpolation_parameter(x, frame.x0, frame.omega1);
    const auto& box = frame.extended;
    FiniteOperator base = build_h(f, freq, eps, x, box);
    Eigen::MatrixXd w = base.weights();
    for (std::size_t i = 0; i < box.size(); ++i) {
        const Site p = box.site(i);
        for (int axis = 0; axis < box.dim(); ++axis) {
            const Site q = p + Site::axis(axis);
            if (!box.contains(q)) continue;
            const auto [a, b] = bond_profile(frame, p, q);
            const auto j = static_cast<Eigen::Index>(box.index(q));
            w(static_cast<Eigen::Index>(i), j) = w(j, static_cast<Eigen::Index>(i)) = a + b * s;
        }
    }
    return {box, eps, base.diagonal(), std::move(w)};
}

Eigen::MatrixXd interpolated_block_derivative(const SamplingFunction& f, const FrequencyVector& freq,
                                              double eps, double x, const BlockFrame& frame) {
    check_frame(frame, freq);
    const double ds = interpolation_slope(x, frame.x0, frame.omega1);
    const auto& box = frame.extended;
    const auto n = static_cast<Eigen::Index>(box.size());
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < box.size(); ++i) {
        const Site p = box.site(i);
        const auto ii = static_cast<Eigen::Index>(i);
        d(ii, ii) = f.derivative(x + freq.dot(p));
        for (int axis = 0; axis < box.dim(); ++axis) {
            const Site q = p + Site::axis(axis);
            if (!box.contains(q)) continue;
            const double b = bond_profile(frame, p, q).second;
            const auto j = static_cast<Eigen::Index>(box.index(q));
            d(ii, j) = d(j, ii) = eps * b * ds;
        }
    }
    return d;
}

HoppingFamily::HoppingFamily(int dim, int range, std::vector<HoppingLevel> levels)
    : dim_(dim), range_(range), levels_(std::move(levels)) {
    for (std::size_t j = 0; j < levels_.size(); ++j) {
        const int reach = static_cast<int>(j + 1) * range_;
        for (const auto& term : levels_[j].terms) {
            if (l1_norm(term.offset) > reach) {
                throw Error(ErrorKind::RangeViolation, "level " + std::to_string(j + 1) + " reaches " +
                                                           to_string(term.offset, dim_));
            }
            if (l1_norm(term.offset) == 0) {
                throw Error(ErrorKind::RangeViolation, "hopping must vanish on the diagonal");
            }
            const Site mirror = -term.offset;
            const auto it = std::find_if(levels_[j].terms.begin(), levels_[j].terms.end(),
                                         [&](const HoppingTerm& t) { return t.offset == mirror; });
            if (it == levels_[j].terms.end()) {
                throw Error(ErrorKind::NotSelfAdjoint, "missing mirror of offset " + to_string(term.offset, dim_));
            }
            for (int k = 0; k < 64; ++k) {
                const double y = -0.5 + (k + 0.5) / 64.0;
                if (std::abs(term.profile(y) - it->profile(y)) > 1e-12) {
                    throw Error(ErrorKind::NotSelfAdjoint, "phi_m != phi_-m at offset " +
                                                               to_string(term.offset, dim_));
                }
            }
        }
    }
}

HoppingFamily HoppingFamily::laplacian(int dim) {
    HoppingLevel level;
    for (int axis = 0; axis < dim; ++axis) {
        level.terms.push_back({Site::axis(axis, 1), [](double) { return 1.0; }});
        level.terms.push_back({Site::axis(axis, -1), [](double) { return 1.0; }});
    }
    return HoppingFamily(dim, 1, {level});
}

Eigen::MatrixXd HoppingFamily::level_matrix(int j, const FrequencyVector& freq, double x,
                                            const LatticeBox& box) const {
    const auto n = static_cast<Eigen::Index>(box.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < box.size(); ++i) {
        const Site p = box.site(i);
        for (const auto& term : level(j).terms) {
            const Site q = p - term.offset;
            if (!box.contains(q)) continue;
            const Site sum = p + q;
            const double mid = 0.5 * freq.dot(sum);
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(box.index(q))) += term.profile(x + mid);
        }
    }
    return m;
}

Eigen::MatrixXd HoppingFamily::matrix(double eps, const FrequencyVector& freq, double x,
                                      const LatticeBox& box) const {
    const auto n = static_cast<Eigen::Index>(box.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    double scale = 1.0;
    for (int j = 1; j <= depth(); ++j) {
        scale *= eps;
        m += scale * level_matrix(j, freq, x, box);
    }
    return m;
}

double HoppingFamily::norm_eps(double eps) const {
    constexpr int kSamples = 1000;
    constexpr double h = 1e-6;
    double best = 0.0;
    for (const auto& level : levels_) {
        double row = 0.0;
        for (const auto& term : level.terms) {
            double sup = 0.0, sup_slope = 0.0;
            for (int k = 0; k < kSamples; ++k) {
                const double y = -0.5 + (k + 0.5) / kSamples;
                sup = std::max(sup, std::abs(term.profile(y)));
                sup_slope = std::max(sup_slope, std::abs(term.profile(y + h) - term.profile(y - h)) / (2 * h));
            }
            row += sup + eps * sup_slope;
        }
        best = std::max(best, row);
    }
    return best;
}

int CouplingGraph::min_length_at(const Site& n) const {
    int best = 0;
    for (const auto& e : edges) {
        if (e.a == n || e.b == n) best = best == 0 ? e.length : std::min(best, e.length);
    }
    return best;
}

CouplingGraph coupling_graph(const HoppingFamily& family, const FrequencyVector& freq, double x0,
                             const LatticeBox& box) {
    CouplingGraph graph;
    const auto n = box.size();
    std::vector<int> length(n * n, 0);
    for (int j = 1; j <= family.depth(); ++j) {
        const Eigen::MatrixXd m = family.level_matrix(j, freq, x0, box);
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = a + 1; b < n; ++b) {
                if (length[a * n + b] == 0 &&
                    m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) != 0.0) {
                    length[a * n + b] = j;
                }
            }
        }
    }
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            if (length[a * n + b] > 0) graph.edges.push_back({box.site(a), box.site(b), length[a * n + b]});
        }
    }
    return graph;
}

void write_triplets(std::ostream& os, const LatticeBox& box, const Eigen::MatrixXd& matrix,
                    double drop_below) {
    for (std::size_t i = 0; i < box.size(); ++i) {
        const Site s = box.site(i);
        os << "# site " << i;
        for (int a = 0; a < box.dim(); ++a) os << ' ' << s[a];
        os << '\n';
    }
    const auto prec = os.precision(17);
    for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
        for (Eigen::Index j = i; j < matrix.cols(); ++j) {
            const double v = matrix(i, j);
            if (v != 0.0 && std::abs(v) >= drop_below) os << i << ' ' << j << ' ' << v << '\n';
        }
    }
    os.precision(prec);
}

}  // namespace qpm
