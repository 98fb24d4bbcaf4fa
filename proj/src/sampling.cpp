#include "qpm/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "qpm/error.hpp"

namespace qpm {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kJointTol = 1e-14;

double sgn_pow(double v, double k) {
    return std::copysign(std::pow(std::abs(v), k), v);
}

}  // namespace

double reduce_phase(double x) {
    double y = x - std::floor(x + 0.5);
    if (y >= 0.5) y -= 1.0;
    return y;
}

double Piece::value(double u) const {
    switch (kind) {
    case PieceKind::Flat: return offset;
    case PieceKind::Tangent: return offset + scale * std::tan(kPi * u);
    case PieceKind::Linear: return offset + scale * (u - center);
    case PieceKind::Power: return offset + scale * sgn_pow(u - center, exponent);
    }
    return offset;
}

double Piece::slope(double u) const {
    switch (kind) {
    case PieceKind::Flat: return 0.0;
    case PieceKind::Tangent: {
        const double c = std::cos(kPi * u);
        return scale * kPi / (c * c);
    }
    case PieceKind::Linear: return scale;
    case PieceKind::Power:
        return scale * exponent * std::pow(std::abs(u - center), exponent - 1.0);
    }
    return 0.0;
}

SamplingFunction::SamplingFunction(std::vector<Piece> pieces, double homotopy)
    : pieces_(std::move(pieces)), homotopy_(homotopy) {
    if (pieces_.empty()) throw Error(ErrorKind::Discontinuous, "no pieces");
    if (pieces_.front().kind != PieceKind::Tangent || pieces_.back().kind != PieceKind::Tangent) {
        throw Error(ErrorKind::Discontinuous, "outermost pieces must be tangent branches reaching the poles");
    }
    if (std::abs(pieces_.front().lo + 0.5) > kJointTol || std::abs(pieces_.back().hi - 0.5) > kJointTol) {
        throw Error(ErrorKind::Discontinuous, "pieces must cover [-1/2, 1/2]");
    }
    if (homotopy_ < 0.0) throw Error(ErrorKind::NonMonotone, "negative homotopy parameter");
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        const auto& p = pieces_[i];
        if (!(p.hi > p.lo)) throw Error(ErrorKind::Discontinuous, "empty piece " + std::to_string(i));
        if (p.scale < 0.0 || (p.kind == PieceKind::Power && p.exponent < 1.0)) {
            throw Error(ErrorKind::NonMonotone, "piece " + std::to_string(i) + " is decreasing");
        }
        if (p.kind == PieceKind::Tangent && (p.lo < -0.5 || p.hi > 0.5)) {
            throw Error(ErrorKind::Discontinuous, "tangent piece crosses a pole");
        }
        if (i == 0) continue;
        const auto& q = pieces_[i - 1];
        if (std::abs(q.hi - p.lo) > kJointTol) {
            throw Error(ErrorKind::Discontinuous, "gap between pieces " + std::to_string(i - 1) +
                                                      " and " + std::to_string(i));
        }
        const double left = q.value(q.hi), right = p.value(p.lo);
        if (std::abs(left - right) > 1e-9 * std::max(1.0, std::abs(left))) {
            std::ostringstream msg;
            msg << "jump " << right - left << " at u = " << p.lo;
            throw Error(ErrorKind::Discontinuous, msg.str());
        }
    }
}

SamplingFunction SamplingFunction::maryland(double scale, double shift) {
    Piece p{PieceKind::Tangent, -0.5, 0.5, scale, shift, 0.0, 1.0};
    return SamplingFunction({p});
}

SamplingFunction SamplingFunction::with_flat_pieces(std::vector<FlatInterval> intervals,
                                                    double outer_scale) {
    if (intervals.empty()) return maryland(outer_scale);
    std::vector<Piece> pieces;
    const auto& first = intervals.front();
    const auto& last = intervals.back();
    pieces.push_back({PieceKind::Tangent, -0.5, first.lo, outer_scale,
                      first.value - outer_scale * std::tan(kPi * first.lo), 0.0, 1.0});
    for (std::size_t j = 0; j < intervals.size(); ++j) {
        const auto& I = intervals[j];
        pieces.push_back({PieceKind::Flat, I.lo, I.hi(), 0.0, I.value, 0.0, 1.0});
        if (j + 1 == intervals.size()) break;
        const auto& next = intervals[j + 1];
        const double run = next.lo - I.hi();
        if (!(run > 0.0)) throw Error(ErrorKind::Discontinuous, "flat intervals overlap");
        pieces.push_back({PieceKind::Linear, I.hi(), next.lo, (next.value - I.value) / run, I.value,
                          I.hi(), 1.0});
    }
    pieces.push_back({PieceKind::Tangent, last.hi(), 0.5, outer_scale,
                      last.value - outer_scale * std::tan(kPi * last.hi()), 0.0, 1.0});
    return SamplingFunction(std::move(pieces));
}

std::size_t SamplingFunction::piece_index(double u) const {
    auto it = std::lower_bound(pieces_.begin(), pieces_.end(), u,
                               [](const Piece& p, double v) { return p.hi < v; });
    if (it == pieces_.end()) --it;
    return static_cast<std::size_t>(it - pieces_.begin());
}

double SamplingFunction::eval_reduced(double u) const {
    return pieces_[piece_index(u)].value(u) + homotopy_ * (u + 0.5);
}

double SamplingFunction::eval(double x) const {
    const double u = reduce_phase(x);
    if (std::min(u + 0.5, 0.5 - u) < kPoleGuard) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "phase " << x << " within " << kPoleGuard << " of the pole";
        throw Error(ErrorKind::PoleProximity, msg.str());
    }
    return eval_reduced(u);
}

double SamplingFunction::derivative(double x) const {
    const double u = reduce_phase(x);
    const std::size_t i = piece_index(u);
    double d = pieces_[i].slope(u);
    if (i + 1 < pieces_.size() && std::abs(u - pieces_[i].hi) <= kJointTol) {
        d = std::min(d, pieces_[i + 1].slope(u));
    }
    if (i > 0 && std::abs(u - pieces_[i].lo) <= kJointTol) d = std::min(d, pieces_[i - 1].slope(u));
    return d + homotopy_;
}

double SamplingFunction::derivative_max(double x) const {
    const double u = reduce_phase(x);
    const std::size_t i = piece_index(u);
    double d = pieces_[i].slope(u);
    if (i + 1 < pieces_.size() && std::abs(u - pieces_[i].hi) <= kJointTol) {
        d = std::max(d, pieces_[i + 1].slope(u));
    }
    if (i > 0 && std::abs(u - pieces_[i].lo) <= kJointTol) d = std::max(d, pieces_[i - 1].slope(u));
    return d + homotopy_;
}

SamplingFunction SamplingFunction::with_homotopy(double t) const {
    return SamplingFunction(pieces_, t);
}

std::vector<FlatInterval> SamplingFunction::flat_intervals() const {
    std::vector<FlatInterval> out;
    for (const auto& p : pieces_) {
        if (p.kind == PieceKind::Flat) out.push_back({p.lo, p.hi - p.lo, p.offset});
    }
    return out;
}

double SamplingFunction::preimage_sup_below(double level) const {
    double lo = -0.5 + 2 * kPoleGuard, hi = 0.5 - 2 * kPoleGuard;
    if (eval_reduced(lo) > level) return lo;
    if (eval_reduced(hi) <= level) return hi;
    for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
        const double mid = 0.5 * (lo + hi);
        (eval_reduced(mid) <= level ? lo : hi) = mid;
    }
    return lo;
}

double SamplingFunction::preimage_inf_above(double level) const {
    double lo = -0.5 + 2 * kPoleGuard, hi = 0.5 - 2 * kPoleGuard;
    if (eval_reduced(lo) >= level) return lo;
    if (eval_reduced(hi) < level) return hi;
    for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
        const double mid = 0.5 * (lo + hi);
        (eval_reduced(mid) >= level ? hi : lo) = mid;
    }
    return hi;
}

RegularityCertificate certify_regularity(const SamplingFunction& f, double x0, double c_reg,
                                         std::size_t grid) {
    RegularityCertificate cert;
    cert.value = f.eval(x0);
    cert.phase = reduce_phase(x0);
    const double y0 = cert.value;

    // (cr0): the window around x0 maps onto (y0 - 2, y0 + 2) bijectively.
    cert.window_lo = f.preimage_sup_below(y0 - 2.0);
    cert.window_hi = f.preimage_inf_above(y0 + 2.0);
    const double a = cert.window_lo, b = cert.window_hi;

    std::vector<double> probes;
    probes.reserve(grid + 8);
    for (std::size_t i = 0; i < grid; ++i) {
        probes.push_back(a + (b - a) * (static_cast<double>(i) + 0.5) / static_cast<double>(grid));
    }
    probes.push_back(cert.phase);
    bool flat_inside = false;
    for (const auto& p : f.pieces()) {
        if (p.kind == PieceKind::Flat && p.hi > a && p.lo < b) flat_inside = true;
        if (p.lo > a && p.lo < b) probes.push_back(p.lo);
    }
    cert.d_min = flat_inside ? 0.0 : std::numeric_limits<double>::infinity();
    cert.d_max = 0.0;
    for (double u : probes) {
        cert.d_min = std::min(cert.d_min, f.derivative(u));
        cert.d_max = std::max(cert.d_max, f.derivative_max(u));
    }
    cert.cr0 = cert.d_min >= 1.0;

    // (cr2): 1/(f - y0) off the unit window has a controlled derivative.
    const double a1 = f.preimage_sup_below(y0 - 1.0);
    const double b1 = f.preimage_inf_above(y0 + 1.0);
    const double arc = 1.0 - (b1 - a1);
    cert.inverse_slope_max = 0.0;
    for (std::size_t i = 0; i < grid; ++i) {
        const double u = reduce_phase(b1 + arc * (static_cast<double>(i) + 0.5) / static_cast<double>(grid));
        if (0.5 - std::abs(u) < 1e-9) continue;
        const double gap = f.eval(u) - y0;
        cert.inverse_slope_max = std::max(cert.inverse_slope_max, f.derivative_max(u) / (gap * gap));
    }

    if (cert.d_min > 0.0) {
        cert.c_needed = std::max(cert.d_max, cert.inverse_slope_max) / cert.d_min;
    } else {
        cert.c_needed = std::numeric_limits<double>::infinity();
    }
    cert.cr1 = cert.d_min > 0.0 && cert.d_max <= c_reg * cert.d_min;
    cert.cr2 = cert.d_min > 0.0 && cert.inverse_slope_max <= c_reg * cert.d_min;
    cert.regular = cert.cr0 && cert.cr1 && cert.cr2;
    return cert;
}

double FrequencyVector::dot(const Site& n) const {
    double s = 0.0;
    for (int i = 0; i < dim(); ++i) s += omega[static_cast<std::size_t>(i)] * n[i];
    return s;
}

FrequencyVector verify_diophantine(std::vector<double> omega, int scan_radius) {
    const int d = static_cast<int>(omega.size());
    if (d < 1 || d > kMaxDim) throw Error(ErrorKind::InvalidFrequency, "dimension out of range");
    for (int i = 0; i < d; ++i) {
        const double w = omega[static_cast<std::size_t>(i)];
        if (!(w > 0.0 && w < 0.5) || (i > 0 && !(w > omega[static_cast<std::size_t>(i - 1)]))) {
            throw Error(ErrorKind::InvalidFrequency, "need 0 < omega_1 < ... < omega_d < 1/2");
        }
    }
    if (scan_radius < 1) throw Error(ErrorKind::InvalidFrequency, "scan radius must be positive");

    FrequencyVector freq;
    freq.omega = std::move(omega);
    freq.scan_radius = scan_radius;
    const std::vector<double> taus{d + 1.5, d + 2.0};
    std::vector<double> best(taus.size(), std::numeric_limits<double>::infinity());

    // Enumerate one representative of each pair {n, -n}: first nonzero coordinate positive.
    const int R = scan_radius;
    auto visit = [&](const Site& m) {
        const double dist = std::abs(reduce_phase(freq.dot(m)));
        if (dist < kPoleGuard) {
            throw Error(ErrorKind::NearRational, "||n.omega|| < 1e-12 at n = " + to_string(m, d));
        }
        const double norm = linf_norm(m);
        for (std::size_t k = 0; k < taus.size(); ++k) {
            best[k] = std::min(best[k], dist * std::pow(norm, taus[k]));
        }
    };
    if (d == 1) {
        for (int i = 1; i <= R; ++i) visit(Site{i});
    } else if (d == 2) {
        for (int i = 0; i <= R; ++i) {
            for (int j = -R; j <= R; ++j) {
                if (i == 0 && j <= 0) continue;
                visit(Site{i, j});
            }
        }
    } else {
        for (int i = 0; i <= R; ++i) {
            for (int j = -R; j <= R; ++j) {
                for (int k = -R; k <= R; ++k) {
                    if (i == 0 && (j < 0 || (j == 0 && k <= 0))) continue;
                    visit(Site{i, j, k});
                }
            }
        }
    }
    for (std::size_t k = 0; k < taus.size(); ++k) freq.certificates.emplace_back(taus[k], best[k]);
    freq.tau_dio = taus.front();
    freq.c_dio = best.front();
    return freq;
}

std::vector<Site> singular_set(const SamplingFunction& f, const FrequencyVector& freq, double x,
                               const LatticeBox& box, double c_reg, std::size_t grid) {
    std::vector<Site> out;
    for (const auto& n : box.sites()) {
        try {
            if (!certify_regularity(f, x + freq.dot(n), c_reg, grid).regular) out.push_back(n);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::PoleProximity) throw;
        }
    }
    return out;
}

}  // namespace qpm
