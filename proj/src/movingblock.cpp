#include "qpm/movingblock.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "qpm/error.hpp"
#include "qpm/linalg.hpp"

namespace qpm {

namespace {

std::vector<Site> doubled_run(std::span<const Site> singular) {
    std::set<Site> out(singular.begin(), singular.end());
    for (const auto& s : singular) out.insert(s + Site::axis(0));
    return {out.begin(), out.end()};
}

std::vector<Site> shell(std::span<const Site> core, int dim, int from, int to) {
    const LatticeBox around = bounding_box(core, dim).grown(to);
    std::vector<Site> out;
    for (const auto& s : around.sites()) {
        const int d = distance_to_set(s, core);
        if (d >= from && d <= to) out.push_back(s);
    }
    return out;
}

double potential_max(const SamplingFunction& f, const FrequencyVector& freq, double x, std::span<const Site> sites) {
    double m = 0.0;
    for (const auto& s : sites) {
        try {
            m = std::max(m, std::abs(f.eval(x + freq.dot(s))));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::PoleProximity) throw;
            return std::numeric_limits<double>::infinity();
        }
    }
    return m;
}

}  // namespace

BlockFrame frame_geometry(std::span<const Site> singular, int margin, double x0, const FrequencyVector& freq,
                          std::optional<int> perp_margin) {
    if (singular.empty()) throw Error(ErrorKind::DegenerateFrame, "empty singular run");
    if (margin < 1 || perp_margin.value_or(margin) < 1) throw Error(ErrorKind::DegenerateFrame, "margin must be positive");
    const int dim = freq.dim();
    BlockFrame fr;
    fr.dim = dim;
    fr.singular.assign(singular.begin(), singular.end());
    std::sort(fr.singular.begin(), fr.singular.end());
    fr.doubled = doubled_run(fr.singular);
    fr.margin = margin;
    fr.x0 = x0;
    fr.omega1 = freq.omega.front();

    const LatticeBox bb = bounding_box(fr.doubled, dim);
    Site lo = bb.lo(), hi = bb.hi();
    for (int i = 0; i < dim; ++i) {
        const int m = (i == 0 ? margin : perp_margin.value_or(margin)) - 1;
        lo[i] -= m;
        hi[i] += m;
    }
    fr.core = LatticeBox(dim, lo, hi);
    fr.block = LatticeBox(dim, lo - Site::axis(0), hi);
    fr.extended = LatticeBox(dim, lo - Site::axis(0), hi + Site::axis(0));
    fr.inner_ring = shell(fr.doubled, dim, 1, 2);
    fr.outer_ring = shell(fr.doubled, dim, 3, 4);
    return fr;
}

std::vector<double> window_grid(double x0, double omega1, std::size_t n) {
    std::vector<double> xs;
    for (std::size_t i = 0; i < n; ++i) {
        xs.push_back(x0 + omega1 * (static_cast<double>(i) + 0.5) / static_cast<double>(n));
    }
    return xs;
}

BlockFrame build_frame(std::span<const Site> singular, int margin, double x0, const SamplingFunction& f,
                       const FrequencyVector& freq, double c_reg, std::size_t x_samples,
                       std::optional<int> perp_margin, std::size_t cert_grid) {
    BlockFrame fr = frame_geometry(singular, margin, x0, freq, perp_margin);
    auto xs = window_grid(x0, fr.omega1, x_samples);
    xs.push_back(x0);
    xs.push_back(x0 + fr.omega1);
    for (double x : xs) {
        for (const auto& n : fr.extended.sites()) {
            if (fr.in_doubled(n)) continue;
            bool regular = true;
            try {
                regular = certify_regularity(f, x + freq.dot(n), c_reg, cert_grid).regular;
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::PoleProximity) throw;
            }
            if (!regular) {
                std::ostringstream msg;
                msg.precision(12);
                msg << "site " << to_string(n, fr.dim) << " is singular at x = " << x;
                throw Error(ErrorKind::Gen2Violation, msg.str());
            }
        }
    }
    return fr;
}

std::vector<Site> singular_run(const SamplingFunction& f, const FrequencyVector& freq, double x0, double c_reg,
                               const LatticeBox& search, std::size_t x_samples, std::size_t cert_grid) {
    auto xs = window_grid(x0, freq.omega.front(), x_samples);
    xs.push_back(x0);
    xs.push_back(x0 + freq.omega.front());
    std::set<Site> run;
    for (double x : xs) {
        for (const auto& s : singular_set(f, freq, x, search, c_reg, cert_grid)) run.insert(s);
    }
    return {run.begin(), run.end()};
}

const std::vector<Site>& choose_ring(const BlockFrame& frame, const SamplingFunction& f,
                                     const FrequencyVector& freq, double x) {
    return potential_max(f, freq, x, frame.inner_ring) <= potential_max(f, freq, x, frame.outer_ring)
               ? frame.inner_ring
               : frame.outer_ring;
}

Site PlacedBlock::reference(const Site& p) const { return p + Site::axis(0, shift) - offset; }

MovingBlock::MovingBlock(BlockFrame frame, SamplingFunction f, FrequencyVector freq, double eps,
                         HomotopyOptions options)
    : frame_(std::move(frame)), f_(std::move(f)), freq_(std::move(freq)), eps_(eps), options_(options) {}

HomotopyFamily MovingBlock::family() const {
    return [this](double x, double t) {
        return interpolated_block(f_.with_homotopy(t), freq_, eps_, x, frame_).matrix();
    };
}

FiniteOperator MovingBlock::block_operator(double y) const {
    return interpolated_block(f_, freq_, eps_, y, frame_);
}

LabeledFrame MovingBlock::base_frame(double y) const { return homotopy_frame(family(), y, options_); }

PlacedBlock MovingBlock::at(double y) const {
    const double w = frame_.omega1;
    int k = static_cast<int>(std::floor((y - frame_.x0) / w));
    double base = y - k * w;
    if (base >= frame_.x0 + w) {
        ++k;
        base -= w;
    }
    PlacedBlock pb;
    pb.shift = k;
    pb.base = base;
    pb.support = frame_.extended.shifted(Site::axis(0, -k));
    pb.frame = base_frame(base);
    return pb;
}

double MovingBlock::label_slope(const LabeledFrame& frame, double y, std::size_t column) const {
    const Eigen::MatrixXd d = interpolated_block_derivative(f_, freq_, eps_, y, frame_);
    const Eigen::VectorXd psi = frame.vectors.col(static_cast<Eigen::Index>(column));
    return psi.dot(d * psi);
}

namespace {

std::vector<PlacedBlock> enumerate_copies(const MovingBlock& block, const LatticeBox& box, double x) {
    const auto& fr = block.frame();
    const auto& freq = block.frequency();
    const auto& ref = fr.extended;
    const int dim = box.dim();
    const double w = fr.omega1;

    // Perpendicular offsets whose translate of R' fits across the box. The orbit
    // of omega'.n' never closes, so the box is only ever grown along e1 and
    // copies cut by the perpendicular faces are left out.
    std::vector<Site> offsets{Site{}};
    for (int i = 1; i < dim; ++i) {
        std::vector<Site> next;
        for (const auto& o : offsets) {
            for (int v = box.lo()[i] - ref.lo()[i]; v <= box.hi()[i] - ref.hi()[i]; ++v) {
                Site s = o;
                s[i] = v;
                next.push_back(s);
            }
        }
        offsets = std::move(next);
    }

    std::vector<PlacedBlock> out;
    for (const auto& off : offsets) {
        const double xp = x + freq.dot(off);
        for (int k = ref.lo()[0] - box.hi()[0]; k <= ref.hi()[0] - box.lo()[0]; ++k) {
            const double u = xp - k * w - fr.x0;
            const double r = u - std::floor(u);
            if (!(r < w)) continue;
            PlacedBlock pb;
            pb.shift = k;
            pb.offset = off;
            pb.base = fr.x0 + r;
            pb.support = ref.shifted(off - Site::axis(0, k));
            if (!pb.support.intersects(box)) continue;
            out.push_back(std::move(pb));
        }
    }
    return out;
}

LatticeBox hull(const LatticeBox& a, const LatticeBox& b) {
    Site lo = a.lo(), hi = a.hi();
    for (int i = 0; i < a.dim(); ++i) {
        lo[i] = std::min(lo[i], b.lo()[i]);
        hi[i] = std::max(hi[i], b.hi()[i]);
    }
    return {a.dim(), lo, hi};
}

}  // namespace

AssembledFrame assemble_u2(std::span<const MovingBlock> blocks, const LatticeBox& analysis_box, double x,
                           bool extend) {
    if (blocks.empty()) throw Error(ErrorKind::DegenerateFrame, "no blocks to assemble");
    LatticeBox box = analysis_box;
    std::vector<PlacedBlock> copies;
    std::vector<std::size_t> source;
    for (int round = 0;; ++round) {
        copies.clear();
        source.clear();
        LatticeBox grown = box;
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            for (auto& pb : enumerate_copies(blocks[b], box, x)) {
                // Off the central slice a copy cut by the box is dropped instead of
                // growing the box; the orbit would never let the box settle.
                if (pb.offset != Site{} && !box.contains(pb.support)) continue;
                grown = hull(grown, pb.support);
                copies.push_back(std::move(pb));
                source.push_back(b);
            }
        }
        if (grown == box) break;
        if (!extend) {
            throw Error(ErrorKind::BoxTooSmall, "a copy of U_0 sticks out of the analysis box");
        }
        if (round == 16) throw Error(ErrorKind::BoxTooSmall, "analysis box does not settle on whole copies");
        box = grown;
    }

    for (std::size_t a = 0; a < copies.size(); ++a) {
        for (std::size_t b = a + 1; b < copies.size(); ++b) {
            if (copies[a].support.intersects(copies[b].support)) {
                std::ostringstream msg;
                msg.precision(12);
                msg << "copies at shifts " << copies[a].shift << " and " << copies[b].shift << " overlap at x = " << x;
                throw Error(ErrorKind::Gen4Violation, msg.str());
            }
        }
    }

    AssembledFrame out;
    out.box = box;
    const auto n = static_cast<Eigen::Index>(box.size());
    out.u = Eigen::MatrixXd::Identity(n, n);
    out.owner.assign(box.size(), -1);
    for (std::size_t c = 0; c < copies.size(); ++c) {
        auto& pb = copies[c];
        pb.frame = blocks[source[c]].base_frame(pb.base);
        const auto& ref = blocks[source[c]].frame().extended;
        const auto sites = pb.support.sites();
        for (const auto& p : sites) {
            const auto ip = static_cast<Eigen::Index>(box.index(p));
            const auto rp = static_cast<Eigen::Index>(ref.index(pb.reference(p)));
            out.owner[static_cast<std::size_t>(ip)] = static_cast<int>(c);
            for (const auto& q : sites) {
                out.u(ip, static_cast<Eigen::Index>(box.index(q))) =
                    pb.frame.vectors(rp, static_cast<Eigen::Index>(ref.index(pb.reference(q))));
            }
        }
    }
    out.copies = std::move(copies);
    out.sources = std::move(source);
    return out;
}

std::vector<Site> placed_run(const PlacedBlock& copy, const BlockFrame& frame) {
    std::vector<Site> out;
    for (const auto& d : frame.doubled) out.push_back(d - Site::axis(0, copy.shift) + copy.offset);
    return out;
}

std::function<std::vector<Site>(const Site&)> run_anchor(const AssembledFrame& assembled,
                                                         std::span<const MovingBlock> blocks) {
    std::vector<std::vector<Site>> runs;
    for (std::size_t c = 0; c < assembled.copies.size(); ++c) {
        runs.push_back(placed_run(assembled.copies[c], blocks[assembled.sources[c]].frame()));
    }
    return [runs = std::move(runs), owner = assembled.owner, box = assembled.box](const Site& p) -> std::vector<Site> {
        if (!box.contains(p)) return {};
        const int c = owner[box.index(p)];
        if (c < 0) return {};
        const auto& run = runs[static_cast<std::size_t>(c)];
        if (std::find(run.begin(), run.end(), p) == run.end()) return {};
        return run;
    };
}

ConjugatedOperator conjugate_and_extract(std::span<const MovingBlock> blocks, const LatticeBox& analysis_box,
                                         double x) {
    const auto& lead = blocks.front();
    for (const auto& b : blocks) {
        if (b.eps() != lead.eps() || b.frequency().omega != lead.frequency().omega) {
            throw Error(ErrorKind::FrameMismatch, "blocks disagree on eps or frequency");
        }
    }
    const AssembledFrame frame = assemble_u2(blocks, analysis_box, x);
    ConjugatedOperator c;
    c.x = x;
    c.box = frame.box;
    c.h = build_h(lead.sampling(), lead.frequency(), lead.eps(), x, frame.box).matrix();
    c.u = frame.u;
    c.h2 = frame.u.transpose() * c.h * frame.u;
    const auto n = c.h.rows();
    c.unitarity_error = (frame.u.transpose() * frame.u - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
    c.spectrum_error = (sym_eigenvalues(c.h) - sym_eigenvalues(c.h2)).cwiseAbs().maxCoeff();

    for (std::size_t i = 0; i < frame.box.size(); ++i) {
        const Site p = frame.box.site(i);
        const auto ii = static_cast<Eigen::Index>(i);
        DiagonalReading r;
        r.x = x;
        r.site = p;
        r.f2 = c.h2(ii, ii);
        const int owner = frame.owner[i];
        if (owner < 0) {
            r.f2_slope = lead.sampling().derivative(x + lead.frequency().dot(p));
        } else {
            const auto& pb = frame.copies[static_cast<std::size_t>(owner)];
            const auto& block = blocks[frame.sources[static_cast<std::size_t>(owner)]];
            const Site ref = pb.reference(p);
            const auto col = block.frame().extended.index(ref);
            r.f2_slope = block.label_slope(pb.frame, pb.base, col);
            r.labelled = block.frame().in_doubled(ref);
            if (r.labelled) {
                c.label_error = std::max(c.label_error, std::abs(r.f2 - pb.frame.values(static_cast<Eigen::Index>(col))));
                for (std::size_t j = 0; j < frame.box.size(); ++j) {
                    const Site q = frame.box.site(j);
                    const bool same_run = frame.owner[j] == owner && block.frame().in_doubled(pb.reference(q));
                    if (!same_run) c.residual_coupling = std::max(c.residual_coupling, std::abs(c.h2(ii, static_cast<Eigen::Index>(j))));
                }
            }
        }
        c.diagonal.push_back(r);
    }
    return c;
}

SlopeSweep block_slope_sweep(const MovingBlock& block, std::span<const double> y_grid,
                             std::optional<std::pair<double, double>> phase_filter) {
    SlopeSweep s;
    s.eps = block.eps();
    s.min_slope = std::numeric_limits<double>::infinity();
    const auto& fr = block.frame();
    for (double y : y_grid) {
        const LabeledFrame lf = block.base_frame(y);
        for (const auto& j : fr.doubled) {
            if (phase_filter) {
                const double u = reduce_phase(y + block.frequency().dot(j));
                if (u < phase_filter->first || u > phase_filter->second) continue;
            }
            const double v = block.label_slope(lf, y, fr.extended.index(j));
            if (v < s.min_slope) {
                s.min_slope = v;
                s.x_at_min = y;
                s.site_at_min = j;
            }
        }
    }
    return s;
}

MuFit fit_mu(std::string window, std::span<const SlopeSweep> sweeps, double predicted, double band) {
    std::vector<double> eps, vals;
    for (const auto& s : sweeps) {
        eps.push_back(s.eps);
        vals.push_back(s.min_slope);
    }
    const LineFit fit = fit_power(eps, vals);
    MuFit m;
    m.window = std::move(window);
    m.mu = fit.slope;
    m.predicted = predicted;
    m.band = band;
    m.prefactor = std::exp(fit.intercept);
    return m;
}

}  // namespace qpm
