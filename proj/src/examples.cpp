#include "qpm/examples.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include "qpm/error.hpp"
#include "qpm/linalg.hpp"

namespace qpm {

namespace {

const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

std::vector<Site> line(int lo, int hi) {
    std::vector<Site> out;
    for (int i = lo; i <= hi; ++i) out.push_back(Site{i});
    return out;
}

// S from the singular run over the window: S u (S + e1) must cover the run.
std::vector<Site> run_to_singular(const std::vector<Site>& found) {
    // Keep the connected piece through the origin; far returns of the orbit belong to other copies.
    std::vector<Site> run;
    for (const auto& n : found) {
        if (l1_norm(n) <= 1) {
            run.push_back(n);
            break;
        }
    }
    if (run.empty()) throw Error(ErrorKind::DegenerateFrame, "no singular sites near the origin over the window");
    for (std::size_t i = 0; i < run.size(); ++i) {
        for (const auto& n : found) {
            if (l1_norm(n - run[i]) == 1 && std::find(run.begin(), run.end(), n) == run.end()) run.push_back(n);
        }
    }
    std::sort(run.begin(), run.end());
    std::set<Site> s;
    for (const auto& n : run) {
        if (std::find(run.begin(), run.end(), n - Site::axis(0)) == run.end() ||
            std::find(run.begin(), run.end(), n + Site::axis(0)) != run.end()) {
            s.insert(n);
        }
    }
    // Every run site either is in S or has its left neighbour in S.
    for (const auto& n : run) {
        if (!s.count(n) && !s.count(n - Site::axis(0))) s.insert(n - Site::axis(0));
    }
    return {s.begin(), s.end()};
}

BlockSpec centred_block(const std::string& label, const SamplingFunction& f, const FrequencyVector& freq,
                        double centre, int margin, double predicted_mu, std::pair<double, double> mu_window,
                        double c_reg) {
    BlockSpec b;
    b.label = label;
    b.margin = margin;
    // At x0 the centre of the flat set sits half a step to the right of site 0.
    b.x0 = centre - 0.5 * freq.omega.front();
    const int reach = 12;
    LatticeBox search = LatticeBox::interval(-reach, reach);
    if (freq.dim() > 1) {
        Site lo = Site::axis(0, -reach), hi = Site::axis(0, reach);
        for (int i = 1; i < freq.dim(); ++i) {
            lo[i] = -1;
            hi[i] = 1;
        }
        search = LatticeBox(freq.dim(), lo, hi);
    }
    b.singular = run_to_singular(singular_run(f, freq, b.x0, c_reg, search, 48, 2000));
    b.predicted_mu = predicted_mu;
    b.mu_window = mu_window;
    return b;
}

ExampleConfig base_config(std::string name, std::vector<double> omega, std::vector<FlatInterval> intervals) {
    ExampleConfig c;
    c.name = std::move(name);
    c.omega = std::move(omega);
    c.intervals = std::move(intervals);
    c.eps_values = {1e-2, std::pow(10.0, -2.5), 1e-3};
    const auto steps = escape_steps(c.intervals, c.omega);
    for (int s : steps) c.predicted_mu.push_back(2.0 * s);
    return c;
}

ExampleConfig make_example1() {
    const double w = kGolden / 8.0;
    auto c = base_config("example1", {w}, {{-2.15 * w, 4.3 * w, 0.0}});
    c.c_reg = 50.0;
    BlockSpec b;
    b.label = "staircase";
    b.singular = line(-2, 2);
    b.margin = 3;
    b.x0 = -w;
    b.predicted_mu = 2.0;
    b.mu_window = {-2.15 * w, 2.15 * w};
    c.blocks.push_back(b);
    c.analysis_box = LatticeBox::interval(-30, 30);
    return c;
}

ExampleConfig make_example2(bool thin) {
    const double w1 = kGolden / 8.0, w2 = std::sqrt(2.0) / 4.0;
    auto c = base_config(thin ? "example2-thin" : "example2", {w1, w2}, {{-2.15 * w1, 4.3 * w1, 0.0}});
    BlockSpec b;
    b.label = thin ? "line" : "claw";
    for (int i = -2; i <= 2; ++i) b.singular.push_back(Site{i, 0});
    b.margin = 3;
    b.perp_margin = thin ? 1 : 4;
    b.x0 = -w1;
    b.predicted_mu = 2.0;
    b.mu_window = {-2.15 * w1, 2.15 * w1};
    c.blocks.push_back(b);
    c.analysis_box = thin ? LatticeBox(2, Site{-20, -3}, Site{20, 3}) : LatticeBox(2, Site{-20, -8}, Site{20, 8});
    return c;
}

ExampleConfig make_pair_example(const std::string& name, double centre_gap) {
    const double w = kGolden / 20.0, len = 1.3 * w;
    auto c = base_config(name, {w}, {{-centre_gap - 0.5 * len, len, -30.0}, {centre_gap - 0.5 * len, len, 30.0}});
    const auto f = c.sampling();
    const auto freq = c.frequency();
    c.blocks.push_back(centred_block("lower", f, freq, -centre_gap, 2, 2.0,
                                     {-centre_gap - 0.5 * len, -centre_gap + 0.5 * len}, c.c_reg));
    c.blocks.push_back(centred_block("upper", f, freq, centre_gap, 2, 2.0,
                                     {centre_gap - 0.5 * len, centre_gap + 0.5 * len}, c.c_reg));
    c.analysis_box = LatticeBox::interval(-40, 40);
    return c;
}

ExampleConfig make_example5() {
    const double w = kGolden / 12.0;
    std::vector<FlatInterval> chain;
    for (int j = -1; j <= 1; ++j) chain.push_back({(j - 0.3) * w, 0.6 * w, 3.0 * j});
    auto c = base_config("example5", {w}, chain);
    c.blocks.push_back(centred_block("chain", c.sampling(), c.frequency(), 0.0, 6, 4.0, {-0.3 * w, 0.3 * w}, c.c_reg));
    c.analysis_box = LatticeBox::interval(-30, 30);
    return c;
}

ExampleConfig make_example6() {
    const double w1 = kGolden / 12.0, w2 = std::sqrt(2.0) / 10.0;
    std::vector<FlatInterval> star;
    const double len = 0.3 * w1;
    const double centres[] = {-w2, -w1, 0.0, w1, w2};
    const double values[] = {-6.0, -3.0, 0.0, 3.0, 6.0};
    for (int j = 0; j < 5; ++j) star.push_back({centres[j] - 0.5 * len, len, values[j]});
    auto c = base_config("example6", {w1, w2}, star);
    c.blocks.push_back(centred_block("star", c.sampling(), c.frequency(), 0.0, 2, 4.0, {-0.5 * len, 0.5 * len}, c.c_reg));
    c.analysis_box = LatticeBox(2, Site{-12, -3}, Site{12, 3});
    return c;
}

}  // namespace

SamplingFunction ExampleConfig::sampling() const { return SamplingFunction::with_flat_pieces(intervals, outer_scale); }

FrequencyVector ExampleConfig::frequency() const {
    return verify_diophantine(omega, dim() == 1 ? scan_radius : std::min(scan_radius, 60));
}

std::vector<BlockFrame> ExampleConfig::frames() const {
    const auto freq = frequency();
    std::vector<BlockFrame> out;
    for (const auto& b : blocks) out.push_back(frame_geometry(b.singular, b.margin, b.x0, freq, b.perp_margin));
    return out;
}

std::vector<MovingBlock> ExampleConfig::moving_blocks(double eps) const {
    const auto f = sampling();
    const auto freq = frequency();
    std::vector<MovingBlock> out;
    for (const auto& fr : frames()) out.emplace_back(fr, f, freq, eps);
    return out;
}

StaircaseGeometry staircase_geometry(const FlatInterval& piece, double omega, const SamplingFunction& f) {
    StaircaseGeometry g;
    g.a = piece.lo;
    g.length = piece.length;
    g.value = piece.value;
    g.b = piece.lo + 0.5 * piece.length;
    const double ratio = piece.length / omega;
    g.p = static_cast<int>(std::floor(ratio));
    g.z = ratio - g.p;
    g.beta = std::min(g.z, 1.0 - g.z) * omega;
    g.m = static_cast<int>(std::ceil(piece.length / (2.0 * omega))) + 2;
    g.e_reg = 0.0;
    for (double u : {g.b - g.m * omega, g.b + (g.m + 1) * omega}) {
        try {
            g.e_reg = std::max(g.e_reg, std::abs(f.eval(u)));
        } catch (const Error&) {
            g.e_reg = std::numeric_limits<double>::infinity();
        }
    }
    return g;
}

std::vector<int> escape_steps(const std::vector<FlatInterval>& intervals, const std::vector<double>& omega) {
    constexpr double tol = 1e-12;
    const std::size_t n = intervals.size();
    std::vector<std::vector<std::size_t>> next(n);
    std::vector<bool> leaves(n, false);
    for (std::size_t j = 0; j < n; ++j) {
        for (double w : omega) {
            for (int sign : {-1, 1}) {
                const double lo = reduce_phase(intervals[j].lo + sign * w);
                const double hi = lo + intervals[j].length;
                bool inside = false;
                for (std::size_t k = 0; k < n; ++k) {
                    if (lo >= intervals[k].lo - tol && hi <= intervals[k].hi() + tol) {
                        next[j].push_back(k);
                        inside = true;
                    }
                }
                if (!inside) leaves[j] = true;
            }
        }
    }
    constexpr int kNever = std::numeric_limits<int>::max() / 2;
    std::vector<int> dist(n, kNever);
    for (std::size_t j = 0; j < n; ++j) {
        if (leaves[j]) dist[j] = 1;
    }
    for (std::size_t round = 0; round < n; ++round) {
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t k : next[j]) dist[j] = std::min(dist[j], dist[k] + 1);
        }
    }
    for (auto& d : dist) {
        if (d >= kNever) d = -1;
    }
    return dist;
}

std::vector<std::string> example_names() {
    return {"example1", "example2", "example2-thin", "example3", "example4", "example5", "example6"};
}

ExampleConfig example(const std::string& name) {
    if (name == "example1") return make_example1();
    if (name == "example2") return make_example2(false);
    if (name == "example2-thin") return make_example2(true);
    if (name == "example3") {
        return make_pair_example("example3", 0.2);
    }
    if (name == "example4") {
        auto c = make_pair_example("example4", 0.04);
        c.expect_merge = true;
        return c;
    }
    if (name == "example5") return make_example5();
    if (name == "example6") return make_example6();
    throw Error(ErrorKind::ConfigInfeasible, "unknown example '" + name + "'");
}

namespace {

bool is_regular(const SamplingFunction& f, double u, double c_reg, std::size_t grid) {
    try {
        return certify_regularity(f, u, c_reg, grid).regular;
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::PoleProximity) return true;
        throw;
    }
}

}  // namespace

std::vector<HypothesisCheck> verify_theorem_hypotheses(const ExampleConfig& config, double eps,
                                                       const HypothesisOptions& options) {
    std::vector<HypothesisCheck> out;
    auto add = [&](std::string key, bool ok, std::string witness) {
        out.push_back({std::move(key), ok, std::move(witness)});
    };

    std::optional<SamplingFunction> maybe_f;
    try {
        maybe_f = config.sampling();
        add("f1", true, std::to_string(maybe_f->pieces().size()) + " monotone pieces, poles at +-1/2");
    } catch (const Error& e) {
        add("f1", false, e.what());
        return out;
    }
    const SamplingFunction& f = *maybe_f;
    FrequencyVector freq;
    try {
        freq = config.frequency();
        add("diophantine", freq.c_dio > 0.0, "c_dio = " + fmt(freq.c_dio) + " at tau = " + fmt(freq.tau_dio));
    } catch (const Error& e) {
        add("diophantine", false, e.what());
        return out;
    }
    const double w = freq.omega.front();
    const std::size_t grid = options.cert_grid;

    double e_reg = 0.0;
    if (config.intervals.size() == 1) {
        const auto& I = config.intervals.front();
        const auto g = staircase_geometry(I, w, f);
        e_reg = g.e_reg;
        bool flat = true;
        for (int i = 0; i <= 100; ++i) flat = flat && f.eval(I.lo + I.length * i / 100.0) == I.value;
        add("z1", flat, "f = " + fmt(I.value) + " on [" + fmt(I.lo) + ", " + fmt(I.hi()) + "]");
        add("z2", g.z > 1e-9 && g.z < 1.0 - 1e-9, "L/omega = " + std::to_string(g.p) + " + " + fmt(g.z) +
                                                      ", beta = " + fmt(g.beta));
        std::string bad;
        for (int i = 0; i < 400 && bad.empty(); ++i) {
            const double u = -0.5 + (i + 0.5) / 400.0;
            if (u >= g.a - g.beta && u <= g.a + g.length + g.beta) continue;
            if (!is_regular(f, u, config.c_reg, grid)) bad = "singular at u = " + fmt(u);
        }
        add("z3", bad.empty(), bad.empty() ? "regular outside [a - beta, a + L + beta]" : bad);
        const double left = g.b - g.m * w, right = g.b + (g.m + 1) * w;
        add("z4", left > -0.5 && right < 0.5, "M = " + std::to_string(g.m) + ", span [" + fmt(left) + ", " + fmt(right) + "]");
        if (config.dim() > 1) {
            std::string hit;
            const LatticeBox ball(config.dim(), Site{-6, -6, -6}, Site{6, 6, 6});
            for (int i = 0; i <= 8 && hit.empty(); ++i) {
                const double x = I.lo + I.length * i / 8.0;
                for (const auto& n : ball.sites()) {
                    if (l1_norm(n) > 6 || l1_norm(n) == std::abs(n[0])) continue;
                    if (!is_regular(f, x + freq.dot(n), config.c_reg, grid)) {
                        hit = "singular at x = " + fmt(x) + ", n = " + to_string(n, config.dim());
                        break;
                    }
                }
            }
            add("z5", hit.empty(), hit.empty() ? "off-axis shifts within |n|_1 <= 6 are regular" : hit);
        }
    }

    std::vector<MovingBlock> blocks;
    for (const auto& spec : config.blocks) {
        const std::string tag = config.blocks.size() > 1 ? "[" + spec.label + "]" : "";
        BlockFrame fr;
        try {
            fr = build_frame(spec.singular, spec.margin, spec.x0, f, freq, config.c_reg, options.x_samples,
                             spec.perp_margin, grid);
            add("gen2" + tag, true, "R' \\ (S u S+e1) regular over the window");
        } catch (const Error& e) {
            fr = frame_geometry(spec.singular, spec.margin, spec.x0, freq, spec.perp_margin);
            add("gen2" + tag, false, e.what());
        }
        int depth = std::numeric_limits<int>::max();
        bool inside = true;
        for (const auto& s : fr.doubled) {
            inside = inside && fr.core.contains(s);
            depth = std::min(depth, fr.core.depth(s));
        }
        add("gen1" + tag, inside, "S u (S + e1) inside R0 = " + to_string(fr.core.lo(), fr.dim) + ".." + to_string(fr.core.hi(), fr.dim));
        add("thm3" + tag, depth >= spec.margin, "dist(S u S+e1, outside R0) = " + std::to_string(depth));

        // Largest |f| on R' at the window ends bounds the regular potential.
        for (double x : {spec.x0, spec.x0 + w}) {
            for (const auto& n : fr.extended.sites()) {
                try {
                    e_reg = std::max(e_reg, std::abs(f.eval(x + freq.dot(n))));
                } catch (const Error&) {
                }
            }
        }

        MovingBlock mb(fr, f, freq, eps);
        const auto xs = window_grid(spec.x0, w, options.x_samples);
        try {
            const auto path = diagonalize_homotopy(mb.family(), xs);
            add("gen3" + tag, path.kappa > 0.0, "kappa = " + fmt(path.kappa));
        } catch (const Error& e) {
            add("gen3" + tag, false, e.what());
        }

        double sep = std::numeric_limits<double>::infinity();
        const LatticeBox run = bounding_box(fr.doubled, fr.dim);
        for (double x : xs) {
            for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
                const auto h = build_h(f.with_homotopy(t), freq, eps, x, run);
                sep = std::min(sep, min_gap(sym_eigenvalues(h.matrix())));
            }
        }
        add("thm5" + tag, sep >= config.c_sep * eps, "min gap / eps = " + fmt(sep / eps) + " (c_sep = " + fmt(config.c_sep) + ")");
        blocks.push_back(std::move(mb));
    }

    std::string reg_fail;
    for (int i = 0; i < 2000 && reg_fail.empty(); ++i) {
        const double u = -0.5 + (i + 0.5) / 2000.0;
        double v;
        try {
            v = std::abs(f.eval(u));
        } catch (const Error&) {
            continue;
        }
        if (v >= e_reg && !is_regular(f, u, config.c_reg, grid)) reg_fail = "singular at u = " + fmt(u);
    }
    add("gen0", reg_fail.empty(), reg_fail.empty() ? "regular wherever |f| >= E_reg = " + fmt(e_reg) : reg_fail);

    int edge = 0;
    for (const auto& b : blocks) {
        for (int i = 0; i < config.dim(); ++i) {
            edge = std::max(edge, b.frame().extended.hi()[i] - b.frame().extended.lo()[i] + 1);
        }
    }
    std::string overlap, uncovered;
    double x_probe = 0.013;
    for (int i = 0; i < 6 && overlap.empty(); ++i, x_probe += 1.0 / 6.0) {
        try {
            const auto assembled = assemble_u2(blocks, config.analysis_box, x_probe);
            for (const auto& s : singular_set(f, freq, x_probe, assembled.box, config.c_reg, grid)) {
                const int owner = assembled.owner[assembled.box.index(s)];
                bool covered = false;
                if (owner >= 0) {
                    const auto& pb = assembled.copies[static_cast<std::size_t>(owner)];
                    covered = blocks[assembled.sources[static_cast<std::size_t>(owner)]].frame().in_doubled(pb.reference(s));
                }
                // Sites within one block length of the box edge can belong to dropped copies.
                if (!covered && assembled.box.depth(s) > edge && uncovered.empty()) {
                    uncovered = "site " + to_string(s, config.dim()) + " at x = " + fmt(x_probe);
                }
            }
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Gen4Violation) throw;
            overlap = e.what();
        }
    }
    if (overlap.empty()) {
        add("gen4", true, "copies of U_0 are pairwise disjoint");
    } else {
        add("gen4", false, config.blocks.size() > 1 ? overlap + "; merge the intervals into one singular block"
                                                    : overlap);
    }
    if (overlap.empty()) {
        add("thm4", uncovered.empty(), uncovered.empty() ? "singular sites lie in S u (S + e1) of some copy"
                                                         : "uncovered singular " + uncovered);
    }
    return out;
}

}  // namespace qpm
