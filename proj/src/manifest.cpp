#include "qpm/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qpm/error.hpp"

namespace qpm {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorKind::ManifestError, what); }

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) fail(where + " must be an object");
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j.items()) {
        if (!keys.count(k)) fail("unknown key '" + k + "' in " + where);
    }
}

template <typename T>
T get(const json& j, const std::string& key, const std::string& where) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        fail("bad value for '" + key + "' in " + where);
    }
}

template <typename T>
void maybe(const json& j, const char* key, const std::string& where, T& target) {
    if (j.contains(key)) target = get<T>(j, key, where);
}

Site site_from(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty() || j.size() > 3) fail(where + " must be an array of 1 to 3 integers");
    Site s;
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number_integer()) fail(where + " must hold integers");
        s[static_cast<int>(i)] = j[i].get<int>();
    }
    return s;
}

LatticeBox box_from(const json& j, int dim, const std::string& where) {
    only_keys(j, where, {"lo", "hi"});
    const Site lo = site_from(j.at("lo"), where + ".lo");
    const Site hi = site_from(j.at("hi"), where + ".hi");
    if (j.at("lo").size() != static_cast<std::size_t>(dim) || j.at("hi").size() != static_cast<std::size_t>(dim)) {
        fail(where + " must have " + std::to_string(dim) + " coordinates");
    }
    return LatticeBox(dim, lo, hi);
}

void read_sampling(const json& j, ExampleConfig& c) {
    const std::string where = "sampling";
    only_keys(j, where, {"intervals", "outer_scale", "c_reg"});
    maybe(j, "outer_scale", where, c.outer_scale);
    maybe(j, "c_reg", where, c.c_reg);
    if (j.contains("intervals")) {
        c.intervals.clear();
        for (const auto& piece : j.at("intervals")) {
            only_keys(piece, "sampling.intervals[]", {"lo", "length", "value"});
            c.intervals.push_back({get<double>(piece, "lo", "interval"), get<double>(piece, "length", "interval"),
                                   get<double>(piece, "value", "interval")});
        }
    }
}

void read_frame(const json& j, ExampleConfig& c) {
    const std::string where = "frame";
    only_keys(j, where, {"blocks", "c_sep", "expect_merge"});
    maybe(j, "c_sep", where, c.c_sep);
    maybe(j, "expect_merge", where, c.expect_merge);
    if (!j.contains("blocks")) return;
    c.blocks.clear();
    for (const auto& b : j.at("blocks")) {
        only_keys(b, "frame.blocks[]", {"label", "singular", "margin", "perp_margin", "x0", "predicted_mu", "mu_window"});
        BlockSpec spec;
        maybe(b, "label", "block", spec.label);
        for (const auto& s : b.at("singular")) spec.singular.push_back(site_from(s, "block.singular"));
        maybe(b, "margin", "block", spec.margin);
        if (b.contains("perp_margin")) spec.perp_margin = get<int>(b, "perp_margin", "block");
        maybe(b, "x0", "block", spec.x0);
        maybe(b, "predicted_mu", "block", spec.predicted_mu);
        if (b.contains("mu_window")) {
            const auto w = get<std::vector<double>>(b, "mu_window", "block");
            if (w.size() != 2) fail("block.mu_window must have two entries");
            spec.mu_window = {w[0], w[1]};
        }
        c.blocks.push_back(std::move(spec));
    }
}

}  // namespace

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Manifest parse_manifest(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(std::string("not valid JSON: ") + e.what());
    }
    only_keys(j, "manifest", {"name", "example", "sampling", "omega", "scan_radius", "eps", "grids", "frame",
                              "analysis_box", "x", "seed", "series", "spike", "output"});
    Manifest m;
    m.hash = fnv1a_hex(text);
    m.name = j.contains("name") ? get<std::string>(j, "name", "manifest") : "unnamed";
    if (j.contains("example")) {
        try {
            m.config = example(get<std::string>(j, "example", "manifest"));
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::ManifestError) throw;
            fail(e.what());
        }
    }
    maybe(j, "omega", "manifest", m.config.omega);
    maybe(j, "scan_radius", "manifest", m.config.scan_radius);
    maybe(j, "eps", "manifest", m.config.eps_values);
    if (m.config.omega.empty()) fail("omega is required (directly or through an example)");
    if (m.config.eps_values.empty()) fail("eps list is required");
    if (j.contains("sampling")) read_sampling(j.at("sampling"), m.config);
    if (j.contains("frame")) read_frame(j.at("frame"), m.config);
    if (j.contains("sampling") || j.contains("omega")) {
        m.config.predicted_mu.clear();
        for (int s : escape_steps(m.config.intervals, m.config.omega)) m.config.predicted_mu.push_back(2.0 * s);
    }
    const int dim = static_cast<int>(m.config.omega.size());
    if (j.contains("analysis_box")) {
        m.config.analysis_box = box_from(j.at("analysis_box"), dim, "analysis_box");
    } else if (!j.contains("example")) {
        m.config.analysis_box = LatticeBox::interval(-20, 20);
    }
    if (j.contains("grids")) {
        const auto& g = j.at("grids");
        only_keys(g, "grids", {"x_samples", "t_steps", "box_size", "ids_samples", "cert_grid", "energy"});
        maybe(g, "x_samples", "grids", m.x_samples);
        maybe(g, "t_steps", "grids", m.t_steps);
        maybe(g, "box_size", "grids", m.box_size);
        maybe(g, "ids_samples", "grids", m.ids_samples);
        maybe(g, "cert_grid", "grids", m.cert_grid);
        if (g.contains("energy")) {
            const auto& e = g.at("energy");
            only_keys(e, "grids.energy", {"lo", "hi", "points"});
            maybe(e, "lo", "grids.energy", m.energy.lo);
            maybe(e, "hi", "grids.energy", m.energy.hi);
            maybe(e, "points", "grids.energy", m.energy.points);
            if (m.energy.points < 2 || !(m.energy.hi > m.energy.lo)) fail("grids.energy needs lo < hi and >= 2 points");
        }
    }
    if (j.contains("series")) {
        const auto& s = j.at("series");
        only_keys(s, "series", {"box", "site", "order", "x"});
        if (s.contains("box")) m.series.box = box_from(s.at("box"), dim, "series.box");
        if (s.contains("site")) m.series.site = site_from(s.at("site"), "series.site");
        maybe(s, "order", "series", m.series.order);
        maybe(s, "x", "series", m.series.x);
    } else if (dim > 1) {
        m.series.box = LatticeBox(dim, Site{-2, -2, -2}, Site{2, 2, 2});
    }
    if (j.contains("spike")) {
        const auto& s = j.at("spike");
        only_keys(s, "spike", {"energy", "window"});
        maybe(s, "energy", "spike", m.spike_energy);
        maybe(s, "window", "spike", m.spike_window);
    }
    maybe(j, "x", "manifest", m.x);
    maybe(j, "seed", "manifest", m.seed);
    maybe(j, "output", "manifest", m.output);
    return m;
}

Manifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot read " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_manifest(text.str());
}

}  // namespace qpm
