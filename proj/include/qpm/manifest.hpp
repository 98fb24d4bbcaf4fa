#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "qpm/examples.hpp"
#include "qpm/lattice.hpp"

namespace qpm {

struct EnergyGrid {
    double lo = -1.0;
    double hi = 1.0;
    std::size_t points = 201;
};

struct SeriesSpec {
    LatticeBox box = LatticeBox::interval(-4, 4);
    Site site{};
    int order = 6;
    double x = 0.1;
};

// Validated experiment description. The configuration starts from a named
// example when one is given and is then overridden key by key.
struct Manifest {
    std::string name;
    ExampleConfig config;
    std::size_t x_samples = 64;
    std::size_t t_steps = 64;
    std::size_t box_size = 401;
    std::size_t ids_samples = 256;
    std::size_t cert_grid = 2000;
    double x = 0.013;
    std::uint64_t seed = 1;
    EnergyGrid energy;
    double spike_energy = 0.0;
    double spike_window = 3.0;  // in units of eps
    SeriesSpec series;
    std::string output;
    std::string hash;  // FNV-1a of the manifest text
};

// Both throw ManifestError on syntax errors, unknown keys or wrong types.
Manifest parse_manifest(const std::string& text);
Manifest load_manifest(const std::string& path);

std::string fnv1a_hex(const std::string& text);

}  // namespace qpm
