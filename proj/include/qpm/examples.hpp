#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qpm/lattice.hpp"
#include "qpm/movingblock.hpp"
#include "qpm/sampling.hpp"

namespace qpm {

struct BlockSpec {
    std::string label;
    std::vector<Site> singular;  // S
    int margin = 1;
    std::optional<int> perp_margin;
    double x0 = 0.0;
    double predicted_mu = 2.0;
    // Reduced-phase window whose labelled slopes define the fitted mu.
    std::pair<double, double> mu_window{-0.5, 0.5};
};

struct ExampleConfig {
    std::string name;
    std::vector<double> omega;
    std::vector<FlatInterval> intervals;
    double outer_scale = 30.0;
    double c_reg = 50.0;
    double c_sep = 0.5;
    int scan_radius = 1000;
    std::vector<BlockSpec> blocks;
    std::vector<double> eps_values;
    LatticeBox analysis_box;
    std::vector<double> predicted_mu;  // per flat interval, twice the escape distance
    bool expect_merge = false;         // blocks must be merged into one singular set

    int dim() const { return static_cast<int>(omega.size()); }
    SamplingFunction sampling() const;
    FrequencyVector frequency() const;
    std::vector<BlockFrame> frames() const;  // geometry only
    std::vector<MovingBlock> moving_blocks(double eps) const;
};

// Derived data of a single flat piece [a, a + L] with value E:
// L = (p + z) omega, beta = min(z, 1 - z) omega, M = ceil(L / 2 omega) + 2,
// b the centre of the piece and E_reg the largest |f| on b - M omega .. b + (M + 1) omega.
struct StaircaseGeometry {
    double a = 0.0, length = 0.0, value = 0.0, b = 0.0;
    int p = 0;
    double z = 0.0, beta = 0.0;
    int m = 0;
    double e_reg = 0.0;
};

StaircaseGeometry staircase_geometry(const FlatInterval& piece, double omega, const SamplingFunction& f);

// Fewest lattice steps (+-e_i) that carry a flat interval out of the union of
// all flat intervals; the predicted exponent is twice this number.
std::vector<int> escape_steps(const std::vector<FlatInterval>& intervals, const std::vector<double>& omega);

std::vector<std::string> example_names();
ExampleConfig example(const std::string& name);

struct HypothesisCheck {
    std::string key;
    bool passed = false;
    std::string witness;
};

struct HypothesisOptions {
    std::size_t x_samples = 24;
    std::size_t cert_grid = 2000;
};

std::vector<HypothesisCheck> verify_theorem_hypotheses(const ExampleConfig& config, double eps,
                                                       const HypothesisOptions& options = {});

}  // namespace qpm
