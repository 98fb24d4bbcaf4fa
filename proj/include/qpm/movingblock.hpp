#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qpm/blockdiag.hpp"
#include "qpm/frame.hpp"
#include "qpm/operator.hpp"
#include "qpm/sampling.hpp"

namespace qpm {

// Block geometry from the singular run S: the core R0 is the smallest box at
// distance >= margin from S u (S + e1) (perp_margin across e1), and
// R = R0 u (R0 - e1). Rings are the shells at distance 1-2 and 3-4 from S u (S + e1).
BlockFrame frame_geometry(std::span<const Site> singular, int margin, double x0, const FrequencyVector& freq,
                          std::optional<int> perp_margin = std::nullopt);

// frame_geometry plus the check that every site of R' outside S u (S + e1)
// stays C_reg-regular over the window grid.
BlockFrame build_frame(std::span<const Site> singular, int margin, double x0, const SamplingFunction& f,
                       const FrequencyVector& freq, double c_reg, std::size_t x_samples = 64,
                       std::optional<int> perp_margin = std::nullopt, std::size_t cert_grid = 10000);

// Union over the window [x0, x0 + omega1] of the singular sites found in the search box.
std::vector<Site> singular_run(const SamplingFunction& f, const FrequencyVector& freq, double x0, double c_reg,
                               const LatticeBox& search, std::size_t x_samples = 64, std::size_t cert_grid = 2000);

// Ring with the smaller maximal |V| at x.
const std::vector<Site>& choose_ring(const BlockFrame& frame, const SamplingFunction& f,
                                     const FrequencyVector& freq, double x);

// One block of U_0 placed on the lattice: support = R' - shift e1 (+ perpendicular offset),
// entries U(y)_{a,b} = U(base)_{a + shift e1, b + shift e1}.
struct PlacedBlock {
    int shift = 0;
    Site offset;        // perpendicular translation (zero in d = 1)
    double base = 0.0;  // base point in [x0, x0 + omega1)
    LatticeBox support;
    LabeledFrame frame;

    // Site of the reference block R' that the lattice site p corresponds to.
    Site reference(const Site& p) const;
};

// The moving block U_0 for one frame at a fixed eps.
class MovingBlock {
public:
    MovingBlock(BlockFrame frame, SamplingFunction f, FrequencyVector freq, double eps, HomotopyOptions options = {});

    const BlockFrame& frame() const { return frame_; }
    const SamplingFunction& sampling() const { return f_; }
    const FrequencyVector& frequency() const { return freq_; }
    double eps() const { return eps_; }

    HomotopyFamily family() const;
    FiniteOperator block_operator(double y) const;
    LabeledFrame base_frame(double y) const;
    PlacedBlock at(double y) const;

    // Derivative of the labelled eigenvalue of H'_{R'} in column `column` at base point y.
    double label_slope(const LabeledFrame& frame, double y, std::size_t column) const;

private:
    BlockFrame frame_;
    SamplingFunction f_;
    FrequencyVector freq_;
    double eps_;
    HomotopyOptions options_;
};

struct AssembledFrame {
    LatticeBox box;                 // analysis box, extended to hold whole copies
    Eigen::MatrixXd u;
    std::vector<PlacedBlock> copies;
    std::vector<int> owner;         // copy index per box site, -1 when U acts as the identity there
    std::vector<std::size_t> sources;  // block index per copy
};

// U_2(x) on the analysis box: product of the copies of U_0(x + m + omega'.n')
// meeting the box. Copies that stick out along e1 are either absorbed by growing
// the box (extend = true) or reported as BoxTooSmall; across e1 only copies that
// fit are placed. Overlapping copies raise Gen4Violation.
AssembledFrame assemble_u2(std::span<const MovingBlock> blocks, const LatticeBox& analysis_box, double x,
                           bool extend = true);

// Lattice sites of S u (S + e1) covered by a placed copy.
std::vector<Site> placed_run(const PlacedBlock& copy, const BlockFrame& frame);

// For a lattice site inside the run of some copy, the whole run of that copy; empty otherwise.
std::function<std::vector<Site>(const Site&)> run_anchor(const AssembledFrame& assembled,
                                                         std::span<const MovingBlock> blocks);

struct DiagonalReading {
    double x = 0.0;
    Site site;
    double f2 = 0.0;
    double f2_slope = 0.0;
    bool labelled = false;  // site belongs to S u (S + e1) of some copy
};

struct ConjugatedOperator {
    double x = 0.0;
    LatticeBox box;
    Eigen::MatrixXd h;
    Eigen::MatrixXd u;
    Eigen::MatrixXd h2;
    std::vector<DiagonalReading> diagonal;
    double unitarity_error = 0.0;
    double spectrum_error = 0.0;
    double label_error = 0.0;        // max |H2_mm - labelled eigenvalue| on S u (S + e1) of each copy
    double residual_coupling = 0.0;  // max |H2_mn|, m in S u (S + e1) of a copy, n outside it
};

ConjugatedOperator conjugate_and_extract(std::span<const MovingBlock> blocks, const LatticeBox& analysis_box,
                                         double x);

// Midpoint grid of n points on [x0, x0 + omega1].
std::vector<double> window_grid(double x0, double omega1, std::size_t n);

struct SlopeSweep {
    double eps = 0.0;
    double min_slope = 0.0;   // min over the grid and the selected sites of f2'
    double x_at_min = 0.0;
    Site site_at_min;
};

// min f2' over base points and the sites of S u (S + e1) whose phase lies in
// [lo, hi] (reduced coordinates); all of S u (S + e1) when the filter is empty.
SlopeSweep block_slope_sweep(const MovingBlock& block, std::span<const double> y_grid,
                             std::optional<std::pair<double, double>> phase_filter = std::nullopt);

struct MuFit {
    std::string window;
    double mu = 0.0;
    double predicted = 0.0;
    double band = 0.0;
    double prefactor = 0.0;
    bool within_band() const { return std::abs(mu - predicted) <= band; }
};

MuFit fit_mu(std::string window, std::span<const SlopeSweep> sweeps, double predicted, double band);

}  // namespace qpm
