#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qpm/lattice.hpp"
#include "qpm/linalg.hpp"
#include "qpm/sampling.hpp"

namespace qpm {

// Integrated density of states of the box operator, averaged over phases.
struct IdsCurve {
    std::vector<double> energy;
    std::vector<double> value;
    std::size_t box_size = 0;
    double eps = 0.0;
    std::size_t samples = 0;
    std::vector<double> eigenvalues;  // pooled and sorted, for the smoothed derivative
};

// n phases in [0, 1) drawn from a seeded generator.
std::vector<double> sample_phases(std::size_t n, std::uint64_t seed);

// Phases hitting the pole guard are redrawn by a fixed small offset.
IdsCurve compute_ids(const SamplingFunction& f, const FrequencyVector& freq, double eps, std::size_t box_size,
                     std::span<const double> phases, std::span<const double> energy_grid, unsigned threads = 1);

// Gaussian-smoothed derivative of the IDS at e.
double ids_density(const IdsCurve& ids, double e, double bandwidth);

struct SpikeReading {
    double eps = 0.0;
    double bandwidth = 0.0;
    double location = 0.0;
    double height = 0.0;
    double width = 0.0;       // full width at half maximum
    double background = 0.0;  // density with the wide kernel at the peak
    std::size_t mass = 0;     // eigenvalues within one bandwidth of the peak
    // Shortest interval holding half of the eigenvalues within four bandwidths
    // of the peak; unlike the FWHM it is not floored by the kernel.
    double half_mass_width = 0.0;
};

struct SpikeFit {
    std::vector<SpikeReading> readings;
    LineFit height;
    LineFit width;
    LineFit half_mass_width;
    double height_exponent() const { return height.slope; }
    double width_exponent() const { return width.slope; }
};

// Peak of the smoothed derivative within `window` of e, bandwidth 0.5 eps^mu.
SpikeReading find_spike(const IdsCurve& ids, double e, double window, double mu);

SpikeFit spike_fit(std::span<const IdsCurve> curves, double e, double window_per_eps, double mu);

struct DecayProfile {
    std::vector<Site> center;
    std::vector<std::pair<int, double>> samples;  // (distance, max |psi| on the shell)
    double rate = 0.0;                            // infinite when only the centre carries weight
    double prefactor = 0.0;
    double residual = 0.0;
};

// Shell maxima of |psi| by l1 distance to the centre set, fitted as prefactor * exp(-rate * dist).
// Amplitudes below `floor` are treated as round-off and left out of the fit.
DecayProfile decay_profile(const LatticeBox& box, const Eigen::VectorXd& psi, std::span<const Site> center,
                           double floor = 1e-13);

double ipr(const Eigen::VectorXd& psi);

struct LocalizationRow {
    std::size_t index = 0;
    double value = 0.0;
    double ipr = 0.0;
    Site peak;
    bool anchored = false;  // decay measured from a singular run rather than the peak site
    DecayProfile profile;
};

// Maps the peak site of an eigenvector to the set its decay is measured from;
// an empty result means the peak site itself.
using AnchorMap = std::function<std::vector<Site>(const Site&)>;

std::vector<LocalizationRow> localization_survey(const LatticeBox& box, const EigenSystem& system,
                                                 const AnchorMap& anchor = {});

}  // namespace qpm
