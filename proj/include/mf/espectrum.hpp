#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mf/observables.hpp"

namespace mf {

/// Occupations lambda with |lambda - 1/2| beyond this clamp map to
/// entanglement energies that are numerically meaningless; such levels are
/// flagged saturated and excluded from spacing statistics.
constexpr double kSaturationClamp = 1e-12;

/// Single-particle spectrum of the entanglement Hamiltonian for one snapshot.
/// Energies sorted ascending; eigenvector columns follow the same order and
/// are indexed by mask sites.
struct EntanglementSpectrum {
    Eigen::VectorXd energies;          // eps_a = ln[(1-lambda)/lambda]
    Eigen::VectorXd occupations;       // lambda_a, clamped to [0,1]
    std::vector<bool> saturated;
    Eigen::MatrixXd amplitudes;        // |psi_a(l)|^2, column a; empty if not requested

    std::uint64_t trajectory_id = 0;
    double time = 0.0;

    long size() const { return energies.size(); }
    long saturated_count() const;
    std::vector<double> unsaturated_energies() const;
    /// Entropy recomputed from the occupations.
    double entropy() const;
};

EntanglementSpectrum entanglement_hamiltonian(const CorrelationMatrix& corr, bool keep_vectors = true);

struct DensityOfStates {
    std::vector<double> bin_centers;
    std::vector<double> density;       // normalized, integral over bins = 1
    long overflow_low = 0;             // saturated / out-of-range counts
    long overflow_high = 0;
};

/// Normalized histogram of pooled energies across spectra. Saturated levels
/// go to the overflow counters.
DensityOfStates density_of_states(const std::vector<EntanglementSpectrum>& ensemble,
                                  int bins = 201, double eps_min = -15.0, double eps_max = 15.0);

}  // namespace mf
