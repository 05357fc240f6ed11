#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mf/espectrum.hpp"
#include "mf/lattice.hpp"
#include "mf/rmt.hpp"
#include "mf/observables.hpp"
#include "mf/trajectory.hpp"

namespace mf {

/// Per-snapshot scalar diagnostics, computed inline so eigenvector blocks
/// need not be retained for every snapshot.
struct SnapshotStats {
    std::uint64_t trajectory_id = 0;
    double time = 0;
    double r_tilde_mean = 0;   // NaN when fewer than 3 usable levels
    double kl1 = 0;            // NaN when vectors were not computed
    double entropy = 0;
    long saturated = 0;
};

struct EnsembleOptions {
    Geometry geometry = Geometry::checkerboard;
    int strip_width = 0;          // for Geometry::strip
    bool compute_kl1 = true;      // needs eigenvectors per snapshot (transient)
    bool keep_spectra = true;     // energies of every snapshot (for SFF/DoS)
    bool keep_final_vectors = false;  // amplitudes of the last snapshot, for KL2
    bool strip_sweep = false;     // S(l_A) for every strip width
    int threads = 0;              // 0: OpenMP default
};

struct EnsembleResult {
    std::vector<SnapshotStats> stats;                 // sorted by (trajectory, t)
    std::vector<EntanglementSpectrum> spectra;        // energies only
    std::vector<EntanglementSpectrum> final_spectra;  // with amplitudes, one per trajectory
    std::vector<Accumulator> strip_entropy;           // index l_A - 1, raw S_A

    MeanStderr mean_r_tilde() const;  // trajectory-level scatter
    MeanStderr mean_kl1() const;
    MeanStderr mean_entropy() const;
};

/// Everything one trajectory contributes to an ensemble; the unit of work
/// for resume-capable drivers.
struct TrajectoryRecord {
    std::vector<SnapshotStats> stats;
    std::vector<EntanglementSpectrum> spectra;         // energies only
    std::optional<EntanglementSpectrum> final_spectrum;  // with amplitudes
    std::vector<double> strip_entropy;                 // snapshot-averaged S(l_A), index l_A-1
};

TrajectoryRecord run_single_trajectory(const Lattice& lat, const EvolutionConfig& cfg,
                                       const Propagator& prop, std::uint64_t master_seed,
                                       std::uint64_t id, const SubsystemMask& mask,
                                       const EnsembleOptions& opts);

/// Runs `trajectories` independent trajectories in parallel; RNG streams are
/// keyed by (master_seed, id), so the aggregate is independent of the worker
/// count and execution order.
EnsembleResult run_ensemble(const Lattice& lat, const EvolutionConfig& cfg,
                            int trajectories, std::uint64_t master_seed,
                            const EnsembleOptions& opts);

/// Half-cut entanglement density s(t) = S(t)/L from a Neel start, averaged
/// over trajectories; no burn-in.
ObservableSeries entropy_growth_curve(const Lattice& lat, EvolutionConfig cfg,
                                      int trajectories, std::uint64_t master_seed,
                                      double t_max, double sample_interval);

/// <I(A,B)> for strips of width 1 separated by L/2 (2D MIPT probe).
MeanStderr mutual_information_ensemble(const Lattice& lat, const EvolutionConfig& cfg,
                                       int trajectories, std::uint64_t master_seed);

}  // namespace mf
