#include "mf/ensemble.hpp"

#include <omp.h>

#include <cmath>
#include <stdexcept>

#include "mf/rmt.hpp"

namespace mf {

TrajectoryRecord run_single_trajectory(const Lattice& lat, const EvolutionConfig& cfg,
                                       const Propagator& prop, std::uint64_t master_seed,
                                       std::uint64_t id, const SubsystemMask& mask,
                                       const EnsembleOptions& opts) {
    TrajectoryRecord out;
    long strip_samples = 0;
    if (opts.strip_sweep) out.strip_entropy.assign(lat.length - 1, 0.0);
    TrajectoryState state = init_state(lat, cfg.init, make_trajectory_rng(master_seed, id), id);

    const bool need_vectors = opts.compute_kl1 || opts.keep_final_vectors;
    int snapshot = 0;
    Observer observer = [&](const TrajectoryState& s) {
        CorrelationMatrix corr = correlation_matrix(s, mask);
        EntanglementSpectrum spec = entanglement_hamiltonian(corr, need_vectors);
        spec.trajectory_id = id;
        spec.time = s.time;

        SnapshotStats st;
        st.trajectory_id = id;
        st.time = s.time;
        st.entropy = spec.entropy();
        st.saturated = spec.saturated_count();
        try {
            GapRatios g = gap_ratios(spec);
            double sum = 0;
            for (double v : g.r_tilde) sum += v;
            st.r_tilde_mean = g.r_tilde.empty() ? std::nan("") : sum / g.r_tilde.size();
        } catch (const std::invalid_argument&) {
            st.r_tilde_mean = std::nan("");
        }
        st.kl1 = opts.compute_kl1 ? kl1(spec, lat.length) : std::nan("");
        out.stats.push_back(st);

        const bool last = (++snapshot == cfg.samples);
        if (opts.keep_final_vectors && last) {
            out.final_spectrum = spec;
        }
        if (opts.keep_spectra) {
            spec.amplitudes.resize(0, 0);
            out.spectra.push_back(std::move(spec));
        }
        if (opts.strip_sweep) {
            for (int w = 1; w < lat.length; ++w)
                out.strip_entropy[w - 1] += subsystem_entropy(s, make_strip_mask(lat, w));
            ++strip_samples;
        }
    };

    run_trajectory(lat, cfg, prop, state, {observer});
    if (strip_samples > 0)
        for (double& v : out.strip_entropy) v /= strip_samples;
    return out;
}

MeanStderr EnsembleResult::mean_r_tilde() const {
    Accumulator acc;
    for (const auto& s : stats)
        if (std::isfinite(s.r_tilde_mean)) acc.add(s.r_tilde_mean);
    return {acc.mean(), acc.standard_error(), acc.count()};
}

MeanStderr EnsembleResult::mean_kl1() const {
    Accumulator acc;
    for (const auto& s : stats)
        if (std::isfinite(s.kl1)) acc.add(s.kl1);
    return {acc.mean(), acc.standard_error(), acc.count()};
}

MeanStderr EnsembleResult::mean_entropy() const {
    Accumulator acc;
    for (const auto& s : stats) acc.add(s.entropy);
    return {acc.mean(), acc.standard_error(), acc.count()};
}

EnsembleResult run_ensemble(const Lattice& lat, const EvolutionConfig& cfg,
                            int trajectories, std::uint64_t master_seed,
                            const EnsembleOptions& opts) {
    if (trajectories < 1) throw std::invalid_argument("trajectory count must be >= 1");
    cfg.validate();
    const SubsystemMask mask = make_mask(lat, opts.geometry, opts.strip_width);
    const auto prop = make_propagator(lat, cfg.dt, cfg.kernel, lat.sites / 2);

    std::vector<TrajectoryRecord> outputs(trajectories);
    std::exception_ptr failure = nullptr;
    const int threads = opts.threads > 0 ? opts.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (int id = 0; id < trajectories; ++id) {
        try {
            outputs[id] = run_single_trajectory(lat, cfg, *prop, master_seed, id, mask, opts);
        } catch (...) {
#pragma omp critical
            failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    EnsembleResult res;
    if (opts.strip_sweep) res.strip_entropy.assign(lat.length - 1, Accumulator{});
    for (auto& out : outputs) {
        for (auto& s : out.stats) res.stats.push_back(s);
        for (auto& spec : out.spectra) res.spectra.push_back(std::move(spec));
        if (out.final_spectrum) res.final_spectra.push_back(std::move(*out.final_spectrum));
        if (opts.strip_sweep && !out.strip_entropy.empty())
            for (int w = 1; w < lat.length; ++w)
                res.strip_entropy[w - 1].add(out.strip_entropy[w - 1]);
    }
    return res;
}

ObservableSeries entropy_growth_curve(const Lattice& lat, EvolutionConfig cfg,
                                      int trajectories, std::uint64_t master_seed,
                                      double t_max, double sample_interval) {
    cfg.init = InitState::neel;
    cfg.validate();
    const SubsystemMask half = make_half_cut_mask(lat);
    const auto prop = make_propagator(lat, cfg.dt, cfg.kernel, lat.sites / 2);
    const long gap_steps = std::max<long>(1, static_cast<long>(std::llround(sample_interval / cfg.dt)));
    const long blocks = static_cast<long>(std::floor(t_max / (gap_steps * cfg.dt)));

    std::vector<std::vector<double>> curves(trajectories);
    std::exception_ptr failure = nullptr;
#pragma omp parallel for schedule(dynamic)
    for (int id = 0; id < trajectories; ++id) {
        try {
            TrajectoryState state = init_state(lat, InitState::neel, make_trajectory_rng(master_seed, id), id);
            std::vector<double> curve;
            curve.push_back(subsystem_entropy(state, half));
            for (long b = 0; b < blocks; ++b) {
                for (long i = 0; i < gap_steps; ++i) step(state, cfg, *prop);
                curve.push_back(subsystem_entropy(state, half));
            }
            curves[id] = std::move(curve);
        } catch (...) {
#pragma omp critical
            failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    ObservableSeries series;
    series.abscissa = "t";
    for (long b = 0; b <= blocks; ++b) {
        Accumulator acc;
        for (const auto& c : curves) acc.add(c[b]);
        series.points.push_back({b * gap_steps * cfg.dt, acc.mean() / lat.length,
                                 acc.standard_error() / lat.length, acc.count()});
    }
    return series;
}

MeanStderr mutual_information_ensemble(const Lattice& lat, const EvolutionConfig& cfg,
                                       int trajectories, std::uint64_t master_seed) {
    if (lat.dim != 2) throw std::invalid_argument("mutual information probe is set up for d=2 strips");
    cfg.validate();
    // Width-1 strips at last-coordinate 0 and L/2.
    std::vector<long> a_sites, b_sites;
    const long plane = lat.sites / lat.length;
    for (long s = 0; s < lat.sites; ++s) {
        const long last = s / plane;
        if (last == 0) a_sites.push_back(s);
        if (last == lat.length / 2) b_sites.push_back(s);
    }
    const SubsystemMask mask_a = make_custom_mask(lat, a_sites);
    const SubsystemMask mask_b = make_custom_mask(lat, b_sites);
    const auto prop = make_propagator(lat, cfg.dt, cfg.kernel, lat.sites / 2);

    std::vector<Accumulator> per_traj(trajectories);
    std::exception_ptr failure = nullptr;
#pragma omp parallel for schedule(dynamic)
    for (int id = 0; id < trajectories; ++id) {
        try {
            TrajectoryState state = init_state(lat, cfg.init, make_trajectory_rng(master_seed, id), id);
            Observer obs = [&](const TrajectoryState& s) {
                per_traj[id].add(mutual_information(s, mask_a, mask_b));
            };
            run_trajectory(lat, cfg, *prop, state, {obs});
        } catch (...) {
#pragma omp critical
            failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    Accumulator acc;
    for (const auto& t : per_traj)
        if (t.count() > 0) acc.add(t.mean());
    return {acc.mean(), acc.standard_error(), acc.count()};
}

}  // namespace mf
