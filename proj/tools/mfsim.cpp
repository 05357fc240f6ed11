// Command-line driver: simulation, analysis, collapse, synthetic calibration
// ensembles, and canned per-figure recipes.

#include <omp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mf/collapse.hpp"
#include "mf/ensemble.hpp"
#include "mf/io.hpp"
#include "mf/rmt.hpp"
#include "mf/scaling.hpp"

using namespace mf;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitIncomplete = 3;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt_g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

bool parse_bool(const std::string& s, bool fallback) {
    if (s.empty()) return fallback;
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError("not a boolean: " + s);
}

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
    int dim = 2;
    int length = 16;
    std::vector<double> gammas;
    EvolutionConfig evolution;
    int trajectories = 1;
    std::uint64_t master_seed = 1;
    int threads = 0;
    std::vector<Geometry> geometries;
    int strip_width = 0;
    bool strip_sweep = false;
    bool compute_kl1 = true;
    bool keep_spectra = true;
    bool keep_final_vectors = false;
    fs::path out_dir;
    std::string config_hash;
};

RunConfig load_run_config(const fs::path& path, const std::string& out_override) {
    KeyValueConfig kv;
    try {
        kv = KeyValueConfig::parse_file(path);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    RunConfig rc;
    rc.config_hash = kv.hash();
    rc.dim = static_cast<int>(kv.get_long("lattice.d", 2));
    rc.length = static_cast<int>(kv.get_long("lattice.L", 16));
    rc.gammas = kv.get_double_list("evolution.gamma_list");
    if (rc.gammas.empty() && kv.has("evolution.gamma")) rc.gammas = {kv.get_double("evolution.gamma", 0)};
    if (rc.gammas.empty()) throw ConfigError("config needs evolution.gamma_list");
    rc.evolution.dt = kv.get_double("evolution.dt", 0.05);
    rc.evolution.t_burn = kv.get_double("evolution.t_burn", -1.0);
    rc.evolution.sample_interval = kv.get_double("evolution.sample_interval", 1.0);
    rc.evolution.samples = static_cast<int>(kv.get_long("evolution.samples", 1));
    rc.evolution.init = init_state_from_name(kv.get("evolution.init", "random_gaussian"));
    const std::string kernel = kv.get("evolution.kernel", "fast");
    if (kernel == "fast") rc.evolution.kernel = StepKernel::fast;
    else if (kernel == "reference") rc.evolution.kernel = StepKernel::reference;
    else throw ConfigError("unknown kernel: " + kernel);
    rc.trajectories = static_cast<int>(kv.get_long("ensemble.trajectories", 1));
    if (rc.trajectories < 1) throw ConfigError("ensemble.trajectories must be >= 1");
    rc.master_seed = static_cast<std::uint64_t>(kv.get_long("ensemble.master_seed", 1));
    rc.threads = static_cast<int>(kv.get_long("ensemble.threads", 0));
    for (const auto& name : kv.get_list("geometry.type"))
        rc.geometries.push_back(geometry_from_name(name));
    if (rc.geometries.empty()) rc.geometries = {Geometry::checkerboard};
    rc.strip_width = static_cast<int>(kv.get_long("geometry.strip_width", 0));
    rc.strip_sweep = parse_bool(kv.get("geometry.strip_sweep", ""), false);
    rc.compute_kl1 = parse_bool(kv.get("observables.kl1", ""), true);
    rc.keep_spectra = parse_bool(kv.get("observables.keep_spectra", ""), true);
    rc.keep_final_vectors = parse_bool(kv.get("observables.keep_final_vectors", ""), false);

    std::string out = out_override.empty() ? kv.get("output.dir", "runs/out") : out_override;
    const char* root = std::getenv("MF_OUTPUT_ROOT");
    rc.out_dir = root && fs::path(out).is_relative() ? fs::path(root) / out : fs::path(out);

    // validate early: lattice + geometries must be constructible
    const Lattice lat = Lattice::make(rc.dim, rc.length);
    for (Geometry g : rc.geometries) make_mask(lat, g, rc.strip_width);
    rc.evolution.validate();
    return rc;
}

Provenance make_prov(const RunConfig& rc, double gamma, Geometry g) {
    Provenance p;
    p.dim = rc.dim;
    p.length = rc.length;
    p.gamma = gamma;
    p.dt = rc.evolution.dt;
    p.geometry = geometry_name(g);
    p.seed = rc.master_seed;
    p.config_hash = rc.config_hash;
    return p;
}

// ---------------------------------------------------------------------------
// simulate

void write_stats_csv(const fs::path& path, const std::vector<SnapshotStats>& stats,
                     const Provenance& prov) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    f << prov.header() << "trajectory,t,r_tilde,kl1,entropy,saturated\n";
    f << std::setprecision(17);
    for (const auto& s : stats)
        f << s.trajectory_id << ',' << s.time << ',' << s.r_tilde_mean << ',' << s.kl1 << ','
          << s.entropy << ',' << s.saturated << '\n';
    if (!f) throw std::runtime_error("write failed: " + path.string());
}

std::vector<SnapshotStats> read_stats_csv(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    std::vector<SnapshotStats> out;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 't') continue;
        std::istringstream is(line);
        SnapshotStats s;
        char c;
        if (is >> s.trajectory_id >> c >> s.time >> c >> s.r_tilde_mean >> c >> s.kl1 >> c >>
            s.entropy >> c >> s.saturated)
            out.push_back(s);
    }
    return out;
}

void write_strip_csv(const fs::path& path, const std::vector<double>& mean_entropy,
                     const Provenance& prov) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    f << prov.header() << "l_A,S\n" << std::setprecision(17);
    for (size_t w = 0; w < mean_entropy.size(); ++w) f << w + 1 << ',' << mean_entropy[w] << '\n';
}

std::vector<double> read_strip_csv(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    std::vector<double> out;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 'l') continue;
        std::istringstream is(line);
        long w;
        double s;
        char c;
        if (is >> w >> c >> s) out.push_back(s);
    }
    return out;
}

fs::path gamma_dir(const fs::path& out, Geometry g, double gamma) {
    return out / (geometry_name(g) + "_gamma" + fmt_g(gamma));
}

std::set<std::uint64_t> read_completed(const fs::path& dir) {
    std::set<std::uint64_t> done;
    std::ifstream f(dir / "completed.log");
    std::uint64_t id;
    while (f >> id) done.insert(id);
    return done;
}

/// Simulates one (geometry, gamma) point with per-trajectory completion
/// records; already-completed trajectories are never recomputed.
void simulate_point(const RunConfig& rc, Geometry geometry, double gamma) {
    const Lattice lat = Lattice::make(rc.dim, rc.length);
    const fs::path dir = gamma_dir(rc.out_dir, geometry, gamma);
    fs::create_directories(dir);
    const Provenance prov = make_prov(rc, gamma, geometry);

    EvolutionConfig cfg = rc.evolution;
    cfg.gamma = gamma;
    EnsembleOptions opts;
    opts.geometry = geometry;
    opts.strip_width = rc.strip_width;
    opts.compute_kl1 = rc.compute_kl1;
    opts.keep_spectra = rc.keep_spectra;
    opts.keep_final_vectors = rc.keep_final_vectors;
    opts.strip_sweep = rc.strip_sweep;

    const SubsystemMask mask = make_mask(lat, geometry, rc.strip_width);
    const auto prop = make_propagator(lat, cfg.dt, cfg.kernel, lat.sites / 2);

    const std::set<std::uint64_t> done = read_completed(dir);
    std::vector<std::uint64_t> pending;
    for (int id = 0; id < rc.trajectories; ++id)
        if (!done.count(id)) pending.push_back(id);

    std::exception_ptr failure = nullptr;
    const int threads = rc.threads > 0 ? rc.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (long k = 0; k < static_cast<long>(pending.size()); ++k) {
        if (failure) continue;
        try {
            const std::uint64_t id = pending[k];
            TrajectoryRecord rec =
                run_single_trajectory(lat, cfg, *prop, rc.master_seed, id, mask, opts);
            const std::string tag = "traj" + std::to_string(id);
            write_stats_csv(dir / (tag + "_stats.csv"), rec.stats, prov);
            if (rc.keep_spectra) write_spectra_csv(dir / (tag + "_spectra.csv"), rec.spectra, prov);
            if (rc.keep_final_vectors && rec.final_spectrum)
                write_amplitudes_bin(dir / (tag + "_amps.bin"), {*rec.final_spectrum});
            if (rc.strip_sweep) write_strip_csv(dir / (tag + "_strip.csv"), rec.strip_entropy, prov);
#pragma omp critical
            {
                std::ofstream log(dir / "completed.log", std::ios::app);
                log << id << '\n' << std::flush;
            }
        } catch (...) {
#pragma omp critical
            failure = std::current_exception();
        }
    }
    if (failure) {
        write_manifest(dir, rc.config_hash, rc.master_seed, {}, false);
        std::rethrow_exception(failure);
    }

    // Deterministic aggregates regenerated from the per-trajectory files.
    std::vector<SnapshotStats> all_stats;
    std::vector<fs::path> inventory;
    std::vector<Accumulator> strip_acc(rc.strip_sweep ? rc.length - 1 : 0);
    for (int id = 0; id < rc.trajectories; ++id) {
        const std::string tag = "traj" + std::to_string(id);
        const fs::path stats_file = dir / (tag + "_stats.csv");
        auto stats = read_stats_csv(stats_file);
        all_stats.insert(all_stats.end(), stats.begin(), stats.end());
        inventory.push_back(stats_file);
        if (rc.keep_spectra) inventory.push_back(dir / (tag + "_spectra.csv"));
        if (rc.keep_final_vectors) inventory.push_back(dir / (tag + "_amps.bin"));
        if (rc.strip_sweep) {
            const auto strip = read_strip_csv(dir / (tag + "_strip.csv"));
            for (size_t w = 0; w < strip.size(); ++w) strip_acc[w].add(strip[w]);
            inventory.push_back(dir / (tag + "_strip.csv"));
        }
    }
    write_stats_csv(dir / "stats.csv", all_stats, prov);
    inventory.push_back(dir / "stats.csv");

    Accumulator r_acc, kl_acc, s_acc;
    for (const auto& s : all_stats) {
        if (std::isfinite(s.r_tilde_mean)) r_acc.add(s.r_tilde_mean);
        if (std::isfinite(s.kl1)) kl_acc.add(s.kl1);
        s_acc.add(s.entropy);
    }
    {
        std::ofstream f(dir / "summary.csv");
        f << prov.header() << "observable,mean,stderr,count\n" << std::setprecision(17);
        f << "r_tilde," << r_acc.mean() << ',' << r_acc.standard_error() << ',' << r_acc.count() << '\n';
        f << "kl1," << kl_acc.mean() << ',' << kl_acc.standard_error() << ',' << kl_acc.count() << '\n';
        f << "entropy," << s_acc.mean() << ',' << s_acc.standard_error() << ',' << s_acc.count() << '\n';
        if (!f) throw std::runtime_error("write failed: summary.csv");
    }
    inventory.push_back(dir / "summary.csv");
    if (rc.strip_sweep) {
        ObservableSeries series;
        series.abscissa = "l_A";
        for (size_t w = 0; w < strip_acc.size(); ++w)
            series.points.push_back({static_cast<double>(w + 1), strip_acc[w].mean(),
                                     strip_acc[w].standard_error(), strip_acc[w].count()});
        write_series_csv(dir / "strip_entropy.csv", series, prov);
        inventory.push_back(dir / "strip_entropy.csv");
    }
    write_manifest(dir, rc.config_hash, rc.master_seed, inventory, true);
}

int cmd_simulate(const fs::path& config, const std::string& out_override) {
    const RunConfig rc = load_run_config(config, out_override);
    for (Geometry g : rc.geometries)
        for (double gamma : rc.gammas) {
            std::cout << "simulate d=" << rc.dim << " L=" << rc.length << " geometry="
                      << geometry_name(g) << " gamma=" << fmt_g(gamma) << "\n";
            simulate_point(rc, g, gamma);
        }
    std::cout << "simulate: complete -> " << rc.out_dir.string() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// analyze

struct PointMeta {
    fs::path dir;
    int dim = 0, length = 0;
    double gamma = 0;
    std::string geometry;
};

std::map<std::string, std::string> read_header(const fs::path& file) {
    std::map<std::string, std::string> kv;
    std::ifstream f(file);
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] != '#') break;
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        kv[line.substr(2, eq - 2)] = line.substr(eq + 1);
    }
    return kv;
}

std::vector<PointMeta> scan_run(const fs::path& run_dir, std::vector<fs::path>& incomplete) {
    std::vector<PointMeta> points;
    for (const auto& entry : fs::directory_iterator(run_dir)) {
        if (!entry.is_directory()) continue;
        if (!fs::exists(entry.path() / "summary.csv")) continue;
        if (!manifest_complete(entry.path())) {
            incomplete.push_back(entry.path());
            continue;
        }
        const auto hdr = read_header(entry.path() / "summary.csv");
        PointMeta m;
        m.dir = entry.path();
        m.dim = std::stoi(hdr.at("d"));
        m.length = std::stoi(hdr.at("L"));
        m.gamma = std::stod(hdr.at("gamma"));
        m.geometry = hdr.count("geometry") ? hdr.at("geometry") : "";
        points.push_back(m);
    }
    std::sort(points.begin(), points.end(), [](const PointMeta& a, const PointMeta& b) {
        return std::tie(a.geometry, a.length, a.gamma) < std::tie(b.geometry, b.length, b.gamma);
    });
    return points;
}

std::vector<EntanglementSpectrum> load_point_spectra(const PointMeta& m) {
    std::vector<EntanglementSpectrum> all;
    for (int id = 0;; ++id) {
        const fs::path f = m.dir / ("traj" + std::to_string(id) + "_spectra.csv");
        if (!fs::exists(f)) break;
        auto specs = read_spectra_csv(f);
        for (auto& s : specs) all.push_back(std::move(s));
    }
    return all;
}

int cmd_analyze(const fs::path& run_dir, std::string diagnostics, bool diagnostics_given) {
    if (!fs::is_directory(run_dir)) throw ConfigError("not a run directory: " + run_dir.string());
    if (diagnostics_given && diagnostics.empty()) return kExitOk;  // explicit no-op
    if (diagnostics.empty()) diagnostics = "r_tilde,kl1,entropy,kl2,dos,sff";
    std::set<std::string> wanted;
    {
        std::istringstream is(diagnostics);
        std::string item;
        while (std::getline(is, item, ',')) wanted.insert(item);
    }

    std::vector<fs::path> incomplete;
    const auto points = scan_run(run_dir, incomplete);
    for (const auto& p : incomplete)
        std::cerr << "warning: skipping incomplete point " << p.string() << "\n";
    if (points.empty()) {
        std::cerr << "analyze: no complete data points under " << run_dir.string() << "\n";
        return kExitIncomplete;
    }
    const fs::path adir = run_dir / "analysis";
    fs::create_directories(adir);

    // scalar observables straight from the per-point summaries
    for (const std::string& obs : {std::string("r_tilde"), std::string("kl1"), std::string("entropy")}) {
        if (!wanted.count(obs)) continue;
        std::ofstream f(adir / (obs + ".csv"));
        f << "# observable=" << obs << "\n# version=" << kCodeVersion << "\n";
        f << "geometry,d,L,gamma,mean,stderr,count\n" << std::setprecision(17);
        for (const auto& m : points) {
            std::ifstream s(m.dir / "summary.csv");
            std::string line;
            while (std::getline(s, line)) {
                if (line.rfind(obs + ",", 0) != 0) continue;
                f << m.geometry << ',' << m.dim << ',' << m.length << ',' << m.gamma << ','
                  << line.substr(obs.size() + 1) << '\n';
            }
        }
    }

    const bool need_spectra = wanted.count("dos") || wanted.count("sff");
    std::ofstream tau_file;
    if (wanted.count("sff")) {
        tau_file.open(adir / "tau_th.csv");
        tau_file << "# observable=tau_th\n# version=" << kCodeVersion << "\n";
        tau_file << "geometry,d,L,gamma,tau,condition_met\n" << std::setprecision(17);
    }
    std::ofstream kl2_file;
    if (wanted.count("kl2")) {
        kl2_file.open(adir / "kl2.csv");
        kl2_file << "# observable=kl2\n# version=" << kCodeVersion << "\n";
        kl2_file << "geometry,d,L,gamma,mean,stderr,count\n" << std::setprecision(17);
    }

    for (const auto& m : points) {
        const std::string tag = m.geometry + "_L" + std::to_string(m.length) + "_gamma" + fmt_g(m.gamma);
        if (need_spectra) {
            const auto spectra = load_point_spectra(m);
            if (spectra.empty()) {
                std::cerr << "warning: no spectra stored for " << m.dir.string() << ", skipping DoS/SFF\n";
            } else {
                if (wanted.count("dos")) {
                    const auto dos = density_of_states(spectra);
                    std::ofstream f(adir / ("dos_" + tag + ".csv"));
                    f << "# L=" << m.length << "\n# gamma=" << m.gamma << "\n";
                    f << "eps,density\n" << std::setprecision(17);
                    for (size_t b = 0; b < dos.bin_centers.size(); ++b)
                        f << dos.bin_centers[b] << ',' << dos.density[b] << '\n';
                    f << "# overflow_low=" << dos.overflow_low
                      << "\n# overflow_high=" << dos.overflow_high << '\n';
                }
                if (wanted.count("sff")) {
                    try {
                        const auto unfolded = unfold(spectra);
                        const auto sff = spectral_form_factor(unfolded);
                        std::ofstream f(adir / ("sff_" + tag + ".csv"));
                        f << "# L=" << m.length << "\n# gamma=" << m.gamma
                          << "\n# heisenberg_time=" << sff.heisenberg_time << "\n";
                        f << "t,tau,k\n" << std::setprecision(17);
                        for (size_t i = 0; i < sff.tau.size(); ++i)
                            f << sff.t[i] << ',' << sff.tau[i] << ',' << sff.k[i] << '\n';
                        const auto th = thouless_time(sff);
                        tau_file << m.geometry << ',' << m.dim << ',' << m.length << ',' << m.gamma
                                 << ',' << th.tau << ',' << (th.condition_met ? 1 : 0) << '\n';
                    } catch (const std::exception& e) {
                        std::cerr << "warning: SFF failed for " << tag << ": " << e.what() << "\n";
                    }
                }
            }
        }
        if (wanted.count("kl2")) {
            std::vector<EntanglementSpectrum> finals;
            for (int id = 0;; ++id) {
                const fs::path f = m.dir / ("traj" + std::to_string(id) + "_amps.bin");
                if (!fs::exists(f)) break;
                auto specs = read_amplitudes_bin(f);
                for (auto& s : specs) finals.push_back(std::move(s));
            }
            if (finals.size() < 2) {
                std::cerr << "warning: no eigenvector records for " << m.dir.string()
                          << ", skipping KL2\n";
            } else {
                const auto kl2 = kl2_ensemble(finals, m.length);
                kl2_file << m.geometry << ',' << m.dim << ',' << m.length << ',' << m.gamma << ','
                         << kl2.mean << ',' << kl2.stderr_ << ',' << kl2.count << '\n';
            }
        }
    }
    std::cout << "analyze: reports in " << adir.string() << "\n";
    return incomplete.empty() ? kExitOk : kExitIncomplete;
}

// ---------------------------------------------------------------------------
// collapse

CollapseInput read_collapse_input(const std::vector<fs::path>& files, const std::string& observable) {
    CollapseInput in;
    in.observable = observable;
    for (const auto& file : files) {
        std::ifstream f(file);
        if (!f) throw ConfigError("cannot open " + file.string());
        std::string line;
        while (std::getline(f, line)) {
            if (line.empty() || line[0] == '#' || line.rfind("geometry", 0) == 0) continue;
            // geometry,d,L,gamma,mean,stderr[,count]
            std::vector<std::string> cols;
            std::istringstream is(line);
            std::string c;
            while (std::getline(is, c, ',')) cols.push_back(c);
            if (cols.size() < 6) continue;
            CollapseRecord r;
            r.length = std::stoi(cols[2]);
            r.gamma = std::stod(cols[3]);
            r.y = std::stod(cols[4]);
            r.sigma = std::stod(cols[5]);
            if (!(r.sigma > 0)) r.sigma = std::max(1e-4, 0.01 * std::abs(r.y));
            in.records.push_back(r);
        }
    }
    return in;
}

int cmd_collapse(const std::vector<fs::path>& inputs, const std::string& observable,
                 const std::string& ansatz_name, const std::string& out_prefix) {
    CollapseInput in = read_collapse_input(inputs, observable);
    try {
        in.validate();
    } catch (const std::exception& e) {
        std::cerr << "collapse: insufficient input data: " << e.what() << "\n";
        return kExitIncomplete;
    }
    const CollapseAnsatz ansatz =
        ansatz_name == "nonlinear" ? CollapseAnsatz::nonlinear : CollapseAnsatz::linear;
    const CollapseResult res = minimize_collapse(in, ansatz);

    {
        std::ofstream f(out_prefix + "_summary.csv");
        f << "# observable=" << observable << "\n# ansatz=" << ansatz_name
          << "\n# version=" << kCodeVersion << "\n";
        f << "gamma_c,gamma_c_err,nu,nu_err,a,chi_star,chi_per_dof,converged\n"
          << std::setprecision(17);
        f << res.gamma_c << ',' << res.gamma_c_err << ',' << res.nu << ',' << res.nu_err << ','
          << res.a << ',' << res.chi_star << ',' << res.chi_per_dof << ','
          << (res.converged ? 1 : 0) << '\n';
    }
    {
        std::ofstream f(out_prefix + "_heatmap.csv");
        f << "# observable=" << observable << "\n";
        f << "gamma_c,nu,chi_over_min\n" << std::setprecision(10);
        for (size_t ig = 0; ig < res.grid_gamma_c.size(); ++ig)
            for (size_t in2 = 0; in2 < res.grid_nu.size(); ++in2)
                f << res.grid_gamma_c[ig] << ',' << res.grid_nu[in2] << ','
                  << res.grid_cost[ig][in2] << '\n';
    }
    std::printf("collapse %s: gamma_c = %.4f +- %.4f, nu = %.3f +- %.3f, chi2/dof = %.2f%s\n",
                observable.c_str(), res.gamma_c, res.gamma_c_err, res.nu, res.nu_err,
                res.chi_per_dof, res.converged ? "" : " (boundary!)");
    return kExitOk;
}

// ---------------------------------------------------------------------------
// synthetic

int cmd_synthetic(const std::string& kind, int levels, int samples, std::uint64_t seed,
                  const std::string& out) {
    if (kind != "gue" && kind != "poisson") throw ConfigError("kind must be gue or poisson");
    std::mt19937_64 rng(seed);
    std::vector<std::vector<double>> spectra;
    spectra.reserve(samples);
    for (int k = 0; k < samples; ++k)
        spectra.push_back(kind == "gue" ? sample_gue_spectrum(levels, rng)
                                        : sample_poisson_spectrum(levels, rng));
    if (!out.empty()) {
        std::ofstream f(out);
        if (!f) throw std::runtime_error("cannot open " + out);
        f << "# kind=" << kind << "\n# levels=" << levels << "\n# seed=" << seed
          << "\n# version=" << kCodeVersion << "\n";
        f << "trajectory,t,alpha,eps,saturated\n" << std::setprecision(17);
        for (int k = 0; k < samples; ++k)
            for (int a = 0; a < levels; ++a)
                f << k << ',' << 0.0 << ',' << a << ',' << spectra[k][a] << ",0\n";
    }
    const auto r = mean_gap_ratio_raw(spectra);
    const auto unfolded = unfold(spectra);
    const auto sff = spectral_form_factor(unfolded);
    const auto th = thouless_time(sff);
    std::printf("synthetic %s: n=%d samples=%d  <r~> = %.5f +- %.5f  tau_th = %.3f (%s)\n",
                kind.c_str(), levels, samples, r.mean, r.stderr_, th.tau,
                th.condition_met ? "matched" : "no match");
    return kExitOk;
}

// ---------------------------------------------------------------------------
// figure recipes

RunConfig figure_base(int dim, int length, int trajectories, std::uint64_t seed, const fs::path& out) {
    RunConfig rc;
    rc.dim = dim;
    rc.length = length;
    rc.trajectories = trajectories;
    rc.master_seed = seed;
    rc.out_dir = out;
    rc.evolution.init = InitState::random_gaussian;
    rc.evolution.samples = 2;
    rc.evolution.sample_interval = 2.0;
    rc.config_hash = "figure";
    return rc;
}

void run_points(RunConfig rc, Geometry g, const std::vector<double>& gammas) {
    rc.geometries = {g};
    rc.gammas = gammas;
    for (double gamma : gammas) {
        std::cout << "figure point: " << geometry_name(g) << " L=" << rc.length
                  << " gamma=" << fmt_g(gamma) << "\n";
        simulate_point(rc, g, gamma);
    }
}

int cmd_figure(int n, int length, int trajectories, std::uint64_t seed, const fs::path& out) {
    fs::create_directories(out);
    switch (n) {
        case 1: {
            // entanglement density profiles at the four fixed points + growth curves
            RunConfig rc = figure_base(2, length, trajectories, seed, out);
            rc.strip_sweep = true;
            rc.keep_spectra = false;
            rc.compute_kl1 = false;
            run_points(rc, Geometry::half_cut, {0.05, 2.15, 5.1, 10.0});
            const Lattice lat = Lattice::make(2, length);
            std::ofstream fits(out / "law_fits.csv");
            fits << "gamma,law,residual_rms,param\n" << std::setprecision(10);
            for (double gamma : {0.05, 2.15, 5.1, 10.0}) {
                const fs::path d = gamma_dir(out, Geometry::half_cut, gamma);
                std::ifstream f(d / "strip_entropy.csv");
                ObservableSeries s;
                s.abscissa = "l_A";
                std::string line;
                while (std::getline(f, line)) {
                    if (line.empty() || line[0] == '#' || line[0] == 'l') continue;
                    std::istringstream is(line);
                    SeriesPoint p;
                    char c;
                    if (is >> p.x >> c >> p.mean >> c >> p.stderr_ >> c >> p.count) {
                        p.mean /= length;  // density
                        p.stderr_ /= length;
                        s.points.push_back(p);
                    }
                }
                for (ScalingLaw law : {ScalingLaw::page, ScalingLaw::fermi_liquid,
                                       ScalingLaw::lifshitz, ScalingLaw::area}) {
                    const auto fit = fit_scaling_law(s, length, law);
                    const double param = law == ScalingLaw::fermi_liquid ? fit.s0
                                         : law == ScalingLaw::lifshitz   ? fit.lambda
                                                                         : fit.constant;
                    fits << gamma << ',' << scaling_law_name(law) << ',' << fit.residual_rms << ','
                         << param << '\n';
                }
                // entropy growth from a Neel start
                EvolutionConfig growth;
                growth.gamma = gamma;
                const auto curve = entropy_growth_curve(lat, growth, std::max(4, trajectories / 4),
                                                        seed + 101, 2.0 * length, 1.0);
                Provenance prov;
                prov.dim = 2;
                prov.length = length;
                prov.gamma = gamma;
                prov.dt = growth.dt;
                prov.geometry = "half_cut";
                prov.seed = seed + 101;
                prov.config_hash = "figure1";
                write_series_csv(out / ("growth_gamma" + fmt_g(gamma) + ".csv"), curve, prov);
            }
            break;
        }
        case 2: {
            // DoS for half-cut vs checkerboard at weak/strong monitoring + P(r)
            RunConfig rc = figure_base(2, length, trajectories, seed, out);
            run_points(rc, Geometry::half_cut, {0.1, 10.0});
            run_points(rc, Geometry::checkerboard, {0.1, 10.0});
            const int rcode = cmd_analyze(out, "dos,r_tilde", true);
            if (rcode != kExitOk) return rcode;
            for (double gamma : {0.1, 10.0}) {
                const auto spectra =
                    load_point_spectra({gamma_dir(out, Geometry::checkerboard, gamma), 2, length,
                                        gamma, "checkerboard"});
                std::vector<std::vector<double>> levels;
                for (const auto& s : spectra) levels.push_back(s.unsaturated_energies());
                const auto h = r_distribution(levels);
                std::ofstream f(out / ("r_dist_gamma" + fmt_g(gamma) + ".csv"));
                f << "r,density,poisson,gue\n" << std::setprecision(10);
                for (size_t b = 0; b < h.centers.size(); ++b)
                    f << h.centers[b] << ',' << h.density[b] << ',' << poisson_r_pdf(h.centers[b])
                      << ',' << gue_r_pdf(h.centers[b]) << '\n';
            }
            break;
        }
        case 3: {
            // <r~> and KL1 vs L in the two limits
            for (int l : {length / 2, 3 * length / 4, length}) {
                if (l < 4 || l % 2) continue;
                RunConfig rc = figure_base(2, l, trajectories, seed, out);
                run_points(rc, Geometry::checkerboard, {0.1, 10.0});
            }
            return cmd_analyze(out, "r_tilde,kl1", true);
        }
        case 4: {
            // SFF and KL2 vs L in the two limits
            for (int l : {length / 2, length}) {
                if (l < 4 || l % 2) continue;
                RunConfig rc = figure_base(2, l, trajectories, seed, out);
                rc.keep_final_vectors = true;
                run_points(rc, Geometry::checkerboard, {0.1, 10.0});
            }
            return cmd_analyze(out, "sff,kl2", true);
        }
        case 5: {
            // transition curves <r~>(gamma), KL1(gamma) across sizes + collapse
            std::vector<double> gammas;
            for (int i = 0; i < 9; ++i) gammas.push_back(4.4 + 1.6 * i / 8.0);
            for (int l : {length / 2, 3 * length / 4, length}) {
                if (l < 4 || l % 2) continue;
                RunConfig rc = figure_base(2, l, trajectories, seed, out);
                run_points(rc, Geometry::checkerboard, gammas);
            }
            const int rcode = cmd_analyze(out, "r_tilde,kl1", true);
            if (rcode != kExitOk) return rcode;
            cmd_collapse({out / "analysis" / "r_tilde.csv"}, "r_tilde", "linear",
                         (out / "collapse_r_tilde").string());
            cmd_collapse({out / "analysis" / "kl1.csv"}, "kl1", "linear",
                         (out / "collapse_kl1").string());
            break;
        }
        case 6: {
            // SFF vs gamma at fixed L, Thouless times
            RunConfig rc = figure_base(2, length, trajectories, seed, out);
            run_points(rc, Geometry::checkerboard, {0.5, 2.0, 4.0, 5.1, 7.0, 10.0});
            return cmd_analyze(out, "sff", true);
        }
        case 7: {
            // KL2 vs gamma across sizes (crossing at gamma_* < gamma_c)
            std::vector<double> gammas{2.0, 3.0, 4.0, 4.5, 5.0, 5.5, 6.0};
            for (int l : {length / 2, 3 * length / 4, length}) {
                if (l < 4 || l % 2) continue;
                RunConfig rc = figure_base(2, l, trajectories, seed, out);
                rc.keep_final_vectors = true;
                run_points(rc, Geometry::checkerboard, gammas);
            }
            return cmd_analyze(out, "kl1,kl2", true);
        }
        case 8: {
            // 3D transition curves
            std::vector<double> gammas{6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0};
            for (int l : {4, 6, std::min(8, length)}) {
                RunConfig rc = figure_base(3, l, trajectories, seed, out);
                run_points(rc, Geometry::checkerboard, gammas);
            }
            return cmd_analyze(out, "r_tilde,kl1", true);
        }
        default:
            throw ConfigError("figure number must be 1..8");
    }
    std::cout << "figure " << n << ": outputs in " << out.string() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"monitored free-fermion simulator and entanglement-spectrum analyzer"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "run monitored trajectories from a config file");
    std::string sim_config, sim_out;
    sim->add_option("--config", sim_config, "key = value run configuration")->required();
    sim->add_option("--out", sim_out, "output directory override");

    // analyze
    auto* ana = app.add_subcommand("analyze", "compute diagnostics over a run directory");
    std::string ana_dir, ana_diag;
    bool ana_diag_given = false;
    ana->add_option("--run", ana_dir, "run directory produced by simulate")->required();
    ana->add_option("--diagnostics", ana_diag,
                    "comma list: r_tilde,kl1,entropy,kl2,dos,sff (default all; empty = no-op)")
        ->trigger_on_parse()
        ->each([&](const std::string&) { ana_diag_given = true; });

    // collapse
    auto* col = app.add_subcommand("collapse", "finite-size-scaling collapse of analyze reports");
    std::vector<std::string> col_inputs;
    std::string col_obs = "r_tilde", col_ansatz = "linear", col_prefix = "collapse";
    col->add_option("--input", col_inputs, "report csv (geometry,d,L,gamma,mean,stderr,...)")
        ->required();
    col->add_option("--observable", col_obs, "observable label");
    col->add_option("--ansatz", col_ansatz, "linear | nonlinear")
        ->check(CLI::IsMember({"linear", "nonlinear"}));
    col->add_option("--out-prefix", col_prefix, "output file prefix");

    // synthetic
    auto* syn = app.add_subcommand("synthetic", "calibration ensembles (GUE / Poisson)");
    std::string syn_kind = "gue", syn_out;
    int syn_levels = 200, syn_samples = 500;
    std::uint64_t syn_seed = 1;
    syn->add_option("--kind", syn_kind, "gue | poisson")->check(CLI::IsMember({"gue", "poisson"}));
    syn->add_option("--levels", syn_levels, "matrix dimension / levels per sample");
    syn->add_option("--samples", syn_samples, "number of spectra");
    syn->add_option("--seed", syn_seed, "rng seed");
    syn->add_option("--out", syn_out, "write spectra csv here");

    // figure
    auto* fig = app.add_subcommand("figure", "canned figure recipes at configurable scale");
    int fig_n = 1, fig_length = 8, fig_traj = 8;
    std::uint64_t fig_seed = 1;
    std::string fig_out = "figures";
    fig->add_option("n", fig_n, "figure number 1..8")->required();
    fig->add_option("--length", fig_length, "largest linear size");
    fig->add_option("--trajectories", fig_traj, "trajectories per point");
    fig->add_option("--seed", fig_seed, "master seed");
    fig->add_option("--out", fig_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*sim) return cmd_simulate(sim_config, sim_out);
        if (*ana) return cmd_analyze(ana_dir, ana_diag, ana_diag_given);
        if (*col) {
            std::vector<fs::path> files(col_inputs.begin(), col_inputs.end());
            return cmd_collapse(files, col_obs, col_ansatz, col_prefix);
        }
        if (*syn) return cmd_synthetic(syn_kind, syn_levels, syn_samples, syn_seed, syn_out);
        if (*fig) return cmd_figure(fig_n, fig_length, fig_traj, fig_seed, fig_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitConfig;
}
