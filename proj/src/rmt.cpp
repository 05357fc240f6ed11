#include "mf/rmt.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace mf {

namespace {
constexpr double kDegenerateSpacing = 1e-13;

MeanStderr summarize(const std::vector<double>& values) {
    Accumulator acc;
    for (double v : values) acc.add(v);
    return {acc.mean(), acc.standard_error(), acc.count()};
}
}  // namespace

GapRatios gap_ratios(const std::vector<double>& sorted_levels) {
    if (sorted_levels.size() < 3) throw std::invalid_argument("gap ratios need >= 3 levels");
    GapRatios out;
    out.r.reserve(sorted_levels.size() - 2);
    for (size_t a = 1; a + 1 < sorted_levels.size(); ++a) {
        const double s0 = sorted_levels[a] - sorted_levels[a - 1];
        const double s1 = sorted_levels[a + 1] - sorted_levels[a];
        if (s0 < kDegenerateSpacing || s1 < kDegenerateSpacing) {
            ++out.skipped_degenerate;
            continue;
        }
        const double r = s0 / s1;
        out.r.push_back(r);
        out.r_tilde.push_back(std::min(r, 1.0 / r));
    }
    return out;
}

GapRatios gap_ratios(const EntanglementSpectrum& spec) {
    return gap_ratios(spec.unsaturated_energies());
}

MeanStderr mean_gap_ratio(const std::vector<EntanglementSpectrum>& ensemble) {
    if (ensemble.empty()) throw std::invalid_argument("empty ensemble");
    std::vector<double> per_spectrum;
    for (const auto& spec : ensemble) {
        GapRatios g = gap_ratios(spec);
        if (g.r_tilde.empty()) continue;
        double s = 0;
        for (double v : g.r_tilde) s += v;
        per_spectrum.push_back(s / g.r_tilde.size());
    }
    if (per_spectrum.empty()) throw std::runtime_error("no usable spectra for <r~>");
    return summarize(per_spectrum);
}

MeanStderr mean_gap_ratio_raw(const std::vector<std::vector<double>>& spectra) {
    std::vector<double> per_spectrum;
    for (const auto& levels : spectra) {
        GapRatios g = gap_ratios(levels);
        if (g.r_tilde.empty()) continue;
        double s = 0;
        for (double v : g.r_tilde) s += v;
        per_spectrum.push_back(s / g.r_tilde.size());
    }
    if (per_spectrum.empty()) throw std::runtime_error("no usable spectra for <r~>");
    return summarize(per_spectrum);
}

Histogram histogram(const std::vector<double>& values, int bins, double lo, double hi) {
    if (bins < 1 || hi <= lo) throw std::invalid_argument("bad histogram spec");
    Histogram h;
    h.centers.resize(bins);
    h.density.assign(bins, 0.0);
    const double width = (hi - lo) / bins;
    for (int b = 0; b < bins; ++b) h.centers[b] = lo + (b + 0.5) * width;
    long total = 0;
    for (double v : values) {
        if (v < lo || v >= hi) continue;
        h.density[static_cast<int>((v - lo) / width)] += 1.0;
        ++total;
    }
    if (total > 0)
        for (double& d : h.density) d /= total * width;
    return h;
}

Histogram r_distribution(const std::vector<std::vector<double>>& spectra, int bins, double r_max) {
    std::vector<double> pooled;
    for (const auto& levels : spectra) {
        GapRatios g = gap_ratios(levels);
        pooled.insert(pooled.end(), g.r.begin(), g.r.end());
    }
    return histogram(pooled, bins, 0.0, r_max);
}

double poisson_r_pdf(double r) {
    return 1.0 / ((1.0 + r) * (1.0 + r));
}

double gue_r_pdf(double r) {
    // beta = 2 Wigner-like surmise, C = 81 sqrt(3) / (4 pi).
    const double c = 81.0 * std::sqrt(3.0) / (4.0 * std::numbers::pi);
    const double num = std::pow(r + r * r, 2.0);
    const double den = std::pow(1.0 + r + r * r, 4.0);
    return c * num / den;
}

namespace {
double kl_sum(const Eigen::MatrixXd& amp_a, long col_a, const Eigen::MatrixXd& amp_b, long col_b) {
    constexpr double floor = 1e-300;
    double s = 0.0;
    for (long i = 0; i < amp_a.rows(); ++i) {
        const double p = std::max(amp_a(i, col_a), floor);
        const double q = std::max(amp_b(i, col_b), floor);
        s += p * std::log(p / q);
    }
    return s;
}
}  // namespace

double kl1(const EntanglementSpectrum& spec, int linear_size) {
    if (spec.amplitudes.size() == 0) throw std::invalid_argument("KL1 needs eigenvectors");
    double total = 0.0;
    for (long a = 0; a + 1 < spec.size(); ++a)
        total += kl_sum(spec.amplitudes, a, spec.amplitudes, a + 1);
    return 2.0 / linear_size * total;
}

MeanStderr kl1_ensemble(const std::vector<EntanglementSpectrum>& ensemble, int linear_size) {
    std::vector<double> values;
    for (const auto& spec : ensemble) values.push_back(kl1(spec, linear_size));
    return summarize(values);
}

double kl2_pair(const EntanglementSpectrum& a, const EntanglementSpectrum& b, int linear_size) {
    if (a.amplitudes.size() == 0 || b.amplitudes.size() == 0)
        throw std::invalid_argument("KL2 needs eigenvectors");
    if (a.amplitudes.rows() != b.amplitudes.rows())
        throw std::invalid_argument("KL2 spectra live on different masks");
    double total = 0.0;
    const long m = std::min(a.size(), b.size());
    for (long alpha = 0; alpha + 1 < m; ++alpha)
        total += kl_sum(a.amplitudes, alpha, b.amplitudes, alpha + 1);
    return 2.0 / linear_size * total;
}

MeanStderr kl2_ensemble(const std::vector<EntanglementSpectrum>& ensemble, int linear_size) {
    if (ensemble.size() < 2) throw std::invalid_argument("KL2 needs >= 2 spectra");
    std::vector<double> values;
    for (size_t k = 0; k + 1 < ensemble.size(); k += 2)
        values.push_back(kl2_pair(ensemble[k], ensemble[k + 1], linear_size));
    return summarize(values);
}

std::vector<std::vector<double>> unfold(const std::vector<std::vector<double>>& spectra) {
    if (spectra.empty()) throw std::invalid_argument("nothing to unfold");
    // Pooled sorted levels and the trajectory-averaged cumulative function.
    std::vector<double> pooled;
    for (const auto& s : spectra) pooled.insert(pooled.end(), s.begin(), s.end());
    std::sort(pooled.begin(), pooled.end());
    const long m = static_cast<long>(pooled.size());
    if (m < 4) throw std::invalid_argument("too few levels to unfold");
    std::vector<double> cumulative(m);
    // Each pooled level contributes 1/T to the averaged staircase.
    for (long i = 0; i < m; ++i) cumulative[i] = (i + 0.5) / spectra.size();

    auto apply = [&](auto&& eval) {
        std::vector<std::vector<double>> out;
        out.reserve(spectra.size());
        for (const auto& s : spectra) {
            std::vector<double> u;
            u.reserve(s.size());
            for (double e : s) u.push_back(eval(e));
            std::sort(u.begin(), u.end());
            out.push_back(std::move(u));
        }
        return out;
    };

    int knots = std::max<long>(10, (m + 49) / 50);
    while (knots >= 10) {
        try {
            CubicSpline spline = CubicSpline::fit(pooled, cumulative, {}, knots);
            if (spline.min_derivative() >= 0.0)
                return apply([&](double e) { return spline(e); });
        } catch (const std::runtime_error&) {
            // fall through to fewer knots
        }
        knots /= 2;
    }
    // Monotone fallback: piecewise-linear interpolation of the averaged staircase.
    auto linear = [&](double e) {
        auto it = std::lower_bound(pooled.begin(), pooled.end(), e);
        if (it == pooled.begin()) return cumulative.front();
        if (it == pooled.end()) return cumulative.back();
        const long j = it - pooled.begin();
        const double x0 = pooled[j - 1], x1 = pooled[j];
        if (x1 <= x0) return cumulative[j];
        const double f = (e - x0) / (x1 - x0);
        return cumulative[j - 1] + f * (cumulative[j] - cumulative[j - 1]);
    };
    return apply(linear);
}

std::vector<std::vector<double>> unfold(const std::vector<EntanglementSpectrum>& ensemble) {
    std::vector<std::vector<double>> spectra;
    spectra.reserve(ensemble.size());
    for (const auto& spec : ensemble) spectra.push_back(spec.unsaturated_energies());
    return unfold(spectra);
}

SFFCurve spectral_form_factor(const std::vector<std::vector<double>>& unfolded,
                              double eta, int grid_points, double tau_min, double tau_max) {
    if (unfolded.empty()) throw std::invalid_argument("empty ensemble");

    // Measured mean unfolded spacing inside the filter window, averaged
    // over trajectories; approximately 1 by construction.
    Accumulator spacing_acc;
    for (const auto& levels : unfolded) {
        if (levels.size() < 2) continue;
        double mean = 0;
        for (double e : levels) mean += e;
        mean /= levels.size();
        double var = 0;
        for (double e : levels) var += (e - mean) * (e - mean);
        const double width = eta * std::sqrt(var / levels.size());
        double lo = mean, hi = mean;
        long inside = 0;
        for (double e : levels)
            if (std::abs(e - mean) <= width) {
                lo = std::min(lo, e);
                hi = std::max(hi, e);
                ++inside;
            }
        if (inside >= 2) spacing_acc.add((hi - lo) / (inside - 1));
    }
    const double mean_spacing = spacing_acc.count() > 0 ? spacing_acc.mean() : 1.0;

    SFFCurve curve;
    curve.heisenberg_time = 2.0 * std::numbers::pi / mean_spacing;
    curve.tau.resize(grid_points);
    curve.t.resize(grid_points);
    curve.k.assign(grid_points, 0.0);
    const double log_lo = std::log(tau_min), log_hi = std::log(tau_max);
    for (int i = 0; i < grid_points; ++i) {
        curve.tau[i] = std::exp(log_lo + (log_hi - log_lo) * i / (grid_points - 1));
        curve.t[i] = curve.tau[i] * curve.heisenberg_time;
    }

    long used = 0;
    for (const auto& levels : unfolded) {
        if (levels.empty()) continue;
        double mean = 0;
        for (double e : levels) mean += e;
        mean /= levels.size();
        double var = 0;
        for (double e : levels) var += (e - mean) * (e - mean);
        const double gw = eta * std::sqrt(var / levels.size());
        std::vector<double> g(levels.size());
        double z = 0;
        for (size_t a = 0; a < levels.size(); ++a) {
            g[a] = gw > 0 ? std::exp(-0.5 * std::pow((levels[a] - mean) / gw, 2.0)) : 1.0;
            z += g[a] * g[a];
        }
        if (z <= 0) throw std::runtime_error("empty SFF filter window");
        for (int i = 0; i < grid_points; ++i) {
            std::complex<double> sum = 0;
            for (size_t a = 0; a < levels.size(); ++a)
                sum += g[a] * std::polar(1.0, levels[a] * curve.t[i]);
            curve.k[i] += std::norm(sum) / z;
        }
        ++used;
    }
    if (used == 0) throw std::runtime_error("no usable spectra for SFF");
    for (double& k : curve.k) k /= used;
    return curve;
}

double sff_gue(double tau) {
    return tau < 1.0 ? tau : 1.0;
}

ThoulessTime thouless_time(const SFFCurve& sff, double eps_tol) {
    // Persistence: the condition must hold from the candidate point through
    // tau = 1 to discard spurious early crossings.
    const long n = static_cast<long>(sff.tau.size());
    long last = -1;
    for (long i = 0; i < n; ++i)
        if (sff.tau[i] <= 1.0) last = i;
    if (last < 0) throw std::invalid_argument("SFF grid does not reach tau <= 1");
    std::vector<bool> ok(last + 1);
    for (long i = 0; i <= last; ++i) {
        const double k = std::max(sff.k[i], 1e-300);
        ok[i] = std::abs(std::log(k) - std::log(sff_gue(sff.tau[i]))) < eps_tol;
    }
    long first = -1;
    for (long i = last; i >= 0; --i) {
        if (!ok[i]) break;
        first = i;
    }
    if (first < 0) return {1.0, false};
    return {std::min(sff.tau[first], 1.0), true};
}

std::vector<double> sample_gue_spectrum(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix h(n, n);
    for (int i = 0; i < n; ++i) {
        h(i, i) = normal(rng);
        for (int j = i + 1; j < n; ++j) {
            h(i, j) = std::complex<double>(normal(rng), normal(rng)) / std::sqrt(2.0);
            h(j, i) = std::conj(h(i, j));
        }
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    std::vector<double> out(es.eigenvalues().data(), es.eigenvalues().data() + n);
    return out;
}

std::vector<double> sample_poisson_spectrum(int n, std::mt19937_64& rng) {
    std::exponential_distribution<double> exp1(1.0);
    std::vector<double> out(n);
    double x = 0;
    for (int i = 0; i < n; ++i) {
        x += exp1(rng);
        out[i] = x;
    }
    return out;
}

}  // namespace mf
