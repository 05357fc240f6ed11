#pragma once

#include <optional>
#include <random>
#include <vector>

#include "mf/espectrum.hpp"
#include "mf/spline.hpp"

namespace mf {

struct MeanStderr {
    double mean = 0;
    double stderr_ = 0;
    long count = 0;
};

struct GapRatios {
    std::vector<double> r;        // (e_a - e_{a-1}) / (e_{a+1} - e_a)
    std::vector<double> r_tilde;  // min(r, 1/r)
    long skipped_degenerate = 0;  // spacings below 1e-13
};

/// Consecutive-spacing ratios of a sorted spectrum. Needs >= 3 levels.
GapRatios gap_ratios(const std::vector<double>& sorted_levels);
/// Saturated levels are excluded first.
GapRatios gap_ratios(const EntanglementSpectrum& spec);

/// <r~> averaged within each spectrum, then across spectra; stderr from the
/// spectrum-to-spectrum scatter.
MeanStderr mean_gap_ratio(const std::vector<EntanglementSpectrum>& ensemble);
MeanStderr mean_gap_ratio_raw(const std::vector<std::vector<double>>& spectra);

struct Histogram {
    std::vector<double> centers;
    std::vector<double> density;  // normalized
};

Histogram histogram(const std::vector<double>& values, int bins, double lo, double hi);

/// Pooled P(r) histogram across an ensemble (r, not r~).
Histogram r_distribution(const std::vector<std::vector<double>>& spectra, int bins = 50, double r_max = 10.0);

/// Reference surmises: Poisson 1/(1+r)^2 and the GUE Wigner-like form.
double poisson_r_pdf(double r);
double gue_r_pdf(double r);

constexpr double kMeanRTildePoisson = 0.38629;
constexpr double kMeanRTildeGue = 0.60266;

/// KL divergence between consecutive eigenfunctions of one spectrum,
/// normalized by 2/L with L the linear system size.
double kl1(const EntanglementSpectrum& spec, int linear_size);
MeanStderr kl1_ensemble(const std::vector<EntanglementSpectrum>& ensemble, int linear_size);

/// Cross-realization variant: spectra paired (2k, 2k+1), psi_a of the first
/// against psi_{a+1} of the second, both rank-ordered by energy.
double kl2_pair(const EntanglementSpectrum& a, const EntanglementSpectrum& b, int linear_size);
MeanStderr kl2_ensemble(const std::vector<EntanglementSpectrum>& ensemble, int linear_size);

/// Unfolds spectra against the trajectory-averaged cumulative spectral
/// function, smoothed with a least-squares cubic spline (knots reduced until
/// monotone; piecewise-linear fallback). Mean bulk spacing becomes ~1.
std::vector<std::vector<double>> unfold(const std::vector<std::vector<double>>& spectra);
std::vector<std::vector<double>> unfold(const std::vector<EntanglementSpectrum>& ensemble);

struct SFFCurve {
    std::vector<double> t;    // absolute time grid
    std::vector<double> tau;  // t / T_H
    std::vector<double> k;
    double heisenberg_time = 0;
};

/// Trajectory-averaged filtered spectral form factor of unfolded spectra.
/// Gaussian filter centered at the per-trajectory mean with width eta*std.
/// tau = t/T_H with T_H = 2 pi / (measured mean unfolded spacing in the
/// filter window), calibrated so a GUE ramp hits its plateau at tau = 1.
SFFCurve spectral_form_factor(const std::vector<std::vector<double>>& unfolded,
                              double eta = 0.5, int grid_points = 240,
                              double tau_min = 1e-3, double tau_max = 10.0);

double sff_gue(double tau);

struct ThoulessTime {
    double tau = 1.0;
    bool condition_met = false;  // false: SFF never reached the GUE form
};

/// Earliest grid tau where |log K - log K_GUE| < eps_tol and stays below it
/// up to tau = 1; capped at 1.
ThoulessTime thouless_time(const SFFCurve& sff, double eps_tol = 0.05);

/// Synthetic calibration ensembles.
std::vector<double> sample_gue_spectrum(int n, std::mt19937_64& rng);
std::vector<double> sample_poisson_spectrum(int n, std::mt19937_64& rng);

}  // namespace mf
