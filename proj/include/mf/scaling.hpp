#pragma once

#include <string>
#include <vector>

#include "mf/observables.hpp"

namespace mf {

/// Digamma for z > 0: recurrence into z > 10, then the asymptotic series.
/// Absolute error below 1e-12.
double digamma(double z);

/// Gaussian Page law for the entanglement density of a strip l_A x L.
/// Evaluated directly for l_A <= L/2 and mirrored s(l_A) = s(L - l_A)
/// above (the printed form diverges at l_A = L; pure-state symmetry fixes
/// the extension).
double page_law_density(int cut, int length);

/// s_A = (1/3) ln[L sin(pi l_A / L)] + s0, natural log.
double fermi_liquid_density(int cut, int length, double s0);

/// Theta constant theta_3(ix) = sum_n exp(-pi x n^2), x > 0.
double jacobi_theta3(double x);

/// eta(iy) = e^{-pi y/12} prod_{n>=1} (1 - e^{-2 pi n y}), y > 0.
double dedekind_eta(double y);

/// Quantum Lifshitz correction J(u) for u in (0,1), lambda > 0.
double lifshitz_J(double u, double lambda);

enum class ScalingLaw { page, fermi_liquid, lifshitz, area };

std::string scaling_law_name(ScalingLaw law);

struct ScalingLawFit {
    ScalingLaw law = ScalingLaw::area;
    double s0 = 0;        // fermi_liquid offset
    double a = 0, b = 0;  // lifshitz coefficients
    double lambda = 1;    // lifshitz exponent
    double constant = 0;  // area-law value
    double residual_rms = 0;
    bool converged = true;
};

/// Weighted least squares of an entanglement-density curve (abscissa l_A)
/// against one of the closed-form laws. Needs >= 5 points with error bars.
ScalingLawFit fit_scaling_law(const ObservableSeries& series, int length, ScalingLaw law);

struct PrefactorResult {
    std::vector<int> sizes;       // L values with a per-L slope
    std::vector<double> c_of_l;   // slope of S/L~ vs ln L~ using sizes <= L
    std::vector<double> b_of_l;   // intercepts
    double c_infinity = 0;        // linear extrapolation of c against 1/L
    double slope_m = 0;
};

/// Prefactor extraction for S(half cut) = c L ln L + b L from a ladder of
/// half-cut entropies over even sizes. Needs >= 3 sizes.
PrefactorResult prefactor_extraction(const std::vector<int>& sizes,
                                     const std::vector<double>& half_cut_entropies);

}  // namespace mf
