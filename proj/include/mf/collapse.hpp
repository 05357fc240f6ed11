#pragma once

#include <array>
#include <string>
#include <vector>

#include "mf/spline.hpp"

namespace mf {

struct CollapseRecord {
    double gamma = 0;
    int length = 0;
    double y = 0;
    double sigma = 1;
};

struct CollapseInput {
    std::string observable;  // "r_tilde", "kl1", "kl2", "tau_th"
    std::vector<CollapseRecord> records;

    /// sigma > 0, >= 3 distinct sizes, >= 5 gamma points per size.
    void validate() const;
};

enum class CollapseAnsatz { linear, nonlinear };

struct RescaledPoint {
    double x = 0, y = 0, sigma = 1;
};

/// x = (gamma - gamma_c) L^{1/nu} (1 + A (gamma - gamma_c)); sorted by x.
std::vector<RescaledPoint> rescale(const CollapseInput& input, double gamma_c, double nu, double a);

/// Weighted residual sum of squares against a smoothing spline through the
/// pooled rescaled points. Infinite for degenerate abscissas.
double collapse_cost(const std::vector<RescaledPoint>& points);

struct CollapseResult {
    double gamma_c = 0, nu = 1, a = 0;
    double chi_star = 0;     // minimal cost
    double chi_per_dof = 0;
    double gamma_c_err = 0;  // half-extent of the chi* + 4 contour
    double nu_err = 0;
    bool converged = true;   // false when the optimum sits on the search boundary

    std::vector<double> grid_gamma_c;
    std::vector<double> grid_nu;
    std::vector<std::vector<double>> grid_cost;  // chi / chi*, rows follow grid_gamma_c
};

struct CollapseOptions {
    double gamma_c_min = 0, gamma_c_max = 0;  // 0,0: from data range
    double nu_min = 0.3, nu_max = 2.0;
    double a_min = -0.2, a_max = 0.2;
    int grid_gamma = 31, grid_nu = 25, grid_a = 9;
};

/// Coarse grid scan followed by Nelder-Mead refinement; error bars from the
/// extent of {chi <= chi* + 4} along each axis at the optimum of the others.
CollapseResult minimize_collapse(const CollapseInput& input, CollapseAnsatz ansatz,
                                 const CollapseOptions& opts = {});

struct Estimate {
    double value = 0;
    double error = 0;
};

/// Inverse-variance weighted combination.
Estimate weighted_average(const std::vector<Estimate>& estimates);

/// Generic Nelder-Mead simplex minimizer (derivative free).
double nelder_mead(std::vector<double>& x, const std::vector<double>& scale,
                   const std::function<double(const std::vector<double>&)>& f,
                   int max_iter = 400, double tol = 1e-8);

}  // namespace mf
