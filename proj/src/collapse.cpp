#include "mf/collapse.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

namespace mf {

void CollapseInput::validate() const {
    std::map<int, int> per_size;
    for (const auto& r : records) {
        if (!(r.sigma > 0)) throw std::invalid_argument("collapse input needs sigma > 0");
        per_size[r.length]++;
    }
    if (per_size.size() < 3) throw std::invalid_argument("collapse input needs >= 3 distinct sizes");
    for (const auto& [l, n] : per_size)
        if (n < 5) throw std::invalid_argument("collapse input needs >= 5 gamma points per size");
}

std::vector<RescaledPoint> rescale(const CollapseInput& input, double gamma_c, double nu, double a) {
    if (!(nu > 0)) throw std::invalid_argument("nu must be > 0");
    std::vector<RescaledPoint> pts;
    pts.reserve(input.records.size());
    for (const auto& r : input.records) {
        const double dg = r.gamma - gamma_c;
        pts.push_back({dg * std::pow(static_cast<double>(r.length), 1.0 / nu) * (1.0 + a * dg),
                       r.y, r.sigma});
    }
    std::sort(pts.begin(), pts.end(), [](const auto& p, const auto& q) { return p.x < q.x; });
    return pts;
}

double collapse_cost(const std::vector<RescaledPoint>& points) {
    if (points.size() < 10) throw std::invalid_argument("collapse cost needs >= 10 points");
    std::vector<double> x, y, w;
    for (const auto& p : points) {
        x.push_back(p.x);
        y.push_back(p.y);
        w.push_back(1.0 / (p.sigma * p.sigma));
    }
    const int knots = std::min<long>(12, static_cast<long>((points.size() + 7) / 8));
    CubicSpline m;
    try {
        m = CubicSpline::fit(x, y, w, knots);
    } catch (const std::runtime_error&) {
        return std::numeric_limits<double>::infinity();
    }
    double chi = 0;
    for (const auto& p : points) {
        const double r = (p.y - m(p.x)) / p.sigma;
        chi += r * r;
    }
    return std::isfinite(chi) ? chi : std::numeric_limits<double>::infinity();
}

double nelder_mead(std::vector<double>& x, const std::vector<double>& scale,
                   const std::function<double(const std::vector<double>&)>& f,
                   int max_iter, double tol) {
    const size_t n = x.size();
    std::vector<std::vector<double>> simplex(n + 1, x);
    std::vector<double> fv(n + 1);
    for (size_t i = 0; i < n; ++i) simplex[i + 1][i] += scale[i];
    for (size_t i = 0; i <= n; ++i) fv[i] = f(simplex[i]);

    for (int it = 0; it < max_iter; ++it) {
        std::vector<size_t> order(n + 1);
        for (size_t i = 0; i <= n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return fv[a] < fv[b]; });
        if (std::abs(fv[order[n]] - fv[order[0]]) <
            tol * (std::abs(fv[order[0]]) + tol))
            break;

        std::vector<double> centroid(n, 0.0);
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j) centroid[j] += simplex[order[i]][j] / n;
        const size_t worst = order[n];

        auto blend = [&](double t) {
            std::vector<double> p(n);
            for (size_t j = 0; j < n; ++j) p[j] = centroid[j] + t * (simplex[worst][j] - centroid[j]);
            return p;
        };

        auto reflected = blend(-1.0);
        double fr = f(reflected);
        if (fr < fv[order[0]]) {
            auto expanded = blend(-2.0);
            double fe = f(expanded);
            if (fe < fr) {
                simplex[worst] = expanded;
                fv[worst] = fe;
            } else {
                simplex[worst] = reflected;
                fv[worst] = fr;
            }
        } else if (fr < fv[order[n - 1]]) {
            simplex[worst] = reflected;
            fv[worst] = fr;
        } else {
            auto contracted = blend(0.5);
            double fc = f(contracted);
            if (fc < fv[worst]) {
                simplex[worst] = contracted;
                fv[worst] = fc;
            } else {
                for (size_t i = 1; i <= n; ++i) {
                    for (size_t j = 0; j < n; ++j)
                        simplex[order[i]][j] = 0.5 * (simplex[order[i]][j] + simplex[order[0]][j]);
                    fv[order[i]] = f(simplex[order[i]]);
                }
            }
        }
    }
    size_t best = 0;
    for (size_t i = 1; i <= n; ++i)
        if (fv[i] < fv[best]) best = i;
    x = simplex[best];
    return fv[best];
}

namespace {

/// Scans outward from the optimum until chi crosses chi* + 4.
double contour_extent(const std::function<double(double)>& chi_of, double center,
                      double chi_limit, double span) {
    double extent = 0;
    for (int sign : {-1, +1}) {
        double lo = 0, hi = span;
        // Expand until outside the contour (or give up at 4x span).
        while (chi_of(center + sign * hi) <= chi_limit && hi < 4 * span) hi *= 2;
        for (int it = 0; it < 40; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (chi_of(center + sign * mid) <= chi_limit)
                lo = mid;
            else
                hi = mid;
        }
        extent = std::max(extent, lo);
    }
    return extent;
}

}  // namespace

CollapseResult minimize_collapse(const CollapseInput& input, CollapseAnsatz ansatz,
                                 const CollapseOptions& opts) {
    input.validate();

    double gmin = opts.gamma_c_min, gmax = opts.gamma_c_max;
    if (gmin == 0 && gmax == 0) {
        gmin = std::numeric_limits<double>::infinity();
        gmax = -gmin;
        for (const auto& r : input.records) {
            gmin = std::min(gmin, r.gamma);
            gmax = std::max(gmax, r.gamma);
        }
    }

    const bool nonlinear = ansatz == CollapseAnsatz::nonlinear;
    // Hard box: keeps the simplex refinement inside the scanned region.
    auto cost = [&](double gc, double nu, double a) {
        if (gc < gmin || gc > gmax || nu < opts.nu_min || nu > opts.nu_max || a < opts.a_min ||
            a > opts.a_max)
            return std::numeric_limits<double>::infinity();
        return collapse_cost(rescale(input, gc, nu, a));
    };

    CollapseResult res;
    double best = std::numeric_limits<double>::infinity();
    const int na = nonlinear ? opts.grid_a : 1;
    for (int ia = 0; ia < na; ++ia) {
        const double a = nonlinear ? opts.a_min + (opts.a_max - opts.a_min) * ia / (na - 1) : 0.0;
        for (int ig = 0; ig < opts.grid_gamma; ++ig) {
            const double gc = gmin + (gmax - gmin) * ig / (opts.grid_gamma - 1);
            for (int in = 0; in < opts.grid_nu; ++in) {
                const double nu = opts.nu_min + (opts.nu_max - opts.nu_min) * in / (opts.grid_nu - 1);
                const double c = cost(gc, nu, a);
                if (c < best) {
                    best = c;
                    res.gamma_c = gc;
                    res.nu = nu;
                    res.a = a;
                }
            }
        }
    }
    if (!std::isfinite(best)) throw std::runtime_error("collapse cost infinite everywhere");

    std::vector<double> x{res.gamma_c, res.nu};
    std::vector<double> scale{0.05 * (gmax - gmin), 0.05 * (opts.nu_max - opts.nu_min)};
    if (nonlinear) {
        x.push_back(res.a);
        scale.push_back(0.02);
    }
    best = nelder_mead(x, scale, [&](const std::vector<double>& p) {
        return cost(p[0], p[1], nonlinear ? p[2] : 0.0);
    });
    res.gamma_c = x[0];
    res.nu = x[1];
    res.a = nonlinear ? x[2] : 0.0;
    res.chi_star = best;
    const long dof = static_cast<long>(input.records.size()) - (nonlinear ? 3 : 2);
    res.chi_per_dof = dof > 0 ? best / dof : best;

    const double edge_g = 0.02 * (gmax - gmin);
    const double edge_n = 0.02 * (opts.nu_max - opts.nu_min);
    res.converged = res.gamma_c > gmin + edge_g && res.gamma_c < gmax - edge_g &&
                    res.nu > opts.nu_min + edge_n && res.nu < opts.nu_max - edge_n;

    // chi* + 4 contour, each axis at the optimum of the others (A held fixed).
    const double limit = res.chi_star + 4.0;
    res.gamma_c_err = contour_extent(
        [&](double g) { return cost(g, res.nu, res.a); }, res.gamma_c, limit, 0.05 * (gmax - gmin));
    res.nu_err = contour_extent(
        [&](double n) { return cost(res.gamma_c, n, res.a); }, res.nu, limit, 0.05);

    // Cost-surface grid (at optimal A) for heatmap emission, chi / chi*.
    res.grid_gamma_c.resize(opts.grid_gamma);
    res.grid_nu.resize(opts.grid_nu);
    res.grid_cost.assign(opts.grid_gamma, std::vector<double>(opts.grid_nu, 0.0));
    for (int ig = 0; ig < opts.grid_gamma; ++ig) {
        res.grid_gamma_c[ig] = gmin + (gmax - gmin) * ig / (opts.grid_gamma - 1);
        for (int in = 0; in < opts.grid_nu; ++in) {
            res.grid_nu[in] = opts.nu_min + (opts.nu_max - opts.nu_min) * in / (opts.grid_nu - 1);
            res.grid_cost[ig][in] =
                cost(res.grid_gamma_c[ig], res.grid_nu[in], res.a) / res.chi_star;
        }
    }
    return res;
}

Estimate weighted_average(const std::vector<Estimate>& estimates) {
    if (estimates.empty()) throw std::invalid_argument("nothing to average");
    if (estimates.size() == 1) return estimates.front();
    double num = 0, den = 0;
    for (const auto& e : estimates) {
        if (!(e.error > 0)) throw std::invalid_argument("weighted average needs error bars");
        const double w = 1.0 / (e.error * e.error);
        num += w * e.value;
        den += w;
    }
    return {num / den, std::sqrt(1.0 / den)};
}

}  // namespace mf
