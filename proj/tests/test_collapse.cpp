#include <doctest.h>

#include <cmath>
#include <random>

#include "mf/collapse.hpp"

using namespace mf;

namespace {

/// Synthetic observable obeying single-parameter scaling exactly:
/// y = F((gamma - gamma_c) L^{1/nu}) with a smooth sigmoid F.
CollapseInput synthetic_input(double gamma_c, double nu, double noise, unsigned seed,
                              double a = 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    CollapseInput in;
    in.observable = "r_tilde";
    for (int l : {12, 16, 20, 24}) {
        for (int i = 0; i < 13; ++i) {
            const double gamma = gamma_c - 0.75 + 1.5 * i / 12.0;
            const double delta = gamma - gamma_c;
            const double x = delta * std::pow(l, 1.0 / nu) * (1.0 + a * delta);
            CollapseRecord rec;
            rec.gamma = gamma;
            rec.length = l;
            rec.y = 0.39 + 0.21 / (1.0 + std::exp(-x / 8.0)) + noise * gauss(rng);
            rec.sigma = std::max(noise, 1e-3);
            in.records.push_back(rec);
        }
    }
    return in;
}

}  // namespace

TEST_CASE("input validation") {
    CollapseInput in = synthetic_input(5.0, 1.0, 0.01, 1);
    CHECK_NOTHROW(in.validate());
    CollapseInput bad = in;
    bad.records[3].sigma = 0.0;
    CHECK_THROWS(bad.validate());
    CollapseInput two_sizes;
    two_sizes.observable = "kl1";
    for (int l : {12, 16})
        for (int i = 0; i < 8; ++i) two_sizes.records.push_back({4.0 + 0.2 * i, l, 0.5, 0.01});
    CHECK_THROWS(two_sizes.validate());
}

TEST_CASE("rescale applies the scaling variable and sorts") {
    CollapseInput in = synthetic_input(5.0, 1.0, 0.0, 2);
    const auto pts = rescale(in, 5.0, 1.0, 0.0);
    REQUIRE(pts.size() == in.records.size());
    CHECK(std::is_sorted(pts.begin(), pts.end(),
                         [](const RescaledPoint& p, const RescaledPoint& q) { return p.x < q.x; }));
    // spot check one record
    const auto& rec = in.records.front();
    const double x = (rec.gamma - 5.0) * std::pow(rec.length, 1.0);
    bool found = false;
    for (const auto& p : pts)
        if (std::abs(p.x - x) < 1e-12 && std::abs(p.y - rec.y) < 1e-12) found = true;
    CHECK(found);
    // nonlinear ansatz shifts x by (1 + A delta)
    const auto pts_nl = rescale(in, 5.0, 1.0, 0.1);
    const double x_nl = (rec.gamma - 5.0) * std::pow(rec.length, 1.0) * (1.0 + 0.1 * (rec.gamma - 5.0));
    double best = 1e9;
    for (const auto& p : pts_nl) best = std::min(best, std::abs(p.x - x_nl));
    CHECK(best < 1e-12);
}

TEST_CASE("cost is minimal at the true parameters") {
    CollapseInput in = synthetic_input(5.2, 0.9, 0.002, 3);
    const double at_truth = collapse_cost(rescale(in, 5.2, 0.9, 0.0));
    CHECK(at_truth < collapse_cost(rescale(in, 4.7, 0.9, 0.0)));
    CHECK(at_truth < collapse_cost(rescale(in, 5.7, 0.9, 0.0)));
    CHECK(at_truth < collapse_cost(rescale(in, 5.2, 0.45, 0.0)));
    CHECK(at_truth < collapse_cost(rescale(in, 5.2, 1.8, 0.0)));
}

TEST_CASE("cost scales with the error bars") {
    CollapseInput in = synthetic_input(5.2, 0.9, 0.005, 4);
    const double base = collapse_cost(rescale(in, 5.2, 0.9, 0.0));
    CollapseInput wide = in;
    for (auto& r : wide.records) r.sigma *= 3.0;
    const double scaled = collapse_cost(rescale(wide, 5.2, 0.9, 0.0));
    CHECK(scaled == doctest::Approx(base / 9.0).epsilon(0.02));
}

TEST_CASE("nelder-mead minimizes rosenbrock") {
    std::vector<double> x{-1.2, 1.0};
    const double f = nelder_mead(
        x, {0.5, 0.5},
        [](const std::vector<double>& p) {
            const double a = 1.0 - p[0], b = p[1] - p[0] * p[0];
            return a * a + 100.0 * b * b;
        },
        4000, 1e-12);
    CHECK(f < 1e-8);
    CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("collapse recovers the synthetic critical point") {
    CollapseInput in = synthetic_input(5.2, 0.9, 0.003, 5);
    const auto res = minimize_collapse(in, CollapseAnsatz::linear);
    CHECK(res.converged);
    CHECK(std::abs(res.gamma_c - 5.2) < 0.05);
    CHECK(std::abs(res.nu - 0.9) < 0.1);
    CHECK(res.gamma_c_err > 0.0);
    CHECK(res.nu_err > 0.0);
    CHECK(res.chi_star >= 0.0);
    // heatmap grid normalized to the optimum
    REQUIRE(!res.grid_cost.empty());
    double min_grid = 1e300;
    for (const auto& row : res.grid_cost)
        for (double v : row) min_grid = std::min(min_grid, v);
    CHECK(min_grid >= 1.0 - 1e-9);
    CHECK(min_grid < 1.5);
}

TEST_CASE("nonlinear ansatz improves a skewed collapse") {
    CollapseInput in = synthetic_input(5.2, 0.9, 0.002, 6, 0.12);
    const auto lin = minimize_collapse(in, CollapseAnsatz::linear);
    const auto nl = minimize_collapse(in, CollapseAnsatz::nonlinear);
    CHECK(std::abs(nl.gamma_c - 5.2) < 0.05);
    CHECK(std::abs(nl.nu - 0.9) < 0.12);
    CHECK(nl.a == doctest::Approx(0.12).epsilon(0.6));
    CHECK(nl.chi_star <= lin.chi_star * 1.001);
}

TEST_CASE("recovery rate over noise realizations") {
    int hits = 0;
    const int trials = 24;
    for (int k = 0; k < trials; ++k) {
        CollapseInput in = synthetic_input(5.15, 0.85, 0.004, 100 + k);
        const auto res = minimize_collapse(in, CollapseAnsatz::linear);
        if (std::abs(res.gamma_c - 5.15) < 3.0 * std::max(res.gamma_c_err, 0.02) &&
            std::abs(res.nu - 0.85) < 3.0 * std::max(res.nu_err, 0.05))
            ++hits;
    }
    CHECK(hits >= trials * 9 / 10);
}

TEST_CASE("weighted average") {
    const auto e = weighted_average({{1.0, 0.1}, {1.2, 0.2}});
    // weights 100, 25 -> (100 + 30) / 125 = 1.04
    CHECK(e.value == doctest::Approx(1.04).epsilon(1e-12));
    CHECK(e.error == doctest::Approx(1.0 / std::sqrt(125.0)).epsilon(1e-12));
    CHECK_THROWS(weighted_average({}));
}
