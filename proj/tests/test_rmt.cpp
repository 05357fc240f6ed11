#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mf/rmt.hpp"

using namespace mf;

TEST_CASE("gap ratios by hand") {
    // levels 0, 1, 3, 4: spacings 1, 2, 1 -> r = 1/2, 2; r~ = 1/2, 1/2
    const auto g = gap_ratios(std::vector<double>{0.0, 1.0, 3.0, 4.0});
    REQUIRE(g.r.size() == 2);
    CHECK(g.r[0] == doctest::Approx(0.5));
    CHECK(g.r[1] == doctest::Approx(2.0));
    CHECK(g.r_tilde[0] == doctest::Approx(0.5));
    CHECK(g.r_tilde[1] == doctest::Approx(0.5));
    CHECK(g.skipped_degenerate == 0);

    const auto d = gap_ratios(std::vector<double>{0.0, 1.0, 1.0 + 1e-15, 2.0});
    CHECK(d.skipped_degenerate == 2);
    REQUIRE(d.r.size() == 0);

    CHECK_THROWS(gap_ratios(std::vector<double>{0.0, 1.0}));
}

TEST_CASE("surmise pdfs: normalization and universal means") {
    // integrate with Simpson on [0, 2000]
    auto integrate = [](auto&& f, double hi, int n) {
        double s = f(0.0) + f(hi);
        const double h = hi / n;
        for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * h);
        return s * h / 3.0;
    };
    CHECK(integrate(poisson_r_pdf, 2000.0, 400000) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(integrate(gue_r_pdf, 2000.0, 400000) == doctest::Approx(1.0).epsilon(1e-4));
    // <min(r,1/r)> under each surmise equals 2 * int_0^1 r p(r) (1 + ...)?
    // direct: E[r~] = int_0^inf min(r,1/r) p(r) dr
    auto rt_poisson = integrate([](double r) { return std::min(r, r > 0 ? 1.0 / r : 0.0) * poisson_r_pdf(r); }, 2000.0, 400000);
    auto rt_gue = integrate([](double r) { return std::min(r, r > 0 ? 1.0 / r : 0.0) * gue_r_pdf(r); }, 2000.0, 400000);
    CHECK(rt_poisson == doctest::Approx(kMeanRTildePoisson).epsilon(2e-4));
    CHECK(rt_gue == doctest::Approx(kMeanRTildeGue).epsilon(2e-4));
}

TEST_CASE("synthetic ensembles reproduce the universal <r~>") {
    std::mt19937_64 rng(2024);
    std::vector<std::vector<double>> gue, poisson;
    for (int k = 0; k < 60; ++k) {
        gue.push_back(sample_gue_spectrum(120, rng));
        poisson.push_back(sample_poisson_spectrum(120, rng));
    }
    const auto r_gue = mean_gap_ratio_raw(gue);
    const auto r_poisson = mean_gap_ratio_raw(poisson);
    CHECK(std::abs(r_gue.mean - kMeanRTildeGue) < 0.01);
    CHECK(std::abs(r_poisson.mean - kMeanRTildePoisson) < 0.012);
    CHECK(r_gue.stderr_ < 0.005);
    CHECK(r_gue.count == 60);
}

TEST_CASE("r distribution tracks the right surmise") {
    std::mt19937_64 rng(7);
    std::vector<std::vector<double>> gue;
    for (int k = 0; k < 80; ++k) gue.push_back(sample_gue_spectrum(100, rng));
    const auto h = r_distribution(gue, 25, 5.0);
    double l1_gue = 0, l1_poisson = 0;
    const double w = h.centers[1] - h.centers[0];
    for (size_t b = 0; b < h.centers.size(); ++b) {
        l1_gue += std::abs(h.density[b] - gue_r_pdf(h.centers[b])) * w;
        l1_poisson += std::abs(h.density[b] - poisson_r_pdf(h.centers[b])) * w;
    }
    CHECK(l1_gue < 0.12);
    CHECK(l1_gue < 0.5 * l1_poisson);
}

namespace {

EntanglementSpectrum spec_with_amplitudes(const std::vector<double>& energies,
                                          const Eigen::MatrixXd& amps) {
    EntanglementSpectrum s;
    s.energies = Eigen::Map<const Eigen::VectorXd>(energies.data(), energies.size());
    s.occupations.resize(energies.size());
    for (size_t a = 0; a < energies.size(); ++a)
        s.occupations(a) = 1.0 / (std::exp(energies[a]) + 1.0);
    s.saturated.assign(energies.size(), false);
    s.amplitudes = amps;
    return s;
}

}  // namespace

TEST_CASE("KL divergences") {
    const int linear_size = 4;
    SUBCASE("identical neighbours give zero") {
        Eigen::MatrixXd amps(3, 3);
        amps.setConstant(1.0 / 3.0);
        const auto s = spec_with_amplitudes({-1.0, 0.0, 1.0}, amps);
        CHECK(kl1(s, linear_size) == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(kl2_pair(s, s, linear_size) == doctest::Approx(0.0).epsilon(1e-14));
    }
    SUBCASE("hand-computed two-level example") {
        Eigen::MatrixXd amps(2, 2);
        amps << 0.8, 0.3, 0.2, 0.7;  // columns are probability profiles
        const auto s = spec_with_amplitudes({-0.5, 0.5}, amps);
        const double expected = 0.8 * std::log(0.8 / 0.3) + 0.2 * std::log(0.2 / 0.7);
        CHECK(kl1(s, linear_size) == doctest::Approx(2.0 / linear_size * expected).epsilon(1e-12));
    }
    SUBCASE("KL is non-negative and ensemble averaging works") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(0.05, 1.0);
        std::vector<EntanglementSpectrum> ens;
        for (int k = 0; k < 6; ++k) {
            Eigen::MatrixXd amps(5, 5);
            for (int j = 0; j < 5; ++j) {
                for (int i = 0; i < 5; ++i) amps(i, j) = u(rng);
                amps.col(j) /= amps.col(j).sum();
            }
            ens.push_back(spec_with_amplitudes({-2, -1, 0, 1, 2}, amps));
        }
        const auto m1 = kl1_ensemble(ens, linear_size);
        const auto m2 = kl2_ensemble(ens, linear_size);
        CHECK(m1.mean > 0.0);
        CHECK(m2.mean > 0.0);
        CHECK(m1.count == 6);
        CHECK(m2.count == 3);  // pairs (0,1), (2,3), (4,5)
        EntanglementSpectrum no_vec;
        no_vec.energies = Eigen::VectorXd::Zero(3);
        CHECK_THROWS(kl1(no_vec, linear_size));
    }
}

TEST_CASE("unfolding flattens the density to unit mean spacing") {
    std::mt19937_64 rng(11);
    SUBCASE("gue bulk") {
        std::vector<std::vector<double>> spectra;
        for (int k = 0; k < 40; ++k) spectra.push_back(sample_gue_spectrum(150, rng));
        const auto u = unfold(spectra);
        REQUIRE(u.size() == spectra.size());
        Accumulator bulk_spacing;
        for (const auto& s : u) {
            REQUIRE(s.size() == 150);
            CHECK(std::is_sorted(s.begin(), s.end()));
            for (size_t a = 40; a + 40 < s.size(); ++a) bulk_spacing.add(s[a + 1] - s[a]);
        }
        CHECK(bulk_spacing.mean() == doctest::Approx(1.0).epsilon(0.05));
        // unfolding must preserve <r~> (monotone map)
        const auto before = mean_gap_ratio_raw(spectra);
        const auto after = mean_gap_ratio_raw(u);
        CHECK(std::abs(after.mean - before.mean) < 0.02);
    }
    SUBCASE("already-flat spectra stay flat") {
        std::vector<std::vector<double>> spectra;
        for (int k = 0; k < 20; ++k) spectra.push_back(sample_poisson_spectrum(200, rng));
        const auto u = unfold(spectra);
        Accumulator spacing;
        for (const auto& s : u)
            for (size_t a = 20; a + 20 < s.size(); ++a) spacing.add(s[a + 1] - s[a]);
        CHECK(spacing.mean() == doctest::Approx(1.0).epsilon(0.05));
    }
    CHECK_THROWS(unfold(std::vector<std::vector<double>>{}));
}

TEST_CASE("spectral form factor") {
    std::mt19937_64 rng(23);
    std::vector<std::vector<double>> gue;
    for (int k = 0; k < 150; ++k) gue.push_back(sample_gue_spectrum(120, rng));
    const auto u = unfold(gue);
    const auto sff = spectral_form_factor(u);
    REQUIRE(sff.tau.size() == 240);
    CHECK(sff.heisenberg_time == doctest::Approx(2.0 * std::numbers::pi).epsilon(0.15));
    // plateau K -> 1 for tau >> 1, ramp K ~ tau below
    Accumulator plateau;
    for (size_t i = 0; i < sff.tau.size(); ++i)
        if (sff.tau[i] > 3.0) plateau.add(sff.k[i]);
    CHECK(plateau.mean() == doctest::Approx(1.0).epsilon(0.12));
    // GUE is rigid: a chaotic spectrum follows the ramp well below tau = 1
    const auto th = thouless_time(sff, 0.3);
    CHECK(th.condition_met);
    CHECK(th.tau < 0.3);
}

TEST_CASE("thouless time edge cases") {
    SFFCurve c;
    for (int i = 0; i < 60; ++i) {
        const double tau = std::exp(std::log(1e-2) + (std::log(10.0) - std::log(1e-2)) * i / 59.0);
        c.tau.push_back(tau);
        c.t.push_back(tau);
    }
    SUBCASE("exact GUE curve gives the earliest grid point") {
        for (double tau : c.tau) c.k.push_back(sff_gue(tau));
        const auto th = thouless_time(c, 0.05);
        CHECK(th.condition_met);
        CHECK(th.tau == doctest::Approx(c.tau.front()).epsilon(1e-12));
    }
    SUBCASE("curve far from the ramp never matches") {
        for (size_t i = 0; i < c.tau.size(); ++i) c.k.push_back(2.0);
        const auto th = thouless_time(c, 0.05);
        CHECK(!th.condition_met);
        CHECK(th.tau == 1.0);
    }
    SUBCASE("early accidental touch without persistence is rejected") {
        // K = 2 everywhere except a dip touching the ramp at small tau
        for (size_t i = 0; i < c.tau.size(); ++i) c.k.push_back(2.0);
        c.k[5] = sff_gue(c.tau[5]);
        const auto th = thouless_time(c, 0.05);
        CHECK(!th.condition_met);
    }
}

TEST_CASE("sff_gue form") {
    CHECK(sff_gue(0.25) == doctest::Approx(0.25));
    CHECK(sff_gue(1.0) == doctest::Approx(1.0));
    CHECK(sff_gue(7.0) == doctest::Approx(1.0));
}
