#include <doctest.h>

#include <Eigen/Dense>
#include <bit>
#include <complex>
#include <map>
#include <random>
#include <vector>

#include "mf/observables.hpp"

using namespace mf;

namespace {

TrajectoryState make_state(const Lattice& lat, long particles, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    TrajectoryState st;
    st.psi.resize(lat.sites, particles);
    for (long j = 0; j < particles; ++j)
        for (long i = 0; i < lat.sites; ++i) st.psi(i, j) = {gauss(rng), gauss(rng)};
    orthonormalize_qr(st.psi);
    st.rng = rng;
    return st;
}

/// Brute-force many-body check: expand the Slater determinant over the full
/// 2^V Fock space, trace out the complement of `mask` explicitly, and
/// diagonalize the reduced density matrix.
double fock_space_entropy(const Matrix& psi, const std::vector<long>& mask_sites) {
    const int v = static_cast<int>(psi.rows());
    const int n = static_cast<int>(psi.cols());
    REQUIRE(v <= 12);
    std::uint32_t mask_a = 0;
    for (long s : mask_sites) mask_a |= 1u << s;

    // Slater amplitudes: a_S = det(psi restricted to the occupied rows).
    std::map<std::uint32_t, std::complex<double>> amp;
    for (std::uint32_t s = 0; s < (1u << v); ++s) {
        if (std::popcount(s) != n) continue;
        Matrix sub(n, n);
        int r = 0;
        for (int site = 0; site < v; ++site)
            if (s & (1u << site)) sub.row(r++) = psi.row(site);
        amp[s] = sub.determinant();
    }

    // Sign of reordering c-dagger string from ascending site order to
    // (A sites ascending, then B sites ascending).
    auto split_sign = [&](std::uint32_t s) {
        const std::uint32_t sa = s & mask_a, sb = s & ~mask_a;
        int inversions = 0;
        for (int site = 0; site < v; ++site)
            if (sa & (1u << site)) inversions += std::popcount(sb & ((1u << site) - 1));
        return (inversions % 2 == 0) ? 1.0 : -1.0;
    };

    // Index the possible A-occupations.
    std::map<std::uint32_t, int> a_index;
    for (std::uint32_t sa = 0; sa < (1u << v); ++sa)
        if ((sa & ~mask_a) == 0) a_index.emplace(sa, static_cast<int>(a_index.size()));

    Matrix rho = Matrix::Zero(a_index.size(), a_index.size());
    for (const auto& [s1, a1] : amp)
        for (const auto& [s2, a2] : amp) {
            if ((s1 & ~mask_a) != (s2 & ~mask_a)) continue;  // same B occupation
            rho(a_index.at(s1 & mask_a), a_index.at(s2 & mask_a)) +=
                split_sign(s1) * split_sign(s2) * a1 * std::conj(a2);
        }
    REQUIRE(std::abs(rho.trace().real() - 1.0) < 1e-10);

    Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
    double entropy = 0;
    for (long i = 0; i < es.eigenvalues().size(); ++i) {
        const double p = es.eigenvalues()(i);
        if (p > 1e-14) entropy -= p * std::log(p);
    }
    return entropy;
}

}  // namespace

TEST_CASE("correlation matrix basics") {
    const Lattice lat = Lattice::make(1, 8);
    const auto st = make_state(lat, 4, 11);
    const auto full = correlation_matrix(st, make_custom_mask(lat, {0, 1, 2, 3, 4, 5, 6, 7}));
    CHECK(full.trace() == doctest::Approx(4.0).epsilon(1e-12));       // Tr G = N
    CHECK((full.g - full.g.adjoint()).norm() < 1e-13);
    const auto eigs = correlation_eigenvalues(full);
    for (long i = 0; i < eigs.size(); ++i) {
        CHECK(eigs(i) >= 0.0);
        CHECK(eigs(i) <= 1.0);
    }
    // projector: half the eigenvalues 1, half 0 for the full system
    CHECK(eigs.sum() == doctest::Approx(4.0).epsilon(1e-10));
    CHECK(von_neumann_entropy(full) == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("free-fermion entropy matches the 2^V Fock-space oracle") {
    SUBCASE("1d chain, strip cuts") {
        const Lattice lat = Lattice::make(1, 8);
        for (unsigned seed : {1u, 2u, 3u}) {
            const auto st = make_state(lat, 4, seed);
            for (int w : {1, 2, 3, 4}) {
                const auto mask = make_strip_mask(lat, w);
                const double s_free = subsystem_entropy(st, mask);
                const double s_fock = fock_space_entropy(st.psi, mask.sites);
                CHECK(s_free == doctest::Approx(s_fock).epsilon(1e-8));
            }
        }
    }
    SUBCASE("scattered custom mask, off half filling") {
        const Lattice lat = Lattice::make(1, 10);
        const auto st = make_state(lat, 3, 7);
        const auto mask = make_custom_mask(lat, {0, 2, 5, 9});
        CHECK(subsystem_entropy(st, mask) ==
              doctest::Approx(fock_space_entropy(st.psi, mask.sites)).epsilon(1e-8));
    }
}

TEST_CASE("pure-state complement symmetry") {
    const Lattice lat = Lattice::make(2, 6);
    const auto st = make_state(lat, 18, 5);
    for (int w : {1, 2, 3}) {
        const auto mask = make_strip_mask(lat, w);
        const auto comp = mask_complement(lat, mask);
        CHECK(subsystem_entropy(st, mask) ==
              doctest::Approx(subsystem_entropy(st, comp)).epsilon(1e-9));
    }
}

TEST_CASE("mutual information") {
    const Lattice lat = Lattice::make(1, 10);
    SUBCASE("factorized state has I = 0") {
        // Particles live entirely on sites 0..4 or entirely on 5..9.
        TrajectoryState st;
        st.psi = Matrix::Zero(10, 4);
        std::mt19937_64 rng(3);
        std::normal_distribution<double> gauss;
        for (long j = 0; j < 2; ++j)
            for (long i = 0; i < 5; ++i) st.psi(i, j) = {gauss(rng), gauss(rng)};
        for (long j = 2; j < 4; ++j)
            for (long i = 5; i < 10; ++i) st.psi(i, j) = {gauss(rng), gauss(rng)};
        orthonormalize_qr(st.psi);
        const auto a = make_custom_mask(lat, {0, 1, 2, 3, 4});
        const auto b = make_custom_mask(lat, {5, 6, 7, 8, 9});
        CHECK(mutual_information(st, a, b) == doctest::Approx(0.0).epsilon(1e-9));
    }
    SUBCASE("agrees with Fock-space oracle") {
        const auto st = make_state(lat, 5, 21);
        const auto a = make_custom_mask(lat, {0, 1, 2});
        const auto b = make_custom_mask(lat, {5, 6});
        const double expected = fock_space_entropy(st.psi, a.sites) +
                                fock_space_entropy(st.psi, b.sites) -
                                fock_space_entropy(st.psi, {0, 1, 2, 5, 6});
        CHECK(mutual_information(st, a, b) == doctest::Approx(expected).epsilon(1e-7));
        CHECK(mutual_information(st, a, b) >= -1e-10);
    }
    SUBCASE("overlapping masks throw") {
        const auto st = make_state(lat, 5, 22);
        const auto a = make_custom_mask(lat, {0, 1, 2});
        const auto b = make_custom_mask(lat, {2, 3});
        CHECK_THROWS(mutual_information(st, a, b));
    }
}

TEST_CASE("entropy formula fixed points") {
    Eigen::VectorXd eigs(3);
    eigs << 0.0, 1.0, 0.5;
    CHECK(von_neumann_entropy(eigs) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    Eigen::VectorXd bad(1);
    bad << 1.5;
    CorrelationMatrix corr;
    corr.g = Matrix::Constant(1, 1, 1.5);
    CHECK_THROWS(correlation_eigenvalues(corr));
}

TEST_CASE("accumulator matches direct statistics and merges") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1, 2);
    std::vector<double> vals(137);
    for (auto& v : vals) v = u(rng);
    Accumulator all, left, right;
    double sum = 0;
    for (size_t i = 0; i < vals.size(); ++i) {
        all.add(vals[i]);
        (i < 60 ? left : right).add(vals[i]);
        sum += vals[i];
    }
    const double mean = sum / vals.size();
    double var = 0;
    for (double v : vals) var += (v - mean) * (v - mean);
    var /= vals.size() - 1;
    CHECK(all.mean() == doctest::Approx(mean).epsilon(1e-12));
    CHECK(all.variance() == doctest::Approx(var).epsilon(1e-12));
    CHECK(all.standard_error() == doctest::Approx(std::sqrt(var / vals.size())).epsilon(1e-12));
    left.merge(right);
    CHECK(left.count() == all.count());
    CHECK(left.mean() == doctest::Approx(all.mean()).epsilon(1e-12));
    CHECK(left.variance() == doctest::Approx(all.variance()).epsilon(1e-12));
}

TEST_CASE("entanglement density curve") {
    const Lattice lat = Lattice::make(1, 8);
    const auto s1 = make_state(lat, 4, 31);
    const auto s2 = make_state(lat, 4, 32);
    const auto curve = entanglement_density_curve(lat, {&s1, &s2});
    REQUIRE(curve.points.size() == 7);
    CHECK(curve.abscissa == "l_A");
    for (int w = 1; w < 8; ++w) {
        const auto mask = make_strip_mask(lat, w);
        const double expected =
            0.5 * (subsystem_entropy(s1, mask) + subsystem_entropy(s2, mask)) / lat.length;
        CHECK(curve.points[w - 1].x == doctest::Approx(w));
        CHECK(curve.points[w - 1].mean == doctest::Approx(expected).epsilon(1e-12));
        CHECK(curve.points[w - 1].count == 2);
    }
    const auto rel = entanglement_density_curve(lat, {&s1, &s2}, true);
    CHECK(rel.points[3].mean == doctest::Approx(0.0).epsilon(1e-14));
}
