#include "mf/espectrum.hpp"

#include <cmath>
#include <stdexcept>

namespace mf {

long EntanglementSpectrum::saturated_count() const {
    long n = 0;
    for (bool s : saturated) n += s;
    return n;
}

std::vector<double> EntanglementSpectrum::unsaturated_energies() const {
    std::vector<double> out;
    out.reserve(energies.size());
    for (long i = 0; i < energies.size(); ++i)
        if (!saturated[i]) out.push_back(energies(i));
    return out;
}

double EntanglementSpectrum::entropy() const {
    return von_neumann_entropy(occupations);
}

EntanglementSpectrum entanglement_hamiltonian(const CorrelationMatrix& corr, bool keep_vectors) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(
        corr.g, keep_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw std::runtime_error("correlation matrix diagonalization failed");

    const long m = corr.g.rows();
    EntanglementSpectrum spec;
    spec.energies.resize(m);
    spec.occupations.resize(m);
    spec.saturated.resize(m);
    static const double eps_max = std::log((1.0 - kSaturationClamp) / kSaturationClamp);

    // eps = ln[(1-lambda)/lambda] decreases with lambda; the eigensolver
    // returns lambda ascending, so reverse to sort eps ascending.
    for (long i = 0; i < m; ++i) {
        const long src = m - 1 - i;
        double lambda = std::clamp(es.eigenvalues()(src), 0.0, 1.0);
        spec.occupations(i) = lambda;
        if (lambda <= kSaturationClamp) {
            spec.energies(i) = eps_max;
            spec.saturated[i] = true;
        } else if (lambda >= 1.0 - kSaturationClamp) {
            spec.energies(i) = -eps_max;
            spec.saturated[i] = true;
        } else {
            spec.energies(i) = std::log((1.0 - lambda) / lambda);
            spec.saturated[i] = false;
        }
    }
    // Saturated eps values are pinned at +-eps_max, so re-sort.
    std::vector<long> order(m);
    for (long i = 0; i < m; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](long a, long b) { return spec.energies(a) < spec.energies(b); });
    EntanglementSpectrum sorted;
    sorted.energies.resize(m);
    sorted.occupations.resize(m);
    sorted.saturated.resize(m);
    if (keep_vectors) sorted.amplitudes.resize(m, m);
    for (long i = 0; i < m; ++i) {
        const long j = order[i];
        sorted.energies(i) = spec.energies(j);
        sorted.occupations(i) = spec.occupations(j);
        sorted.saturated[i] = spec.saturated[j];
        if (keep_vectors)
            sorted.amplitudes.col(i) = es.eigenvectors().col(m - 1 - j).cwiseAbs2();
    }
    return sorted;
}

DensityOfStates density_of_states(const std::vector<EntanglementSpectrum>& ensemble,
                                  int bins, double eps_min, double eps_max) {
    if (ensemble.empty()) throw std::invalid_argument("empty ensemble");
    if (bins < 1 || eps_max <= eps_min) throw std::invalid_argument("bad bin spec");
    DensityOfStates dos;
    dos.bin_centers.resize(bins);
    dos.density.assign(bins, 0.0);
    const double width = (eps_max - eps_min) / bins;
    for (int b = 0; b < bins; ++b) dos.bin_centers[b] = eps_min + (b + 0.5) * width;
    long total = 0;
    for (const auto& spec : ensemble) {
        for (long i = 0; i < spec.size(); ++i) {
            if (spec.saturated[i]) {
                (spec.energies(i) < 0 ? dos.overflow_low : dos.overflow_high)++;
                continue;
            }
            const double e = spec.energies(i);
            if (e < eps_min) { dos.overflow_low++; continue; }
            if (e >= eps_max) { dos.overflow_high++; continue; }
            dos.density[static_cast<int>((e - eps_min) / width)] += 1.0;
            ++total;
        }
    }
    if (total > 0)
        for (double& d : dos.density) d /= total * width;
    return dos;
}

}  // namespace mf
