#include "mf/observables.hpp"

#include <cmath>
#include <stdexcept>

namespace mf {

CorrelationMatrix correlation_matrix(const TrajectoryState& state, const SubsystemMask& mask) {
    if (mask.sites.empty()) throw std::invalid_argument("empty mask");
    const long m = static_cast<long>(mask.sites.size());
    Matrix psi_a(m, state.particles());
    for (long i = 0; i < m; ++i) psi_a.row(i) = state.psi.row(mask.sites[i]);
    CorrelationMatrix corr;
    corr.g = psi_a * psi_a.adjoint();
    corr.g = 0.5 * (corr.g + corr.g.adjoint().eval());
    corr.mask_sites = mask.sites;
    return corr;
}

Eigen::VectorXd correlation_eigenvalues(const CorrelationMatrix& corr) {
    constexpr double delta = 1e-10;
    Eigen::SelfAdjointEigenSolver<Matrix> es(corr.g, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw std::runtime_error("correlation matrix diagonalization failed");
    Eigen::VectorXd lambda = es.eigenvalues();
    for (long i = 0; i < lambda.size(); ++i) {
        if (lambda(i) < -delta || lambda(i) > 1.0 + delta)
            throw std::runtime_error("correlation eigenvalue outside [0,1]: state is broken");
        lambda(i) = std::clamp(lambda(i), 0.0, 1.0);
    }
    return lambda;
}

double von_neumann_entropy(const Eigen::VectorXd& eigenvalues) {
    double s = 0.0;
    for (long i = 0; i < eigenvalues.size(); ++i) {
        const double l = eigenvalues(i);
        if (l > 0.0) s -= l * std::log(l);
        if (l < 1.0) s -= (1.0 - l) * std::log(1.0 - l);
    }
    return s;
}

double von_neumann_entropy(const CorrelationMatrix& corr) {
    return von_neumann_entropy(correlation_eigenvalues(corr));
}

double subsystem_entropy(const TrajectoryState& state, const SubsystemMask& mask) {
    return von_neumann_entropy(correlation_matrix(state, mask));
}

double mutual_information(const TrajectoryState& state, const SubsystemMask& a, const SubsystemMask& b) {
    SubsystemMask ab = mask_union(a, b);  // throws on overlap
    return subsystem_entropy(state, a) + subsystem_entropy(state, b) - subsystem_entropy(state, ab);
}

void Accumulator::add(double v) {
    ++n_;
    const double d = v - mean_;
    mean_ += d / n_;
    m2_ += d * (v - mean_);
}

void Accumulator::merge(const Accumulator& other) {
    if (other.n_ == 0) return;
    if (n_ == 0) { *this = other; return; }
    const double d = other.mean_ - mean_;
    const long n = n_ + other.n_;
    m2_ += other.m2_ + d * d * static_cast<double>(n_) * other.n_ / n;
    mean_ += d * other.n_ / n;
    n_ = n;
}

double Accumulator::variance() const {
    return n_ > 1 ? m2_ / (n_ - 1) : 0.0;
}

double Accumulator::standard_error() const {
    return n_ > 1 ? std::sqrt(variance() / n_) : 0.0;
}

ObservableSeries entanglement_density_curve(const Lattice& lat,
                                            const std::vector<const TrajectoryState*>& states,
                                            bool subtract_midpoint) {
    if (states.empty()) throw std::invalid_argument("no states");
    std::vector<Accumulator> acc(lat.length - 1);
    for (const TrajectoryState* state : states) {
        for (int w = 1; w < lat.length; ++w) {
            SubsystemMask mask = make_strip_mask(lat, w);
            acc[w - 1].add(subsystem_entropy(*state, mask));
        }
    }
    ObservableSeries series;
    series.abscissa = "l_A";
    const double mid = acc[lat.length / 2 - 1].mean();
    for (int w = 1; w < lat.length; ++w) {
        SeriesPoint p;
        p.x = w;
        // Average S_A first, then divide by L.
        p.mean = (acc[w - 1].mean() - (subtract_midpoint ? mid : 0.0)) / lat.length;
        p.stderr_ = acc[w - 1].standard_error() / lat.length;
        p.count = acc[w - 1].count();
        series.points.push_back(p);
    }
    return series;
}

}  // namespace mf
