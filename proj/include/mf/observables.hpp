#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mf/lattice.hpp"
#include "mf/trajectory.hpp"

namespace mf {

/// Hermitian correlation matrix (psi psi^dagger) restricted to a mask,
/// with eigenvalues clamped to [0,1].
struct CorrelationMatrix {
    Matrix g;                     // |A| x |A|
    std::vector<long> mask_sites;

    double trace() const { return g.trace().real(); }
};

CorrelationMatrix correlation_matrix(const TrajectoryState& state, const SubsystemMask& mask);

/// Eigenvalues of G, clamped to [0,1]. Values outside [-delta, 1+delta]
/// with delta = 1e-10 signal a broken state and throw.
Eigen::VectorXd correlation_eigenvalues(const CorrelationMatrix& corr);

/// S_A = -sum_a [l ln l + (1-l) ln(1-l)], natural log, 0 ln 0 = 0.
double von_neumann_entropy(const Eigen::VectorXd& eigenvalues);
double von_neumann_entropy(const CorrelationMatrix& corr);
double subsystem_entropy(const TrajectoryState& state, const SubsystemMask& mask);

/// I(A,B) = S_A + S_B - S_{A u B}; masks must be disjoint.
double mutual_information(const TrajectoryState& state, const SubsystemMask& a, const SubsystemMask& b);

/// One row of an averaged observable curve.
struct SeriesPoint {
    double x = 0;
    double mean = 0;
    double stderr_ = 0;
    long count = 0;
};

struct ObservableSeries {
    std::string abscissa;  // "l_A", "t", "gamma", "L"
    std::vector<SeriesPoint> points;
};

/// Running mean/variance accumulator (Welford).
class Accumulator {
  public:
    void add(double v);
    void merge(const Accumulator& other);
    long count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const;  // sample variance
    double standard_error() const;

  private:
    long n_ = 0;
    double mean_ = 0;
    double m2_ = 0;
};

/// Entanglement density s(l_A) = <S_A>/L over a sweep of strip widths,
/// averaged over the supplied states. Optionally reported modulo its value
/// at l_A = L/2.
ObservableSeries entanglement_density_curve(const Lattice& lat,
                                            const std::vector<const TrajectoryState*>& states,
                                            bool subtract_midpoint = false);

}  // namespace mf
