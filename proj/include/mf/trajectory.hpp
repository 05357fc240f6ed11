#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "mf/lattice.hpp"

namespace mf {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXd;

/// Deterministic per-trajectory RNG stream keyed by (master seed, id), so
/// ensembles are reproducible and order-independent under parallel execution.
std::mt19937_64 make_trajectory_rng(std::uint64_t master_seed, std::uint64_t trajectory_id);

enum class InitState { random_gaussian, neel };
enum class StepKernel { reference, fast };

InitState init_state_from_name(const std::string& name);

struct EvolutionConfig {
    double gamma = 0.0;           // monitoring rate, units of hopping
    double dt = 0.05;             // time step, dt << 1
    double t_burn = -1.0;         // burn-in time; < 0 means default 4*L
    double sample_interval = 1.0; // time between observer snapshots
    int samples = 1;
    InitState init = InitState::random_gaussian;
    StepKernel kernel = StepKernel::fast;

    void validate() const;
    double burn_in(const Lattice& lat) const;
};

struct TrajectoryState {
    Matrix psi;  // V x N single-particle wave functions, psi^dagger psi = 1
    double time = 0.0;
    std::uint64_t trajectory_id = 0;
    std::mt19937_64 rng;

    long sites() const { return psi.rows(); }
    long particles() const { return psi.cols(); }
    /// <n_l> = diag(psi psi^dagger).
    Vector occupations() const;
    double orthonormality_error() const;
};

/// Applies U = exp(-i h dt) to the columns of psi.
class Propagator {
  public:
    virtual ~Propagator() = default;
    virtual void apply(Matrix& psi) const = 0;
    virtual long sites() const = 0;
};

/// Dense U built once by Hermitian eigendecomposition of h; the serial
/// reference kernel multiplies it out every step.
class DensePropagator : public Propagator {
  public:
    DensePropagator(const Lattice& lat, double dt);
    void apply(Matrix& psi) const override;
    long sites() const override { return unitary_.rows(); }
    const Matrix& unitary() const { return unitary_; }
    double unitarity_error() const;

  private:
    Matrix unitary_;
};

/// Momentum-space propagator: h is diagonal in the plane-wave basis on the
/// torus, so U psi is a phase multiply between forward and inverse FFTs.
/// Agrees with DensePropagator to machine precision.
class FftPropagator : public Propagator {
  public:
    FftPropagator(const Lattice& lat, double dt, long columns);
    ~FftPropagator() override;
    FftPropagator(const FftPropagator&) = delete;
    FftPropagator& operator=(const FftPropagator&) = delete;
    void apply(Matrix& psi) const override;
    long sites() const override { return phases_.size(); }

  private:
    Eigen::VectorXcd phases_;  // exp(-i lambda_k dt) / V, layout matching site order
    long columns_;
    void* plan_fwd_ = nullptr;
    void* plan_bwd_ = nullptr;
};

std::unique_ptr<Propagator> make_propagator(const Lattice& lat, double dt, StepKernel kernel, long columns);

TrajectoryState init_state(const Lattice& lat, InitState tag, std::mt19937_64 rng, std::uint64_t trajectory_id = 0);

/// Per-site weights w_l = exp(sqrt(2 gamma dt) xi_l + 2 gamma dt <n_l>),
/// site-independent factors dropped. Draws V standard normals from the
/// trajectory stream.
Vector measurement_weights(TrajectoryState& state, double gamma, double dt);

/// psi <- orthonormalize(diag(w) U psi); t <- t + dt.
void step(TrajectoryState& state, const EvolutionConfig& cfg, const Propagator& prop);

/// Householder QR, keeping the thin Q factor only.
void orthonormalize_qr(Matrix& psi);

/// Cholesky-based orthonormalization (two passes); falls back to Householder
/// QR when the Gram matrix is not numerically positive definite.
void orthonormalize_chol(Matrix& psi);

using Observer = std::function<void(const TrajectoryState&)>;

/// Evolves through the burn-in window, then emits observer snapshots every
/// sample_interval until the sample budget is exhausted.
void run_trajectory(const Lattice& lat, const EvolutionConfig& cfg, const Propagator& prop,
                    TrajectoryState& state, const std::vector<Observer>& observers);

}  // namespace mf
