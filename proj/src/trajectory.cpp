#include "mf/trajectory.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <stdexcept>

namespace mf {

std::mt19937_64 make_trajectory_rng(std::uint64_t master_seed, std::uint64_t trajectory_id) {
    std::seed_seq seq{
        static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
        static_cast<std::uint32_t>(trajectory_id), static_cast<std::uint32_t>(trajectory_id >> 32),
        0x6d6f6e66u};
    return std::mt19937_64(seq);
}

InitState init_state_from_name(const std::string& name) {
    if (name == "random_gaussian") return InitState::random_gaussian;
    if (name == "neel") return InitState::neel;
    throw std::invalid_argument("unknown initial state: " + name);
}

void EvolutionConfig::validate() const {
    if (gamma < 0) throw std::invalid_argument("monitoring rate must be >= 0");
    if (dt <= 0) throw std::invalid_argument("time step must be > 0");
    if (samples < 0) throw std::invalid_argument("sample count must be >= 0");
    if (samples > 0 && sample_interval <= 0) throw std::invalid_argument("sample interval must be > 0");
}

double EvolutionConfig::burn_in(const Lattice& lat) const {
    return t_burn >= 0 ? t_burn : 4.0 * lat.length;
}

Vector TrajectoryState::occupations() const {
    return psi.rowwise().squaredNorm();
}

double TrajectoryState::orthonormality_error() const {
    long n = psi.cols();
    return (psi.adjoint() * psi - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
}

DensePropagator::DensePropagator(const Lattice& lat, double dt) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lat.hopping_matrix());
    if (es.info() != Eigen::Success) throw std::runtime_error("hopping matrix diagonalization failed");
    Eigen::VectorXcd phases(lat.sites);
    for (long i = 0; i < lat.sites; ++i)
        phases(i) = std::polar(1.0, -es.eigenvalues()(i) * dt);
    Matrix w = es.eigenvectors().cast<std::complex<double>>();
    unitary_ = w * phases.asDiagonal() * w.adjoint();
}

void DensePropagator::apply(Matrix& psi) const {
    psi = unitary_ * psi;
}

double DensePropagator::unitarity_error() const {
    long v = unitary_.rows();
    return (unitary_.adjoint() * unitary_ - Matrix::Identity(v, v)).cwiseAbs().maxCoeff();
}

namespace {
std::mutex fftw_planner_mutex;
}

FftPropagator::FftPropagator(const Lattice& lat, double dt, long columns) : columns_(columns) {
    const long v = lat.sites;
    phases_.resize(v);
    for (long s = 0; s < v; ++s) {
        // Site order equals wavevector order under the DFT.
        auto k = lat.coords(s);
        phases_(s) = std::polar(1.0 / static_cast<double>(v), -lat.hopping_eigenvalue(k) * dt);
    }
    std::vector<int> dims(lat.dim, lat.length);
    Matrix scratch(v, columns);
    auto* data = reinterpret_cast<fftw_complex*>(scratch.data());
    std::lock_guard<std::mutex> lock(fftw_planner_mutex);
    unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    plan_fwd_ = fftw_plan_many_dft(lat.dim, dims.data(), static_cast<int>(columns), data, nullptr,
                                   1, static_cast<int>(v), data, nullptr, 1, static_cast<int>(v),
                                   FFTW_FORWARD, flags);
    plan_bwd_ = fftw_plan_many_dft(lat.dim, dims.data(), static_cast<int>(columns), data, nullptr,
                                   1, static_cast<int>(v), data, nullptr, 1, static_cast<int>(v),
                                   FFTW_BACKWARD, flags);
    if (!plan_fwd_ || !plan_bwd_) throw std::runtime_error("FFTW plan creation failed");
}

FftPropagator::~FftPropagator() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex);
    if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    if (plan_bwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
}

void FftPropagator::apply(Matrix& psi) const {
    if (psi.rows() != phases_.size() || psi.cols() != columns_)
        throw std::invalid_argument("propagator/state shape mismatch");
    auto* data = reinterpret_cast<fftw_complex*>(psi.data());
    fftw_execute_dft(static_cast<fftw_plan>(plan_fwd_), data, data);
    psi.array().colwise() *= phases_.array();  // includes the 1/V back-transform scale
    fftw_execute_dft(static_cast<fftw_plan>(plan_bwd_), data, data);
}

std::unique_ptr<Propagator> make_propagator(const Lattice& lat, double dt, StepKernel kernel, long columns) {
    if (kernel == StepKernel::reference) return std::make_unique<DensePropagator>(lat, dt);
    return std::make_unique<FftPropagator>(lat, dt, columns);
}

TrajectoryState init_state(const Lattice& lat, InitState tag, std::mt19937_64 rng, std::uint64_t trajectory_id) {
    const long v = lat.sites;
    const long n = v / 2;
    TrajectoryState state;
    state.trajectory_id = trajectory_id;
    state.rng = std::move(rng);
    state.psi.resize(v, n);
    if (tag == InitState::neel) {
        // Occupied sites on the even-parity sublattice: <n_l> alternates 1,0,...
        state.psi.setZero();
        long col = 0;
        for (long s = 0; s < v; ++s) {
            auto c = lat.coords(s);
            int parity = 0;
            for (int i = 0; i < lat.dim; ++i) parity += c[i];
            if (parity % 2 == 0) state.psi(s, col++) = 1.0;
        }
    } else {
        std::normal_distribution<double> normal(0.0, 1.0);
        for (long j = 0; j < n; ++j)
            for (long i = 0; i < v; ++i)
                state.psi(i, j) = std::complex<double>(normal(state.rng), normal(state.rng));
        orthonormalize_qr(state.psi);
    }
    return state;
}

Vector measurement_weights(TrajectoryState& state, double gamma, double dt) {
    if (gamma < 0) throw std::invalid_argument("monitoring rate must be >= 0");
    const long v = state.sites();
    Vector weights(v);
    if (gamma == 0) {
        weights.setOnes();
        return weights;
    }
    Vector occ = state.occupations();
    const double noise_scale = std::sqrt(2.0 * gamma * dt);
    std::normal_distribution<double> normal(0.0, 1.0);
    double max_exp = -std::numeric_limits<double>::infinity();
    for (long l = 0; l < v; ++l) {
        double a = noise_scale * normal(state.rng) + 2.0 * gamma * dt * occ(l);
        weights(l) = a;
        max_exp = std::max(max_exp, a);
    }
    // Site-independent factors cancel under QR; shift for numeric hygiene.
    for (long l = 0; l < v; ++l) weights(l) = std::exp(weights(l) - max_exp);
    return weights;
}

void orthonormalize_qr(Matrix& psi) {
    const long n = psi.cols();
    Eigen::HouseholderQR<Matrix> qr(psi);
    Matrix thin_q = Matrix::Identity(psi.rows(), n);
    thin_q.applyOnTheLeft(qr.householderQ());
    psi = std::move(thin_q);
}

void orthonormalize_chol(Matrix& psi) {
    const long n = psi.cols();
    for (int pass = 0; pass < 2; ++pass) {
        Matrix gram(n, n);
        gram.setZero();
        gram.selfadjointView<Eigen::Lower>().rankUpdate(psi.adjoint());
        Eigen::LLT<Matrix> llt(gram);
        if (llt.info() != Eigen::Success) {
            orthonormalize_qr(psi);
            return;
        }
        llt.matrixU().solveInPlace<Eigen::OnTheRight>(psi);
        if (pass == 0) {
            // One pass loses orthonormality ~ kappa(G) * eps; skip the second
            // when the Cholesky diagonal says the Gram matrix is benign.
            const auto d = llt.matrixLLT().diagonal().real();
            const double ratio = d.maxCoeff() / d.minCoeff();
            if (ratio * ratio < 1e3) break;
        }
    }
}

void step(TrajectoryState& state, const EvolutionConfig& cfg, const Propagator& prop) {
    Vector weights = measurement_weights(state, cfg.gamma, cfg.dt);
    prop.apply(state.psi);
    state.psi.array().colwise() *= weights.array().cast<std::complex<double>>();
    if (cfg.kernel == StepKernel::reference)
        orthonormalize_qr(state.psi);
    else
        orthonormalize_chol(state.psi);
    state.time += cfg.dt;
#ifndef NDEBUG
    if (state.orthonormality_error() > 1e-10)
        throw std::runtime_error("orthonormality lost after step");
#endif
}

void run_trajectory(const Lattice& lat, const EvolutionConfig& cfg, const Propagator& prop,
                    TrajectoryState& state, const std::vector<Observer>& observers) {
    cfg.validate();
    const double burn = cfg.burn_in(lat);
    const long burn_steps = static_cast<long>(std::ceil(burn / cfg.dt - 1e-9));
    for (long i = 0; i < burn_steps; ++i) step(state, cfg, prop);
    if (cfg.samples == 0) return;
    const long gap_steps = std::max<long>(1, static_cast<long>(std::llround(cfg.sample_interval / cfg.dt)));
    for (int s = 0; s < cfg.samples; ++s) {
        if (s > 0)
            for (long i = 0; i < gap_steps; ++i) step(state, cfg, prop);
        for (const auto& obs : observers) obs(state);
    }
}

}  // namespace mf
