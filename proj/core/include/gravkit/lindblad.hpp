#pragma once

#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "gravkit/constants.hpp"
#include "gravkit/kernels.hpp"
#include "gravkit/rates.hpp"

namespace gravkit {

// ---------------------------------------------------------------------------
// Pointer-basis systems: N rigidly displaced branches, N x N density matrix.
// Decoherence engines scale off-diagonals; diagonals are untouched.
// ---------------------------------------------------------------------------

struct PointerSystem {
    SuperpositionSpec spec;
    Eigen::MatrixXcd rho;    // Hermitian, unit trace, PSD
    Eigen::MatrixXd rates;   // pairwise Lambda_ij, 1/s (used by the Markovian engines)

    static PointerSystem from_amplitudes(SuperpositionSpec spec,
                                         const Eigen::VectorXcd& amplitudes,
                                         const Eigen::MatrixXd& rates);
    /// Branch amplitudes with the pairwise rate matrix built from dp_rate_matrix.
    static PointerSystem dp(SuperpositionSpec spec, const Eigen::VectorXcd& amplitudes,
                            const Constants& k = Constants::si());

    /// Hermiticity, unit trace (1e-10), positivity (min eigenvalue >= -1e-8),
    /// rate-matrix symmetry/sign. Throws validation_error.
    void validate() const;
};

/// Exact off-diagonal decay exp(-Lambda_ij t) of the Markovian dissipator.
PointerSystem evolve_dp_pointer(PointerSystem system, double t);

/// Same decay with rates from the TD decoherence kernel, plus branch-pair
/// phases exp(-i (E_i - E_j) t / hbar) from the Newtonian potential term.
/// For rigid branches the self-energies are equal and the phases cancel.
PointerSystem evolve_td_pointer(PointerSystem system, const TDKernel& kernel, double t,
                                const Constants& k = Constants::si());

// ---------------------------------------------------------------------------
// Non-Markovian dephasing: static branches, exponent from the double time
// integral of the kernel contracted with the branch density differences.
// ---------------------------------------------------------------------------

struct DephasingExponent {
    double gamma = 0.0;  // real part: |rho_ij(t)| = |rho_ij(0)| exp(-gamma)
    double phase = 0.0;  // imaginary part (complex kernels only)
    double quad_error = 0.0;
};

/// Karolyhazy kernel:
///   Gamma(t) = c^2 l_P^{4/3}/(2 pi^2 hbar^2)
///              int_0^kc q^{-5/3} |rho~(q)|^2 (1 - sinc(q d)) (1 - cos(c q t)) dq.
/// Rises from 0 and saturates once c t exceeds the branch separation; the
/// zero-frequency spectral weight vanishes, so there is no secular growth.
DephasingExponent nonmarkovian_exponent(const SuperpositionSpec& spec, std::size_t i,
                                        std::size_t j, const KarolyhazyKernel& kernel, double t);

/// Adler kernel (WhiteGaussian preset): separable space-time correlator, so
///   Gamma(t) = (xi^2 c^4 / hbar^2) K_ij int_0^t ds int_0^s g(tau) dtau,
/// with K_ij the Gaussian-smeared spatial contraction. In the delta-time
/// limit this is the CSL-type Markovian decay at rate
/// (xi^2 c^4 / hbar^2) K_ij / 2. Custom tabulated kernels are contracted on
/// point-mass branches only.
DephasingExponent nonmarkovian_exponent(const SuperpositionSpec& spec, std::size_t i,
                                        std::size_t j, const AdlerKernel& kernel, double t,
                                        const Constants& k = Constants::si());

/// Oracle route for the Karolyhazy exponent: the memory integral done as a
/// nested time quadrature of the contracted correlator F(tau), instead of the
/// closed-form time factor. Slower; used for cross-checks.
DephasingExponent nonmarkovian_exponent_time_quadrature(const SuperpositionSpec& spec,
                                                        std::size_t i, std::size_t j,
                                                        const KarolyhazyKernel& kernel, double t);

using NonMarkovianKernel = std::variant<KarolyhazyKernel, AdlerKernel>;

PointerSystem evolve_nonmarkovian_pointer(PointerSystem system, const NonMarkovianKernel& kernel,
                                          double t, const Constants& k = Constants::si());

// ---------------------------------------------------------------------------
// KTM: two harmonically trapped masses, linearised gravitational coupling
// K = 2 G m1 m2 / d^3 implemented by continuous position measurement plus
// feedback. Master equation: coupled-oscillator unitary part plus momentum
// diffusion hbar K in each mode; Gaussian states stay Gaussian.
// ---------------------------------------------------------------------------

struct GaussianOscillatorState {
    double m1 = 1.0, m2 = 1.0;          // kg
    double trap_omega1 = 1.0, trap_omega2 = 1.0;  // bare trap frequencies
    double omega1 = 1.0, omega2 = 1.0;  // effective: Omega_j^2 = omega_j^2 - K/m_j
    double coupling = 0.0;              // K, kg/s^2
    double separation = 0.0;            // m (0 when K is set directly)
    Eigen::Vector4d mean = Eigen::Vector4d::Zero();  // (x1, p1, x2, p2)
    Eigen::Matrix4d cov = Eigen::Matrix4d::Identity();
    Constants constants = Constants::si();

    /// Ground state of the uncoupled traps, masses a distance d apart;
    /// K = 2 G m1 m2 / d^3.
    static GaussianOscillatorState ground(double m1, double m2, double trap_omega1,
                                          double trap_omega2, double separation,
                                          const Constants& k = Constants::si());
    /// Scaled-unit construction with the coupling given directly.
    static GaussianOscillatorState ground_coupled(double m1, double m2, double omega1,
                                                  double omega2, double coupling,
                                                  const Constants& k = Constants::scaled());

    double purity() const;  // (hbar/2)^2 / sqrt(det cov)
    /// Smallest eigenvalue of cov + (i hbar/2) sigma, in units of hbar/2.
    double heisenberg_margin() const;
    void validate() const;

    /// Hamiltonian matrix G of H = 1/2 r^T G r and the symplectic drift sigma G.
    Eigen::Matrix4d hamiltonian_matrix() const;
    Eigen::Matrix4d drift_matrix() const;
    /// Momentum diffusion hbar K on each mode (measurement + feedback noise).
    Eigen::Matrix4d diffusion_matrix() const;
};

/// Moment-equation integration (RK4) of the KTM master equation over time t
/// with step dt. Requires dt max(Omega_j, sqrt(K/sqrt(m1 m2))) < 0.1; raises
/// stability_error if the state leaves the Heisenberg cone.
GaussianOscillatorState evolve_ktm_gaussian(GaussianOscillatorState state, double t, double dt);

}  // namespace gravkit
