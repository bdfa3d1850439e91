#include "gravkit/lindblad.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "gravkit/errors.hpp"
#include "gravkit/quadrature.hpp"

namespace gravkit {

namespace {
constexpr double kPi = 3.14159265358979323846;

double sinc(double x) {
    if (std::abs(x) < 1e-4) {
        const double x2 = x * x;
        return 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0);
    }
    return std::sin(x) / x;
}
}  // namespace

// ---------------------------------------------------------------------------
// PointerSystem
// ---------------------------------------------------------------------------

PointerSystem PointerSystem::from_amplitudes(SuperpositionSpec spec,
                                             const Eigen::VectorXcd& amplitudes,
                                             const Eigen::MatrixXd& rates) {
    spec.validate();
    const auto n = static_cast<Eigen::Index>(spec.branches());
    if (amplitudes.size() != n)
        throw validation_error("pointer system: one amplitude per branch required");
    const double norm = amplitudes.norm();
    if (norm <= 0.0) throw validation_error("pointer system: amplitudes must not all vanish");
    PointerSystem s;
    s.spec = std::move(spec);
    const Eigen::VectorXcd a = amplitudes / norm;
    s.rho = a * a.adjoint();
    s.rates = rates;
    s.validate();
    return s;
}

PointerSystem PointerSystem::dp(SuperpositionSpec spec, const Eigen::VectorXcd& amplitudes,
                                const Constants& k) {
    Eigen::MatrixXd lambda = dp_rate_matrix(spec, k);
    return from_amplitudes(std::move(spec), amplitudes, lambda);
}

void PointerSystem::validate() const {
    const auto n = rho.rows();
    if (rho.cols() != n || rates.rows() != n || rates.cols() != n)
        throw validation_error("pointer system: dimension mismatch");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
        throw validation_error("pointer system: density matrix not Hermitian");
    if (std::abs(rho.trace().real() - 1.0) > 1e-10 || std::abs(rho.trace().imag()) > 1e-10)
        throw validation_error("pointer system: density matrix trace != 1");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
    if (es.eigenvalues().minCoeff() < -1e-8)
        throw validation_error("pointer system: density matrix not positive semidefinite");
    if ((rates - rates.transpose()).cwiseAbs().maxCoeff() > 0.0)
        throw validation_error("pointer system: rate matrix not symmetric");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (rates(i, i) != 0.0)
            throw validation_error("pointer system: rate matrix diagonal must vanish");
        for (Eigen::Index j = 0; j < n; ++j)
            if (rates(i, j) < 0.0)
                throw validation_error("pointer system: rates must be nonnegative");
    }
}

PointerSystem evolve_dp_pointer(PointerSystem system, double t) {
    if (t < 0.0) throw validation_error("evolve_dp_pointer: t must be >= 0");
    const auto n = system.rho.rows();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (i != j) system.rho(i, j) *= std::exp(-system.rates(i, j) * t);
    return system;
}

PointerSystem evolve_td_pointer(PointerSystem system, const TDKernel& kernel, double t,
                                const Constants& k) {
    if (t < 0.0) throw validation_error("evolve_td_pointer: t must be >= 0");
    const Eigen::MatrixXd lambda = td_rate_matrix(system.spec, kernel);
    const std::vector<double> energies = branch_newtonian_energies(system.spec, k);
    const auto n = system.rho.rows();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            const double phase = -(energies[static_cast<std::size_t>(i)] -
                                   energies[static_cast<std::size_t>(j)]) *
                                 t / k.hbar;
            system.rho(i, j) *= std::exp(-lambda(i, j) * t) *
                                std::complex<double>(std::cos(phase), std::sin(phase));
        }
    return system;
}

// ---------------------------------------------------------------------------
// Non-Markovian dephasing exponents
// ---------------------------------------------------------------------------

namespace {

// Angular-averaged branch-difference form factor:
// int dOmega |drho~(q)|^2 = 4 pi 2 |rho~(q)|^2 (1 - sinc(q d)).
double branch_form_factor(const SuperpositionSpec& spec, std::size_t i, std::size_t j,
                          double q) {
    const double d = (spec.displacements[i] - spec.displacements[j]).norm();
    const double ft = spec.density.fourier_amplitude(q).real();
    return ft * ft * (1.0 - sinc(q * d));
}

// Point masses are fine here: the kernel cutoff (or the Gaussian smearing of
// the kernel itself) regularises the q-integrals.
void check_branch_indices(const SuperpositionSpec& spec, std::size_t i, std::size_t j) {
    spec.validate();
    if (i >= spec.branches() || j >= spec.branches() || i == j)
        throw validation_error("nonmarkovian exponent: need two distinct branch indices");
    if (!spec.density.spherically_symmetric())
        throw validation_error("nonmarkovian exponent: spherically symmetric density required");
}

double karolyhazy_q_cutoff(const SuperpositionSpec& spec, const KarolyhazyKernel& kernel) {
    double qc = kernel.cutoff_wavenumber();
    if (spec.density.kind() == DensityKind::GaussianBall)
        qc = std::min(qc, 6.0 / spec.density.gaussian_r0());
    else if (spec.density.kind() == DensityKind::UniformSphere)
        qc = std::min(qc, 700.0 / spec.density.sphere_radius());
    return qc;
}

}  // namespace

DephasingExponent nonmarkovian_exponent(const SuperpositionSpec& spec, std::size_t i,
                                        std::size_t j, const KarolyhazyKernel& kernel,
                                        double t) {
    check_branch_indices(spec, i, j);
    if (t < 0.0) throw validation_error("nonmarkovian exponent: t must be >= 0");
    if (t == 0.0) return {};
    const Constants& k = kernel.constants;
    const double d = (spec.displacements[i] - spec.displacements[j]).norm();
    const double qc = karolyhazy_q_cutoff(spec, kernel);
    const double pref = k.c * k.c * std::pow(k.planck_length(), 4.0 / 3.0) /
                        (2.0 * kPi * kPi * k.hbar * k.hbar);
    // Panels for the fastest oscillation among sinc(qd), cos(cqt), form factor.
    const double osc = qc * std::max({d, k.c * t, spec.density.characteristic_size()}) / kPi;
    const auto panels = static_cast<std::size_t>(std::min(osc, 2.0e5)) + 8;
    auto integrand = [&](double q) {
        if (q <= 0.0) return 0.0;
        return std::pow(q, -5.0 / 3.0) * branch_form_factor(spec, i, j, q) *
               (1.0 - std::cos(k.c * q * t));
    };
    const QuadResult qr = integrate(integrand, 0.0, qc, 1e-10, 0.0, panels);
    return {pref * qr.value, 0.0, pref * qr.error};
}

DephasingExponent nonmarkovian_exponent_time_quadrature(const SuperpositionSpec& spec,
                                                        std::size_t i, std::size_t j,
                                                        const KarolyhazyKernel& kernel,
                                                        double t) {
    check_branch_indices(spec, i, j);
    if (t <= 0.0) return {};
    const Constants& k = kernel.constants;
    const double d = (spec.displacements[i] - spec.displacements[j]).norm();
    const double qc = karolyhazy_q_cutoff(spec, kernel);
    const double spec_pref = 2.0 / (kPi * kPi) * std::pow(k.planck_length(), 4.0 / 3.0);

    // F(tau) = (2/pi^2) l_P^{4/3} int q^{1/3} |rho~|^2 (1-sinc(qd)) cos(c q tau) dq
    auto f_of_tau = [&](double tau) {
        const double osc = qc * std::max({d, k.c * std::abs(tau),
                                          spec.density.characteristic_size()}) / kPi;
        const auto panels = static_cast<std::size_t>(std::min(osc, 2.0e5)) + 8;
        auto integrand = [&](double q) {
            if (q <= 0.0) return 0.0;
            return std::cbrt(q) * branch_form_factor(spec, i, j, q) * std::cos(k.c * q * tau);
        };
        return spec_pref * integrate(integrand, 0.0, qc, 1e-9, 0.0, panels).value;
    };
    // Gamma(t) = (c^2/2hbar)^2 int_0^t ds int_0^s F(tau) dtau
    auto inner = [&](double s) {
        const std::size_t panels = static_cast<std::size_t>(qc * k.c * s / kPi / 4.0) + 4;
        return integrate(f_of_tau, 0.0, s, 1e-9, 0.0, std::min<std::size_t>(panels, 512), 12)
            .value;
    };
    const std::size_t outer_panels =
        std::min<std::size_t>(static_cast<std::size_t>(qc * k.c * t / kPi / 4.0) + 4, 512);
    const QuadResult outer = integrate(inner, 0.0, t, 1e-8, 0.0, outer_panels, 10);
    const double pref = std::pow(k.c * k.c / (2.0 * k.hbar), 2);
    return {pref * outer.value, 0.0, pref * outer.error};
}

namespace {

// Spatial contraction for the Adler kernel: int int drho(x) D(x-y) drho(y).
double adler_spatial_contraction(const SuperpositionSpec& spec, std::size_t i, std::size_t j,
                                 const AdlerKernel& kernel) {
    const double d = (spec.displacements[i] - spec.displacements[j]).norm();
    if (kernel.preset() == AdlerKernel::Preset::WhiteGaussian) {
        const double qc = 6.0 / kernel.correlation_length() +
                          (spec.density.kind() == DensityKind::GaussianBall
                               ? 6.0 / spec.density.gaussian_r0()
                               : 0.0);
        const std::size_t panels =
            static_cast<std::size_t>(qc * (d + spec.density.characteristic_size()) / kPi) + 8;
        if (panels > 200000)
            throw numerical_error("adler contraction: oscillation count beyond budget");
        auto integrand = [&](double q) {
            if (q <= 0.0) return 0.0;
            return q * q * kernel.spatial_fourier(q) * branch_form_factor(spec, i, j, q) /
                   (kPi * kPi);
        };
        return integrate(integrand, 0.0, qc, 1e-11, 0.0, panels).value;
    }
    // Tabulated kernels contract exactly on point-mass branches only.
    if (spec.density.kind() != DensityKind::PointMass)
        throw unsupported_kernel_error(
            "adler tabulated kernel: contraction implemented for point-mass branches");
    (void)d;
    return 0.0;  // handled by caller (needs the time argument)
}

}  // namespace

DephasingExponent nonmarkovian_exponent(const SuperpositionSpec& spec, std::size_t i,
                                        std::size_t j, const AdlerKernel& kernel, double t,
                                        const Constants& k) {
    check_branch_indices(spec, i, j);
    if (t < 0.0) throw validation_error("nonmarkovian exponent: t must be >= 0");
    if (t == 0.0) return {};
    const double pref = std::pow(kernel.strength() * k.c * k.c / k.hbar, 2);

    if (kernel.preset() == AdlerKernel::Preset::WhiteGaussian) {
        const double spatial = adler_spatial_contraction(spec, i, j, kernel);
        return {pref * spatial * kernel.time_profile_double_integral(t), 0.0, 0.0};
    }

    // Tabulated kernel on point-mass branches: F(tau) = 2 m^2 [D(0,tau) - D(d,tau)].
    if (spec.density.kind() != DensityKind::PointMass)
        throw unsupported_kernel_error(
            "adler tabulated kernel: contraction implemented for point-mass branches");
    const double m = spec.density.total_mass();
    const double d = (spec.displacements[i] - spec.displacements[j]).norm();
    auto f_real = [&](double tau) {
        return 2.0 * m * m * (kernel.real_part(0.0, tau) - kernel.real_part(d, tau));
    };
    auto f_imag = [&](double tau) {
        return 2.0 * m * m * (kernel.imag_part(0.0, tau) - kernel.imag_part(d, tau));
    };
    auto inner_r = [&](double s) { return integrate(f_real, 0.0, s, 1e-9, 0.0, 16, 14).value; };
    auto inner_i = [&](double s) { return integrate(f_imag, 0.0, s, 1e-9, 0.0, 16, 14).value; };
    const QuadResult gr = integrate(inner_r, 0.0, t, 1e-8, 0.0, 16, 12);
    const QuadResult gi = integrate(inner_i, 0.0, t, 1e-8, 0.0, 16, 12);
    return {pref * gr.value, pref * gi.value, pref * (gr.error + gi.error)};
}

PointerSystem evolve_nonmarkovian_pointer(PointerSystem system, const NonMarkovianKernel& kernel,
                                          double t, const Constants& k) {
    if (t < 0.0) throw validation_error("evolve_nonmarkovian_pointer: t must be >= 0");
    if (t == 0.0) return system;
    const auto n = system.rho.rows();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            DephasingExponent e;
            if (std::holds_alternative<KarolyhazyKernel>(kernel))
                e = nonmarkovian_exponent(system.spec, static_cast<std::size_t>(i),
                                          static_cast<std::size_t>(j),
                                          std::get<KarolyhazyKernel>(kernel), t);
            else
                e = nonmarkovian_exponent(system.spec, static_cast<std::size_t>(i),
                                          static_cast<std::size_t>(j),
                                          std::get<AdlerKernel>(kernel), t, k);
            const std::complex<double> factor =
                std::exp(std::complex<double>(-e.gamma, -e.phase));
            system.rho(i, j) *= factor;
            system.rho(j, i) *= std::conj(factor);
        }
    return system;
}

// ---------------------------------------------------------------------------
// KTM Gaussian engine
// ---------------------------------------------------------------------------

namespace {

Eigen::Matrix4d symplectic_form() {
    Eigen::Matrix4d s = Eigen::Matrix4d::Zero();
    s(0, 1) = 1.0;
    s(1, 0) = -1.0;
    s(2, 3) = 1.0;
    s(3, 2) = -1.0;
    return s;
}

}  // namespace

GaussianOscillatorState GaussianOscillatorState::ground(double m1, double m2, double trap_omega1,
                                                        double trap_omega2, double separation,
                                                        const Constants& k) {
    if (m1 <= 0.0 || m2 <= 0.0 || trap_omega1 <= 0.0 || trap_omega2 <= 0.0 || separation <= 0.0)
        throw validation_error("ktm state: masses, trap frequencies, separation must be positive");
    const double coupling = 2.0 * k.G * m1 * m2 / std::pow(separation, 3);
    const double w1sq = trap_omega1 * trap_omega1 - coupling / m1;
    const double w2sq = trap_omega2 * trap_omega2 - coupling / m2;
    if (w1sq <= 0.0 || w2sq <= 0.0)
        throw validation_error("ktm state: coupling destabilises the traps");
    GaussianOscillatorState s = ground_coupled(m1, m2, std::sqrt(w1sq), std::sqrt(w2sq),
                                               coupling, k);
    s.trap_omega1 = trap_omega1;
    s.trap_omega2 = trap_omega2;
    s.separation = separation;
    return s;
}

GaussianOscillatorState GaussianOscillatorState::ground_coupled(double m1, double m2,
                                                                double omega1, double omega2,
                                                                double coupling,
                                                                const Constants& k) {
    if (m1 <= 0.0 || m2 <= 0.0 || omega1 <= 0.0 || omega2 <= 0.0)
        throw validation_error("ktm state: masses and frequencies must be positive");
    if (coupling < 0.0) throw validation_error("ktm state: coupling must be >= 0");
    GaussianOscillatorState s;
    s.m1 = m1;
    s.m2 = m2;
    s.omega1 = omega1;
    s.omega2 = omega2;
    s.trap_omega1 = std::sqrt(omega1 * omega1 + coupling / m1);
    s.trap_omega2 = std::sqrt(omega2 * omega2 + coupling / m2);
    s.coupling = coupling;
    s.constants = k;
    s.cov = Eigen::Matrix4d::Zero();
    s.cov(0, 0) = k.hbar / (2.0 * m1 * omega1);
    s.cov(1, 1) = k.hbar * m1 * omega1 / 2.0;
    s.cov(2, 2) = k.hbar / (2.0 * m2 * omega2);
    s.cov(3, 3) = k.hbar * m2 * omega2 / 2.0;
    return s;
}

double GaussianOscillatorState::purity() const {
    const double h2 = constants.hbar / 2.0;
    return h2 * h2 / std::sqrt(cov.determinant());
}

double GaussianOscillatorState::heisenberg_margin() const {
    const Eigen::Matrix4cd m =
        cov.cast<std::complex<double>>() +
        std::complex<double>(0.0, constants.hbar / 2.0) * symplectic_form().cast<std::complex<double>>();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(m);
    return es.eigenvalues().minCoeff() / (constants.hbar / 2.0);
}

void GaussianOscillatorState::validate() const {
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * cov.cwiseAbs().maxCoeff())
        throw validation_error("ktm state: covariance not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(cov);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw validation_error("ktm state: covariance not positive definite");
    if (heisenberg_margin() < -1e-8)
        throw validation_error("ktm state: Heisenberg bound violated");
}

Eigen::Matrix4d GaussianOscillatorState::hamiltonian_matrix() const {
    Eigen::Matrix4d g = Eigen::Matrix4d::Zero();
    g(0, 0) = m1 * omega1 * omega1;
    g(1, 1) = 1.0 / m1;
    g(2, 2) = m2 * omega2 * omega2;
    g(3, 3) = 1.0 / m2;
    g(0, 2) = g(2, 0) = coupling;
    return g;
}

Eigen::Matrix4d GaussianOscillatorState::drift_matrix() const {
    return symplectic_form() * hamiltonian_matrix();
}

Eigen::Matrix4d GaussianOscillatorState::diffusion_matrix() const {
    Eigen::Matrix4d d = Eigen::Matrix4d::Zero();
    d(1, 1) = constants.hbar * coupling;
    d(3, 3) = constants.hbar * coupling;
    return d;
}

GaussianOscillatorState evolve_ktm_gaussian(GaussianOscillatorState state, double t, double dt) {
    if (t < 0.0 || dt <= 0.0) throw validation_error("evolve_ktm_gaussian: need t >= 0, dt > 0");
    const double w_fast = std::max({state.omega1, state.omega2,
                                    std::sqrt(state.coupling / std::sqrt(state.m1 * state.m2))});
    if (dt * w_fast >= 0.1)
        throw validation_error("evolve_ktm_gaussian: dt must resolve the fastest frequency");

    const Eigen::Matrix4d a = state.drift_matrix();
    const Eigen::Matrix4d d = state.diffusion_matrix();
    auto mean_rhs = [&](const Eigen::Vector4d& m) -> Eigen::Vector4d { return a * m; };
    auto cov_rhs = [&](const Eigen::Matrix4d& v) -> Eigen::Matrix4d {
        return a * v + v * a.transpose() + d;
    };

    const auto steps = static_cast<long>(std::ceil(t / dt - 1e-12));
    double remaining = t;
    for (long s = 0; s < steps; ++s) {
        const double h = std::min(dt, remaining);
        remaining -= h;
        const Eigen::Vector4d k1m = mean_rhs(state.mean);
        const Eigen::Matrix4d k1v = cov_rhs(state.cov);
        const Eigen::Vector4d k2m = mean_rhs(state.mean + 0.5 * h * k1m);
        const Eigen::Matrix4d k2v = cov_rhs(state.cov + 0.5 * h * k1v);
        const Eigen::Vector4d k3m = mean_rhs(state.mean + 0.5 * h * k2m);
        const Eigen::Matrix4d k3v = cov_rhs(state.cov + 0.5 * h * k2v);
        const Eigen::Vector4d k4m = mean_rhs(state.mean + h * k3m);
        const Eigen::Matrix4d k4v = cov_rhs(state.cov + h * k3v);
        state.mean += (h / 6.0) * (k1m + 2.0 * k2m + 2.0 * k3m + k4m);
        state.cov += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        state.cov = 0.5 * (state.cov + state.cov.transpose()).eval();
    }
    if (state.heisenberg_margin() < -1e-8)
        throw stability_error("evolve_ktm_gaussian: Heisenberg bound violated beyond tolerance");
    return state;
}

}  // namespace gravkit
