#include "gravkit/rates.hpp"

#include <cmath>
#include <limits>

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

SuperpositionSpec SuperpositionSpec::two_branch(MassDensity density, double separation) {
    if (separation < 0.0) throw validation_error("two_branch: separation must be >= 0");
    SuperpositionSpec s;
    s.density = std::move(density);
    s.displacements = {Eigen::Vector3d::Zero(), Eigen::Vector3d(0.0, 0.0, separation)};
    return s;
}

void SuperpositionSpec::validate() const {
    if (displacements.size() < 2)
        throw validation_error("superposition: at least 2 branches required");
    for (std::size_t i = 0; i < displacements.size(); ++i)
        for (std::size_t j = i + 1; j < displacements.size(); ++j)
            if ((displacements[i] - displacements[j]).norm() == 0.0)
                throw validation_error("superposition: branch displacements must be distinct");
}

double karolyhazy_delta_s(double s, const Constants& k) {
    if (s <= 0.0) throw validation_error("karolyhazy_delta_s: s must be positive");
    const double lp = k.planck_length();
    return std::cbrt(lp * lp * s);
}

CoherenceCell karolyhazy_coherence_cell(double mass, double radius, const Constants& k) {
    if (mass <= 0.0) throw validation_error("karolyhazy_coherence_cell: mass must be positive");
    if (radius < 0.0) throw validation_error("karolyhazy_coherence_cell: radius must be >= 0");
    const double a_point = k.hbar * k.hbar / (k.G * mass * mass * mass);
    CoherenceCell cell;
    cell.a_k = radius < a_point ? a_point : std::cbrt(a_point * radius * radius);
    cell.tau_k = mass * cell.a_k * cell.a_k / k.hbar;
    return cell;
}

RateResult dp_decay_rate(const SuperpositionSpec& spec, const Constants& k) {
    spec.validate();
    if (spec.branches() != 2)
        throw validation_error("dp_decay_rate: use dp_rate_matrix for more than two branches");
    const Eigen::Vector3d d = spec.displacements[1] - spec.displacements[0];
    const QuadResult s0 = pair_overlap(spec.density, 0.0);
    const QuadResult sd = pair_overlap(spec.density, d);
    const double pref = k.G / k.hbar;
    RateResult r;
    r.rate = pref * (s0.value - sd.value);
    if (r.rate < 0.0) r.rate = 0.0;  // quadrature dust at d = 0
    r.time_constant = r.rate > 0.0 ? 1.0 / r.rate : std::numeric_limits<double>::infinity();
    r.method = "kspace-quadrature";
    r.quad_error = pref * (s0.error + sd.error);
    return r;
}

Eigen::MatrixXd dp_rate_matrix(const SuperpositionSpec& spec, const Constants& k) {
    spec.validate();
    const auto n = static_cast<Eigen::Index>(spec.branches());
    const double s0 = pair_overlap(spec.density, 0.0).value;
    const double pref = k.G / k.hbar;
    Eigen::MatrixXd lambda = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const Eigen::Vector3d d = spec.displacements[j] - spec.displacements[i];
            const double rate = std::max(0.0, pref * (s0 - pair_overlap(spec.density, d).value));
            lambda(i, j) = lambda(j, i) = rate;
        }
    return lambda;
}

PenroseResult penrose_delta_e(const SuperpositionSpec& spec, const Constants& k) {
    spec.validate();
    if (spec.branches() != 2)
        throw validation_error("penrose_delta_e: defined for two-branch superpositions");
    const Eigen::Vector3d d = spec.displacements[1] - spec.displacements[0];
    const QuadResult s0 = pair_overlap(spec.density, 0.0);
    const QuadResult sd = pair_overlap(spec.density, d);
    PenroseResult out;
    out.delta_e = 8.0 * kPi * k.G * std::max(0.0, s0.value - sd.value);
    out.tau = out.delta_e > 0.0 ? k.hbar / out.delta_e : std::numeric_limits<double>::infinity();
    out.quad_error = 8.0 * kPi * k.G * (s0.error + sd.error);
    return out;
}

namespace {

// Lambda_TD for one branch pair, by quadrature of the TD decoherence kernel
// against the density form factor. Independent route from pair_overlap: one
// difference integrand instead of S(0) and S(d) separately.
QuadResult td_pair_rate(const MassDensity& density, const Eigen::Vector3d& d,
                        const TDKernel& kernel) {
    if (!density.has_finite_self_overlap())
        throw divergence_error("td rate: point-mass density has divergent rates");
    const double dd = d.norm();
    if (!density.spherically_symmetric()) {
        // Lattice: minimal kernel reduces to the Diosi form; evaluate via the
        // pairwise sums. Custom kernels would need lattice form factors.
        if (kernel.choice() != TDKernel::Choice::Minimal)
            throw unsupported_kernel_error("td rate: custom kernels need a spherical density");
        const Constants& k = kernel.constants();
        const double s0 = pair_overlap_analytic(density, Eigen::Vector3d::Zero());
        const double sd = pair_overlap_analytic(density, d);
        return {(k.G / k.hbar) * (s0 - sd), 0.0};
    }

    double kmax;
    switch (density.kind()) {
        case DensityKind::UniformSphere:
            kmax = 2000.0 / density.sphere_radius();
            break;
        case DensityKind::GaussianBall:
            kmax = 5.5 / density.gaussian_r0();
            break;
        default:
            throw validation_error("td rate: unsupported density");
    }
    const std::size_t panels =
        static_cast<std::size_t>(kmax * (dd + density.characteristic_size()) / kPi) + 8;
    if (panels > 200000)
        throw numerical_error("td rate: oscillation count beyond quadrature budget");
    auto integrand = [&](double q) {
        if (q <= 0.0) return 0.0;
        const double ft = density.fourier_amplitude(q).real();
        return q * q * kernel.decoherence_kernel_fourier(q) * ft * ft *
               (1.0 - sinc(q * dd)) / (kPi * kPi);
    };
    return integrate(integrand, 0.0, kmax, 1e-11, 0.0, panels);
}

}  // namespace

RateResult td_decay_rate(const SuperpositionSpec& spec, const TDKernel& kernel) {
    spec.validate();
    if (spec.branches() != 2)
        throw validation_error("td_decay_rate: use td_rate_matrix for more than two branches");
    const QuadResult q =
        td_pair_rate(spec.density, spec.displacements[1] - spec.displacements[0], kernel);
    RateResult r;
    r.rate = std::max(0.0, q.value);
    r.time_constant = r.rate > 0.0 ? 1.0 / r.rate : std::numeric_limits<double>::infinity();
    r.method = "td-kernel-quadrature";
    r.quad_error = q.error;
    return r;
}

Eigen::MatrixXd td_rate_matrix(const SuperpositionSpec& spec, const TDKernel& kernel) {
    spec.validate();
    const auto n = static_cast<Eigen::Index>(spec.branches());
    Eigen::MatrixXd lambda = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const QuadResult q = td_pair_rate(
                spec.density, spec.displacements[j] - spec.displacements[i], kernel);
            lambda(i, j) = lambda(j, i) = std::max(0.0, q.value);
        }
    return lambda;
}

std::vector<double> branch_newtonian_energies(const SuperpositionSpec& spec, const Constants& k) {
    spec.validate();
    const double s0 = pair_overlap(spec.density, 0.0).value;
    // Rigid displacement leaves the self-overlap unchanged.
    return std::vector<double>(spec.branches(), -0.5 * k.G * s0);
}

PenroseResult penrose_crystal_delta_e(const CrystalPreset& preset, double displacement,
                                      const Constants& k) {
    if (preset.total_mass <= 0.0 || preset.site_mass <= 0.0 || preset.site_r0 <= 0.0 ||
        preset.spacing <= 0.0 || preset.crystal_radius <= 0.0)
        throw validation_error("crystal preset: all parameters must be positive");
    if (preset.site_mass > preset.total_mass)
        throw validation_error("crystal preset: site mass exceeds total mass");
    if (displacement <= 0.0)
        throw validation_error("crystal preset: displacement must be positive");
    if (displacement > 0.2 * preset.spacing)
        throw validation_error(
            "crystal preset: bulk path assumes displacement well below the lattice spacing");

    const double n_sites = preset.total_mass / preset.site_mass;
    const double v0 = gaussian_pair_coulomb(preset.site_mass, preset.site_mass, preset.site_r0,
                                            preset.site_r0, 0.0);
    const double vd = gaussian_pair_coulomb(preset.site_mass, preset.site_mass, preset.site_r0,
                                            preset.site_r0, displacement);
    // Cross terms between different sites, homogenised into a uniform sphere;
    // negligible against the self terms when displacement << spacing.
    const MassDensity envelope =
        MassDensity::uniform_sphere(preset.total_mass, preset.crystal_radius);
    const double cross = pair_overlap_analytic(envelope, 0.0) -
                         pair_overlap_analytic(envelope, displacement);

    PenroseResult out;
    out.delta_e = 8.0 * kPi * k.G * (n_sites * (v0 - vd) + cross);
    out.tau = k.hbar / out.delta_e;
    out.quad_error = 0.0;
    return out;
}

}  // namespace gravkit
