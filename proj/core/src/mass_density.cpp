#include "gravkit/mass_density.hpp"

#include <cmath>
#include <limits>

#include "gravkit/errors.hpp"

namespace gravkit {

namespace {

constexpr double kPi = 3.14159265358979323846;

// sin(x)/x with the small-x series.
double sinc(double x) {
    if (std::abs(x) < 1e-4) {
        const double x2 = x * x;
        return 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0);
    }
    return std::sin(x) / x;
}

// 3 j1(x)/x, the uniform-sphere form factor.
double sphere_form_factor(double x) {
    if (std::abs(x) < 1e-3) {
        const double x2 = x * x;
        return 1.0 - x2 / 10.0 + x2 * x2 / 280.0;
    }
    return 3.0 * (std::sin(x) - x * std::cos(x)) / (x * x * x);
}

// Integration cutoff: form-factor tail below ~1e-10 relative.
double k_max_for(const MassDensity& d) {
    switch (d.kind()) {
        case DensityKind::UniformSphere:
            return 2000.0 / d.sphere_radius();
        case DensityKind::GaussianBall:
            return 5.5 / d.gaussian_r0();
        default:
            return 0.0;
    }
}

constexpr std::size_t kMaxPanels = 200000;

}  // namespace

MassDensity MassDensity::point_mass(double mass) {
    if (mass <= 0.0) throw validation_error("point_mass: mass must be positive");
    MassDensity d;
    d.kind_ = DensityKind::PointMass;
    d.mass_ = mass;
    return d;
}

MassDensity MassDensity::uniform_sphere(double mass, double radius) {
    if (mass <= 0.0 || radius <= 0.0)
        throw validation_error("uniform_sphere: mass and radius must be positive");
    MassDensity d;
    d.kind_ = DensityKind::UniformSphere;
    d.mass_ = mass;
    d.radius_ = radius;
    return d;
}

MassDensity MassDensity::gaussian_ball(double mass, double r0) {
    if (mass <= 0.0 || r0 <= 0.0)
        throw validation_error("gaussian_ball: mass and r0 must be positive");
    MassDensity d;
    d.kind_ = DensityKind::GaussianBall;
    d.mass_ = mass;
    d.radius_ = r0;
    return d;
}

MassDensity MassDensity::nucleon_lattice(std::vector<LatticeSite> sites) {
    if (sites.empty()) throw validation_error("nucleon_lattice: no sites");
    MassDensity d;
    d.kind_ = DensityKind::NucleonLattice;
    for (const auto& s : sites) {
        if (s.mass <= 0.0 || s.r0 <= 0.0)
            throw validation_error("nucleon_lattice: site mass and r0 must be positive");
        d.mass_ += s.mass;
    }
    d.sites_ = std::move(sites);
    return d;
}

MassDensity MassDensity::cubic_lattice(int n_per_axis, double site_mass, double spacing,
                                       double r0) {
    if (n_per_axis < 1) throw validation_error("cubic_lattice: n_per_axis must be >= 1");
    std::vector<LatticeSite> sites;
    sites.reserve(static_cast<std::size_t>(n_per_axis) * n_per_axis * n_per_axis);
    const double off = 0.5 * spacing * (n_per_axis - 1);
    for (int i = 0; i < n_per_axis; ++i)
        for (int j = 0; j < n_per_axis; ++j)
            for (int k = 0; k < n_per_axis; ++k)
                sites.push_back({site_mass,
                                 {i * spacing - off, j * spacing - off, k * spacing - off},
                                 r0});
    return nucleon_lattice(std::move(sites));
}

double MassDensity::characteristic_size() const {
    switch (kind_) {
        case DensityKind::PointMass:
            return 0.0;
        case DensityKind::UniformSphere:
        case DensityKind::GaussianBall:
            return radius_;
        case DensityKind::NucleonLattice: {
            double r = 0.0;
            for (const auto& s : sites_) r = std::max(r, s.center.norm() + 3.0 * s.r0);
            return r;
        }
    }
    return 0.0;
}

std::complex<double> MassDensity::fourier_amplitude(double k) const {
    if (k < 0.0) throw validation_error("fourier_amplitude: k must be >= 0");
    switch (kind_) {
        case DensityKind::PointMass:
            return mass_;
        case DensityKind::UniformSphere:
            return mass_ * sphere_form_factor(k * radius_);
        case DensityKind::GaussianBall:
            return mass_ * std::exp(-0.5 * k * k * radius_ * radius_);
        case DensityKind::NucleonLattice:
            return fourier_amplitude(Eigen::Vector3d(0.0, 0.0, k));
    }
    return 0.0;
}

std::complex<double> MassDensity::fourier_amplitude(const Eigen::Vector3d& k) const {
    const double kn = k.norm();
    if (kind_ != DensityKind::NucleonLattice) return fourier_amplitude(kn);
    std::complex<double> sum = 0.0;
    for (const auto& s : sites_) {
        const double phase = -k.dot(s.center);
        sum += s.mass * std::exp(-0.5 * kn * kn * s.r0 * s.r0) *
               std::complex<double>(std::cos(phase), std::sin(phase));
    }
    return sum;
}

double MassDensity::value_at(double r) const {
    switch (kind_) {
        case DensityKind::PointMass:
            return 0.0;  // delta at the origin, not representable pointwise
        case DensityKind::UniformSphere:
            return r <= radius_ ? 3.0 * mass_ / (4.0 * kPi * radius_ * radius_ * radius_) : 0.0;
        case DensityKind::GaussianBall: {
            const double s2 = radius_ * radius_;
            return mass_ * std::exp(-0.5 * r * r / s2) / std::pow(2.0 * kPi * s2, 1.5);
        }
        case DensityKind::NucleonLattice:
            return value_at(Eigen::Vector3d(0.0, 0.0, r));
    }
    return 0.0;
}

double MassDensity::value_at(const Eigen::Vector3d& x) const {
    if (kind_ != DensityKind::NucleonLattice) return value_at(x.norm());
    double sum = 0.0;
    for (const auto& s : sites_) {
        const double s2 = s.r0 * s.r0;
        sum += s.mass * std::exp(-0.5 * (x - s.center).squaredNorm() / s2) /
               std::pow(2.0 * kPi * s2, 1.5);
    }
    return sum;
}

double gaussian_pair_coulomb(double m1, double m2, double s1, double s2, double sep) {
    const double w = std::sqrt(2.0 * (s1 * s1 + s2 * s2));
    if (sep < 1e-10 * w) return m1 * m2 * 2.0 / (std::sqrt(kPi) * w);
    return m1 * m2 * std::erf(sep / w) / sep;
}

double pair_overlap_analytic(const MassDensity& density, const Eigen::Vector3d& d) {
    const double m = density.total_mass();
    switch (density.kind()) {
        case DensityKind::PointMass:
            throw divergence_error(
                "pair_overlap: Newtonian self-overlap of a point mass diverges; "
                "use a finite-size density");
        case DensityKind::UniformSphere: {
            // Overlap of two identical uniform spheres; matches m^2/d at d = 2R.
            const double R = density.sphere_radius();
            const double dd = d.norm();
            if (dd >= 2.0 * R) return m * m / dd;
            const double R6 = std::pow(R, 6);
            return m * m *
                   (192.0 * std::pow(R, 5) - 80.0 * std::pow(R, 3) * dd * dd +
                    30.0 * R * R * std::pow(dd, 3) - std::pow(dd, 5)) /
                   (160.0 * R6);
        }
        case DensityKind::GaussianBall: {
            const double r0 = density.gaussian_r0();
            return gaussian_pair_coulomb(m, m, r0, r0, d.norm());
        }
        case DensityKind::NucleonLattice: {
            // Double sum of pairwise Gaussian-ball Coulomb terms; the i = j
            // terms are each site's (displaced) self-overlap.
            const auto& sites = density.sites();
            double sum = 0.0;
            for (const auto& a : sites)
                for (const auto& b : sites)
                    sum += gaussian_pair_coulomb(a.mass, b.mass, a.r0, b.r0,
                                                 (a.center - b.center - d).norm());
            return sum;
        }
    }
    throw validation_error("pair_overlap_analytic: unknown density kind");
}

double pair_overlap_analytic(const MassDensity& density, double d) {
    return pair_overlap_analytic(density, Eigen::Vector3d(0.0, 0.0, d));
}

QuadResult pair_overlap_kspace(const MassDensity& density, double d, double rel_tol) {
    if (!density.has_finite_self_overlap())
        throw divergence_error(
            "pair_overlap: Newtonian self-overlap of a point mass diverges; "
            "use a finite-size density");
    if (d < 0.0) throw validation_error("pair_overlap: displacement must be >= 0");
    if (!density.spherically_symmetric())
        throw validation_error("pair_overlap_kspace: lattice densities use the pairwise sum");

    const double kmax = k_max_for(density);
    const double size = density.characteristic_size();
    const std::size_t panels =
        static_cast<std::size_t>(std::ceil(kmax * (d + size) / kPi)) + 8;
    if (panels > kMaxPanels)
        throw numerical_error("pair_overlap_kspace: oscillation count beyond quadrature budget");

    auto integrand = [&](double k) {
        const double ft = density.fourier_amplitude(k).real();
        return (2.0 / kPi) * ft * ft * sinc(k * d);
    };
    return integrate(integrand, 0.0, kmax, rel_tol, 0.0, panels);
}

QuadResult pair_overlap(const MassDensity& density, double d) {
    if (!density.has_finite_self_overlap())
        throw divergence_error(
            "pair_overlap: Newtonian self-overlap of a point mass diverges; "
            "use a finite-size density");
    if (d < 0.0) throw validation_error("pair_overlap: displacement must be >= 0");
    if (density.kind() == DensityKind::NucleonLattice) {
        const double v = pair_overlap_analytic(density, d);
        return {v, 16.0 * std::numeric_limits<double>::epsilon() * std::abs(v)};
    }
    const double kmax = k_max_for(density);
    const double size = density.characteristic_size();
    if (static_cast<std::size_t>(kmax * (d + size) / kPi) + 8 > kMaxPanels) {
        // Far field: oscillations too dense to integrate; closed form is exact.
        const double v = pair_overlap_analytic(density, d);
        return {v, 16.0 * std::numeric_limits<double>::epsilon() * std::abs(v)};
    }
    return pair_overlap_kspace(density, d);
}

QuadResult pair_overlap(const MassDensity& density, const Eigen::Vector3d& d) {
    if (density.kind() == DensityKind::NucleonLattice) {
        const double v = pair_overlap_analytic(density, d);
        return {v, 16.0 * std::numeric_limits<double>::epsilon() * std::abs(v)};
    }
    return pair_overlap(density, d.norm());
}

}  // namespace gravkit
