#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "gravkit/quadrature.hpp"

namespace gravkit {

enum class DensityKind { PointMass, UniformSphere, GaussianBall, NucleonLattice };

/// One smeared mass in a lattice: Gaussian ball of per-axis width r0 at `center`.
struct LatticeSite {
    double mass;             // kg
    Eigen::Vector3d center;  // m
    double r0;               // m, > 0
};

/// Matter distribution rho(x). All variants have closed-form Fourier
/// transforms; rho~(0) equals the total mass.
///
/// Conventions: the Gaussian ball has per-axis standard deviation r0, so
/// rho~(k) = m exp(-k^2 r0^2 / 2). The uniform sphere has rho~(k)
/// = 3 m j1(kR)/(kR).
class MassDensity {
public:
    static MassDensity point_mass(double mass);
    static MassDensity uniform_sphere(double mass, double radius);
    static MassDensity gaussian_ball(double mass, double r0);
    static MassDensity nucleon_lattice(std::vector<LatticeSite> sites);
    /// Cubic lattice block of identical Gaussian balls, n per axis.
    static MassDensity cubic_lattice(int n_per_axis, double site_mass, double spacing, double r0);

    DensityKind kind() const { return kind_; }
    double total_mass() const { return mass_; }
    /// Sphere radius, Gaussian r0, or lattice bounding radius.
    double characteristic_size() const;
    bool spherically_symmetric() const { return kind_ != DensityKind::NucleonLattice; }
    /// False for a point mass: its Newtonian self-overlap diverges.
    bool has_finite_self_overlap() const { return kind_ != DensityKind::PointMass; }

    /// rho~(k) for wavevector k z-hat (k >= 0). Real for the spherically
    /// symmetric variants; complex in general for a lattice.
    std::complex<double> fourier_amplitude(double k) const;
    std::complex<double> fourier_amplitude(const Eigen::Vector3d& k) const;

    /// Radial profile rho(r) for the spherically symmetric variants.
    double value_at(double r) const;
    double value_at(const Eigen::Vector3d& x) const;

    double sphere_radius() const { return radius_; }
    double gaussian_r0() const { return radius_; }
    const std::vector<LatticeSite>& sites() const { return sites_; }

    MassDensity() = default;  // empty; fill via the named constructors

private:
    DensityKind kind_ = DensityKind::PointMass;
    double mass_ = 0.0;
    double radius_ = 0.0;  // R (sphere) or r0 (gaussian)
    std::vector<LatticeSite> sites_;
};

/// Coulomb interaction of two Gaussian balls (per-axis widths s1, s2, total
/// masses m1, m2) at centre separation `sep`:
///   m1 m2 erf(sep / sqrt(2 (s1^2+s2^2))) / sep,  ->  m1 m2 sqrt(2/pi) / sqrt(s1^2+s2^2)
/// as sep -> 0.
double gaussian_pair_coulomb(double m1, double m2, double s1, double s2, double sep);

/// Pairwise Newtonian overlap integral
///   S(d) = int int rho(r) rho(r' - d) / |r - r'| dr dr'      [kg^2 / m]
/// evaluated in k-space as S(d) = (2/pi) int_0^inf |rho~(k)|^2 sinc(k d) dk
/// (1/|r| <-> 4 pi/k^2 plus the angular average of exp(i k.d)).
/// A lattice is summed pairwise in closed form; a point mass raises
/// divergence_error. Falls back to the closed form when kd oscillations
/// exceed the quadrature budget.
QuadResult pair_overlap(const MassDensity& density, double d);
QuadResult pair_overlap(const MassDensity& density, const Eigen::Vector3d& d);

/// k-space quadrature route only (no closed-form fallback); cross-checked
/// against the closed forms and a 6D Monte Carlo oracle in the tests.
QuadResult pair_overlap_kspace(const MassDensity& density, double d, double rel_tol = 1e-11);

/// Closed form where one exists: uniform sphere (overlap polynomial for
/// d <= 2R, m^2/d beyond), Gaussian ball (erf), lattice (pairwise sum).
double pair_overlap_analytic(const MassDensity& density, const Eigen::Vector3d& d);
double pair_overlap_analytic(const MassDensity& density, double d);

}  // namespace gravkit
