#pragma once

#include <complex>
#include <string>
#include <vector>

#include "gravkit/constants.hpp"
#include "gravkit/units.hpp"

namespace gravkit {

/// Wavefunction for the self-gravity solver, in scaled units (hbar = m = 1,
/// dimensionless coupling g = G m^3 L0 / hbar^2 carried explicitly).
/// Line1D stores psi(x) on a uniform periodic grid over [-L/2, L/2);
/// Radial3D stores u(r) = r psi(r) on r_i = (i+1) L/(n+1) with u(0)=u(L)=0.
struct WaveField {
    enum class Geometry { Line1D, Radial3D };

    Geometry geometry = Geometry::Radial3D;
    int n = 0;
    double extent = 0.0;  // L
    std::vector<std::complex<double>> amp;
    double coupling = 1.0;   // g
    double softening = 0.0;  // 1D kernel softening length a
    UnitSystem units = UnitSystem::si();

    static WaveField gaussian_radial(int n, double extent, double sigma, double coupling);
    /// Packets at +/- separation/2 with equal weights.
    static WaveField gaussian_1d(int n, double extent, double sigma, double center,
                                 double coupling, double softening);
    static WaveField two_gaussian_1d(int n, double extent, double sigma, double separation,
                                     double coupling, double softening);

    double dx() const;
    double grid_point(int i) const;
    double norm() const;                 // integral of |psi|^2
    double per_axis_std() const;         // 1D: std of x; radial: sqrt(<r^2>/3)
    double radial_std() const;           // sqrt(<r^2> - <r>^2) (radial only)
    double mean_radius() const;          // radial only
    /// True when the grid extent is at least 8x the current width.
    bool extent_adequate() const;
};

struct SnEvolveResult {
    WaveField field;
    std::vector<double> times;
    std::vector<double> width;          // per-axis std
    std::vector<double> norm_error;     // |norm - 1|
    std::vector<double> energy;         // kinetic + self-interaction/2
    double max_norm_error = 0.0;
    double max_energy_drift = 0.0;      // relative to the initial energy
    bool extent_alarm = false;
};

/// Real-time split-step evolution (half kinetic, full potential, half
/// kinetic; the potential refreshed from |psi|^2 at the midpoint). The
/// nonlinear phase per step is kept below 0.1 rad (stability_error
/// otherwise); a spectral tail above 1e-6 of the norm raises
/// resolution_error.
SnEvolveResult sn_evolve(WaveField field, double dt, double t_total, int record_every = 10);

struct SnGroundResult {
    WaveField field;
    double energy = 0.0;
    double kinetic = 0.0;
    double potential = 0.0;  // self-interaction energy (counted once)
    int iterations = 0;
    double per_axis_std = 0.0;
    double radial_std = 0.0;
    double mean_radius = 0.0;
    std::vector<double> energy_trace;
};

/// Imaginary-time ground state on the radial grid; converged when the
/// per-step energy change is below 1e-10 (relative); convergence_error
/// otherwise.
SnGroundResult sn_ground_state(double coupling, int n, double extent, double dtau = 2e-3,
                               int max_iters = 400000);

/// Equilibrium-width scale hbar^2 / (G m^3) of the self-gravitating packet.
double sn_equilibrium_width_estimate(double mass, const Constants& k = Constants::si());

/// Shell-theorem self-potential of the radial field at its grid points
/// (negative everywhere; tends to -g/r outside the mass).
std::vector<double> radial_self_potential(const WaveField& field);

struct EprConfig {
    double separation = 10.0;    // initial packet separation
    double packet_width = 1.6;   // sigma of each packet
    double coupling = 1.0;       // g ("attraction on"); "off" evolves free
    double t_total = 5.0;
    int n = 4096;
    double extent = 60.0;
    double softening_cells = 2.0;
    double dt = 2.5e-3;
    int record_every = 40;
};

struct EprResult {
    double initial_separation = 0.0;
    double final_separation_on = 0.0;
    double final_separation_off = 0.0;
    double cell = 0.0;  // grid spacing
    bool merged = false;
    double merge_time = 0.0;
    std::vector<double> times;
    std::vector<double> separation_on;
    std::vector<double> separation_off;
};

/// Two-packet pointer superposition read out by spot separation: with the
/// self-attraction on, the packets fall toward each other and the spots move
/// closer than in free flight. Packets merging before t_total sets `merged`
/// and the merge time (scenario-degenerate).
EprResult epr_scenario(const EprConfig& cfg);

}  // namespace gravkit
