#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gravkit/constants.hpp"
#include "gravkit/kernels.hpp"
#include "gravkit/mass_density.hpp"

namespace gravkit {

/// A superposition of rigidly displaced copies of one mass density.
struct SuperpositionSpec {
    MassDensity density;
    std::vector<Eigen::Vector3d> displacements;  // one per branch, >= 2 distinct

    static SuperpositionSpec two_branch(MassDensity density, double separation);
    std::size_t branches() const { return displacements.size(); }
    void validate() const;
};

struct RateResult {
    double rate = 0.0;           // 1/s
    double time_constant = 0.0;  // s, 1/rate
    std::string method;
    double quad_error = 0.0;  // absolute error estimate on the rate
};

/// Minimal resolvable length uncertainty (l_P^2 s)^(1/3).
double karolyhazy_delta_s(double s, const Constants& k = Constants::si());

struct CoherenceCell {
    double a_k = 0.0;    // coherence cell size, m
    double tau_k = 0.0;  // decay time m a_k^2 / hbar, s
};

/// Coherence cell for a sphere of mass m and radius R. The point-particle
/// branch a_K = hbar^2/(G m^3) applies while R is below that same length,
/// the extended branch (hbar^2 R^2 / G m^3)^(1/3) beyond; the switch is
/// continuous at the crossover.
CoherenceCell karolyhazy_coherence_cell(double mass, double radius,
                                        const Constants& k = Constants::si());

/// Two-branch decoherence rate 1/tau_D = (G/hbar) [S(0) - S(d)].
RateResult dp_decay_rate(const SuperpositionSpec& spec, const Constants& k = Constants::si());

/// Pairwise rates Lambda_ij = (G/hbar) [S(0) - S(x_i - x_j)]; symmetric,
/// nonnegative, zero diagonal.
Eigen::MatrixXd dp_rate_matrix(const SuperpositionSpec& spec,
                               const Constants& k = Constants::si());

struct PenroseResult {
    double delta_e = 0.0;  // J
    double tau = 0.0;      // hbar / delta_e, s
    double quad_error = 0.0;
};

/// Gravitational self-energy gap of the two-branch superposition,
/// Delta E = 8 pi G [S(0) - S(d)], and the decay time hbar / Delta E.
/// Identical integrals to dp_decay_rate, so tau_D = 8 pi tau exactly.
PenroseResult penrose_delta_e(const SuperpositionSpec& spec,
                              const Constants& k = Constants::si());

/// Tilloy-Diosi two-branch rate from the decoherence kernel:
///   Lambda = (1/pi^2) int k^2 D~(k) |rho~(k)|^2 (1 - sinc(k d)) dk.
/// With the minimal kernel this reduces to the Diosi rate.
RateResult td_decay_rate(const SuperpositionSpec& spec, const TDKernel& kernel);
Eigen::MatrixXd td_rate_matrix(const SuperpositionSpec& spec, const TDKernel& kernel);

/// Branch Newtonian self-energy -(G/2) S_ii(0); equal across rigidly
/// displaced branches, so relative feedback phases cancel.
std::vector<double> branch_newtonian_energies(const SuperpositionSpec& spec,
                                              const Constants& k = Constants::si());

/// Bulk crystal: total mass M of identical Gaussian-smeared nuclei (mass
/// site_mass, width site_r0) on a cubic lattice. For displacements well below
/// the spacing the rate is dominated by the per-nucleus self terms,
///   S(0) - S(d) ~= N [V(0) - V(d)] + homogenised cross term,
/// which avoids enumerating ~1e12 sites. Validated against the exact pairwise
/// sum on small explicit lattices.
struct CrystalPreset {
    double total_mass;      // kg
    double site_mass;       // kg
    double site_r0;         // m
    double spacing;         // m
    double crystal_radius;  // m, homogenised envelope
};

PenroseResult penrose_crystal_delta_e(const CrystalPreset& preset, double displacement,
                                      const Constants& k = Constants::si());

}  // namespace gravkit
