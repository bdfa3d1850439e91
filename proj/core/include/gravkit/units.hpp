#pragma once

#include "gravkit/constants.hpp"
#include "gravkit/errors.hpp"

namespace gravkit {

/// SI <-> scaled-unit conversions. A scaled system is defined by the SI size
/// of one scaled unit of length, time and mass.
struct UnitSystem {
    enum class Mode { SI, Scaled };

    Mode mode = Mode::SI;
    double length_scale = 1.0;  // metres per scaled length unit
    double time_scale = 1.0;    // seconds per scaled time unit
    double mass_scale = 1.0;    // kg per scaled mass unit

    static UnitSystem si() { return {}; }

    /// Units for the self-gravity solver: length unit L0 chosen so the
    /// dimensionless coupling g = G m^3 L0 / hbar^2 has the requested value,
    /// time unit m L0^2 / hbar, mass unit m. In these units the one-particle
    /// equation reads i dpsi/dt = -1/2 lap psi - g (|psi|^2 * 1/r) psi.
    static UnitSystem self_gravity(double mass_kg, double coupling, const Constants& k) {
        if (mass_kg <= 0.0) throw validation_error("self_gravity units: mass must be positive");
        if (coupling <= 0.0) throw validation_error("self_gravity units: coupling must be positive");
        UnitSystem u;
        u.mode = Mode::Scaled;
        u.length_scale = coupling * k.hbar * k.hbar / (k.G * mass_kg * mass_kg * mass_kg);
        u.time_scale = mass_kg * u.length_scale * u.length_scale / k.hbar;
        u.mass_scale = mass_kg;
        return u;
    }

    double to_si_length(double x) const { return x * length_scale; }
    double from_si_length(double x) const { return x / length_scale; }
    double to_si_time(double t) const { return t * time_scale; }
    double from_si_time(double t) const { return t / time_scale; }
    double to_si_mass(double m) const { return m * mass_scale; }
    double from_si_mass(double m) const { return m / mass_scale; }
};

}  // namespace gravkit
