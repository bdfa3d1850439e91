#pragma once

#include <cmath>

namespace gravkit {

/// Fundamental constants (SI, CODATA 2018) plus the derived Planck length
/// l_P = sqrt(hbar G / c^3). A scaled instance (hbar = G = c = 1) is used by
/// the solvers that work in dimensionless units.
struct Constants {
    double hbar = 1.054571817e-34;  // J s
    double G = 6.67430e-11;         // m^3 kg^-1 s^-2
    double c = 299792458.0;         // m s^-1

    double planck_length() const { return std::sqrt(hbar * G / (c * c * c)); }

    static Constants si() { return {}; }
    static Constants scaled(double hbar_ = 1.0, double G_ = 1.0, double c_ = 1.0) {
        return {hbar_, G_, c_};
    }
};

}  // namespace gravkit
