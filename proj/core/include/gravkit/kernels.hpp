#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gravkit/constants.hpp"
#include "gravkit/mass_density.hpp"

namespace gravkit {

// ---------------------------------------------------------------------------
// Karolyhazy: fluctuating metric component g00 with spectrum
// E[c(k) c*(k')] = delta_kk' l_P^{4/3} k^{-5/3} below the cutoff 2 pi/lambda_c,
// zero above, and light-cone dispersion omega = c |k|.
// ---------------------------------------------------------------------------

struct KarolyhazyKernel {
    double lambda_c = 1e-15;  // cutoff length, m
    Constants constants = Constants::si();

    double cutoff_wavenumber() const;
    /// Mode variance E[|c(k)|^2]; zero above the cutoff.
    double mode_spectrum(double k) const;
    /// Prefactor A = (l_P^4 / (32 pi^2 lambda_c^4))^(1/3); the equal-point
    /// correlation C(0,0) is 6A.
    double amplitude() const;
    /// Two-point correlation C(r, tau) of the metric fluctuation, closed form
    /// in terms of 1F2; even in tau, finite limit at r -> 0.
    double correlation(double r, double tau) const;
};

/// One draw of the fluctuation field: Fourier modes on a cubic k-grid of
/// spacing 2 pi / box_length, cut off at 2 pi / lambda_c.
struct FieldRealization {
    double box_length = 0.0;
    std::uint64_t seed = 0;
    std::vector<Eigen::Vector3d> wavevectors;
    std::vector<std::complex<double>> coefficients;
    std::vector<double> dispersion;  // omega(k) = c |k|

    double evaluate(const Eigen::Vector3d& x, double t) const;
};

/// Draw field coefficients for the given box; reproducible from the seed.
/// mode_cap bounds the per-axis mode index; a box needing more raises
/// configuration_error, as does box_length < 8 lambda_c.
FieldRealization sample_field_realization(const KarolyhazyKernel& kernel, double box_length,
                                          int mode_cap, std::uint64_t seed);

struct SpacetimePoint {
    Eigen::Vector3d x;
    double t;
};

struct CorrelatorEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    int n = 0;
};

/// Monte Carlo estimate of E[gamma(P1) gamma(P2)] over n_realizations fresh
/// field draws (realization i uses RNG stream i of `seed`). All pairs share
/// the mode geometry, so the cost is one pass per realization.
std::vector<CorrelatorEstimate> estimate_field_correlator(
    const KarolyhazyKernel& kernel, double box_length, int mode_cap,
    const std::vector<std::pair<SpacetimePoint, SpacetimePoint>>& pairs, int n_realizations,
    std::uint64_t seed);

/// Exact expectation of the discrete-box correlator (no sampling); exposes
/// the finite-box bias relative to the continuum closed form.
double field_correlator_box_expectation(const KarolyhazyKernel& kernel, double box_length,
                                        int mode_cap,
                                        const std::pair<SpacetimePoint, SpacetimePoint>& pair);

// ---------------------------------------------------------------------------
// Diosi: white-in-time potential correlator.
// ---------------------------------------------------------------------------

/// E[phi(r,t) phi(r',t')] = delta(t-t') G hbar / |r-r'|. The hbar placement
/// is fixed by consistency with the G/(2 hbar) master-equation prefactor.
struct DiosiKernel {
    Constants constants = Constants::si();

    double potential_correlation(double r) const;  // spatial part, G hbar / r
    double master_kernel(double r) const;          // G / (2 hbar r)
};

// ---------------------------------------------------------------------------
// Adler: complex noise correlator D(x, t) = D^R + i D^I, translation invariant.
// ---------------------------------------------------------------------------

/// Radial (|x|, t >= 0) table, mirrored by evenness; bilinear interpolation.
struct TabulatedKernel {
    std::vector<double> x_grid;  // ascending, x >= 0
    std::vector<double> t_grid;  // ascending, t >= 0
    Eigen::MatrixXd dr;          // rows: x, cols: t
    Eigen::MatrixXd di;

    double interpolate(const Eigen::MatrixXd& v, double x, double t) const;
};

class AdlerKernel {
public:
    enum class Preset { WhiteGaussian, Custom };

    /// Real Gaussian spatial correlator exp(-x^2 / 4 r_c^2) with a
    /// near-delta Gaussian time profile of width tau_c (unit time integral).
    static AdlerKernel white_gaussian(double xi, double r_c, double tau_c);
    static AdlerKernel custom(double xi, TabulatedKernel table);

    Preset preset() const { return preset_; }
    double strength() const { return xi_; }
    double correlation_length() const { return r_c_; }
    double correlation_time() const { return tau_c_; }

    double real_part(double x, double t) const;  // D^R
    double imag_part(double x, double t) const;  // D^I

    // WhiteGaussian helpers used by the dephasing engine.
    double spatial_fourier(double k) const;             // (4 pi r_c^2)^{3/2} e^{-k^2 r_c^2}
    double time_profile_integral(double s) const;       // int_0^s g -> 1/2
    double time_profile_double_integral(double t) const;

    const TabulatedKernel& table() const { return table_; }

private:
    AdlerKernel() = default;
    Preset preset_ = Preset::WhiteGaussian;
    double xi_ = 1.0;
    double r_c_ = 0.0;
    double tau_c_ = 0.0;
    TabulatedKernel table_;
};

// ---------------------------------------------------------------------------
// Tilloy-Diosi: feedback kernel gamma(r) and the induced decoherence kernel
//   D~(k) = gamma~(k) / (8 hbar^2) + 8 pi^2 G^2 / (k^4 gamma~(k)).
// Minimising pointwise in k gives gamma~(k) = 8 pi G hbar / k^2, i.e.
// gamma(r) = 2 hbar G / |r|, and D~ then matches the Diosi master kernel.
// ---------------------------------------------------------------------------

class TDKernel {
public:
    enum class Choice { Minimal, Custom };

    static TDKernel minimal(Constants constants = Constants::si());
    /// Custom kernels must supply gamma~(k) > 0; a closed-form real-space
    /// decoherence kernel is optional (without it only k-space evaluation is
    /// available).
    static TDKernel custom(std::function<double(double)> gamma_fourier,
                           std::function<double(double)> decoherence_real = {},
                           Constants constants = Constants::si());

    Choice choice() const { return choice_; }
    const Constants& constants() const { return constants_; }

    double gamma(double r) const;          // Minimal: 2 hbar G / r
    double gamma_fourier(double k) const;  // Minimal: 8 pi G hbar / k^2
    double decoherence_kernel_fourier(double k) const;
    /// The two summands of D~(k) (noise term, feedback-filter term).
    std::pair<double, double> decoherence_kernel_fourier_terms(double k) const;

private:
    Choice choice_ = Choice::Minimal;
    Constants constants_;
    std::function<double(double)> gamma_ft_;
    std::function<double(double)> decoherence_real_;

    friend double td_decoherence_kernel(const TDKernel&, double);
};

/// Real-space decoherence kernel D(r). Minimal: G / (2 hbar r), the Diosi
/// master kernel. Custom kernels need the optional real-space form, else
/// unsupported_kernel_error.
double td_decoherence_kernel(const TDKernel& kernel, double r);

}  // namespace gravkit
