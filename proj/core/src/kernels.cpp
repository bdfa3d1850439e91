#include "gravkit/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "gravkit/errors.hpp"
#include "gravkit/hyp1f2.hpp"
#include "gravkit/rng.hpp"

namespace gravkit {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

// ---------------------------------------------------------------------------
// Karolyhazy
// ---------------------------------------------------------------------------

double KarolyhazyKernel::cutoff_wavenumber() const { return 2.0 * kPi / lambda_c; }

double KarolyhazyKernel::mode_spectrum(double k) const {
    if (k <= 0.0 || k > cutoff_wavenumber()) return 0.0;
    return std::pow(constants.planck_length(), 4.0 / 3.0) * std::pow(k, -5.0 / 3.0);
}

double KarolyhazyKernel::amplitude() const {
    const double lp = constants.planck_length();
    return std::cbrt(std::pow(lp, 4) / (32.0 * kPi * kPi * std::pow(lambda_c, 4)));
}

namespace {

// h(u) = u 1F2(2/3; 3/2, 5/3; -pi^2 u^2 / lambda_c^2); the correlation is
// (3A/r) [h(r + c tau) + h(r - c tau)] and h is odd.
double kar_h(double u, double lambda_c) {
    const double z = -kPi * kPi * u * u / (lambda_c * lambda_c);
    return u * hyp1f2(2.0 / 3.0, 1.5, 5.0 / 3.0, z).value;
}

double kar_h_prime(double u, double lambda_c) {
    const double z = -kPi * kPi * u * u / (lambda_c * lambda_c);
    const double f = hyp1f2(2.0 / 3.0, 1.5, 5.0 / 3.0, z).value;
    // d/dz 1F2(a;b1,b2;z) = a/(b1 b2) 1F2(a+1;b1+1,b2+1;z)
    const double fp = (2.0 / 3.0) / (1.5 * 5.0 / 3.0) *
                      hyp1f2(2.0 / 3.0 + 1.0, 2.5, 8.0 / 3.0, z).value;
    const double dz_du = -2.0 * kPi * kPi * u / (lambda_c * lambda_c);
    return f + u * fp * dz_du;
}

}  // namespace

double KarolyhazyKernel::correlation(double r, double tau) const {
    if (r < 0.0) throw validation_error("karolyhazy correlation: r must be >= 0");
    if (lambda_c <= 0.0) throw validation_error("karolyhazy kernel: lambda_c must be positive");
    const double a = amplitude();
    const double ct = constants.c * tau;
    // h(r+ct) - h(ct - r) cancels catastrophically for r much below the
    // other scales; switch to the differential limit there.
    if (r < 1e-6 * (lambda_c + std::abs(ct)))
        return 6.0 * a * kar_h_prime(ct, lambda_c);
    return (3.0 * a / r) * (kar_h(r + ct, lambda_c) + kar_h(r - ct, lambda_c));
}

FieldRealization sample_field_realization(const KarolyhazyKernel& kernel, double box_length,
                                          int mode_cap, std::uint64_t seed) {
    if (box_length < 8.0 * kernel.lambda_c)
        throw configuration_error(
            "sample_field_realization: box must be at least 8 cutoff lengths");
    const int n_max = static_cast<int>(std::floor(box_length / kernel.lambda_c));
    if (n_max > mode_cap)
        throw configuration_error(
            "sample_field_realization: cutoff needs more modes than mode_cap; "
            "raise the cap or shrink the box");

    const double dk = 2.0 * kPi / box_length;
    const double k_cut = kernel.cutoff_wavenumber();

    FieldRealization out;
    out.box_length = box_length;
    out.seed = seed;
    Rng rng(seed);
    for (int nx = -n_max; nx <= n_max; ++nx)
        for (int ny = -n_max; ny <= n_max; ++ny)
            for (int nz = -n_max; nz <= n_max; ++nz) {
                if (nx == 0 && ny == 0 && nz == 0) continue;
                const Eigen::Vector3d k(dk * nx, dk * ny, dk * nz);
                const double kn = k.norm();
                if (kn > k_cut) continue;
                const double sigma = std::sqrt(0.5 * kernel.mode_spectrum(kn));
                out.wavevectors.push_back(k);
                out.coefficients.emplace_back(sigma * rng.normal(), sigma * rng.normal());
                out.dispersion.push_back(kernel.constants.c * kn);
            }
    return out;
}

double FieldRealization::evaluate(const Eigen::Vector3d& x, double t) const {
    // gamma(x,t) = l^{-3/2} sum_k [c e^{i(k.x - w t)} + c.c.]
    double sum = 0.0;
    for (std::size_t i = 0; i < wavevectors.size(); ++i) {
        const double theta = wavevectors[i].dot(x) - dispersion[i] * t;
        sum += 2.0 * (coefficients[i].real() * std::cos(theta) -
                      coefficients[i].imag() * std::sin(theta));
    }
    return sum / std::pow(box_length, 1.5);
}

namespace {

struct ModeGeometry {
    // Per mode and evaluation point: prefactor-folded cos/sin of the phase.
    // gamma(p) = sum_k xi1_k C[k][p] - xi2_k S[k][p] with xi ~ N(0,1).
    std::vector<double> cosw;  // modes x points, row-major
    std::vector<double> sinw;
    std::size_t n_modes = 0;
    std::size_t n_points = 0;
};

ModeGeometry build_geometry(const KarolyhazyKernel& kernel, double box_length, int mode_cap,
                            const std::vector<SpacetimePoint>& points) {
    if (box_length < 8.0 * kernel.lambda_c)
        throw configuration_error("field correlator: box must be at least 8 cutoff lengths");
    const int n_max = static_cast<int>(std::floor(box_length / kernel.lambda_c));
    if (n_max > mode_cap)
        throw configuration_error("field correlator: cutoff needs more modes than mode_cap");

    const double dk = 2.0 * kPi / box_length;
    const double k_cut = kernel.cutoff_wavenumber();
    const double norm = 1.0 / std::pow(box_length, 1.5);

    ModeGeometry g;
    g.n_points = points.size();
    for (int nx = -n_max; nx <= n_max; ++nx)
        for (int ny = -n_max; ny <= n_max; ++ny)
            for (int nz = -n_max; nz <= n_max; ++nz) {
                if (nx == 0 && ny == 0 && nz == 0) continue;
                const Eigen::Vector3d k(dk * nx, dk * ny, dk * nz);
                const double kn = k.norm();
                if (kn > k_cut) continue;
                const double w = kernel.constants.c * kn;
                const double amp = norm * std::sqrt(2.0 * kernel.mode_spectrum(kn));
                for (const auto& p : points) {
                    const double theta = k.dot(p.x) - w * p.t;
                    g.cosw.push_back(amp * std::cos(theta));
                    g.sinw.push_back(amp * std::sin(theta));
                }
                ++g.n_modes;
            }
    return g;
}

}  // namespace

std::vector<CorrelatorEstimate> estimate_field_correlator(
    const KarolyhazyKernel& kernel, double box_length, int mode_cap,
    const std::vector<std::pair<SpacetimePoint, SpacetimePoint>>& pairs, int n_realizations,
    std::uint64_t seed) {
    // Distinct evaluation points, pairs index into them.
    std::vector<SpacetimePoint> points;
    std::vector<std::pair<std::size_t, std::size_t>> idx;
    auto point_index = [&](const SpacetimePoint& p) {
        for (std::size_t i = 0; i < points.size(); ++i)
            if ((points[i].x - p.x).norm() == 0.0 && points[i].t == p.t) return i;
        points.push_back(p);
        return points.size() - 1;
    };
    idx.reserve(pairs.size());
    for (const auto& pr : pairs) idx.emplace_back(point_index(pr.first), point_index(pr.second));

    const ModeGeometry g = build_geometry(kernel, box_length, mode_cap, points);
    const std::size_t np = g.n_points;

    std::vector<double> gamma(np);
    std::vector<CompensatedSum> sum(pairs.size()), sumsq(pairs.size());
    for (int r = 0; r < n_realizations; ++r) {
        Rng rng(seed, static_cast<std::uint64_t>(r));
        std::fill(gamma.begin(), gamma.end(), 0.0);
        const double* c = g.cosw.data();
        const double* s = g.sinw.data();
        for (std::size_t m = 0; m < g.n_modes; ++m, c += np, s += np) {
            const double x1 = rng.normal();
            const double x2 = rng.normal();
            for (std::size_t p = 0; p < np; ++p) gamma[p] += x1 * c[p] - x2 * s[p];
        }
        for (std::size_t q = 0; q < pairs.size(); ++q) {
            const double prod = gamma[idx[q].first] * gamma[idx[q].second];
            sum[q].add(prod);
            sumsq[q].add(prod * prod);
        }
    }

    std::vector<CorrelatorEstimate> out(pairs.size());
    for (std::size_t q = 0; q < pairs.size(); ++q) {
        const double n = static_cast<double>(n_realizations);
        const double mean = sum[q].value() / n;
        const double var = std::max(0.0, sumsq[q].value() / n - mean * mean);
        out[q] = {mean, std::sqrt(var / n), n_realizations};
    }
    return out;
}

double field_correlator_box_expectation(
    const KarolyhazyKernel& kernel, double box_length, int mode_cap,
    const std::pair<SpacetimePoint, SpacetimePoint>& pair) {
    const int n_max = static_cast<int>(std::floor(box_length / kernel.lambda_c));
    if (n_max > mode_cap)
        throw configuration_error("field correlator: cutoff needs more modes than mode_cap");
    const double dk = 2.0 * kPi / box_length;
    const double k_cut = kernel.cutoff_wavenumber();
    const Eigen::Vector3d dx = pair.first.x - pair.second.x;
    const double dt = pair.first.t - pair.second.t;
    CompensatedSum sum;
    for (int nx = -n_max; nx <= n_max; ++nx)
        for (int ny = -n_max; ny <= n_max; ++ny)
            for (int nz = -n_max; nz <= n_max; ++nz) {
                if (nx == 0 && ny == 0 && nz == 0) continue;
                const Eigen::Vector3d k(dk * nx, dk * ny, dk * nz);
                const double kn = k.norm();
                if (kn > k_cut) continue;
                const double w = kernel.constants.c * kn;
                sum.add(2.0 * kernel.mode_spectrum(kn) * std::cos(k.dot(dx) - w * dt));
            }
    return sum.value() / std::pow(box_length, 3);
}

// ---------------------------------------------------------------------------
// Diosi
// ---------------------------------------------------------------------------

double DiosiKernel::potential_correlation(double r) const {
    if (r <= 0.0) throw validation_error("diosi kernel: r must be positive");
    return constants.G * constants.hbar / r;
}

double DiosiKernel::master_kernel(double r) const {
    if (r <= 0.0) throw validation_error("diosi kernel: r must be positive");
    return constants.G / (2.0 * constants.hbar * r);
}

// ---------------------------------------------------------------------------
// Adler
// ---------------------------------------------------------------------------

double TabulatedKernel::interpolate(const Eigen::MatrixXd& v, double x, double t) const {
    x = std::abs(x);
    t = std::abs(t);  // D(x,t) = D(-x,-t) and radial tables are even in both
    auto locate = [](const std::vector<double>& grid, double value, std::size_t& i,
                     double& frac) {
        if (value <= grid.front()) {
            i = 0;
            frac = 0.0;
            return;
        }
        if (value >= grid.back()) {
            i = grid.size() - 2;
            frac = 1.0;
            return;
        }
        auto it = std::upper_bound(grid.begin(), grid.end(), value);
        i = static_cast<std::size_t>(it - grid.begin()) - 1;
        frac = (value - grid[i]) / (grid[i + 1] - grid[i]);
    };
    std::size_t ix, it;
    double fx, ft;
    locate(x_grid, x, ix, fx);
    locate(t_grid, t, it, ft);
    return (1 - fx) * (1 - ft) * v(ix, it) + fx * (1 - ft) * v(ix + 1, it) +
           (1 - fx) * ft * v(ix, it + 1) + fx * ft * v(ix + 1, it + 1);
}

AdlerKernel AdlerKernel::white_gaussian(double xi, double r_c, double tau_c) {
    if (xi <= 0.0 || r_c <= 0.0 || tau_c <= 0.0)
        throw validation_error("adler white_gaussian: xi, r_c, tau_c must be positive");
    AdlerKernel k;
    k.preset_ = Preset::WhiteGaussian;
    k.xi_ = xi;
    k.r_c_ = r_c;
    k.tau_c_ = tau_c;
    return k;
}

AdlerKernel AdlerKernel::custom(double xi, TabulatedKernel table) {
    if (xi <= 0.0) throw validation_error("adler custom: xi must be positive");
    if (table.x_grid.size() < 2 || table.t_grid.size() < 2)
        throw validation_error("adler custom: table needs at least a 2x2 grid");
    AdlerKernel k;
    k.preset_ = Preset::Custom;
    k.xi_ = xi;
    k.table_ = std::move(table);
    return k;
}

double AdlerKernel::real_part(double x, double t) const {
    if (preset_ == Preset::WhiteGaussian) {
        const double g =
            std::exp(-0.5 * t * t / (tau_c_ * tau_c_)) / (tau_c_ * std::sqrt(2.0 * kPi));
        return std::exp(-x * x / (4.0 * r_c_ * r_c_)) * g;
    }
    return table_.interpolate(table_.dr, x, t);
}

double AdlerKernel::imag_part(double x, double t) const {
    if (preset_ == Preset::WhiteGaussian) return 0.0;
    return table_.interpolate(table_.di, x, t);
}

double AdlerKernel::spatial_fourier(double k) const {
    if (preset_ != Preset::WhiteGaussian)
        throw unsupported_kernel_error("adler: spatial_fourier needs the WhiteGaussian preset");
    return std::pow(4.0 * kPi * r_c_ * r_c_, 1.5) * std::exp(-k * k * r_c_ * r_c_);
}

double AdlerKernel::time_profile_integral(double s) const {
    if (preset_ != Preset::WhiteGaussian)
        throw unsupported_kernel_error("adler: time profile needs the WhiteGaussian preset");
    return 0.5 * std::erf(s / (std::sqrt(2.0) * tau_c_));
}

double AdlerKernel::time_profile_double_integral(double t) const {
    if (preset_ != Preset::WhiteGaussian)
        throw unsupported_kernel_error("adler: time profile needs the WhiteGaussian preset");
    const double u = t / (std::sqrt(2.0) * tau_c_);
    return 0.5 * (t * std::erf(u) +
                  std::sqrt(2.0 / kPi) * tau_c_ * (std::exp(-u * u) - 1.0));
}

// ---------------------------------------------------------------------------
// Tilloy-Diosi
// ---------------------------------------------------------------------------

TDKernel TDKernel::minimal(Constants constants) {
    TDKernel k;
    k.choice_ = Choice::Minimal;
    k.constants_ = constants;
    return k;
}

TDKernel TDKernel::custom(std::function<double(double)> gamma_fourier,
                          std::function<double(double)> decoherence_real, Constants constants) {
    if (!gamma_fourier)
        throw unsupported_kernel_error("td custom kernel: gamma~(k) is required");
    TDKernel k;
    k.choice_ = Choice::Custom;
    k.constants_ = constants;
    k.gamma_ft_ = std::move(gamma_fourier);
    k.decoherence_real_ = std::move(decoherence_real);
    return k;
}

double TDKernel::gamma(double r) const {
    if (r <= 0.0) throw validation_error("td kernel: r must be positive");
    if (choice_ == Choice::Minimal) return 2.0 * constants_.hbar * constants_.G / r;
    throw unsupported_kernel_error("td custom kernel: real-space gamma not specified");
}

double TDKernel::gamma_fourier(double k) const {
    if (k <= 0.0) throw validation_error("td kernel: k must be positive");
    if (choice_ == Choice::Minimal) return 8.0 * kPi * constants_.G * constants_.hbar / (k * k);
    return gamma_ft_(k);
}

std::pair<double, double> TDKernel::decoherence_kernel_fourier_terms(double k) const {
    const double g = gamma_fourier(k);
    if (g <= 0.0)
        throw unsupported_kernel_error("td kernel: gamma~(k) must be positive");
    const double h = constants_.hbar;
    const double noise = g / (8.0 * h * h);
    const double filter = 8.0 * kPi * kPi * constants_.G * constants_.G / (std::pow(k, 4) * g);
    return {noise, filter};
}

double TDKernel::decoherence_kernel_fourier(double k) const {
    const auto [noise, filter] = decoherence_kernel_fourier_terms(k);
    return noise + filter;
}

double td_decoherence_kernel(const TDKernel& kernel, double r) {
    if (r <= 0.0) throw validation_error("td_decoherence_kernel: r must be positive");
    if (kernel.choice() == TDKernel::Choice::Minimal) {
        // D~(k) = 2 pi G / (hbar k^2)  <->  G / (2 hbar r): the Diosi kernel.
        return kernel.constants().G / (2.0 * kernel.constants().hbar * r);
    }
    if (kernel.decoherence_real_) return kernel.decoherence_real_(r);
    throw unsupported_kernel_error(
        "td_decoherence_kernel: custom kernel has no real-space decoherence form");
}

}  // namespace gravkit
