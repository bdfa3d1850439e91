#include "gravkit/snsolver.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "gravkit/errors.hpp"

namespace gravkit {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Minimal RAII around FFTW plans; ESTIMATE keeps planning deterministic.
struct FftwPlan {
    fftw_plan plan = nullptr;
    ~FftwPlan() {
        if (plan) fftw_destroy_plan(plan);
    }
};

std::complex<double>* as_c(std::vector<std::complex<double>>& v) { return v.data(); }

// ---------------------------------------------------------------------------
// Radial grid helpers: amp holds u(r) = r psi(r), Dirichlet ends, DST-I.
// ---------------------------------------------------------------------------

struct RadialWorkspace {
    int n;
    double extent, dr;
    std::vector<double> r, k, buf_re, buf_im;
    FftwPlan plan_re, plan_im;

    explicit RadialWorkspace(const WaveField& f)
        : n(f.n), extent(f.extent), dr(f.extent / (f.n + 1)) {
        r.resize(static_cast<std::size_t>(n));
        k.resize(static_cast<std::size_t>(n));
        buf_re.resize(static_cast<std::size_t>(n));
        buf_im.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            r[static_cast<std::size_t>(i)] = dr * (i + 1);
            k[static_cast<std::size_t>(i)] = kPi * (i + 1) / extent;
        }
        plan_re.plan = fftw_plan_r2r_1d(n, buf_re.data(), buf_re.data(), FFTW_RODFT00,
                                        FFTW_ESTIMATE);
        plan_im.plan = fftw_plan_r2r_1d(n, buf_im.data(), buf_im.data(), FFTW_RODFT00,
                                        FFTW_ESTIMATE);
    }

    void dst(std::vector<std::complex<double>>& a) {
        for (int i = 0; i < n; ++i) {
            buf_re[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i)].real();
            buf_im[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i)].imag();
        }
        fftw_execute(plan_re.plan);
        fftw_execute(plan_im.plan);
        for (int i = 0; i < n; ++i)
            a[static_cast<std::size_t>(i)] = {buf_re[static_cast<std::size_t>(i)],
                                              buf_im[static_cast<std::size_t>(i)]};
    }

    // DST-I applied twice scales by 2(n+1).
    double inverse_scale() const { return 1.0 / (2.0 * (n + 1)); }

    // Shell-theorem self-potential: V(r) = -g [ M(<r)/r + 4 pi int_r^L |psi|^2 s ds ].
    void potential(const WaveField& f, std::vector<double>& v) const {
        v.resize(static_cast<std::size_t>(n));
        std::vector<double> inner(static_cast<std::size_t>(n)), outer(static_cast<std::size_t>(n));
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            acc += 4.0 * kPi * std::norm(f.amp[static_cast<std::size_t>(i)]) * dr;
            inner[static_cast<std::size_t>(i)] = acc;
        }
        acc = 0.0;
        for (int i = n - 1; i >= 0; --i) {
            acc += 4.0 * kPi * std::norm(f.amp[static_cast<std::size_t>(i)]) /
                   r[static_cast<std::size_t>(i)] * dr;
            outer[static_cast<std::size_t>(i)] = acc;
        }
        for (int i = 0; i < n; ++i)
            v[static_cast<std::size_t>(i)] =
                -f.coupling * (inner[static_cast<std::size_t>(i)] / r[static_cast<std::size_t>(i)] +
                               outer[static_cast<std::size_t>(i)]);
    }
};

// ---------------------------------------------------------------------------
// 1D periodic grid: amp holds psi(x_i), x_i = -L/2 + i dx.
// ---------------------------------------------------------------------------

struct LineWorkspace {
    int n, n2;
    double extent, dx;
    std::vector<double> k;
    std::vector<std::complex<double>> fft_buf, pad_rho, pad_out, kernel_ft;
    FftwPlan fwd, bwd, pad_fwd, pad_bwd;

    explicit LineWorkspace(const WaveField& f)
        : n(f.n), n2(2 * f.n), extent(f.extent), dx(f.extent / f.n) {
        k.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const int m = i <= n / 2 ? i : i - n;
            k[static_cast<std::size_t>(i)] = 2.0 * kPi * m / extent;
        }
        fft_buf.resize(static_cast<std::size_t>(n));
        pad_rho.resize(static_cast<std::size_t>(n2));
        pad_out.resize(static_cast<std::size_t>(n2));
        kernel_ft.resize(static_cast<std::size_t>(n2));
        auto c = [](std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); };
        fwd.plan = fftw_plan_dft_1d(n, c(fft_buf.data()), c(fft_buf.data()), FFTW_FORWARD,
                                    FFTW_ESTIMATE);
        bwd.plan = fftw_plan_dft_1d(n, c(fft_buf.data()), c(fft_buf.data()), FFTW_BACKWARD,
                                    FFTW_ESTIMATE);
        pad_fwd.plan = fftw_plan_dft_1d(n2, c(pad_rho.data()), c(pad_rho.data()), FFTW_FORWARD,
                                        FFTW_ESTIMATE);
        pad_bwd.plan = fftw_plan_dft_1d(n2, c(pad_out.data()), c(pad_out.data()), FFTW_BACKWARD,
                                        FFTW_ESTIMATE);

        // Kernel FFT for the softened interaction -g / sqrt(x^2 + a^2),
        // sampled for displacements in [-L, L) on the padded ring.
        const double a = f.softening;
        for (int j = 0; j < n2; ++j) {
            const double d = (j < n ? j : j - n2) * dx;
            kernel_ft[static_cast<std::size_t>(j)] = -1.0 / std::sqrt(d * d + a * a);
        }
        FftwPlan kplan;
        kplan.plan = fftw_plan_dft_1d(n2, c(kernel_ft.data()), c(kernel_ft.data()),
                                      FFTW_FORWARD, FFTW_ESTIMATE);
        fftw_execute(kplan.plan);
    }

    // V(x_i) = g_sign * sum_j |psi_j|^2 W(x_i - x_j) dx by padded circular FFT.
    void potential(const WaveField& f, std::vector<double>& v) {
        std::fill(pad_rho.begin(), pad_rho.end(), std::complex<double>(0.0, 0.0));
        for (int i = 0; i < n; ++i)
            pad_rho[static_cast<std::size_t>(i)] = std::norm(f.amp[static_cast<std::size_t>(i)]);
        fftw_execute(pad_fwd.plan);
        for (int j = 0; j < n2; ++j)
            pad_out[static_cast<std::size_t>(j)] =
                pad_rho[static_cast<std::size_t>(j)] * kernel_ft[static_cast<std::size_t>(j)];
        fftw_execute(pad_bwd.plan);
        v.resize(static_cast<std::size_t>(n));
        const double scale = f.coupling * dx / n2;
        for (int i = 0; i < n; ++i)
            v[static_cast<std::size_t>(i)] = scale * pad_out[static_cast<std::size_t>(i)].real();
    }
};

double spectral_tail_fraction(const std::vector<double>& power, int n) {
    double total = 0.0, tail = 0.0;
    const int cut = n - n / 10;
    // power[] is indexed by |mode| rank already (caller sorts appropriately)
    for (int i = 0; i < n; ++i) {
        total += power[static_cast<std::size_t>(i)];
        if (i >= cut) tail += power[static_cast<std::size_t>(i)];
    }
    return total > 0.0 ? tail / total : 0.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// WaveField
// ---------------------------------------------------------------------------

WaveField WaveField::gaussian_radial(int n, double extent, double sigma, double coupling) {
    if (n < 16 || extent <= 0.0 || sigma <= 0.0)
        throw validation_error("gaussian_radial: need n >= 16, positive extent and sigma");
    WaveField f;
    f.geometry = Geometry::Radial3D;
    f.n = n;
    f.extent = extent;
    f.coupling = coupling;
    f.amp.resize(static_cast<std::size_t>(n));
    const double dr = extent / (n + 1);
    double norm = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = dr * (i + 1);
        const double u = r * std::exp(-r * r / (4.0 * sigma * sigma));
        f.amp[static_cast<std::size_t>(i)] = u;
        norm += 4.0 * kPi * u * u * dr;
    }
    const double s = 1.0 / std::sqrt(norm);
    for (auto& a : f.amp) a *= s;
    return f;
}

WaveField WaveField::gaussian_1d(int n, double extent, double sigma, double center,
                                 double coupling, double softening) {
    if (n < 16 || extent <= 0.0 || sigma <= 0.0)
        throw validation_error("gaussian_1d: need n >= 16, positive extent and sigma");
    WaveField f;
    f.geometry = Geometry::Line1D;
    f.n = n;
    f.extent = extent;
    f.coupling = coupling;
    f.softening = softening;
    f.amp.resize(static_cast<std::size_t>(n));
    const double dx = extent / n;
    double norm = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = -0.5 * extent + i * dx;
        const double v = std::exp(-(x - center) * (x - center) / (4.0 * sigma * sigma));
        f.amp[static_cast<std::size_t>(i)] = v;
        norm += v * v * dx;
    }
    const double s = 1.0 / std::sqrt(norm);
    for (auto& a : f.amp) a *= s;
    return f;
}

WaveField WaveField::two_gaussian_1d(int n, double extent, double sigma, double separation,
                                     double coupling, double softening) {
    WaveField f = gaussian_1d(n, extent, sigma, -0.5 * separation, coupling, softening);
    const double dx = extent / n;
    double norm = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = -0.5 * extent + i * dx;
        const double v =
            std::exp(-(x - 0.5 * separation) * (x - 0.5 * separation) / (4.0 * sigma * sigma)) +
            std::exp(-(x + 0.5 * separation) * (x + 0.5 * separation) / (4.0 * sigma * sigma));
        f.amp[static_cast<std::size_t>(i)] = v;
        norm += v * v * dx;
    }
    const double s = 1.0 / std::sqrt(norm);
    for (auto& a : f.amp) a *= s;
    return f;
}

double WaveField::dx() const {
    return geometry == Geometry::Line1D ? extent / n : extent / (n + 1);
}

double WaveField::grid_point(int i) const {
    return geometry == Geometry::Line1D ? -0.5 * extent + i * dx() : dx() * (i + 1);
}

double WaveField::norm() const {
    double s = 0.0;
    if (geometry == Geometry::Line1D) {
        for (const auto& a : amp) s += std::norm(a);
        return s * dx();
    }
    for (const auto& a : amp) s += std::norm(a);
    return 4.0 * kPi * s * dx();
}

double WaveField::per_axis_std() const {
    const double d = dx();
    if (geometry == Geometry::Line1D) {
        double m0 = 0.0, m1 = 0.0, m2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = grid_point(i);
            const double p = std::norm(amp[static_cast<std::size_t>(i)]) * d;
            m0 += p;
            m1 += x * p;
            m2 += x * x * p;
        }
        const double mean = m1 / m0;
        return std::sqrt(std::max(0.0, m2 / m0 - mean * mean));
    }
    double m0 = 0.0, m2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = grid_point(i);
        const double p = 4.0 * kPi * std::norm(amp[static_cast<std::size_t>(i)]) * d;
        m0 += p;
        m2 += r * r * p;
    }
    return std::sqrt(m2 / m0 / 3.0);
}

double WaveField::radial_std() const {
    if (geometry != Geometry::Radial3D)
        throw validation_error("radial_std: radial geometry only");
    const double d = dx();
    double m0 = 0.0, m1 = 0.0, m2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = grid_point(i);
        const double p = 4.0 * kPi * std::norm(amp[static_cast<std::size_t>(i)]) * d;
        m0 += p;
        m1 += r * p;
        m2 += r * r * p;
    }
    const double mean = m1 / m0;
    return std::sqrt(std::max(0.0, m2 / m0 - mean * mean));
}

double WaveField::mean_radius() const {
    if (geometry != Geometry::Radial3D)
        throw validation_error("mean_radius: radial geometry only");
    const double d = dx();
    double m0 = 0.0, m1 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = grid_point(i);
        const double p = 4.0 * kPi * std::norm(amp[static_cast<std::size_t>(i)]) * d;
        m0 += p;
        m1 += r * p;
    }
    return m1 / m0;
}

bool WaveField::extent_adequate() const {
    const double w = per_axis_std();
    const double span = geometry == Geometry::Line1D ? 0.5 * extent : extent;
    return span >= 8.0 * w;
}

// ---------------------------------------------------------------------------
// Real-time evolution
// ---------------------------------------------------------------------------

namespace {

struct EnergyReport {
    double kinetic = 0.0;
    double interaction = 0.0;  // counted once: 1/2 int V |psi|^2
    double total() const { return kinetic + interaction; }
};

EnergyReport radial_energy(const WaveField& f, RadialWorkspace& ws) {
    EnergyReport e;
    std::vector<std::complex<double>> spec = f.amp;
    ws.dst(spec);
    const double coeff = 1.0 / (f.n + 1);  // expansion coefficients c_k = Y_k / (n+1)
    double sum = 0.0;
    for (int i = 0; i < f.n; ++i)
        sum += ws.k[static_cast<std::size_t>(i)] * ws.k[static_cast<std::size_t>(i)] *
               std::norm(spec[static_cast<std::size_t>(i)] * coeff);
    e.kinetic = kPi * f.extent * sum;  // 2 pi int |u'|^2 dr
    std::vector<double> v;
    ws.potential(f, v);
    double u = 0.0;
    for (int i = 0; i < f.n; ++i)
        u += v[static_cast<std::size_t>(i)] * std::norm(f.amp[static_cast<std::size_t>(i)]);
    e.interaction = 0.5 * 4.0 * kPi * u * ws.dr;
    return e;
}

EnergyReport line_energy(const WaveField& f, LineWorkspace& ws) {
    EnergyReport e;
    ws.fft_buf = f.amp;
    fftw_execute(ws.fwd.plan);
    double sum = 0.0;
    for (int i = 0; i < f.n; ++i)
        sum += ws.k[static_cast<std::size_t>(i)] * ws.k[static_cast<std::size_t>(i)] *
               std::norm(ws.fft_buf[static_cast<std::size_t>(i)]);
    e.kinetic = 0.5 * sum * ws.dx / f.n;
    std::vector<double> v;
    ws.potential(f, v);
    double u = 0.0;
    for (int i = 0; i < f.n; ++i)
        u += v[static_cast<std::size_t>(i)] * std::norm(f.amp[static_cast<std::size_t>(i)]);
    e.interaction = 0.5 * u * ws.dx;
    return e;
}

double radial_tail_fraction(const WaveField& f, RadialWorkspace& ws) {
    std::vector<std::complex<double>> spec = f.amp;
    ws.dst(spec);
    std::vector<double> power(static_cast<std::size_t>(f.n));
    for (int i = 0; i < f.n; ++i) power[static_cast<std::size_t>(i)] = std::norm(spec[static_cast<std::size_t>(i)]);
    return spectral_tail_fraction(power, f.n);
}

double line_tail_fraction(const WaveField& f, LineWorkspace& ws) {
    ws.fft_buf = f.amp;
    fftw_execute(ws.fwd.plan);
    // order modes by |k|: pair up +/- frequencies
    std::vector<double> power(static_cast<std::size_t>(f.n), 0.0);
    for (int i = 0; i < f.n; ++i) {
        const int m = std::abs(i <= f.n / 2 ? i : i - f.n);
        power[static_cast<std::size_t>(std::min(m, f.n - 1))] +=
            std::norm(ws.fft_buf[static_cast<std::size_t>(i)]);
    }
    return spectral_tail_fraction(power, f.n);
}

}  // namespace

SnEvolveResult sn_evolve(WaveField field, double dt, double t_total, int record_every) {
    if (dt <= 0.0 || t_total < 0.0) throw validation_error("sn_evolve: need dt > 0, t >= 0");
    if (record_every < 1) record_every = 1;
    const auto steps = static_cast<long>(std::llround(t_total / dt));

    SnEvolveResult out;
    const bool radial = field.geometry == WaveField::Geometry::Radial3D;
    std::optional<RadialWorkspace> rws_store;
    std::optional<LineWorkspace> lws_store;
    if (radial) rws_store.emplace(field); else lws_store.emplace(field);
    RadialWorkspace* rws = rws_store ? &*rws_store : nullptr;
    LineWorkspace* lws = lws_store ? &*lws_store : nullptr;

    const double e0 = radial ? radial_energy(field, *rws).total()
                             : line_energy(field, *lws).total();
    auto record = [&](double t) {
        out.times.push_back(t);
        out.width.push_back(field.per_axis_std());
        const double nerr = std::abs(field.norm() - 1.0);
        out.norm_error.push_back(nerr);
        out.max_norm_error = std::max(out.max_norm_error, nerr);
        const double e = radial ? radial_energy(field, *rws).total()
                                : line_energy(field, *lws).total();
        out.energy.push_back(e);
        if (e0 != 0.0)
            out.max_energy_drift = std::max(out.max_energy_drift, std::abs((e - e0) / e0));
        if (!field.extent_adequate()) out.extent_alarm = true;
        const double tail = radial ? radial_tail_fraction(field, *rws)
                                   : line_tail_fraction(field, *lws);
        if (tail > 1e-6)
            throw resolution_error("sn_evolve: spectral tail above 1e-6 of the norm; "
                                   "refine the grid or enlarge the box");
    };
    record(0.0);

    std::vector<double> v;
    auto half_kinetic = [&] {
        if (radial) {
            rws->dst(field.amp);
            const double s = rws->inverse_scale();
            for (int i = 0; i < field.n; ++i) {
                const double k = rws->k[static_cast<std::size_t>(i)];
                const double phase = -0.5 * k * k * 0.5 * dt;
                field.amp[static_cast<std::size_t>(i)] *=
                    s * std::complex<double>(std::cos(phase), std::sin(phase));
            }
            rws->dst(field.amp);
        } else {
            lws->fft_buf = field.amp;
            fftw_execute(lws->fwd.plan);
            for (int i = 0; i < field.n; ++i) {
                const double k = lws->k[static_cast<std::size_t>(i)];
                const double phase = -0.5 * k * k * 0.5 * dt;
                lws->fft_buf[static_cast<std::size_t>(i)] *=
                    std::complex<double>(std::cos(phase), std::sin(phase)) / double(field.n);
            }
            fftw_execute(lws->bwd.plan);
            field.amp = lws->fft_buf;
        }
    };

    for (long s = 0; s < steps; ++s) {
        half_kinetic();
        if (radial) rws->potential(field, v); else lws->potential(field, v);
        double vmax = 0.0;
        for (int i = 0; i < field.n; ++i) {
            const double phase = -v[static_cast<std::size_t>(i)] * dt;
            vmax = std::max(vmax, std::abs(phase));
            field.amp[static_cast<std::size_t>(i)] *=
                std::complex<double>(std::cos(phase), std::sin(phase));
        }
        if (vmax > 0.5)
            throw stability_error("sn_evolve: nonlinear phase per step too large; reduce dt");
        half_kinetic();
        if ((s + 1) % record_every == 0 || s + 1 == steps)
            record(dt * static_cast<double>(s + 1));
    }
    out.field = std::move(field);
    return out;
}

// ---------------------------------------------------------------------------
// Imaginary-time ground state (radial)
// ---------------------------------------------------------------------------

SnGroundResult sn_ground_state(double coupling, int n, double extent, double dtau,
                               int max_iters) {
    if (coupling <= 0.0) throw validation_error("sn_ground_state: coupling must be positive");
    WaveField f = WaveField::gaussian_radial(n, extent, 2.0 / coupling, coupling);
    RadialWorkspace ws(f);

    std::vector<double> v;
    auto normalize = [&] {
        const double s = 1.0 / std::sqrt(f.norm());
        for (auto& a : f.amp) a *= s;
    };
    auto energy = [&] { return radial_energy(f, ws); };

    SnGroundResult out;
    double e_prev = energy().total();
    out.energy_trace.push_back(e_prev);
    int it = 0;
    for (; it < max_iters; ++it) {
        // half kinetic decay
        ws.dst(f.amp);
        const double s = ws.inverse_scale();
        for (int i = 0; i < n; ++i) {
            const double k = ws.k[static_cast<std::size_t>(i)];
            f.amp[static_cast<std::size_t>(i)] *= s * std::exp(-0.25 * k * k * dtau);
        }
        ws.dst(f.amp);
        ws.potential(f, v);
        for (int i = 0; i < n; ++i)
            f.amp[static_cast<std::size_t>(i)] *= std::exp(-v[static_cast<std::size_t>(i)] * dtau);
        ws.dst(f.amp);
        for (int i = 0; i < n; ++i) {
            const double k = ws.k[static_cast<std::size_t>(i)];
            f.amp[static_cast<std::size_t>(i)] *= s * std::exp(-0.25 * k * k * dtau);
        }
        ws.dst(f.amp);
        normalize();
        if (it % 20 == 19) {
            const double e = energy().total();
            out.energy_trace.push_back(e);
            if (std::abs(e - e_prev) < 1e-10 * std::max(1.0, std::abs(e)) * 20.0) {
                e_prev = e;
                break;
            }
            e_prev = e;
        }
    }
    if (it >= max_iters)
        throw convergence_error("sn_ground_state: imaginary-time iteration did not converge",
                                e_prev);
    const EnergyReport e = energy();
    out.field = std::move(f);
    out.energy = e.total();
    out.kinetic = e.kinetic;
    out.potential = e.interaction;
    out.iterations = it + 1;
    out.per_axis_std = out.field.per_axis_std();
    out.radial_std = out.field.radial_std();
    out.mean_radius = out.field.mean_radius();
    return out;
}

double sn_equilibrium_width_estimate(double mass, const Constants& k) {
    if (mass <= 0.0) throw validation_error("sn width estimate: mass must be positive");
    return k.hbar * k.hbar / (k.G * mass * mass * mass);
}

std::vector<double> radial_self_potential(const WaveField& field) {
    if (field.geometry != WaveField::Geometry::Radial3D)
        throw validation_error("radial_self_potential: radial geometry only");
    RadialWorkspace ws(field);
    std::vector<double> v;
    ws.potential(field, v);
    return v;
}

// ---------------------------------------------------------------------------
// EPR spot-separation scenario
// ---------------------------------------------------------------------------

namespace {

// Distance between the two outermost local maxima of |psi|^2, with parabolic
// refinement; nan when fewer than two maxima survive.
double spot_separation(const WaveField& f) {
    const int n = f.n;
    std::vector<double> p(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = std::norm(f.amp[static_cast<std::size_t>(i)]);
    const double peak = *std::max_element(p.begin(), p.end());
    double left = std::numeric_limits<double>::quiet_NaN();
    double right = std::numeric_limits<double>::quiet_NaN();
    for (int i = 1; i + 1 < n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        if (p[ui] > p[ui - 1] && p[ui] >= p[ui + 1] && p[ui] > 0.02 * peak) {
            const double denom = p[ui - 1] - 2.0 * p[ui] + p[ui + 1];
            const double frac = denom != 0.0 ? 0.5 * (p[ui - 1] - p[ui + 1]) / denom : 0.0;
            const double x = f.grid_point(i) + frac * f.dx();
            if (std::isnan(left) || x < left) left = x;
            if (std::isnan(right) || x > right) right = x;
        }
    }
    if (std::isnan(left) || std::isnan(right) || right - left < f.dx())
        return std::numeric_limits<double>::quiet_NaN();
    return right - left;
}

}  // namespace

EprResult epr_scenario(const EprConfig& cfg) {
    if (cfg.separation <= 0.0 || cfg.packet_width <= 0.0)
        throw validation_error("epr_scenario: separation and packet width must be positive");
    const double a = cfg.softening_cells * cfg.extent / cfg.n;

    EprResult out;
    out.initial_separation = cfg.separation;
    out.cell = cfg.extent / cfg.n;

    for (int pass = 0; pass < 2; ++pass) {
        const bool on = pass == 0;
        WaveField f = WaveField::two_gaussian_1d(cfg.n, cfg.extent, cfg.packet_width,
                                                 cfg.separation, on ? cfg.coupling : 0.0, a);
        LineWorkspace ws(f);
        const auto steps = static_cast<long>(std::llround(cfg.t_total / cfg.dt));
        std::vector<double> v;
        auto half_kinetic = [&] {
            ws.fft_buf = f.amp;
            fftw_execute(ws.fwd.plan);
            for (int i = 0; i < f.n; ++i) {
                const double k = ws.k[static_cast<std::size_t>(i)];
                const double phase = -0.25 * k * k * cfg.dt;
                ws.fft_buf[static_cast<std::size_t>(i)] *=
                    std::complex<double>(std::cos(phase), std::sin(phase)) / double(f.n);
            }
            fftw_execute(ws.bwd.plan);
            f.amp = ws.fft_buf;
        };
        auto record = [&](double t) {
            const double sep = spot_separation(f);
            if (on) {
                out.times.push_back(t);
                out.separation_on.push_back(sep);
            } else {
                out.separation_off.push_back(sep);
            }
            if (std::isnan(sep) && !out.merged) {
                out.merged = true;
                out.merge_time = t;
            }
            return sep;
        };
        record(0.0);
        double last = cfg.separation;
        for (long s = 0; s < steps; ++s) {
            half_kinetic();
            if (on && cfg.coupling != 0.0) {
                ws.potential(f, v);
                for (int i = 0; i < f.n; ++i) {
                    const double phase = -v[static_cast<std::size_t>(i)] * cfg.dt;
                    f.amp[static_cast<std::size_t>(i)] *=
                        std::complex<double>(std::cos(phase), std::sin(phase));
                }
            }
            half_kinetic();
            if ((s + 1) % cfg.record_every == 0 || s + 1 == steps)
                last = record(cfg.dt * static_cast<double>(s + 1));
        }
        if (on)
            out.final_separation_on = last;
        else
            out.final_separation_off = last;
    }
    return out;
}

}  // namespace gravkit
