#include <doctest.h>

#include <cmath>

#include "gravkit/errors.hpp"
#include "gravkit/kernels.hpp"
#include "gravkit/quadrature.hpp"

using namespace gravkit;

namespace {

// Independent correlator oracle: the mode integral done directly,
//   C(r,tau) = (l_P^{4/3} / pi^2) int_0^kc k^{1/3} sinc(k r) cos(c k tau) dk,
// no hypergeometric function involved.
double correlator_mode_integral(const KarolyhazyKernel& kernel, double r, double tau) {
    const double kc = kernel.cutoff_wavenumber();
    const double c = kernel.constants.c;
    const double osc = kc * std::max(r, c * std::abs(tau)) / M_PI;
    const std::size_t panels = static_cast<std::size_t>(osc) + 8;
    const double pref = std::pow(kernel.constants.planck_length(), 4.0 / 3.0) / (M_PI * M_PI);
    return pref * integrate(
                      [&](double k) {
                          const double s = k * r > 1e-8 ? std::sin(k * r) / (k * r) : 1.0;
                          return std::cbrt(k) * s * std::cos(c * k * tau);
                      },
                      0.0, kc, 1e-12, 0.0, panels)
                      .value;
}

}  // namespace

TEST_CASE("karolyhazy correlation closed form") {
    KarolyhazyKernel kernel;
    kernel.lambda_c = 1e-15;
    const double lam = kernel.lambda_c;
    const double c = kernel.constants.c;

    SUBCASE("equal-point limit is 6A") {
        const double expect = 6.0 * kernel.amplitude();
        CHECK(kernel.correlation(0.0, 0.0) == doctest::Approx(expect).epsilon(1e-12));
        // convergence of the generic branch towards the limit branch
        const double near = kernel.correlation(1e-6 * lam, 0.0);
        const double nearer = kernel.correlation(1e-7 * lam, 0.0);
        CHECK(near == doctest::Approx(expect).epsilon(1e-9));
        CHECK(std::abs(nearer - expect) <= std::abs(near - expect) + 1e-12 * expect);
    }
    SUBCASE("even in the time lag") {
        const double tau = 0.5 * lam / c;
        CHECK(kernel.correlation(lam, tau) == kernel.correlation(lam, -tau));
    }
    SUBCASE("matches the direct mode integral") {
        for (const auto& [r, tau] : {std::pair{0.5 * lam, 0.0}, {lam, 0.3 * lam / c},
                                     {2.0 * lam, lam / c}, {5.0 * lam, 0.5 * lam / c}}) {
            const double oracle = correlator_mode_integral(kernel, r, tau);
            CHECK(kernel.correlation(r, tau) == doctest::Approx(oracle).epsilon(1e-8));
        }
    }
    SUBCASE("finite limit as r -> 0 at nonzero lag") {
        const double tau = 0.7 * lam / c;
        const double at_zero = kernel.correlation(0.0, tau);
        CHECK(std::isfinite(at_zero));
        CHECK(kernel.correlation(1e-7 * lam, tau) == doctest::Approx(at_zero).epsilon(1e-8));
    }
}

TEST_CASE("field sampler determinism and spectrum") {
    KarolyhazyKernel kernel;
    kernel.lambda_c = 1e-15;
    const double box = 10.0 * kernel.lambda_c;

    SUBCASE("same seed gives bit-identical realizations") {
        const auto a = sample_field_realization(kernel, box, 16, 99);
        const auto b = sample_field_realization(kernel, box, 16, 99);
        REQUIRE(a.coefficients.size() == b.coefficients.size());
        for (std::size_t i = 0; i < a.coefficients.size(); ++i)
            CHECK(a.coefficients[i] == b.coefficients[i]);
        const auto c = sample_field_realization(kernel, box, 16, 100);
        CHECK(a.coefficients[0] != c.coefficients[0]);
    }
    SUBCASE("modes beyond the cutoff carry no weight") {
        const auto f = sample_field_realization(kernel, box, 16, 7);
        for (const auto& k : f.wavevectors) CHECK(k.norm() <= kernel.cutoff_wavenumber());
        CHECK(kernel.mode_spectrum(1.01 * kernel.cutoff_wavenumber()) == 0.0);
        CHECK(kernel.mode_spectrum(0.99 * kernel.cutoff_wavenumber()) > 0.0);
    }
    SUBCASE("coefficients are zero-mean with the k^{-5/3} variance") {
        // one fixed mode, many draws
        const int draws = 10000;
        double sum_re = 0.0, sum_im = 0.0, sum_sq = 0.0;
        std::size_t idx = 0;
        double spectrum = 0.0;
        for (int i = 0; i < draws; ++i) {
            const auto f = sample_field_realization(kernel, box, 16, 1000 + i);
            if (i == 0) {
                idx = f.coefficients.size() / 3;
                spectrum = kernel.mode_spectrum(f.wavevectors[idx].norm());
            }
            const auto c = f.coefficients[idx];
            sum_re += c.real();
            sum_im += c.imag();
            sum_sq += std::norm(c);
        }
        const double mean_scale = std::sqrt(spectrum / 2.0 / draws);  // sd of the mean
        CHECK(std::abs(sum_re / draws) <= 3.0 * mean_scale);
        CHECK(std::abs(sum_im / draws) <= 3.0 * mean_scale);
        const double var = sum_sq / draws;
        CHECK(std::abs(var - spectrum) <= 3.0 * spectrum / std::sqrt(double(draws)));
    }
    SUBCASE("configuration errors") {
        CHECK_THROWS_AS((void)sample_field_realization(kernel, 4.0 * kernel.lambda_c, 16, 1),
                        configuration_error);
        CHECK_THROWS_AS((void)sample_field_realization(kernel, 40.0 * kernel.lambda_c, 8, 1),
                        configuration_error);
    }
}

TEST_CASE("sampled-field correlator approaches the closed form") {
    // Small box, modest ensemble: statistical smoke test; the acceptance
    // suite runs the full 1e4-realization comparison.
    KarolyhazyKernel kernel;
    kernel.lambda_c = 1e-15;
    const double box = 16.0 * kernel.lambda_c;
    const SpacetimePoint p0{Eigen::Vector3d::Zero(), 0.0};
    const SpacetimePoint p1{Eigen::Vector3d(0, 0, kernel.lambda_c), 0.0};
    const auto est = estimate_field_correlator(kernel, box, 24, {{p0, p1}}, 3000, 5);
    // compare against the exact discrete-box expectation (no finite-box bias)
    const double box_expect = field_correlator_box_expectation(kernel, box, 24, {p0, p1});
    CHECK(std::abs(est[0].mean - box_expect) <= 3.0 * est[0].std_error);
    // and the box expectation itself is within a few percent of the closed form
    const double closed = kernel.correlation(kernel.lambda_c, 0.0);
    CHECK(std::abs(box_expect - closed) <= 0.05 * kernel.correlation(0.0, 0.0));
}

TEST_CASE("diosi kernel") {
    DiosiKernel kernel;
    for (const double r : {1e-12, 1e-6, 1.0}) {
        CHECK(kernel.potential_correlation(r) > 0.0);
        CHECK(kernel.master_kernel(r) > 0.0);
        CHECK(kernel.potential_correlation(r) ==
              doctest::Approx(kernel.constants.G * kernel.constants.hbar / r));
        // master kernel carries G/(2 hbar): potential_corr / master = 2 hbar^2
        CHECK(kernel.potential_correlation(r) / kernel.master_kernel(r) ==
              doctest::Approx(2.0 * kernel.constants.hbar * kernel.constants.hbar));
    }
    CHECK_THROWS_AS((void)kernel.potential_correlation(0.0), validation_error);
}

TEST_CASE("adler kernel presets") {
    const auto k = AdlerKernel::white_gaussian(1.0, 0.5, 1e-3);
    SUBCASE("real, even, delta-normalised in time") {
        CHECK(k.imag_part(0.3, 0.1) == 0.0);
        CHECK(k.real_part(0.4, 0.2) == doctest::Approx(k.real_part(-0.4, -0.2)));
        CHECK(k.time_profile_integral(1.0) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(k.time_profile_double_integral(1.0) ==
              doctest::Approx(0.5 * 1.0 - std::sqrt(2.0 / M_PI) * 1e-3).epsilon(1e-6));
    }
    SUBCASE("spatial transform is nonnegative on a grid") {
        for (double q = 0.0; q < 20.0; q += 0.25) CHECK(k.spatial_fourier(q) >= 0.0);
    }
    SUBCASE("tabulated kernel interpolates its nodes and stays even") {
        TabulatedKernel table;
        table.x_grid = {0.0, 1.0, 2.0};
        table.t_grid = {0.0, 0.5};
        table.dr.resize(3, 2);
        table.dr << 1.0, 0.8, 0.5, 0.4, 0.2, 0.1;
        table.di = Eigen::MatrixXd::Zero(3, 2);
        const auto custom = AdlerKernel::custom(0.7, table);
        CHECK(custom.real_part(1.0, 0.5) == doctest::Approx(0.4));
        CHECK(custom.real_part(-1.0, -0.5) == doctest::Approx(0.4));  // D(x,t) = D(-x,-t)
        CHECK(custom.imag_part(1.0, 0.5) == 0.0);
    }
}

TEST_CASE("tilloy-diosi kernel") {
    const Constants si = Constants::si();
    const auto minimal = TDKernel::minimal(si);

    SUBCASE("minimal kernel satisfies gamma(r) r = 2 hbar G") {
        for (const double r : {1e-9, 1e-6, 1.0})
            CHECK(minimal.gamma(r) * r == doctest::Approx(2.0 * si.hbar * si.G).epsilon(1e-14));
    }
    SUBCASE("minimal decoherence kernel is the diosi master kernel") {
        DiosiKernel diosi;
        for (const double r : {1e-9, 1e-6, 1.0})
            CHECK(td_decoherence_kernel(minimal, r) ==
                  doctest::Approx(diosi.master_kernel(r)).epsilon(1e-14));
    }
    SUBCASE("minimal gamma~ minimises D~(k): doubling trades the two terms") {
        const auto doubled = TDKernel::custom(
            [&](double k) { return 2.0 * minimal.gamma_fourier(k); }, {}, si);
        for (const double k : {1e3, 1e6}) {
            const auto [n0, f0] = minimal.decoherence_kernel_fourier_terms(k);
            const auto [n1, f1] = doubled.decoherence_kernel_fourier_terms(k);
            CHECK(n1 == doctest::Approx(2.0 * n0).epsilon(1e-12));
            CHECK(f1 == doctest::Approx(0.5 * f0).epsilon(1e-12));
            CHECK(n1 + f1 > n0 + f0);  // any departure from minimal costs decoherence
            CHECK(n0 == doctest::Approx(f0).epsilon(1e-12));  // balanced at the minimum
        }
    }
    SUBCASE("custom kernels without usable pieces raise unsupported errors") {
        const auto custom = TDKernel::custom(
            [&](double k) { return 2.0 * minimal.gamma_fourier(k); }, {}, si);
        CHECK_THROWS_AS((void)custom.gamma(1.0), unsupported_kernel_error);
        CHECK_THROWS_AS((void)td_decoherence_kernel(custom, 1.0), unsupported_kernel_error);
        CHECK_THROWS_AS((void)TDKernel::custom({}, {}, si), unsupported_kernel_error);
    }
}
