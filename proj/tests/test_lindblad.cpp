#include <doctest.h>

#include <cmath>

#include "gravkit/errors.hpp"
#include "gravkit/lindblad.hpp"
#include "oracles/ktm_dense.hpp"
#include "oracles/oracles.hpp"

using namespace gravkit;

namespace {

SuperpositionSpec microsphere_spec() {
    return SuperpositionSpec::two_branch(MassDensity::uniform_sphere(1e-12, 5e-6), 5e-5);
}

}  // namespace

TEST_CASE("markovian pointer decay") {
    const auto spec = microsphere_spec();
    Eigen::VectorXcd amps(2);
    amps << std::sqrt(0.5), std::sqrt(0.5);
    const auto sys = PointerSystem::dp(spec, amps);

    SUBCASE("t = 0 is the identity map") {
        const auto out = evolve_dp_pointer(sys, 0.0);
        CHECK((out.rho - sys.rho).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("off-diagonal reaches 1/e at the decay time") {
        const double tau = 1.0 / sys.rates(0, 1);
        const auto out = evolve_dp_pointer(sys, tau);
        CHECK(std::abs(out.rho(0, 1)) ==
              doctest::Approx(0.5 * std::exp(-1.0)).epsilon(1e-12));
        CHECK(out.rho(0, 0) == sys.rho(0, 0));
        CHECK(out.rho(1, 1) == sys.rho(1, 1));
        CHECK(std::abs(out.rho.trace() - std::complex<double>(1.0)) <= 1e-10);
    }
    SUBCASE("off-diagonals are nonincreasing in time") {
        double prev = std::abs(sys.rho(0, 1));
        for (const double t : {0.2, 0.5, 1.0, 2.0}) {
            const double mag = std::abs(evolve_dp_pointer(sys, t / sys.rates(0, 1)).rho(0, 1));
            CHECK(mag <= prev);
            prev = mag;
        }
    }
}

TEST_CASE("three-branch decay matches a dense integrator") {
    SuperpositionSpec spec;
    spec.density = MassDensity::gaussian_ball(1e-14, 1e-7);
    spec.displacements = {Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(0, 0, 4e-7),
                          Eigen::Vector3d(0, 5e-7, 2e-7)};
    Eigen::VectorXcd amps(3);
    amps << std::complex<double>(0.6, 0.1), std::complex<double>(0.0, 0.55), 0.55;
    const auto sys = PointerSystem::dp(spec, amps);
    const double t = 1.5 / sys.rates.maxCoeff();
    const auto engine = evolve_dp_pointer(sys, t);
    // independent route: RK4 on d rho_ij/dt = -Lambda_ij rho_ij
    const auto oracle = oracles::rk4_pointer_decay(sys.rho, sys.rates, t, 4000);
    CHECK((engine.rho - oracle).cwiseAbs().maxCoeff() <= 1e-8 * sys.rho.cwiseAbs().maxCoeff());
    engine.validate();  // hermitian, unit trace, positive semidefinite
}

TEST_CASE("pointer system validation") {
    const auto spec = microsphere_spec();
    Eigen::VectorXcd amps(2);
    amps << 1.0, 1.0;
    auto sys = PointerSystem::dp(spec, amps);
    SUBCASE("negative rates rejected") {
        sys.rates(0, 1) = sys.rates(1, 0) = -1.0;
        CHECK_THROWS_AS(sys.validate(), validation_error);
    }
    SUBCASE("asymmetric rates rejected") {
        sys.rates(0, 1) *= 2.0;
        CHECK_THROWS_AS(sys.validate(), validation_error);
    }
    SUBCASE("non-hermitian state rejected") {
        sys.rho(0, 1) += std::complex<double>(0.1, 0.0);
        CHECK_THROWS_AS(sys.validate(), validation_error);
    }
    SUBCASE("trace must be one") {
        sys.rho *= 1.5;
        CHECK_THROWS_AS(sys.validate(), validation_error);
    }
}

TEST_CASE("tilloy-diosi pointer engine") {
    const auto spec = microsphere_spec();
    Eigen::VectorXcd amps(2);
    amps << std::sqrt(0.4), std::sqrt(0.6);
    auto sys = PointerSystem::dp(spec, amps);
    const auto kernel = TDKernel::minimal();
    const double tau = 1.0 / sys.rates(0, 1);

    SUBCASE("identity at t = 0") {
        const auto out = evolve_td_pointer(sys, kernel, 0.0);
        CHECK((out.rho - sys.rho).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("minimal kernel decay equals the diosi decay") {
        const auto td = evolve_td_pointer(sys, kernel, tau);
        const auto dp = evolve_dp_pointer(sys, tau);
        CHECK(std::abs(td.rho(0, 1)) ==
              doctest::Approx(std::abs(dp.rho(0, 1))).epsilon(1e-6));
    }
    SUBCASE("equal branch self-energies leave no relative phase") {
        const auto out = evolve_td_pointer(sys, kernel, tau);
        CHECK(std::arg(out.rho(0, 1)) == doctest::Approx(std::arg(sys.rho(0, 1))).epsilon(1e-12));
    }
}

TEST_CASE("karolyhazy dephasing exponent") {
    // proton-scale two-branch spec in SI units
    KarolyhazyKernel kernel;
    kernel.lambda_c = 1e-15;
    const auto spec =
        SuperpositionSpec::two_branch(MassDensity::gaussian_ball(1.67e-27, 8.0e-16), 5e-15);

    SUBCASE("identity at t = 0") {
        Eigen::VectorXcd amps(2);
        amps << 1.0, 1.0;
        auto sys = PointerSystem::from_amplitudes(spec, amps, Eigen::MatrixXd::Zero(2, 2));
        const auto out = evolve_nonmarkovian_pointer(sys, kernel, 0.0);
        CHECK((out.rho - sys.rho).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("closed time factor matches the nested time quadrature") {
        const double t_corr = kernel.lambda_c / kernel.constants.c;
        for (const double t : {0.5 * t_corr, 3.0 * t_corr}) {
            const auto fast = nonmarkovian_exponent(spec, 0, 1, kernel, t);
            const auto slow = nonmarkovian_exponent_time_quadrature(spec, 0, 1, kernel, t);
            CHECK(fast.gamma == doctest::Approx(slow.gamma).epsilon(1e-6));
        }
    }
    SUBCASE("exponent is nonnegative, rises, then saturates") {
        const double t_corr = (5e-15 + kernel.lambda_c) / kernel.constants.c;
        std::vector<double> gammas;
        double t = 0.05 * t_corr;
        for (int i = 0; i < 12; ++i, t *= 2.0)
            gammas.push_back(nonmarkovian_exponent(spec, 0, 1, kernel, t).gamma);
        for (std::size_t i = 0; i < gammas.size(); ++i) {
            CHECK(gammas[i] >= 0.0);
            if (i > 0 && gammas[i] < gammas[i - 1] * (1.0 - 1e-9)) {
                // non-monotonicity is a finding to surface, not to clip
                WARN_MESSAGE(false, "dephasing exponent dipped at step ", i, ": ",
                             gammas[i - 1], " -> ", gammas[i]);
            }
        }
        // early growth, late saturation
        CHECK(gammas[3] > 2.0 * gammas[1]);
        CHECK(gammas[11] <= gammas[10] * 1.5);
        CHECK(gammas[11] > 0.5 * gammas[8]);
    }
}

TEST_CASE("adler dephasing and the white-noise limit") {
    const Constants scaled = Constants::scaled();
    const auto kernel = AdlerKernel::white_gaussian(1.0, 0.5, 1e-6);
    auto spec = SuperpositionSpec::two_branch(MassDensity::gaussian_ball(1.0, 0.25), 1.0);

    SUBCASE("white-noise kernel dephases at the markovian rate") {
        const double g1 = nonmarkovian_exponent(spec, 0, 1, kernel, 1.0, scaled).gamma;
        const double g2 = nonmarkovian_exponent(spec, 0, 1, kernel, 2.0, scaled).gamma;
        CHECK(g2 == doctest::Approx(2.0 * g1).epsilon(1e-5));  // linear in t
        CHECK(g1 > 0.0);
    }
    SUBCASE("engine applies the exponent to the off-diagonals") {
        Eigen::VectorXcd amps(2);
        amps << std::sqrt(0.5), std::sqrt(0.5);
        auto sys = PointerSystem::from_amplitudes(spec, amps, Eigen::MatrixXd::Zero(2, 2));
        const double t = 1.0;
        const double gamma = nonmarkovian_exponent(spec, 0, 1, kernel, t, scaled).gamma;
        const auto out = evolve_nonmarkovian_pointer(sys, kernel, t, scaled);
        CHECK(std::abs(out.rho(0, 1)) ==
              doctest::Approx(0.5 * std::exp(-gamma)).epsilon(1e-12));
        out.validate();
    }
    SUBCASE("tabulated kernels need point-mass branches") {
        TabulatedKernel table;
        table.x_grid = {0.0, 1.0};
        table.t_grid = {0.0, 1.0};
        table.dr = Eigen::MatrixXd::Constant(2, 2, 1.0);
        table.di = Eigen::MatrixXd::Zero(2, 2);
        const auto custom = AdlerKernel::custom(1.0, table);
        CHECK_THROWS_AS((void)nonmarkovian_exponent(spec, 0, 1, custom, 1.0, scaled),
                        unsupported_kernel_error);
        auto point_spec = SuperpositionSpec::two_branch(MassDensity::point_mass(1.0), 0.5);
        const auto e = nonmarkovian_exponent(point_spec, 0, 1, custom, 1.0, scaled);
        CHECK(std::isfinite(e.gamma));
    }
}

TEST_CASE("ktm gaussian moment engine") {
    const Constants scaled = Constants::scaled();

    SUBCASE("uncoupled evolution is symplectic: purity exactly preserved") {
        auto state = GaussianOscillatorState::ground_coupled(1.0, 0.8, 1.0, 1.3, 0.0, scaled);
        state.mean << 0.5, 0.0, -0.2, 0.1;
        const double p0 = state.purity();
        const auto out = evolve_ktm_gaussian(state, 2.0 * M_PI, 1e-3);
        CHECK(out.purity() == doctest::Approx(p0).epsilon(1e-8));
        // means rotate with the trap frequency
        CHECK(out.mean(0) ==
              doctest::Approx(0.5 * std::cos(2.0 * M_PI * 1.0)).epsilon(1e-6));
    }
    SUBCASE("momentum diffusion of the dissipator is hbar K per mode") {
        auto state = GaussianOscillatorState::ground_coupled(1.0, 0.8, 1.0, 1.3, 0.05, scaled);
        const double h = 1e-4;
        const auto out = evolve_ktm_gaussian(state, h, h / 20.0);
        const double d1 = (out.cov(1, 1) - state.cov(1, 1)) / h;
        const double d2 = (out.cov(3, 3) - state.cov(3, 3)) / h;
        CHECK(d1 == doctest::Approx(scaled.hbar * 0.05).epsilon(0.01));
        CHECK(d2 == doctest::Approx(scaled.hbar * 0.05).epsilon(0.01));
    }
    SUBCASE("purity never increases with the coupling on") {
        auto state = GaussianOscillatorState::ground_coupled(1.0, 0.8, 1.0, 1.3, 0.05, scaled);
        double prev = state.purity();
        for (const double t : {0.5, 1.0, 2.0, 6.0}) {
            const double p = evolve_ktm_gaussian(state, t, 1e-3).purity();
            CHECK(p <= prev * (1.0 + 1e-10));
            prev = p;
        }
    }
    SUBCASE("moments match the truncated-basis integrator") {
        auto state = GaussianOscillatorState::ground_coupled(1.0, 1.0, 1.0, 1.3, 0.05, scaled);
        state.mean(0) = 0.4;
        const double t = 1.2;
        const auto g = evolve_ktm_gaussian(state, t, 5e-4);
        const auto dense = oracles::dense_ktm_moments(state, t, 2e-3, 10);
        REQUIRE(dense.top_occupation < 1e-6);  // cutoff wide enough
        REQUIRE(dense.trace_error < 1e-8);
        const double scale = std::max({std::abs(dense.x1x1), std::abs(dense.p1p1), 1.0});
        CHECK(std::abs(g.mean(0) - dense.x1) <= 1e-4 * scale);
        CHECK(std::abs(g.mean(1) - dense.p1) <= 1e-4 * scale);
        CHECK(std::abs(g.cov(0, 0) + g.mean(0) * g.mean(0) - dense.x1x1) <= 1e-4 * scale);
        CHECK(std::abs(g.cov(1, 1) + g.mean(1) * g.mean(1) - dense.p1p1) <= 1e-4 * scale);
        CHECK(std::abs(g.cov(2, 2) + g.mean(2) * g.mean(2) - dense.x2x2) <= 1e-4 * scale);
        CHECK(std::abs(g.cov(0, 2) + g.mean(0) * g.mean(2) - dense.x1x2) <= 1e-4 * scale);
    }
    SUBCASE("heisenberg margin stays healthy and is validated") {
        auto state = GaussianOscillatorState::ground_coupled(1.0, 0.8, 1.0, 1.3, 0.05, scaled);
        const auto out = evolve_ktm_gaussian(state, 3.0, 1e-3);
        CHECK(out.heisenberg_margin() >= -1e-8);
        out.validate();
    }
    SUBCASE("dt must resolve the fastest frequency") {
        auto state = GaussianOscillatorState::ground_coupled(1.0, 1.0, 1.0, 4.0, 0.05, scaled);
        CHECK_THROWS_AS((void)evolve_ktm_gaussian(state, 1.0, 0.05), validation_error);
    }
    SUBCASE("physical construction ties the coupling to the separation") {
        const Constants si = Constants::si();
        const double m = 1e-6, d = 1e-3, omega = 2.0 * M_PI * 100.0;
        const auto state = GaussianOscillatorState::ground(m, m, omega, omega, d, si);
        CHECK(state.coupling == doctest::Approx(2.0 * si.G * m * m / (d * d * d)));
        CHECK(state.omega1 < omega);  // effective frequency softened
        state.validate();
    }
}
