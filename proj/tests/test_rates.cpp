#include <doctest.h>

#include <cmath>

#include "gravkit/errors.hpp"
#include "gravkit/rates.hpp"
#include "oracles/oracles.hpp"

using namespace gravkit;

namespace {
constexpr double kProtonMass = 1.67262192369e-27;
}

TEST_CASE("minimal length uncertainty") {
    const Constants k = Constants::si();
    const double lp = k.planck_length();
    SUBCASE("fixed point at the planck length") {
        CHECK(karolyhazy_delta_s(lp, k) == doctest::Approx(lp).epsilon(1e-12));
    }
    SUBCASE("one metre against high-precision arithmetic") {
        const long double lpl = std::sqrt((long double)k.hbar * k.G / ((long double)k.c * k.c * k.c));
        const double oracle = static_cast<double>(cbrtl(lpl * lpl * 1.0L));
        CHECK(karolyhazy_delta_s(1.0, k) == doctest::Approx(oracle).epsilon(1e-12));
        CHECK(karolyhazy_delta_s(1.0, k) == doctest::Approx(6.4e-24).epsilon(0.02));
    }
    SUBCASE("cube-root scaling: delta_s(8s) = 2 delta_s(s)") {
        for (const double s : {1e-10, 1.0, 3.4e7})
            CHECK(karolyhazy_delta_s(8.0 * s, k) ==
                  doctest::Approx(2.0 * karolyhazy_delta_s(s, k)).epsilon(1e-13));
    }
    CHECK_THROWS_AS((void)karolyhazy_delta_s(0.0, k), validation_error);
}

TEST_CASE("karolyhazy coherence cell") {
    SUBCASE("proton: a_K ~ 1e23 m, tau_K ~ 1e53 s") {
        const auto cell = karolyhazy_coherence_cell(kProtonMass, 0.0);
        CHECK(cell.a_k / 1e23 > 0.1);
        CHECK(cell.a_k / 1e23 < 10.0);
        CHECK(cell.tau_k / 1e53 > 0.1);
        CHECK(cell.tau_k / 1e53 < 10.0);
    }
    SUBCASE("1 cm sphere at 1 g/cm^3: a_K ~ 1e-18 m, tau_K ~ 1e-4 s") {
        const double mass = 4.0 / 3.0 * M_PI * std::pow(0.01, 3) * 1000.0;
        const auto cell = karolyhazy_coherence_cell(mass, 0.01);
        CHECK(cell.a_k / 1e-18 > 0.1);
        CHECK(cell.a_k / 1e-18 < 10.0);
        CHECK(cell.tau_k / 1e-4 > 0.1);
        CHECK(cell.tau_k / 1e-4 < 10.0);
    }
    SUBCASE("point-particle branch scales as tau ~ m^-5") {
        const auto a = karolyhazy_coherence_cell(kProtonMass, 0.0);
        const auto b = karolyhazy_coherence_cell(2.0 * kProtonMass, 0.0);
        CHECK(a.tau_k / b.tau_k == doctest::Approx(32.0).epsilon(1e-10));
    }
    SUBCASE("branches join continuously at the crossover") {
        const Constants k = Constants::si();
        const double m = 1e-17;  // crossover radius in a convenient range
        const double r_star = k.hbar * k.hbar / (k.G * m * m * m);
        const auto below = karolyhazy_coherence_cell(m, r_star * (1.0 - 1e-9));
        const auto above = karolyhazy_coherence_cell(m, r_star * (1.0 + 1e-9));
        CHECK(below.a_k == doctest::Approx(above.a_k).epsilon(1e-8));
    }
}

TEST_CASE("two-branch decay rates") {
    const auto sphere = MassDensity::uniform_sphere(1e-12, 5e-6);

    SUBCASE("identical branches do not decohere") {
        const auto spec = SuperpositionSpec::two_branch(sphere, 0.0);
        CHECK_THROWS_AS(spec.validate(), validation_error);  // degenerate displacements
        // rate at vanishing separation via the matrix on distinct branches
        const auto tiny = SuperpositionSpec::two_branch(sphere, 1e-30);
        CHECK(dp_decay_rate(tiny).rate <= 1e-12 * dp_decay_rate(
                                              SuperpositionSpec::two_branch(sphere, 5e-5)).rate);
    }
    SUBCASE("microsphere rate against the 6D Monte Carlo oracle") {
        const auto spec = SuperpositionSpec::two_branch(sphere, 5e-5);
        const auto r = dp_decay_rate(spec);
        const Constants k = Constants::si();
        const auto mc0 = oracles::mc_pair_overlap(sphere, 0.0, 40000, 11);
        const auto mcd = oracles::mc_pair_overlap(sphere, 5e-5, 40000, 12);
        const double mc_rate = (k.G / k.hbar) * (mc0.mean - mcd.mean);
        const double mc_se = (k.G / k.hbar) * std::hypot(mc0.std_error, mcd.std_error);
        CHECK(std::abs(r.rate - mc_rate) <= 3.0 * mc_se);
        CHECK(r.rate * r.time_constant == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.rate > 0.0);
    }
    SUBCASE("rate grows with separation") {
        double prev = 0.0;
        for (const double d : {1e-6, 5e-6, 2e-5, 1e-4}) {
            const double rate = dp_decay_rate(SuperpositionSpec::two_branch(sphere, d)).rate;
            CHECK(rate > prev);
            prev = rate;
        }
    }
    SUBCASE("smaller smearing radius decoheres faster") {
        double prev = 0.0;
        for (const double r0 : {4e-7, 2e-7, 1e-7}) {
            const auto g = MassDensity::gaussian_ball(1e-14, r0);
            const double rate = dp_decay_rate(SuperpositionSpec::two_branch(g, 1e-6)).rate;
            CHECK(rate > prev);
            prev = rate;
        }
    }
    SUBCASE("point mass diverges") {
        const auto spec = SuperpositionSpec::two_branch(MassDensity::point_mass(1e-20), 1e-6);
        CHECK_THROWS_AS((void)dp_decay_rate(spec), divergence_error);
    }
}

TEST_CASE("penrose energy gap and the 8 pi identity") {
    SUBCASE("tau_D = 8 pi tau on varied specs, 1e-10 relative") {
        const MassDensity densities[] = {
            MassDensity::uniform_sphere(1e-12, 5e-6),
            MassDensity::uniform_sphere(3e-14, 1e-6),
            MassDensity::gaussian_ball(1e-14, 1e-7),
            MassDensity::gaussian_ball(5e-13, 3e-6),
            MassDensity::cubic_lattice(3, 1e-15, 1e-6, 1e-8),
        };
        const double seps[] = {5e-5, 3e-6, 2e-7, 1e-5, 2.5e-6};
        for (int i = 0; i < 5; ++i) {
            const auto spec = SuperpositionSpec::two_branch(densities[i], seps[i]);
            const auto dp = dp_decay_rate(spec);
            const auto pen = penrose_delta_e(spec);
            CHECK(dp.time_constant ==
                  doctest::Approx(8.0 * M_PI * pen.tau).epsilon(1e-10));
        }
    }
    SUBCASE("microsphere decay time lands at the order of 1e-6 s") {
        const auto spec =
            SuperpositionSpec::two_branch(MassDensity::uniform_sphere(1e-12, 5e-6), 5e-5);
        const auto pen = penrose_delta_e(spec);
        CHECK(pen.tau / 1e-6 > 0.1);
        CHECK(pen.tau / 1e-6 < 10.0);
    }
    SUBCASE("degenerate separation gives zero gap") {
        const auto spec =
            SuperpositionSpec::two_branch(MassDensity::uniform_sphere(1e-12, 5e-6), 1e-30);
        CHECK(penrose_delta_e(spec).delta_e <=
              1e-10 * penrose_delta_e(SuperpositionSpec::two_branch(
                                          MassDensity::uniform_sphere(1e-12, 5e-6), 5e-5))
                          .delta_e);
    }
}

TEST_CASE("pairwise rate matrix for many branches") {
    const auto g = MassDensity::gaussian_ball(1e-14, 1e-7);
    SuperpositionSpec spec;
    spec.density = g;
    spec.displacements = {Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(0, 0, 5e-7),
                          Eigen::Vector3d(0, 6e-7, 0)};
    const Eigen::MatrixXd lambda = dp_rate_matrix(spec);
    CHECK((lambda - lambda.transpose()).cwiseAbs().maxCoeff() == 0.0);
    for (int i = 0; i < 3; ++i) {
        CHECK(lambda(i, i) == 0.0);
        for (int j = 0; j < 3; ++j) CHECK(lambda(i, j) >= 0.0);
    }
    CHECK(lambda(0, 1) > 0.0);
    // off-diagonal pairs with different separations decay differently
    CHECK(lambda(0, 1) != doctest::Approx(lambda(1, 2)).epsilon(1e-3));
}

TEST_CASE("crystal bulk path") {
    SUBCASE("matches the exact pairwise sum on a small explicit lattice") {
        const double site_mass = 1e-18, spacing = 1e-9, r0 = 1e-13, d = 1e-11;
        const int n = 5;
        const auto lattice = MassDensity::cubic_lattice(n, site_mass, spacing, r0);
        const auto spec = SuperpositionSpec::two_branch(lattice, d);
        const auto exact = penrose_delta_e(spec);

        CrystalPreset preset;
        preset.total_mass = lattice.total_mass();
        preset.site_mass = site_mass;
        preset.site_r0 = r0;
        preset.spacing = spacing;
        preset.crystal_radius = spacing * n * std::cbrt(3.0 / (4.0 * M_PI));
        const auto bulk = penrose_crystal_delta_e(preset, d);
        CHECK(bulk.delta_e == doctest::Approx(exact.delta_e).epsilon(0.01));
    }
    SUBCASE("heavy-atom microcrystal lands in the 1e-3..1e-2 s decade") {
        CrystalPreset preset;
        preset.total_mass = 1e-12;
        preset.site_mass = 3.27e-25;  // ~197 u
        preset.site_r0 = 1e-14;
        preset.spacing = 2.57e-10;
        preset.crystal_radius = 2.32e-6;
        const auto pen = penrose_crystal_delta_e(preset, 1e-12);
        CHECK(pen.tau > 1e-3);
        CHECK(pen.tau < 1e-2);
    }
    SUBCASE("bulk path rejects displacements near the spacing") {
        CrystalPreset preset{1e-12, 3.27e-25, 1e-14, 2.57e-10, 2.32e-6};
        CHECK_THROWS_AS((void)penrose_crystal_delta_e(preset, 1e-10), validation_error);
    }
}

TEST_CASE("tilloy-diosi rates reduce to diosi with the minimal kernel") {
    const auto kernel = TDKernel::minimal();
    const MassDensity densities[] = {
        MassDensity::uniform_sphere(1e-12, 5e-6),
        MassDensity::gaussian_ball(1e-14, 1e-7),
        MassDensity::gaussian_ball(2.5e-13, 2e-6),
    };
    const double seps[] = {5e-5, 3e-7, 8e-6};
    for (int i = 0; i < 3; ++i) {
        const auto spec = SuperpositionSpec::two_branch(densities[i], seps[i]);
        const auto td = td_decay_rate(spec, kernel);
        const auto dp = dp_decay_rate(spec);
        CHECK(td.rate == doctest::Approx(dp.rate).epsilon(1e-6));
    }
}

TEST_CASE("branch newtonian energies are equal for rigid displacements") {
    const auto lattice = MassDensity::cubic_lattice(2, 1e-15, 1e-6, 1e-8);
    const auto spec = SuperpositionSpec::two_branch(lattice, 3e-6);
    const auto energies = branch_newtonian_energies(spec);
    REQUIRE(energies.size() == 2);
    CHECK(energies[0] == energies[1]);
    // direct pairwise-potential sum oracle
    const Constants k = Constants::si();
    double direct = 0.0;
    for (const auto& a : lattice.sites())
        for (const auto& b : lattice.sites())
            direct += gaussian_pair_coulomb(a.mass, b.mass, a.r0, b.r0,
                                            (a.center - b.center).norm());
    CHECK(energies[0] == doctest::Approx(-0.5 * k.G * direct).epsilon(1e-12));
    CHECK(energies[0] < 0.0);
}
