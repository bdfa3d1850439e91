#include <doctest.h>

#include <cmath>

#include "gravkit/constants.hpp"
#include "gravkit/errors.hpp"
#include "gravkit/mass_density.hpp"
#include "gravkit/units.hpp"
#include "oracles/oracles.hpp"

using namespace gravkit;

TEST_CASE("planck length squared equals hbar G / c^3") {
    const Constants k = Constants::si();
    const double lp2 = k.planck_length() * k.planck_length();
    const double ref = k.hbar * k.G / (k.c * k.c * k.c);
    CHECK(std::abs(lp2 - ref) <= 4.0 * std::numeric_limits<double>::epsilon() * ref);
    CHECK(k.hbar > 0.0);
    CHECK(k.G > 0.0);
    CHECK(k.c > 0.0);
    CHECK(k.planck_length() > 0.0);
}

TEST_CASE("unit system round trip is identity to 1e-12") {
    const UnitSystem u = UnitSystem::self_gravity(1e-12, 1.0, Constants::si());
    for (const double x : {1e-30, 1.0, 3.7e14}) {
        CHECK(u.to_si_length(u.from_si_length(x)) == doctest::Approx(x).epsilon(1e-12));
        CHECK(u.to_si_time(u.from_si_time(x)) == doctest::Approx(x).epsilon(1e-12));
        CHECK(u.to_si_mass(u.from_si_mass(x)) == doctest::Approx(x).epsilon(1e-12));
    }
    // scaled coupling definition: G m^3 L0 / hbar^2 = coupling
    const Constants k = Constants::si();
    const double m = 1e-12;
    const double g = k.G * m * m * m * u.length_scale / (k.hbar * k.hbar);
    CHECK(g == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("density fourier transforms") {
    SUBCASE("zero mode equals total mass") {
        CHECK(MassDensity::uniform_sphere(2.5, 1.0).fourier_amplitude(0.0).real() ==
              doctest::Approx(2.5).epsilon(1e-14));
        CHECK(MassDensity::gaussian_ball(0.3, 2.0).fourier_amplitude(0.0).real() ==
              doctest::Approx(0.3).epsilon(1e-14));
        const auto lattice = MassDensity::cubic_lattice(3, 0.1, 1.0, 0.05);
        CHECK(lattice.fourier_amplitude(0.0).real() ==
              doctest::Approx(27 * 0.1).epsilon(1e-12));
    }
    SUBCASE("point mass transform is flat") {
        const auto p = MassDensity::point_mass(1.7);
        for (const double k : {0.0, 1.0, 1e6}) {
            CHECK(p.fourier_amplitude(k).real() == doctest::Approx(1.7));
            CHECK(p.fourier_amplitude(k).imag() == 0.0);
        }
    }
    SUBCASE("gaussian transform matches radial quadrature of the profile") {
        const auto g = MassDensity::gaussian_ball(1.3, 0.7);
        for (const double k : {0.3, 1.0, 2.5}) {
            const double expect = 1.3 * std::exp(-0.5 * k * k * 0.49);
            CHECK(g.fourier_amplitude(k).real() == doctest::Approx(expect).epsilon(1e-12));
            CHECK(oracles::density_ft_by_quadrature(g, k, 12.0) ==
                  doctest::Approx(expect).epsilon(1e-9));
        }
    }
    SUBCASE("sphere transform matches radial quadrature") {
        const auto s = MassDensity::uniform_sphere(2.0, 1.5);
        for (const double k : {0.5, 2.0, 7.0})
            CHECK(oracles::density_ft_by_quadrature(s, k, 1.5) ==
                  doctest::Approx(s.fourier_amplitude(k).real()).epsilon(1e-10));
    }
}

TEST_CASE("density profile integrates to the total mass") {
    for (const auto& d : {MassDensity::uniform_sphere(3.0, 0.8),
                          MassDensity::gaussian_ball(0.5, 1.1)}) {
        const double r_max = d.kind() == DensityKind::UniformSphere ? 0.8 : 14.0;
        const double mass = integrate([&](double r) { return 4.0 * M_PI * r * r * d.value_at(r); },
                                      0.0, r_max, 1e-10, 0.0, 64)
                                .value;
        CHECK(mass == doctest::Approx(d.total_mass()).epsilon(1e-6));
    }
}

TEST_CASE("density is nonnegative") {
    const auto lattice = MassDensity::cubic_lattice(2, 1.0, 1.0, 0.2);
    for (const double r : {0.0, 0.3, 1.0, 5.0}) {
        CHECK(MassDensity::uniform_sphere(1, 1).value_at(r) >= 0.0);
        CHECK(MassDensity::gaussian_ball(1, 1).value_at(r) >= 0.0);
        CHECK(lattice.value_at(Eigen::Vector3d(r, 0.2, -r)) >= 0.0);
    }
}

TEST_CASE("pair overlap closed forms and quadrature") {
    SUBCASE("uniform sphere self-overlap = 6/5 m^2 / R") {
        const auto s = MassDensity::uniform_sphere(2.0, 1.5);
        const double expect = 1.2 * 4.0 / 1.5;
        CHECK(pair_overlap_kspace(s, 0.0).value == doctest::Approx(expect).epsilon(1e-9));
        CHECK(pair_overlap_analytic(s, 0.0) == doctest::Approx(expect).epsilon(1e-14));
    }
    SUBCASE("gaussian self-overlap = m^2 / (sqrt(pi) r0)") {
        const auto g = MassDensity::gaussian_ball(1.3, 0.7);
        const double expect = 1.3 * 1.3 / (std::sqrt(M_PI) * 0.7);
        CHECK(pair_overlap_kspace(g, 0.0).value == doctest::Approx(expect).epsilon(1e-10));
        CHECK(pair_overlap_analytic(g, 0.0) == doctest::Approx(expect).epsilon(1e-14));
    }
    SUBCASE("sphere overlap polynomial agrees with quadrature below contact") {
        const auto s = MassDensity::uniform_sphere(1.0, 1.0);
        for (const double d : {0.3, 1.0, 1.7, 2.0, 3.0})
            CHECK(pair_overlap_kspace(s, d).value ==
                  doctest::Approx(pair_overlap_analytic(s, d)).epsilon(1e-9));
    }
    SUBCASE("gaussian erf form agrees with quadrature") {
        const auto g = MassDensity::gaussian_ball(1.0, 0.5);
        for (const double d : {0.2, 1.0, 4.0})
            CHECK(pair_overlap_kspace(g, d).value ==
                  doctest::Approx(pair_overlap_analytic(g, d)).epsilon(1e-10));
    }
}

TEST_CASE("pair overlap far field approaches m^2 / d") {
    SUBCASE("maximal displacement routed through the closed form") {
        const auto s = MassDensity::uniform_sphere(2.0, 1e-6);
        const double d = 1.0;  // 1e6 sphere radii
        CHECK(pair_overlap(s, d).value == doctest::Approx(4.0 / d).epsilon(1e-3));
        const auto g = MassDensity::gaussian_ball(1.1, 1e-6);
        CHECK(pair_overlap(g, d).value == doctest::Approx(1.21 / d).epsilon(1e-3));
    }
    SUBCASE("oscillatory k-space oracle at tightened tolerance") {
        const auto g = MassDensity::gaussian_ball(1.1, 1e-4);
        const double d = 1.0;  // 1e4 widths: oracle resolves every oscillation
        const double oracle = oracles::far_field_kspace_overlap(g, d);
        CHECK(oracle == doctest::Approx(1.21 / d).epsilon(1e-3));
        CHECK(pair_overlap(g, d).value == doctest::Approx(oracle).epsilon(1e-4));
    }
}

TEST_CASE("pair overlap monotone properties") {
    const auto g = MassDensity::gaussian_ball(1.0, 0.4);
    double prev = pair_overlap(g, 0.0).value;
    CHECK(prev >= 0.0);
    for (const double d : {0.1, 0.5, 1.0, 2.0, 8.0}) {
        const double s = pair_overlap(g, d).value;
        CHECK(s >= 0.0);
        CHECK(s <= prev);
        prev = s;
    }
    // smaller smearing radius -> larger self-overlap
    double prev_s0 = 0.0;
    for (const double r0 : {1.0, 0.5, 0.25, 0.125}) {
        const double s0 = pair_overlap(MassDensity::gaussian_ball(1.0, r0), 0.0).value;
        CHECK(s0 > prev_s0);
        prev_s0 = s0;
    }
}

TEST_CASE("k-space overlap agrees with 6D Monte Carlo within 3 sigma") {
    struct Case {
        MassDensity density;
        double d;
    };
    const Case cases[] = {
        {MassDensity::uniform_sphere(1.0, 1.0), 0.0},
        {MassDensity::uniform_sphere(1.0, 1.0), 1.2},
        {MassDensity::gaussian_ball(2.0, 0.6), 1.0},
    };
    int i = 0;
    for (const auto& c : cases) {
        const auto mc = oracles::mc_pair_overlap(c.density, c.d, 100000, 777 + i++);
        const double quad = pair_overlap_kspace(c.density, c.d).value;
        CHECK(std::abs(quad - mc.mean) <= 3.0 * mc.std_error);
    }
}

TEST_CASE("lattice overlap is the pairwise sum and matches Monte Carlo") {
    const auto lattice = MassDensity::cubic_lattice(2, 0.5, 1.0, 0.15);
    const Eigen::Vector3d d(0.2, 0.0, 0.4);
    const auto mc = oracles::mc_pair_overlap(lattice, d, 200000, 4242);
    CHECK(std::abs(pair_overlap(lattice, d).value - mc.mean) <= 3.0 * mc.std_error);
    // zero-mode sanity
    CHECK(lattice.total_mass() == doctest::Approx(8 * 0.5));
}

TEST_CASE("point mass overlap diverges") {
    const auto p = MassDensity::point_mass(1.0);
    CHECK_THROWS_AS((void)pair_overlap(p, 0.5), divergence_error);
    CHECK_THROWS_AS((void)pair_overlap_kspace(p, 0.5), divergence_error);
}

TEST_CASE("invalid densities are rejected") {
    CHECK_THROWS_AS(MassDensity::uniform_sphere(-1.0, 1.0), validation_error);
    CHECK_THROWS_AS(MassDensity::gaussian_ball(1.0, 0.0), validation_error);
    CHECK_THROWS_AS(MassDensity::nucleon_lattice({}), validation_error);
    const auto g = MassDensity::gaussian_ball(1.0, 1.0);
    CHECK_THROWS_AS((void)pair_overlap(g, -1.0), validation_error);
}
