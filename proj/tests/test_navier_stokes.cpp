#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ksns/navier_stokes.hpp"
#include "ksns/random_fields.hpp"
#include "ksns/spectral.hpp"
#include "oracles.hpp"

using namespace ksns;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("leray projector") {
    TorusGrid g(2, 32, 2.0 * M_PI);
    std::mt19937_64 rng(3);

    VectorField tg = taylor_green(g, 1.0);
    VectorField ptg = leray_project(tg);
    double fixed_err = 0.0;
    for (std::size_t i = 0; i < tg.values().size(); ++i)
        fixed_err = std::max(fixed_err, std::abs(ptg.values()[i] - tg.values()[i]));
    CHECK(fixed_err <= 1e-12);

    ScalarField psi = random_smooth_scalar(g, rng, 4, 1.0);
    VectorField grad = gradient(psi);
    VectorField killed = leray_project(grad);
    CHECK(killed.max_norm() <= 1e-12);

    VectorField noise = random_smooth_drift(g, rng, 4, 1.0);
    VectorField p1 = leray_project(noise);
    VectorField p2 = leray_project(p1);
    double idem = 0.0;
    for (std::size_t i = 0; i < noise.values().size(); ++i)
        idem = std::max(idem, std::abs(p1.values()[i] - p2.values()[i]));
    CHECK(idem <= 1e-12);
    CHECK(lp_norm(divergence(p1), kInf) <= 1e-12);
}

TEST_CASE("leray projector in 3D") {
    TorusGrid g(3, 8, 1.0);
    std::mt19937_64 rng(5);
    VectorField noise = random_smooth_drift(g, rng, 2, 1.0);
    VectorField p = leray_project(noise);
    CHECK(lp_norm(divergence(p), kInf) <= 1e-12);
}

TEST_CASE("one-step response to a constant force") {
    TorusGrid g(2, 32, 2.0);
    DensityField rho = DensityField::normalized(ScalarField(g, 1.0));
    const double rho_bar = 0.25;
    VectorField grad_phi(g, 0.0);
    for (std::size_t i = 0; i < grad_phi.ncells(); ++i) {
        grad_phi.comp(0, i) = 0.7;
        grad_phi.comp(1, i) = -0.3;
    }
    const double dt = 1e-3;
    FluidState fs = step_ns(VectorField(g, 0.0), rho, grad_phi, dt);
    for (std::size_t i = 0; i < fs.u.ncells(); ++i) {
        CHECK(fs.u.comp(0, i) == doctest::Approx(-dt * rho_bar * 0.7).epsilon(1e-12));
        CHECK(fs.u.comp(1, i) == doctest::Approx(dt * rho_bar * 0.3).epsilon(1e-12));
    }
}

TEST_CASE("taylor-green vortex decays exactly") {
    TorusGrid g(2, 64, 2.0 * M_PI);
    DensityField rho = DensityField::normalized(ScalarField(g, 1.0));
    VectorField no_force(g, 0.0);
    VectorField u = taylor_green(g, 1.0);
    const double dt = 1e-3, T = 0.1;
    const int steps = static_cast<int>(std::round(T / dt));
    double E0 = kinetic_energy(u);
    for (int k = 0; k < steps; ++k) {
        FluidState fs = step_ns(u, rho, no_force, dt);
        CHECK(fs.max_div <= 1e-8);
        u = std::move(fs.u);
    }
    VectorField exact = taylor_green(g, oracle::taylor_green_decay(T));
    double err = 0.0;
    for (std::size_t i = 0; i < u.values().size(); ++i)
        err = std::max(err, std::abs(u.values()[i] - exact.values()[i]));
    CHECK(err <= 1e-4);
    CHECK(kinetic_energy(u) ==
          doctest::Approx(E0 * std::exp(-4.0 * T)).epsilon(0.01));
}

TEST_CASE("zero data and zero force stay zero") {
    TorusGrid g(2, 16, 2.0);
    DensityField rho = DensityField::normalized(ScalarField(g, 1.0));
    VectorField u(g, 0.0), f(g, 0.0);
    for (int k = 0; k < 5; ++k) u = step_ns(u, rho, f, 1e-3).u;
    CHECK(u.max_norm() == 0.0);
}

TEST_CASE("unforced energy decays monotonically") {
    TorusGrid g(2, 32, 2.0 * M_PI);
    std::mt19937_64 rng(11);
    DensityField rho = DensityField::normalized(ScalarField(g, 1.0));
    VectorField no_force(g, 0.0);
    VectorField u = leray_project(random_smooth_drift(g, rng, 4, 1.0));
    double prev = kinetic_energy(u);
    const double dt = 0.5 * g.h() / (2.0 * u.max_norm());
    for (int k = 0; k < 30; ++k) {
        FluidState fs = step_ns(u, rho, no_force, dt);
        CHECK(fs.energy <= prev * (1.0 + 1e-12));
        prev = fs.energy;
        u = std::move(fs.u);
    }
}

TEST_CASE("forced energy inequality") {
    TorusGrid g(2, 32, 8.0);
    std::mt19937_64 rng(13);
    DensityField rho = gaussian_density(g, 0.7);
    VectorField grad_phi = grad_phi_gaussian(g, 0.5, 1.0);
    VectorField u = leray_project(random_smooth_drift(g, rng, 3, 0.3));
    const double dt = 1e-3, T = 0.05;
    const int steps = static_cast<int>(std::round(T / dt));
    double E0 = kinetic_energy(u);
    double force_int = 0.0;
    for (int k = 0; k < steps; ++k) {
        VectorField f(g, 0.0);
        for (int c = 0; c < 2; ++c)
            for (std::size_t i = 0; i < f.ncells(); ++i)
                f.comp(c, i) = rho[i] * grad_phi.comp(c, i);
        force_int += dt * lp_norm(f, 2.0);
        u = step_ns(u, rho, grad_phi, dt).u;
        double bound = std::pow(std::sqrt(E0) + force_int, 2.0);
        CHECK(kinetic_energy(u) <= bound * 1.05);
    }
}

TEST_CASE("momentum follows the net force") {
    TorusGrid g(2, 32, 8.0);
    DensityField rho = gaussian_density(g, 0.7);
    VectorField grad_phi = grad_phi_gaussian(g, 0.4, 1.2);
    VectorField u(g, 0.0);
    const double dt = 1e-3, T = 0.05;
    const int steps = static_cast<int>(std::round(T / dt));

    std::array<double, 3> impulse{0.0, 0.0, 0.0};
    for (int k = 0; k < steps; ++k) {
        for (int c = 0; c < 2; ++c) {
            double s = 0.0;
            for (std::size_t i = 0; i < u.ncells(); ++i)
                s += rho[i] * grad_phi.comp(c, i);
            impulse[c] -= dt * s * g.cell_volume();
        }
        u = step_ns(u, rho, grad_phi, dt).u;
    }
    auto mom = momentum(u);
    for (int c = 0; c < 2; ++c)
        CHECK(std::abs(mom[c] - impulse[c]) <= 1e-8 * (T + 1.0));
}

TEST_CASE("kinetic energy is consistent with the L2 norm") {
    TorusGrid g(2, 16, 2.0 * M_PI);
    CHECK(kinetic_energy(VectorField(g, 0.0)) == 0.0);
    VectorField unit(g, 0.0);
    for (std::size_t i = 0; i < unit.ncells(); ++i) unit.comp(0, i) = 1.0;
    double l2 = lp_norm(unit, 2.0);
    CHECK(kinetic_energy(unit) == doctest::Approx(0.5 * l2 * l2).epsilon(1e-14));
    CHECK(kinetic_energy(unit) ==
          doctest::Approx(0.5 * std::pow(2.0 * M_PI, 2.0)).epsilon(1e-12));
}

TEST_CASE("3D fluid solves are capped") {
    TorusGrid g(3, 128, 1.0);
    VectorField u(g, 0.0);
    CHECK_THROWS_AS(leray_project(u), CapacityError);
}

TEST_CASE("step_ns enforces its CFL bound") {
    TorusGrid g(2, 16, 2.0 * M_PI);
    DensityField rho = DensityField::normalized(ScalarField(g, 1.0));
    VectorField f(g, 0.0);
    VectorField u = taylor_green(g, 1.0);
    CHECK_THROWS_AS(step_ns(u, rho, f, 1.0), NumericError);
}
