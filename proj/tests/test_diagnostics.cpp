#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ksns/diagnostics.hpp"
#include "ksns/random_fields.hpp"
#include "oracles.hpp"

using namespace ksns;

namespace {

DensityField sampled_gaussian_1d(const TorusGrid& g, double mean, double sigma) {
    ScalarField f(g);
    for (int i = 0; i < g.n; ++i) f[i] = oracle::gaussian_pdf_1d(g.coord(i), mean, sigma);
    return DensityField::normalized(std::move(f));
}

DriftSpec static_drift(VectorField v, double alpha = 4.0, double beta = 4.0) {
    DriftSpec d;
    d.alpha = alpha;
    d.beta = beta;
    d.samples.push_back(std::move(v));
    return d;
}

FPTrajectory from_states(std::vector<double> times, std::vector<DensityField> states) {
    FPTrajectory t;
    t.times = std::move(times);
    t.states = std::move(states);
    t.dt = t.times[1] - t.times[0];
    return t;
}

}  // namespace

TEST_CASE("ledger bookkeeping") {
    DiagnosticsLedger ledger;
    LedgerEntry e;
    e.name = "alpha";
    e.pass = true;
    ledger.add(e);
    CHECK_THROWS_AS(ledger.add(e), ConfigError);
    CHECK(ledger.all_pass());
    LedgerEntry f;
    f.name = "beta";
    f.pass = false;
    ledger.add(f);
    CHECK_FALSE(ledger.all_pass());
    std::string csv = ledger.render_csv("deadbeef00000000");
    CHECK(csv.find("config=deadbeef00000000") != std::string::npos);
    CHECK(csv.find("name,anchor,lhs_max,rhs_min,fitted_const,margin,pass") !=
          std::string::npos);
}

TEST_CASE("lp bound: zero and divergence-free drifts need no constant") {
    TorusGrid g(2, 32, 8.0);
    DensityField rho0 = gaussian_density(g, 0.5);

    DriftSpec zero = static_drift(VectorField(g, 0.0));
    FPTrajectory traj = solve_fp(rho0, zero, 0.05, 1e-3, 10);
    LedgerEntry e = check_lp_bound(traj, zero, 2.0, 0.0, 0.05);
    CHECK(e.pass);
    CHECK(e.fitted_const <= 1e-10);

    std::mt19937_64 rng(3);
    StreamDrift sd = divfree_drift(g, rng, 3, 0.6);
    DriftSpec df = static_drift(sd.cells);
    df.stream.push_back(sd.corners);
    FPTrajectory traj2 = solve_fp(rho0, df, 0.05, 1e-3, 10);
    LedgerEntry e2 = check_lp_bound(traj2, df, 2.0, 0.0, 0.05);
    CHECK(e2.pass);
    CHECK(e2.fitted_const <= 1e-10);
}

TEST_CASE("lp bound: calibrate on a compressive drift, freeze, verify") {
    TorusGrid g(2, 32, 8.0);
    DensityField rho0 = gaussian_density(g, 0.5);
    const double T = 0.05, dt = 1e-3, p = 2.0;

    std::mt19937_64 cal_rng(101);
    DriftSpec cal = static_drift(compressive_drift(g, cal_rng, 3, 1.0));
    FPTrajectory cal_traj = solve_fp(rho0, cal, T, dt, 10);
    LedgerEntry cal_entry = check_lp_bound(cal_traj, cal, p, 0.0, T);
    double frozen = 1.25 * cal_entry.fitted_const;
    CHECK(cal_entry.fitted_const > 0.0);  // compression raises Lp norms

    for (unsigned seed : {7u, 8u, 9u}) {
        std::mt19937_64 rng(seed);
        DriftSpec drift = static_drift(compressive_drift(g, rng, 3, 1.0));
        FPTrajectory traj = solve_fp(rho0, drift, T, dt, 10);
        LedgerEntry e = check_lp_bound(traj, drift, p, frozen, T);
        CHECK(e.pass);
        CHECK(e.margin >= 0.0);
    }
}

TEST_CASE("holder check on closed-form curves") {
    TorusGrid g(1, 128, 8.0);

    // constant trajectory
    DensityField fixed = sampled_gaussian_1d(g, 4.0, 0.3);
    FPTrajectory constant =
        from_states({0.0, 0.01, 0.02, 0.03}, {fixed, fixed, fixed, fixed});
    LedgerEntry ce = check_holder_w2(constant);
    CHECK(ce.pass);
    CHECK(ce.fitted_const == 0.0);

    // heat flow: the quantile closed form gives the expected constant
    const double s0 = 0.3;
    std::vector<double> times;
    std::vector<DensityField> states;
    for (int i = 0; i <= 4; ++i) {
        double t = 0.01 * i;
        times.push_back(t);
        states.push_back(sampled_gaussian_1d(g, 4.0, oracle::heat_sigma(s0, t)));
    }
    double expect = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i)
        for (std::size_t j = i + 1; j < times.size(); ++j) {
            double w = oracle::heat_sigma(s0, times[j]) - oracle::heat_sigma(s0, times[i]);
            expect = std::max(expect, w / std::sqrt(times[j] - times[i]));
        }
    LedgerEntry he = check_holder_w2(from_states(times, states));
    CHECK(he.pass);
    CHECK(he.fitted_const == doctest::Approx(expect).epsilon(0.03));

    // translating curve at speed s: constant ~ s sqrt(T)
    double s = 1.5, T = 0.04;
    std::vector<double> tt{0.0, T / 3, 2 * T / 3, T};
    std::vector<DensityField> moving;
    for (double t : tt) moving.push_back(sampled_gaussian_1d(g, 3.5 + s * t, 0.3));
    LedgerEntry te = check_holder_w2(from_states(tt, moving));
    CHECK(te.fitted_const == doctest::Approx(s * std::sqrt(T)).epsilon(0.03));

    // stability pairing
    LedgerEntry stable = check_holder_stability(he, he);
    CHECK(stable.pass);
    LedgerEntry off = he;
    off.fitted_const *= 1.5;
    CHECK_FALSE(check_holder_stability(he, off).pass);
}

TEST_CASE("entropy-moment constants from the analytic argument") {
    // d = 2: the radial integral evaluates to 2 pi / e, the ball term pi / e
    double expect2 = 3.0 * M_PI / std::exp(1.0);
    CHECK(entropy_moment_constant_a(2) == doctest::Approx(expect2).epsilon(1e-6));
    CHECK(entropy_moment_constant_b(2.0) == 1.0);
    CHECK_THROWS_AS(entropy_moment_constant_b(1.0), ConfigError);
}

TEST_CASE("entropy-moment bound on representative densities") {
    TorusGrid g(2, 64, 8.0);

    // uniform density: the rho > 1 side is empty, so LHS2 = 0 binds with
    // margin b * integral of rho^p
    DensityField uniform = DensityField::normalized(ScalarField(g, 1.0));
    LedgerEntry ue = check_entropy_moment_bound(uniform, 2.0);
    CHECK(ue.pass);
    CHECK(ue.lhs_max == 0.0);
    CHECK(ue.rhs_min == doctest::Approx(lp_norm(uniform.field(), 2.0) *
                                        lp_norm(uniform.field(), 2.0)).epsilon(1e-12));

    // concentrated density: rho > 1 branch active
    DensityField sharp = gaussian_density(g, 0.15);
    LedgerEntry se = check_entropy_moment_bound(sharp, 2.0);
    CHECK(se.pass);

    // broad bump below 1 everywhere: second inequality is 0 <= rhs
    DensityField broad = gaussian_density(g, 1.2);
    LedgerEntry be = check_entropy_moment_bound(broad, 2.0);
    CHECK(be.pass);
}

TEST_CASE("entropy dissipation and second moment on a drift run") {
    TorusGrid g(2, 32, 8.0);
    std::mt19937_64 rng(17);
    DriftSpec drift = static_drift(random_smooth_drift(g, rng, 3, 0.8));
    DensityField rho0 = gaussian_density(g, 0.5);
    FPTrajectory traj = solve_fp(rho0, drift, 0.05, 1e-3, 5);

    LedgerEntry ent = check_entropy_dissipation(traj, drift);
    CHECK(ent.pass);
    LedgerEntry mom = check_second_moment_growth(traj, drift, 2.0);
    CHECK(mom.pass);
    LedgerEntry md = check_metric_derivative_bound(traj, drift);
    CHECK(md.pass);
}

TEST_CASE("heat smoothing exponents") {
    TorusGrid g(2, 32, 8.0);
    const double alpha = 4.0, beta = 4.0;  // on the line d/alpha + 2/beta = 1

    LedgerEntry data = check_heat_smoothing(g, alpha, beta, alpha,
                                            HeatCheckMode::data, 0.05);
    CHECK(data.pass);
    CHECK(data.lhs_max == doctest::Approx(1.0 / beta).epsilon(0.05));

    LedgerEntry src = check_heat_smoothing(g, alpha, beta, alpha,
                                           HeatCheckMode::source, 0.05);
    CHECK(src.pass);
    CHECK(src.lhs_max == doctest::Approx(1.0 - 2.0 / (2.0 * alpha)).epsilon(0.15));

    // degenerate zero instance passes trivially
    LedgerEntry zero = check_heat_smoothing(g, alpha, beta, alpha,
                                            HeatCheckMode::data, 0.05, 0.0);
    CHECK(zero.pass);

    CHECK_THROWS_AS(check_heat_smoothing(g, 2.0, beta, 2.0, HeatCheckMode::data, 0.05),
                    ConfigError);
    CHECK_THROWS_AS(check_heat_smoothing(g, alpha, 3.0, alpha, HeatCheckMode::data, 0.05),
                    ConfigError);
}
