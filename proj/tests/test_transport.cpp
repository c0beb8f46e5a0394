#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ksns/random_fields.hpp"
#include "ksns/transport.hpp"
#include "oracles.hpp"

using namespace ksns;

namespace {

DiscreteMeasure atoms(int dim, std::vector<double> pts, std::vector<double> w) {
    DiscreteMeasure m;
    m.dim = dim;
    m.points = std::move(pts);
    m.weights = std::move(w);
    return m;
}

DiscreteMeasure random_measure(std::mt19937_64& rng, int dim, std::size_t n, double box) {
    DiscreteMeasure m;
    m.dim = dim;
    double total = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        for (int a = 0; a < dim; ++a) m.points.push_back(rand_range(rng, 0.0, box));
        double w = rand_range(rng, 0.1, 1.0);
        m.weights.push_back(w);
        total += w;
    }
    for (double& w : m.weights) w /= total;
    return m;
}

DiscreteMeasure translate(const DiscreteMeasure& m, const std::vector<double>& a) {
    DiscreteMeasure out = m;
    for (std::size_t p = 0; p < m.size(); ++p)
        for (int ax = 0; ax < m.dim; ++ax) out.points[p * m.dim + ax] += a[ax];
    return out;
}

/// 1D Gaussian sampled on a grid as a DensityField.
DensityField gaussian_1d(const TorusGrid& g, double mean, double sigma) {
    ScalarField f(g);
    for (int i = 0; i < g.n; ++i) f[i] = oracle::gaussian_pdf_1d(g.coord(i), mean, sigma);
    return DensityField::normalized(std::move(f));
}

}  // namespace

TEST_CASE("pushforward") {
    std::mt19937_64 rng(2);
    DiscreteMeasure mu = random_measure(rng, 2, 12, 1.0);

    DiscreteMeasure same = pushforward(mu, [](const double* in, double* out) {
        out[0] = in[0];
        out[1] = in[1];
    });
    CHECK(same.size() == mu.size());
    // moments against test monomials up to degree 2
    double c0[2] = {0.0, 0.0};
    CHECK(same.second_moment_about(c0) == doctest::Approx(mu.second_moment_about(c0)));

    DiscreteMeasure point = pushforward(mu, [](const double*, double* out) {
        out[0] = 0.25;
        out[1] = 0.75;
    });
    CHECK(point.size() == 1);
    CHECK(point.weights[0] == doctest::Approx(1.0).epsilon(1e-14));

    double shift[2] = {0.3, -0.2};
    DiscreteMeasure moved = pushforward(mu, [&](const double* in, double* out) {
        out[0] = in[0] + shift[0];
        out[1] = in[1] + shift[1];
    });
    double mean[2] = {0.0, 0.0};
    for (std::size_t p = 0; p < mu.size(); ++p)
        for (int a = 0; a < 2; ++a) mean[a] += mu.weights[p] * mu.point(p)[a];
    double mean_shifted[2] = {mean[0] + shift[0], mean[1] + shift[1]};
    CHECK(moved.second_moment_about(mean_shifted) ==
          doctest::Approx(mu.second_moment_about(mean)).epsilon(1e-12));
}

TEST_CASE("w2_exact basics") {
    // identical measures: zero distance, diagonal plan
    std::mt19937_64 rng(3);
    DiscreteMeasure mu = random_measure(rng, 2, 20, 2.0);
    ExactResult r = w2_exact(mu, mu);
    CHECK(r.distance == 0.0);
    for (const auto& e : r.plan.entries) CHECK(e.row == e.col);
    CHECK(r.plan.feasible());

    // two point masses
    DiscreteMeasure dx = atoms(2, {0.1, 0.2}, {1.0});
    DiscreteMeasure dy = atoms(2, {0.7, 1.0}, {1.0});
    double expect = std::hypot(0.6, 0.8);
    CHECK(w2_exact(dx, dy).distance == doctest::Approx(expect).epsilon(1e-12));

    // two-atom instance; the brute-force oracle over both couplings gives
    // cost 1/2, distance sqrt(1/2)
    DiscreteMeasure m1 = atoms(1, {0.0, 1.0}, {0.5, 0.5});
    DiscreteMeasure m2 = atoms(1, {0.0, 2.0}, {0.5, 0.5});
    double brute = oracle::assignment_w2({{0.0, 0, 0}, {1.0, 0, 0}},
                                         {{0.0, 0, 0}, {2.0, 0, 0}}, 1);
    CHECK(brute == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
    CHECK(w2_exact(m1, m2).distance == doctest::Approx(brute).epsilon(1e-12));
}

TEST_CASE("w2_exact matches the permutation oracle on uniform clouds") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 6; ++trial) {
        const std::size_t n = 6;
        std::vector<std::array<double, 3>> xs(n), ys(n);
        DiscreteMeasure mu, nu;
        mu.dim = nu.dim = 2;
        for (std::size_t i = 0; i < n; ++i) {
            xs[i] = {rand_range(rng, 0, 1), rand_range(rng, 0, 1), 0};
            ys[i] = {rand_range(rng, 0, 1), rand_range(rng, 0, 1), 0};
            mu.points.insert(mu.points.end(), {xs[i][0], xs[i][1]});
            nu.points.insert(nu.points.end(), {ys[i][0], ys[i][1]});
            mu.weights.push_back(1.0 / n);
            nu.weights.push_back(1.0 / n);
        }
        double brute = oracle::assignment_w2(xs, ys, 2);
        ExactResult r = w2_exact(mu, nu);
        CHECK(r.distance == doctest::Approx(brute).epsilon(1e-10));
        CHECK(r.plan.feasible());
        CHECK(std::abs(r.primal - r.dual) <= 1e-9 * std::max(1.0, r.primal));
    }
}

TEST_CASE("w2_exact capacity bound") {
    DiscreteMeasure big;
    big.dim = 1;
    const std::size_t n = kExactSupportCap + 1;
    for (std::size_t i = 0; i < n; ++i) {
        big.points.push_back(static_cast<double>(i));
        big.weights.push_back(1.0 / n);
    }
    CHECK_THROWS_AS(w2_exact(big, big), CapacityError);
}

TEST_CASE("metric axioms on random triples") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 4; ++trial) {
        DiscreteMeasure a = random_measure(rng, 2, 8, 1.5);
        DiscreteMeasure b = random_measure(rng, 2, 8, 1.5);
        DiscreteMeasure c = random_measure(rng, 2, 8, 1.5);
        double ab = w2_exact(a, b).distance;
        double ba = w2_exact(b, a).distance;
        CHECK(std::abs(ab - ba) <= 1e-9);
        double ac = w2_exact(a, c).distance;
        double cb = w2_exact(c, b).distance;
        CHECK(ab <= ac + cb + 1e-8);
    }
}

TEST_CASE("translation equivariance") {
    std::mt19937_64 rng(31);
    DiscreteMeasure mu = random_measure(rng, 2, 15, 1.0);
    std::vector<double> a{0.35, -0.6};
    double len = std::hypot(a[0], a[1]);
    CHECK(w2_exact(mu, translate(mu, a)).distance == doctest::Approx(len).epsilon(1e-9));
}

TEST_CASE("sinkhorn") {
    std::mt19937_64 rng(41);
    SinkhornOptions opts;

    // identical measures: debiased divergence vanishes
    DiscreteMeasure mu = random_measure(rng, 2, 30, 1.0);
    double diam = std::sqrt(2.0);
    opts.epsilon = 1e-3 * diam * diam;
    SinkhornResult same = w2_sinkhorn(mu, mu, opts);
    CHECK(same.distance <= 0.05 * diam);

    // two point masses: within 1% of |x - y| for epsilon <= 1e-3 |x-y|^2
    DiscreteMeasure dx = atoms(2, {0.0, 0.0}, {1.0});
    DiscreteMeasure dy = atoms(2, {0.6, 0.8}, {1.0});
    opts.epsilon = 1e-3;
    CHECK(w2_sinkhorn(dx, dy, opts).distance == doctest::Approx(1.0).epsilon(0.01));

    // non-convergence carries the violation
    SinkhornOptions tight;
    tight.epsilon = 1e-6;
    tight.max_iter = 3;
    DiscreteMeasure nu = random_measure(rng, 2, 30, 1.0);
    CHECK_THROWS_AS(w2_sinkhorn(mu, nu, tight), NumericError);

    SinkhornOptions bad;
    bad.epsilon = 0.0;
    CHECK_THROWS_AS(w2_sinkhorn(mu, nu, bad), ConfigError);
}

TEST_CASE("sinkhorn cross-validates against the exact solver") {
    std::mt19937_64 rng(43);
    TorusGrid g(2, 8, 1.0);  // 64-cell densities, within the 12^2 budget
    DensityField da = random_density(g, rng, 2, 1.0);
    DensityField db = random_density(g, rng, 2, 1.0);
    DiscreteMeasure mu = measure_from_density(da);
    DiscreteMeasure nu = measure_from_density(db);
    double exact = w2_exact(mu, nu).distance;
    double diam2 = 2.0 * g.L * g.L;

    SinkhornOptions opts;
    opts.epsilon = 1e-3 * diam2;
    SinkhornResult sr = w2_sinkhorn(mu, nu, opts);
    CHECK(sr.distance == doctest::Approx(exact).epsilon(0.02));

    // raw entropic cost sits above the exact cost and decreases with epsilon
    double prev_cost = std::numeric_limits<double>::infinity();
    for (double scale : {4.0, 2.0, 1.0}) {
        SinkhornOptions o;
        o.epsilon = scale * 1e-3 * diam2;
        o.debias = false;
        SinkhornResult r = w2_sinkhorn(mu, nu, o);
        CHECK(r.cost >= exact * exact - 1e-6);
        CHECK(r.cost <= prev_cost + 1e-12);
        prev_cost = r.cost;
    }
}

TEST_CASE("w2_1d_quantile") {
    std::mt19937_64 rng(51);
    DiscreteMeasure mu = random_measure(rng, 1, 24, 2.0);
    CHECK(w2_1d_quantile(mu, mu) == 0.0);
    std::vector<double> shift{0.7};
    CHECK(w2_1d_quantile(mu, translate(mu, shift)) == doctest::Approx(0.7).epsilon(1e-12));

    DiscreteMeasure m1 = atoms(1, {0.0, 1.0}, {0.5, 0.5});
    DiscreteMeasure m2 = atoms(1, {0.0, 2.0}, {0.5, 0.5});
    double q = w2_1d_quantile(m1, m2);
    CHECK(q == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    CHECK(std::abs(q - w2_exact(m1, m2).distance) <= 1e-9);
}

TEST_CASE("metric_derivative") {
    // displacements must span several cells: a grid measure cannot resolve
    // shifts below its pitch
    TorusGrid g(1, 256, 8.0);

    // constant curve
    std::vector<double> times{0.0, 0.05, 0.1};
    DensityField fixed = gaussian_1d(g, 4.0, 0.3);
    std::vector<DensityField> constant{fixed, fixed, fixed};
    CHECK(metric_derivative(times, constant, 1) == 0.0);

    // translating density at speed s
    double s = 2.0;
    std::vector<DensityField> moving;
    for (double t : times) moving.push_back(gaussian_1d(g, 3.2 + s * t, 0.3));
    CHECK(metric_derivative(times, moving, 1) == doctest::Approx(s).epsilon(0.02));
    // boundary indices fall back to one-sided quotients
    CHECK(metric_derivative(times, moving, 0) == doctest::Approx(s).epsilon(0.02));
    CHECK(metric_derivative(times, moving, 2) == doctest::Approx(s).epsilon(0.02));

    // heat flow: |sigma'|(t) = d/dt sqrt(s0^2 + 2t)
    double s0 = 0.3, t1 = 0.04, dtt = 0.02;
    std::vector<double> ht{t1 - dtt, t1, t1 + dtt};
    std::vector<DensityField> heat;
    for (double t : ht) heat.push_back(gaussian_1d(g, 4.0, oracle::heat_sigma(s0, t)));
    double expect = 1.0 / oracle::heat_sigma(s0, t1);
    CHECK(metric_derivative(ht, heat, 1) == doctest::Approx(expect).epsilon(0.03));
}
