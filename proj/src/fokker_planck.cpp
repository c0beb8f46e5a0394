#include "ksns/fokker_planck.hpp"

#include <cmath>

#include "advect.hpp"
#include "ksns/spectral.hpp"

namespace ksns {

void DriftSpec::check_admissible(int d, double p) const {
    if (!(alpha > d))
        throw ConfigError("drift integrability requires alpha > d (got alpha = " +
                          fmt_g17(alpha) + ", d = " + std::to_string(d) + ")");
    if (!(beta >= 2.0)) throw ConfigError("drift integrability requires beta >= 2");
    if (d / alpha + 2.0 / beta > 1.0 + 1e-12)
        throw ConfigError("drift integrability requires d/alpha + 2/beta <= 1");
    if (!(p > 1.0)) throw ConfigError("Lebesgue exponent p must exceed 1");
    // branch threshold p < d/(d-2); the limit d = 2 puts every finite p in
    // the first branch
    double p_threshold = (d > 2) ? static_cast<double>(d) / (d - 2)
                                 : std::numeric_limits<double>::infinity();
    if (p < p_threshold) {
        double pprime = p / (p - 1.0);
        if (alpha < 2.0 * pprime - 1e-12)
            throw ConfigError("drift integrability requires alpha >= 2p' = " +
                              fmt_g17(2.0 * pprime) + " for p = " + fmt_g17(p));
    }
}

double DriftSpec::space_time_norm(double T) const {
    if (samples.empty()) return 0.0;
    if (samples.size() == 1) {
        double na = lp_norm(samples[0], alpha);
        return std::isinf(beta) ? na : na * std::pow(T, 1.0 / beta);
    }
    std::vector<double> na(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) na[i] = lp_norm(samples[i], alpha);
    if (std::isinf(beta)) {
        double m = 0.0;
        for (double x : na) m = std::max(m, x);
        return m;
    }
    const double dt = T / static_cast<double>(samples.size() - 1);
    std::vector<double> powed(na.size());
    for (std::size_t i = 0; i < na.size(); ++i) powed[i] = std::pow(na[i], beta);
    return std::pow(trapezoid(powed, dt), 1.0 / beta);
}

DensityField step_fp(const DensityField& rho, const VectorField& v, double dt,
                     const ScalarField* stream, StepStats* stats) {
    const TorusGrid& g = rho.grid();
    const double h = g.h();
    const double vmax = v.max_norm();
    const double dt_adv = vmax > 0.0 ? h / (2.0 * vmax)
                                     : std::numeric_limits<double>::infinity();
    const double dt_diff = h * h / (2.0 * g.dim);
    const double dt_max = std::min(dt_adv, dt_diff);
    if (dt > dt_max)
        throw NumericError("CFL violated: dt = " + fmt_g17(dt) +
                           ", admissible dt <= " + fmt_g17(dt_max));

    const Spectral& sp = Spectral::get(g);
    ScalarField f = sp.heat(rho.field(), 0.5 * dt);
    detail::FaceVelocities faces =
        stream ? detail::faces_from_stream2d(*stream) : detail::faces_from_cells(v);
    f = detail::upwind_advect(f, faces, dt);
    f = sp.heat(f, 0.5 * dt);

    StepStats s;
    double mn = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) mn = std::min(mn, f[i]);
    s.preclip_min = mn;
    if (mn < kPreclipBudget)
        throw NumericError("positivity budget exceeded: pre-clip min " + fmt_g17(mn));
    double clipped = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (f[i] < 0.0) {
            clipped -= f[i];
            f[i] = 0.0;
        }
    s.clipped_mass = clipped * g.cell_volume();
    double mass = integrate(f);
    s.mass_drift = std::abs(mass - 1.0);
    if (s.mass_drift > kMassBudget)
        throw NumericError("mass budget exceeded: |mass - 1| = " + fmt_g17(s.mass_drift));
    for (auto& x : f.values()) x /= mass;
    if (stats) stats->absorb(s);
    return DensityField(std::move(f));
}

FPTrajectory solve_fp(const DensityField& rho0, const DriftSpec& drift, double T,
                      double dt, int sample_every) {
    if (!(T > 0.0) || !(dt > 0.0)) throw ConfigError("solve_fp needs T > 0 and dt > 0");
    if (sample_every < 1) throw ConfigError("sample_every must be >= 1");
    // round the step count up to a multiple of the sampling stride so the
    // recorded trajectory sits on a uniform grid (the norm and quadrature
    // machinery relies on that)
    int N = std::max(1, static_cast<int>(std::ceil(T / dt - 1e-9)));
    N = ((N + sample_every - 1) / sample_every) * sample_every;
    const double dta = T / N;
    if (!drift.static_in_time() && drift.samples.size() != static_cast<std::size_t>(N) + 1)
        throw ConfigError("drift must carry 1 or N+1 samples (N = " + std::to_string(N) + ")");

    FPTrajectory traj;
    traj.dt = dta;
    traj.drift_norm = drift.space_time_norm(T);
    traj.times.push_back(0.0);
    traj.states.push_back(rho0);
    DensityField cur = rho0;
    for (int i = 0; i < N; ++i) {
        cur = step_fp(cur, drift.at(i), dta, drift.stream_at(i), &traj.stats);
        if ((i + 1) % sample_every == 0 || i + 1 == N) {
            traj.times.push_back((i + 1) * dta);
            traj.states.push_back(cur);
        }
    }
    return traj;
}

DriftSpec mollify_drift(const DriftSpec& drift, double radius, double truncation,
                        double T, double* distance) {
    if (!(radius > 0.0)) throw ConfigError("mollify_drift requires radius > 0");
    DriftSpec out;
    out.alpha = drift.alpha;
    out.beta = drift.beta;
    DriftSpec diff;  // v_r - v, for the reported distance
    diff.alpha = drift.alpha;
    diff.beta = drift.beta;
    for (const VectorField& v : drift.samples) {
        const TorusGrid& g = v.grid();
        const Spectral& sp = Spectral::get(g);
        const std::size_t nc = v.ncells();
        VectorField w = v;
        if (truncation > 0.0 && std::isfinite(truncation)) {
            for (std::size_t i = 0; i < nc; ++i) {
                double s = 0.0;
                for (int c = 0; c < g.dim; ++c) s += w.comp(c, i) * w.comp(c, i);
                s = std::sqrt(s);
                if (s > truncation) {
                    double scale = truncation / s;
                    for (int c = 0; c < g.dim; ++c) w.comp(c, i) *= scale;
                }
            }
        }
        VectorField smooth(g);
        for (int c = 0; c < g.dim; ++c) {
            ScalarField comp(g);
            for (std::size_t i = 0; i < nc; ++i) comp[i] = w.comp(c, i);
            ScalarField b = sp.gaussian_blur(comp, radius);
            for (std::size_t i = 0; i < nc; ++i) smooth.comp(c, i) = b[i];
        }
        VectorField delta(g);
        for (std::size_t i = 0; i < nc * g.dim; ++i)
            delta.values()[i] = smooth.values()[i] - v.values()[i];
        out.samples.push_back(std::move(smooth));
        diff.samples.push_back(std::move(delta));
    }
    if (distance) *distance = diff.space_time_norm(T);
    return out;
}

double TestFn::envelope(double t) const {
    double s = 1.0 - t / T;
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

double TestFn::envelope_dt(double t) const {
    double s = 1.0 - t / T;
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return -30.0 * s * s * (1.0 - s) * (1.0 - s) / T;
}

double TestFn::space(const double* x, int dim) const {
    const double k0 = 2.0 * 3.14159265358979323846 / L;
    double g = 0.0;
    for (const Mode& md : modes) {
        double phase = 0.0;
        for (int a = 0; a < dim; ++a) phase += k0 * md.m[a] * x[a];
        g += md.amp_cos * std::cos(phase) + md.amp_sin * std::sin(phase);
    }
    return g;
}

double TestFn::space_laplacian(const double* x, int dim) const {
    const double k0 = 2.0 * 3.14159265358979323846 / L;
    double g = 0.0;
    for (const Mode& md : modes) {
        double phase = 0.0, k2 = 0.0;
        for (int a = 0; a < dim; ++a) {
            phase += k0 * md.m[a] * x[a];
            k2 += k0 * md.m[a] * k0 * md.m[a];
        }
        g -= k2 * (md.amp_cos * std::cos(phase) + md.amp_sin * std::sin(phase));
    }
    return g;
}

void TestFn::space_gradient(const double* x, int dim, double* out) const {
    const double k0 = 2.0 * 3.14159265358979323846 / L;
    for (int a = 0; a < dim; ++a) out[a] = 0.0;
    for (const Mode& md : modes) {
        double phase = 0.0;
        for (int a = 0; a < dim; ++a) phase += k0 * md.m[a] * x[a];
        double d = -md.amp_cos * std::sin(phase) + md.amp_sin * std::cos(phase);
        for (int a = 0; a < dim; ++a) out[a] += d * k0 * md.m[a];
    }
}

double weak_form_residual(const FPTrajectory& traj, const DriftSpec& drift,
                          const TestFn& phi) {
    const std::size_t M = traj.times.size();
    if (M < 2) throw ConfigError("weak_form_residual needs at least two samples");
    const TorusGrid& g = traj.states[0].grid();
    const std::size_t nc = static_cast<std::size_t>(g.cells());
    const double vol = g.cell_volume();

    // cache the spatial factors per cell
    std::vector<double> gs(nc), lap(nc);
    std::vector<double> grad(nc * g.dim);
    for (std::size_t i = 0; i < nc; ++i) {
        auto idx = g.unflat(static_cast<std::int64_t>(i));
        double x[3] = {0, 0, 0};
        for (int a = 0; a < g.dim; ++a) x[a] = g.coord(idx[a]);
        gs[i] = phi.space(x, g.dim);
        lap[i] = phi.space_laplacian(x, g.dim);
        phi.space_gradient(x, g.dim, &grad[i * g.dim]);
    }

    auto spatial_integral = [&](std::size_t node, double psi) {
        // (Lap phi + grad phi . v) rho at one time node
        const DensityField& rho = traj.states[node];
        std::size_t drift_node =
            drift.static_in_time() ? 0 : node * (drift.samples.size() - 1) / (M - 1);
        const VectorField& v = drift.at(drift_node);
        double s = 0.0;
        for (std::size_t i = 0; i < nc; ++i) {
            double gv = 0.0;
            for (int a = 0; a < g.dim; ++a) gv += grad[i * g.dim + a] * v.comp(a, i);
            s += (lap[i] + gv) * psi * rho[i];
        }
        return s * vol;
    };

    double R = 0.0;
    // d(phi)/dt paired with the midpoint density: telescopes exactly for
    // space-constant phi, so the residual reduces to the mass identity there
    for (std::size_t i = 0; i + 1 < M; ++i) {
        double dpsi = phi.envelope(traj.times[i + 1]) - phi.envelope(traj.times[i]);
        double s = 0.0;
        for (std::size_t c = 0; c < nc; ++c)
            s += gs[c] * 0.5 * (traj.states[i][c] + traj.states[i + 1][c]);
        R += dpsi * s * vol;
    }
    // trapezoid for the remaining terms
    std::vector<double> integrand(M);
    for (std::size_t i = 0; i < M; ++i)
        integrand[i] = spatial_integral(i, phi.envelope(traj.times[i]));
    R += trapezoid(integrand, traj.times[1] - traj.times[0]);
    // initial pairing
    double s0 = 0.0;
    for (std::size_t c = 0; c < nc; ++c) s0 += gs[c] * traj.states[0][c];
    R += phi.envelope(0.0) * s0 * vol;
    return std::abs(R);
}

}  // namespace ksns
