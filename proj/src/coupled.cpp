#include "ksns/coupled.hpp"

#include <cmath>
#include <limits>

#include "ksns/navier_stokes.hpp"
#include "ksns/scalar_transport.hpp"
#include "ksns/spectral.hpp"

namespace ksns {

namespace {

int node_count(double T, double dt) {
    if (!(T > 0.0) || !(dt > 0.0)) throw ConfigError("need T > 0 and dt > 0");
    return std::max(1, static_cast<int>(std::ceil(T / dt - 1e-9)));
}

}  // namespace

IterateTriple make_initial_iterate(const CoupledData& data, double T, double dt) {
    const int N = node_count(T, dt);
    const double dta = T / N;
    IterateTriple it;
    it.k = 1;
    for (int i = 0; i <= N; ++i) {
        it.times.push_back(i * dta);
        it.rho.push_back(data.rho0);
        it.c.push_back(data.c0);
        it.u.push_back(data.u0);
    }
    return it;
}

IterateTriple picard_sweep(const IterateTriple& prev, const CoupledData& data,
                           double T, double dt, SweepAudit* audit) {
    const int N = node_count(T, dt);
    const double dta = T / N;
    if (prev.times.size() != static_cast<std::size_t>(N) + 1)
        throw ConfigError("picard_sweep: previous iterate is on a different grid");
    const TorusGrid& g = data.rho0.grid();
    const Spectral& sp = Spectral::get(g);

    SweepAudit a;
    a.c_from_previous_iterate = true;

    // concentration slab: coefficients frozen at the previous iterate
    std::vector<ScalarField> c_new;
    c_new.reserve(N + 1);
    c_new.push_back(data.c0);
    for (int i = 0; i < N; ++i) {
        ScalarField sink(g);
        for (std::size_t p = 0; p < sink.size(); ++p)
            sink[p] = data.fns.kappa(prev.c[i][p]) * prev.rho[i][p];
        c_new.push_back(step_c_frozen_sink(c_new.back(), prev.u[i], sink, dta));
    }
    for (const ScalarField& c : c_new)
        for (std::size_t p = 0; p < c.size(); ++p) a.max_c = std::max(a.max_c, c[p]);

    // density slab: drift u_k + chi(c_k) grad c_{k+1}
    DriftSpec drift;
    // declared pair on the scaling line d/alpha + 2/beta = 1
    drift.alpha = 2.0 * g.dim;
    drift.beta = 4.0;
    for (int i = 0; i <= N; ++i) {
        VectorField gc = sp.gradient(c_new[i]);
        VectorField v(g);
        for (int comp = 0; comp < g.dim; ++comp)
            for (std::size_t p = 0; p < v.ncells(); ++p)
                v.comp(comp, p) = prev.u[i].comp(comp, p) +
                                  data.fns.chi(prev.c[i][p]) * gc.comp(comp, p);
        drift.samples.push_back(std::move(v));
    }
    a.rho_drift_uses_current_c = true;
    FPTrajectory rho_traj = solve_fp(data.rho0, drift, T, dta, 1);
    a.rho_stats = rho_traj.stats;

    // fluid slab: Stokes with frozen advection and the fresh density forcing
    std::vector<VectorField> u_new;
    u_new.reserve(N + 1);
    u_new.push_back(data.u0);
    a.u_force_uses_current_rho = true;
    for (int i = 0; i < N; ++i) {
        VectorField source = advection_term(prev.u[i]);
        for (int comp = 0; comp < g.dim; ++comp)
            for (std::size_t p = 0; p < source.ncells(); ++p)
                source.comp(comp, p) -= rho_traj.states[i][p] * data.grad_phi.comp(comp, p);
        FluidState fs = step_stokes(u_new.back(), source, dta);
        a.max_div = std::max(a.max_div, fs.max_div);
        u_new.push_back(std::move(fs.u));
    }

    IterateTriple next;
    next.k = prev.k + 1;
    next.times = prev.times;
    next.rho = std::move(rho_traj.states);
    next.c = std::move(c_new);
    next.u = std::move(u_new);
    if (audit) *audit = a;
    return next;
}

double discrete_xa_norm(const std::vector<ScalarField>& traj, double a) {
    if (traj.empty()) throw ConfigError("discrete_xa_norm: empty trajectory");
    double m = 0.0;
    for (const ScalarField& f : traj) m = std::max(m, lp_norm(f, a));
    return m;
}

double discrete_ya_norm(const std::vector<double>& times,
                        const std::vector<ScalarField>& traj, double a) {
    if (times.size() < 2 || times.size() != traj.size())
        throw ConfigError("discrete_ya_norm needs at least two aligned time nodes");
    const double dt = times[1] - times[0];
    std::vector<double> w2(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        double s = sobolev_norm(traj[i], 2, a);
        w2[i] = s * s;
    }
    double part1 = std::sqrt(trapezoid(w2, dt));
    double part2sq = 0.0;
    const TorusGrid& g = traj[0].grid();
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
        ScalarField d(g);
        for (std::size_t p = 0; p < d.size(); ++p)
            d[p] = (traj[i + 1][p] - traj[i][p]) / dt;
        double na = lp_norm(d, a);
        part2sq += dt * na * na;
    }
    return part1 + std::sqrt(part2sq);
}

double discrete_ya_norm(const std::vector<double>& times,
                        const std::vector<VectorField>& traj, double a) {
    if (traj.empty()) throw ConfigError("discrete_ya_norm: empty trajectory");
    const TorusGrid& g = traj[0].grid();
    double total = 0.0;
    for (int comp = 0; comp < g.dim; ++comp) {
        std::vector<ScalarField> comp_traj;
        comp_traj.reserve(traj.size());
        for (const VectorField& v : traj) {
            ScalarField f(g);
            for (std::size_t p = 0; p < f.size(); ++p) f[p] = v.comp(comp, p);
            comp_traj.push_back(std::move(f));
        }
        total += discrete_ya_norm(times, comp_traj, a);
    }
    return total;
}

NormBundle compute_norm_bundle(const IterateTriple& it, double a) {
    const int d = it.rho.at(0).grid().dim;
    if (!(a > 0.5 * d))
        throw ConfigError("norm exponent must satisfy a > d/2 (got a = " + fmt_g17(a) + ")");
    NormBundle nb;
    nb.a = a;
    nb.eta = 1.0 - d / (2.0 * a);
    std::vector<ScalarField> rho_fields;
    rho_fields.reserve(it.rho.size());
    for (const DensityField& r : it.rho) rho_fields.push_back(r.field());
    nb.x_a = discrete_xa_norm(rho_fields, a);
    nb.y_a_c = discrete_ya_norm(it.times, it.c, a);
    nb.y_a_u = discrete_ya_norm(it.times, it.u, a);
    return nb;
}

SmallnessReport validate_smallness(const CoupledData& data, double a, double M) {
    SmallnessReport r;
    r.M = M;
    r.rho_norm = std::max(lp_norm(data.rho0.field(), 1.0), lp_norm(data.rho0.field(), a));
    r.c_norm = sobolev_norm(data.c0, 2, a);
    r.u_norm = sobolev_norm(data.u0, 2, a);
    r.ok = r.rho_norm < M / 6.0 && r.c_norm < M / 6.0 && r.u_norm < M / 6.0;
    return r;
}

ContractionReport contraction_study(const CoupledData& data, double a, double T,
                                    double dt, int K) {
    if (K < 4) throw ConfigError("contraction_study requires K >= 4 sweeps");
    return picard_iterate(data, a, T, dt, K);
}

ContractionReport picard_iterate(const CoupledData& data, double a, double T, double dt,
                                 int K) {
    if (K < 1) throw ConfigError("picard_iterate requires K >= 1 sweep");
    const TorusGrid& g = data.rho0.grid();
    ContractionReport rep;
    IterateTriple cur = make_initial_iterate(data, T, dt);
    double prev_D = -1.0;
    int rising = 0;
    rep.certified = true;
    rep.weak = true;
    for (int k = 1; k <= K; ++k) {
        SweepAudit audit;
        IterateTriple next = picard_sweep(cur, data, T, dt, &audit);
        rep.worst_audit.max_c = std::max(rep.worst_audit.max_c, audit.max_c);
        rep.worst_audit.max_div = std::max(rep.worst_audit.max_div, audit.max_div);
        rep.worst_audit.rho_stats.absorb(audit.rho_stats);

        ContractionReport::Row row;
        row.k = k;
        {
            std::vector<ScalarField> drho;
            std::vector<ScalarField> dc;
            std::vector<VectorField> du;
            for (std::size_t i = 0; i < cur.times.size(); ++i) {
                ScalarField fr(g), fc(g);
                VectorField fu(g);
                for (std::size_t p = 0; p < fr.size(); ++p) {
                    fr[p] = next.rho[i][p] - cur.rho[i][p];
                    fc[p] = next.c[i][p] - cur.c[i][p];
                }
                for (std::size_t p = 0; p < fu.values().size(); ++p)
                    fu.values()[p] = next.u[i].values()[p] - cur.u[i].values()[p];
                drho.push_back(std::move(fr));
                dc.push_back(std::move(fc));
                du.push_back(std::move(fu));
            }
            row.d_rho = discrete_xa_norm(drho, a);
            row.d_c = discrete_ya_norm(cur.times, dc, a);
            row.d_u = discrete_ya_norm(cur.times, du, a);
        }
        row.d_total = row.d_rho + row.d_c + row.d_u;
        if (k >= 2) {
            if (prev_D > 0.0)
                row.ratio = row.d_total / prev_D;
            else
                row.ratio = row.d_total > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
            if (!(row.ratio < 1.0)) rep.weak = false;
            if (k >= 3 && !(row.ratio <= 0.5)) rep.certified = false;
            if (row.d_total > prev_D) {
                if (++rising >= 3) rep.diverged = true;
            } else {
                rising = 0;
            }
        }
        prev_D = row.d_total;
        rep.rows.push_back(row);
        cur = std::move(next);
    }
    rep.last = std::move(cur);
    return rep;
}

}  // namespace ksns
