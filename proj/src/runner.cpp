#include "ksns/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "ksns/field_io.hpp"
#include "ksns/navier_stokes.hpp"
#include "ksns/random_fields.hpp"
#include "ksns/scalar_transport.hpp"
#include "ksns/spectral.hpp"
#include "ksns/transport.hpp"

namespace ksns {

namespace {

double spec_num(const std::vector<std::string>& spec, std::size_t i,
                const std::string& what) {
    if (i >= spec.size()) throw ConfigError(what + ": missing numeric argument");
    try {
        return std::stod(spec[i]);
    } catch (...) {
        throw ConfigError(what + ": bad numeric argument '" + spec[i] + "'");
    }
}

DensityField build_rho0(const TorusGrid& g, const std::vector<std::string>& spec) {
    if (spec.empty()) throw ConfigError("rho0: empty spec");
    if (spec[0] == "gaussian") return gaussian_density(g, spec_num(spec, 1, "rho0"));
    if (spec[0] == "two_bump")
        return two_bump_density(g, spec_num(spec, 1, "rho0"), spec_num(spec, 2, "rho0"));
    if (spec[0] == "file") {
        if (spec.size() < 2) throw ConfigError("rho0: file spec needs a path");
        LoadedField lf = read_field(spec[1]);
        return DensityField::normalized(lf.as_scalar());
    }
    throw ConfigError("rho0: unknown spec '" + spec[0] + "'");
}

ScalarField build_c0(const TorusGrid& g, const std::vector<std::string>& spec) {
    if (spec.empty()) throw ConfigError("c0: empty spec");
    if (spec[0] == "const") return ScalarField(g, spec_num(spec, 1, "c0"));
    if (spec[0] == "gaussian")
        return gaussian_scalar(g, spec_num(spec, 1, "c0"), spec_num(spec, 2, "c0"),
                               spec.size() > 3 ? spec_num(spec, 3, "c0") : 0.0);
    throw ConfigError("c0: unknown spec '" + spec[0] + "'");
}

VectorField build_u0(const TorusGrid& g, const std::vector<std::string>& spec,
                     std::uint64_t seed) {
    if (spec.empty()) throw ConfigError("u0: empty spec");
    if (spec[0] == "zero") return VectorField(g, 0.0);
    if (spec[0] == "taylor_green") return taylor_green(g, spec_num(spec, 1, "u0"));
    if (spec[0] == "stream_random") {
        std::mt19937_64 rng(seed ^ 0x75f0u);
        return divfree_drift(g, rng, static_cast<int>(spec_num(spec, 2, "u0")),
                             spec_num(spec, 1, "u0"))
            .cells;
    }
    throw ConfigError("u0: unknown spec '" + spec[0] + "'");
}

VectorField build_grad_phi(const TorusGrid& g, const std::vector<std::string>& spec) {
    if (spec.empty() || spec[0] == "none") return VectorField(g, 0.0);
    if (spec[0] == "gaussian")
        return grad_phi_gaussian(g, spec_num(spec, 1, "phi"), spec_num(spec, 2, "phi"));
    throw ConfigError("phi: unknown spec '" + spec[0] + "'");
}

std::vector<double> poly_coeffs(const std::vector<std::string>& spec,
                                const std::string& what) {
    if (spec.empty() || spec[0] != "poly")
        throw ConfigError(what + ": expected 'poly c0 c1 ...'");
    std::vector<double> c;
    for (std::size_t i = 1; i < spec.size(); ++i) c.push_back(spec_num(spec, i, what));
    if (c.empty()) c.push_back(0.0);
    return c;
}

DriftSpec build_drift(const TorusGrid& g, const std::vector<std::string>& spec,
                      double alpha, double beta, std::uint64_t seed) {
    DriftSpec d;
    d.alpha = alpha;
    d.beta = beta;
    if (spec.empty() || spec[0] == "none") {
        d.samples.push_back(VectorField(g, 0.0));
        return d;
    }
    std::mt19937_64 rng(seed);
    int kmax = static_cast<int>(spec.size() > 2 ? spec_num(spec, 2, "drift") : 3);
    double amp = spec_num(spec, 1, "drift");
    if (spec[0] == "random_smooth") {
        d.samples.push_back(random_smooth_drift(g, rng, kmax, amp));
    } else if (spec[0] == "divfree") {
        StreamDrift sd = divfree_drift(g, rng, kmax, amp);
        d.samples.push_back(std::move(sd.cells));
        d.stream.push_back(std::move(sd.corners));
    } else if (spec[0] == "compressive") {
        d.samples.push_back(compressive_drift(g, rng, kmax, amp));
    } else {
        throw ConfigError("drift: unknown spec '" + spec[0] + "'");
    }
    return d;
}

void localization_check(const DensityField& rho) {
    double ring = boundary_ring_mass(rho);
    if (ring > 1e-8)
        throw ConfigError("initial mass near the boundary ring is " + fmt_g17(ring) +
                          " (> 1e-8); enlarge L or shrink the data");
}

double resolve_dt(const ExperimentConfig& cfg, const TorusGrid& g, double vmax,
                  bool& defaulted) {
    defaulted = false;
    const double h = g.h();
    double bound = h * h / (2.0 * g.dim);
    if (vmax > 0.0) bound = std::min(bound, h / (2.0 * vmax));
    if (cfg.dt > 0.0) return cfg.dt;
    defaulted = true;
    return std::min(0.9 * bound, cfg.T / 8.0);
}

std::string traj_header(const ExperimentConfig& cfg, const std::string& hash, double dt) {
    std::ostringstream o;
    o << "# KSNS1-traj config=" << hash << " mode=" << cfg.mode << " dim=" << cfg.dim
      << " n=" << cfg.n << " L=" << fmt_g17(cfg.L) << " T=" << fmt_g17(cfg.T)
      << " dt=" << fmt_g17(dt) << " p=" << fmt_g17(cfg.p) << " alpha="
      << fmt_g17(cfg.alpha) << " beta=" << fmt_g17(cfg.beta) << '\n';
    return o.str();
}

void append_density_row(std::ostringstream& o, double t, const DensityField& r, double p) {
    double mn = r[0];
    for (std::size_t i = 0; i < r.size(); ++i) mn = std::min(mn, r[i]);
    o << fmt_g17(t) << ',' << fmt_g17(integrate(r.field())) << ',' << fmt_g17(mn) << ','
      << fmt_g17(lp_norm(r.field(), 1.0)) << ',' << fmt_g17(lp_norm(r.field(), 2.0))
      << ',' << fmt_g17(lp_norm(r.field(), p)) << ',' << fmt_g17(second_moment(r)) << ','
      << fmt_g17(entropy(r)) << ',' << fmt_g17(fisher_information(r));
}

DiagnosticsLedger fp_ledger(const ExperimentConfig& cfg, const FpInstance& inst,
                            const FPTrajectory& traj, std::ostream& log) {
    DiagnosticsLedger ledger;
    ledger.add(check_lp_bound(traj, inst.drift, cfg.p, cfg.c_fit, cfg.T));
    LedgerEntry holder = check_holder_w2(traj);
    ledger.add(holder);
    if (cfg.holder_pair) {
        FPTrajectory fine = solve_fp(inst.rho0, inst.drift, cfg.T, 0.5 * inst.dt,
                                     2 * cfg.sample_every);
        ledger.add(check_holder_stability(holder, check_holder_w2(fine)));
    }
    ledger.add(check_entropy_moment_bound(traj, cfg.p));
    ledger.add(check_entropy_dissipation(traj, inst.drift));
    ledger.add(check_second_moment_growth(traj, inst.drift, cfg.p));
    ledger.add(check_metric_derivative_bound(traj, inst.drift));
    double beta_h = 2.0 / (1.0 - cfg.dim / cfg.alpha);
    ledger.add(check_heat_smoothing(inst.grid, cfg.alpha, beta_h, cfg.alpha,
                                    HeatCheckMode::data, cfg.T));
    ledger.add(check_heat_smoothing(inst.grid, cfg.alpha, beta_h, cfg.alpha,
                                    HeatCheckMode::source, cfg.T));
    for (const LedgerEntry& e : ledger.entries())
        log << (e.pass ? "[pass] " : "[FAIL] ") << e.name
            << " margin=" << fmt_g17(e.margin) << '\n';
    return ledger;
}

int run_fp(const ExperimentConfig& cfg, const std::string& outdir, std::ostream& log) {
    FpInstance inst = build_fp_instance(cfg);
    if (inst.dt_defaulted) log << "dt defaulted to " << fmt_g17(inst.dt) << '\n';
    const std::string hash = config_hash(cfg);

    FPTrajectory traj = solve_fp(inst.rho0, inst.drift, cfg.T, inst.dt, cfg.sample_every);

    std::ostringstream o;
    o << traj_header(cfg, hash, inst.dt);
    o << "time,mass,min,l1,l2,lp,moment2,entropy,fisher\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        append_density_row(o, traj.times[i], traj.states[i], cfg.p);
        o << '\n';
    }
    atomic_write(outdir + "/traj.csv", o.str());

    ExperimentConfig resolved = cfg;
    resolved.dt = inst.dt;
    atomic_write(outdir + "/config.resolved",
                 "# KSNS1-config config=" + hash + "\n" + dump_config(resolved));
    if (cfg.dump_fields) {
        char name[64];
        for (std::size_t i = 0; i < traj.times.size(); ++i) {
            std::snprintf(name, sizeof(name), "/rho_%05zu.field", i);
            write_field(outdir + name, traj.states[i].field(), traj.times[i]);
        }
        write_field(outdir + "/drift_00000.field", inst.drift.at(0), 0.0);
    }

    DiagnosticsLedger ledger = fp_ledger(cfg, inst, traj, log);
    atomic_write(outdir + "/ledger.csv", ledger.render_csv(hash));
    return ledger.all_pass() ? 0 : 1;
}

int run_coupled(const ExperimentConfig& cfg, const std::string& outdir, std::ostream& log) {
    CoupledInstance inst = build_coupled_instance(cfg);
    if (inst.dt_defaulted) log << "dt defaulted to " << fmt_g17(inst.dt) << '\n';
    const std::string hash = config_hash(cfg);

    ContractionReport rep = picard_iterate(inst.data, cfg.a, cfg.T, inst.dt, cfg.sweeps);
    const IterateTriple& it = rep.last;
    const Spectral& sp = Spectral::get(inst.grid);

    double c0_max = 0.0;
    for (std::size_t i = 0; i < inst.data.c0.size(); ++i)
        c0_max = std::max(c0_max, inst.data.c0[i]);

    std::ostringstream o;
    o << traj_header(cfg, hash, inst.dt);
    o << "time,mass,min,l1,l2,lp,moment2,entropy,fisher,c_min,c_max,c_integral,"
         "energy,max_div,momentum_x,momentum_y";
    if (cfg.dim == 3) o << ",momentum_z";
    o << '\n';
    double mass_err = 0.0, rho_min = 0.0, c_max_run = 0.0, div_max = 0.0;
    for (std::size_t i = 0; i < it.times.size(); ++i) {
        append_density_row(o, it.times[i], it.rho[i], cfg.p);
        ConcentrationState cs = ConcentrationState::wrap(it.c[i]);
        double div = lp_norm(sp.divergence(it.u[i]), std::numeric_limits<double>::infinity());
        auto mom = momentum(it.u[i]);
        o << ',' << fmt_g17(cs.c_min) << ',' << fmt_g17(cs.c_max) << ','
          << fmt_g17(integrate(it.c[i])) << ',' << fmt_g17(kinetic_energy(it.u[i]))
          << ',' << fmt_g17(div) << ',' << fmt_g17(mom[0]) << ',' << fmt_g17(mom[1]);
        if (cfg.dim == 3) o << ',' << fmt_g17(mom[2]);
        o << '\n';
        mass_err = std::max(mass_err, std::abs(integrate(it.rho[i].field()) - 1.0));
        for (std::size_t p = 0; p < it.rho[i].size(); ++p)
            rho_min = std::min(rho_min, it.rho[i][p]);
        c_max_run = std::max(c_max_run, cs.c_max);
        div_max = std::max(div_max, div);
    }
    atomic_write(outdir + "/traj.csv", o.str());

    std::ostringstream co;
    co << "# KSNS1-contraction config=" << hash << " T=" << fmt_g17(cfg.T)
       << " certified=" << (rep.certified ? 1 : 0) << " weak=" << (rep.weak ? 1 : 0)
       << " diverged=" << (rep.diverged ? 1 : 0) << '\n';
    co << "k,D_rho,D_u,D_c,D_total,ratio\n";
    for (const auto& r : rep.rows)
        co << r.k << ',' << fmt_g17(r.d_rho) << ',' << fmt_g17(r.d_u) << ','
           << fmt_g17(r.d_c) << ',' << fmt_g17(r.d_total) << ',' << fmt_g17(r.ratio)
           << '\n';
    atomic_write(outdir + "/contraction.csv", co.str());

    ExperimentConfig resolved = cfg;
    resolved.dt = inst.dt;
    atomic_write(outdir + "/config.resolved",
                 "# KSNS1-config config=" + hash + "\n" + dump_config(resolved));

    DiagnosticsLedger ledger;
    auto simple = [](const std::string& name, const std::string& anchor, double lhs,
                     double rhs) {
        LedgerEntry e;
        e.name = name;
        e.anchor = anchor;
        e.lhs_max = lhs;
        e.rhs_min = rhs;
        e.margin = rhs - lhs;
        e.pass = lhs <= rhs;
        return e;
    };
    ledger.add(simple("mass_conservation", "unit-mass-at-every-node", mass_err, 1e-11));
    ledger.add(simple("density_positivity", "nonnegative-density", -rho_min, 0.0));
    ledger.add(simple("concentration_max_principle", "sup-c-below-initial-sup",
                      c_max_run, c0_max + 1e-10));
    ledger.add(simple("fluid_incompressibility", "divergence-sup-bound", div_max, 1e-8));
    {
        FPTrajectory rho_traj;
        rho_traj.times = it.times;
        rho_traj.states = it.rho;
        rho_traj.dt = inst.dt;
        ledger.add(check_holder_w2(rho_traj));
    }
    for (const LedgerEntry& e : ledger.entries())
        log << (e.pass ? "[pass] " : "[FAIL] ") << e.name
            << " margin=" << fmt_g17(e.margin) << '\n';
    atomic_write(outdir + "/ledger.csv", ledger.render_csv(hash));
    return ledger.all_pass() ? 0 : 1;
}

int run_contraction(const ExperimentConfig& cfg, const std::string& outdir,
                    std::ostream& log) {
    CoupledInstance inst = build_coupled_instance(cfg);
    const std::string hash = config_hash(cfg);
    SmallnessReport small = validate_smallness(inst.data, cfg.a, cfg.M);
    log << "smallness: rho " << fmt_g17(small.rho_norm) << ", c " << fmt_g17(small.c_norm)
        << ", u " << fmt_g17(small.u_norm) << " vs M/6 = " << fmt_g17(cfg.M / 6.0)
        << (small.ok ? " (ok)\n" : " (outside the certified regime)\n");

    double T = cfg.T;
    ContractionReport rep;
    bool certified = false;
    while (true) {
        double dtT = std::min(inst.dt, T / 8.0);
        rep = contraction_study(inst.data, cfg.a, T, dtT, cfg.sweeps);
        log << "T = " << fmt_g17(T) << ": weak=" << rep.weak
            << " certified=" << rep.certified << '\n';
        if (rep.certified && small.ok) {
            certified = true;
            break;
        }
        if (T / 2.0 < 1e-3) break;
        T /= 2.0;
    }

    std::ostringstream co;
    co << "# KSNS1-contraction config=" << hash << " T=" << fmt_g17(T)
       << " certified=" << (certified ? 1 : 0) << " weak=" << (rep.weak ? 1 : 0)
       << " diverged=" << (rep.diverged ? 1 : 0) << " smallness_ok="
       << (small.ok ? 1 : 0) << '\n';
    co << "k,D_rho,D_u,D_c,D_total,ratio\n";
    for (const auto& r : rep.rows)
        co << r.k << ',' << fmt_g17(r.d_rho) << ',' << fmt_g17(r.d_u) << ','
           << fmt_g17(r.d_c) << ',' << fmt_g17(r.d_total) << ',' << fmt_g17(r.ratio)
           << '\n';
    atomic_write(outdir + "/contraction.csv", co.str());
    ExperimentConfig resolved = cfg;
    resolved.dt = inst.dt;
    resolved.T = T;
    atomic_write(outdir + "/config.resolved",
                 "# KSNS1-config config=" + hash + "\n" + dump_config(resolved));
    return rep.weak ? 0 : 1;
}

int run_ledger_mode(const ExperimentConfig& cfg, const std::string& outdir,
                    std::ostream& log) {
    namespace fs = std::filesystem;
    ExperimentConfig stored;
    {
        std::ifstream in(cfg.traj_dir + "/config.resolved");
        if (!in)
            throw ConfigError("ledger mode: missing " + cfg.traj_dir + "/config.resolved");
        std::stringstream ss;
        ss << in.rdbuf();
        stored = parse_config(ss.str());
    }
    std::vector<std::string> rho_files;
    for (const auto& ent : fs::directory_iterator(cfg.traj_dir)) {
        std::string name = ent.path().filename().string();
        if (name.rfind("rho_", 0) == 0 && name.size() > 6 &&
            name.substr(name.size() - 6) == ".field")
            rho_files.push_back(ent.path().string());
    }
    std::sort(rho_files.begin(), rho_files.end());
    if (rho_files.size() < 2)
        throw ConfigError("ledger mode: need at least two rho_*.field files in " +
                          cfg.traj_dir);
    FPTrajectory traj;
    for (const std::string& f : rho_files) {
        LoadedField lf = read_field(f);
        traj.times.push_back(lf.time);
        traj.states.push_back(DensityField(lf.as_scalar()));
    }
    traj.dt = traj.times[1] - traj.times[0];
    DriftSpec drift;
    drift.alpha = stored.alpha;
    drift.beta = stored.beta;
    {
        LoadedField lf = read_field(cfg.traj_dir + "/drift_00000.field");
        drift.samples.push_back(lf.as_vector());
    }
    FpInstance inst;
    inst.grid = traj.states[0].grid();
    inst.rho0 = traj.states[0];
    inst.drift = drift;
    inst.dt = traj.dt;
    ExperimentConfig eff = stored;
    eff.holder_pair = false;  // stability needs a re-solve; stored data only here
    DiagnosticsLedger ledger = fp_ledger(eff, inst, traj, log);
    atomic_write(outdir + "/ledger.csv", ledger.render_csv(config_hash(stored)));
    return ledger.all_pass() ? 0 : 1;
}

}  // namespace

FpInstance build_fp_instance(const ExperimentConfig& cfg) {
    FpInstance inst;
    inst.grid = TorusGrid(cfg.dim, cfg.n, cfg.L);
    inst.rho0 = build_rho0(inst.grid, cfg.rho0);
    localization_check(inst.rho0);
    inst.drift = build_drift(inst.grid, cfg.drift, cfg.alpha, cfg.beta, cfg.seed);
    inst.drift.check_admissible(cfg.dim, cfg.p);
    double vmax = 0.0;
    for (const VectorField& v : inst.drift.samples) vmax = std::max(vmax, v.max_norm());
    inst.dt = resolve_dt(cfg, inst.grid, vmax, inst.dt_defaulted);
    return inst;
}

CoupledInstance build_coupled_instance(const ExperimentConfig& cfg) {
    CoupledInstance inst;
    inst.grid = TorusGrid(cfg.dim, cfg.n, cfg.L);
    CoupledData data{build_rho0(inst.grid, cfg.rho0), build_c0(inst.grid, cfg.c0),
                     build_u0(inst.grid, cfg.u0, cfg.seed),
                     build_grad_phi(inst.grid, cfg.phi),
                     SensitivityFns::polynomial(poly_coeffs(cfg.chi, "chi"),
                                                poly_coeffs(cfg.kappa, "kappa"))};
    localization_check(data.rho0);
    for (std::size_t i = 0; i < data.c0.size(); ++i)
        if (data.c0[i] < 0.0) throw ConfigError("c0 must be nonnegative");
    // CFL guess: fluid speed plus the chemotactic drift of the initial data
    double c0max = 0.0;
    for (std::size_t i = 0; i < data.c0.size(); ++i) c0max = std::max(c0max, data.c0[i]);
    double vest = data.u0.max_norm() +
                  data.fns.chi(c0max) * gradient(data.c0).max_norm() + 0.5;
    inst.dt = resolve_dt(cfg, inst.grid, vest, inst.dt_defaulted);
    inst.data = std::move(data);
    return inst;
}

double w2_files(const std::string& path_a, const std::string& path_b,
                const std::string& method, double epsilon) {
    LoadedField fa = read_field(path_a);
    LoadedField fb = read_field(path_b);
    DensityField da = DensityField::normalized(fa.as_scalar());
    DensityField db = DensityField::normalized(fb.as_scalar());
    if (!(da.grid().dim == db.grid().dim))
        throw ConfigError("w2: fields have different dimensions");
    DiscreteMeasure mu = measure_from_density(da);
    DiscreteMeasure nu = measure_from_density(db);
    if (method == "exact" || method == "auto") {
        if (mu.size() <= kExactSupportCap && nu.size() <= kExactSupportCap)
            return w2_exact(mu, nu).distance;
        if (method == "exact")
            throw CapacityError("supports exceed the exact-solver cap; use --sinkhorn");
        throw CapacityError("supports exceed the exact-solver cap (" +
                            std::to_string(mu.size()) + " x " + std::to_string(nu.size()) +
                            "); pass --sinkhorn EPS");
    }
    if (method == "sinkhorn") {
        SinkhornOptions opts;
        opts.epsilon = epsilon;
        return w2_sinkhorn(mu, nu, opts).distance;
    }
    throw ConfigError("w2: unknown method '" + method + "'");
}

int run_experiment(const ExperimentConfig& cfg, const std::string& outdir,
                   std::ostream& log) {
    std::filesystem::create_directories(outdir);
    if (cfg.mode == "fp") return run_fp(cfg, outdir, log);
    if (cfg.mode == "coupled") return run_coupled(cfg, outdir, log);
    if (cfg.mode == "contraction") return run_contraction(cfg, outdir, log);
    if (cfg.mode == "ledger") return run_ledger_mode(cfg, outdir, log);
    if (cfg.mode == "w2") {
        double d2 = 0.0;
        {
            LoadedField fa = read_field(cfg.field_a);
            double diag = 0.0;
            for (int ax = 0; ax < fa.grid.dim; ++ax) diag += fa.grid.L * fa.grid.L;
            d2 = diag;
        }
        double dist = w2_files(cfg.field_a, cfg.field_b, "auto", cfg.eps_rel * d2);
        log << fmt_g17(dist) << '\n';
        return 0;
    }
    throw ConfigError("unknown mode: " + cfg.mode);
}

}  // namespace ksns
