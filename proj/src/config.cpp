#include "ksns/config.hpp"

#include <sstream>

#include "ksns/fokker_planck.hpp"

namespace ksns {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

double parse_num(const std::string& s, int line, const std::string& key) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (...) {
        used = 0;
    }
    if (used != s.size())
        throw ConfigError("line " + std::to_string(line) + ": malformed number '" + s +
                          "' for key '" + key + "'");
    return v;
}

long parse_int(const std::string& s, int line, const std::string& key) {
    std::size_t used = 0;
    long v = 0;
    try {
        v = std::stol(s, &used);
    } catch (...) {
        used = 0;
    }
    if (used != s.size())
        throw ConfigError("line " + std::to_string(line) + ": malformed integer '" + s +
                          "' for key '" + key + "'");
    return v;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        std::size_t hash = s.find('#');
        if (hash != std::string::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line) + ": expected 'key = value'");
        std::string key = trim(s.substr(0, eq));
        std::string val = trim(s.substr(eq + 1));
        if (val.empty())
            throw ConfigError("line " + std::to_string(line) + ": empty value for '" + key + "'");

        if (key == "mode") cfg.mode = val;
        else if (key == "dim") cfg.dim = static_cast<int>(parse_int(val, line, key));
        else if (key == "n") cfg.n = static_cast<int>(parse_int(val, line, key));
        else if (key == "L") cfg.L = parse_num(val, line, key);
        else if (key == "T") cfg.T = parse_num(val, line, key);
        else if (key == "dt") cfg.dt = parse_num(val, line, key);
        else if (key == "sample_every") cfg.sample_every = static_cast<int>(parse_int(val, line, key));
        else if (key == "p") cfg.p = parse_num(val, line, key);
        else if (key == "a") cfg.a = parse_num(val, line, key);
        else if (key == "alpha") cfg.alpha = parse_num(val, line, key);
        else if (key == "beta") cfg.beta = parse_num(val, line, key);
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(val, line, key));
        else if (key == "rho0") cfg.rho0 = split(val);
        else if (key == "c0") cfg.c0 = split(val);
        else if (key == "u0") cfg.u0 = split(val);
        else if (key == "drift") cfg.drift = split(val);
        else if (key == "phi") cfg.phi = split(val);
        else if (key == "chi") cfg.chi = split(val);
        else if (key == "kappa") cfg.kappa = split(val);
        else if (key == "M") cfg.M = parse_num(val, line, key);
        else if (key == "sweeps") cfg.sweeps = static_cast<int>(parse_int(val, line, key));
        else if (key == "c_fit") cfg.c_fit = parse_num(val, line, key);
        else if (key == "eps_rel") cfg.eps_rel = parse_num(val, line, key);
        else if (key == "out") cfg.out = val;
        else if (key == "field_a") cfg.field_a = val;
        else if (key == "field_b") cfg.field_b = val;
        else if (key == "traj_dir") cfg.traj_dir = val;
        else if (key == "ns3d") cfg.ns3d = parse_int(val, line, key) != 0;
        else if (key == "holder_pair") cfg.holder_pair = parse_int(val, line, key) != 0;
        else if (key == "dump_fields") cfg.dump_fields = parse_int(val, line, key) != 0;
        else
            throw ConfigError("line " + std::to_string(line) + ": unknown key '" + key + "'");
    }

    // ---- cross-field validation ----
    if (cfg.mode != "fp" && cfg.mode != "coupled" && cfg.mode != "contraction" &&
        cfg.mode != "w2" && cfg.mode != "ledger")
        throw ConfigError("mode must be fp, coupled, contraction, w2 or ledger");
    const bool needs_grid = cfg.mode == "fp" || cfg.mode == "coupled" || cfg.mode == "contraction";
    if (needs_grid) {
        if (cfg.dim < 1 || cfg.dim > 3) throw ConfigError("dim must be 1, 2 or 3");
        if ((cfg.mode == "coupled" || cfg.mode == "contraction") && cfg.dim == 1)
            throw ConfigError("the coupled system needs dim 2 or 3");
        if (cfg.n < 8 || (cfg.n & (cfg.n - 1)) != 0)
            throw ConfigError("n must be a power of two >= 8");
        if (!(cfg.L > 0.0)) throw ConfigError("L must be positive");
        if (!(cfg.T > 0.0)) throw ConfigError("T must be positive");
        if (cfg.dt < 0.0) throw ConfigError("dt must be nonnegative (0 = auto)");
        if (cfg.sample_every < 1) throw ConfigError("sample_every must be >= 1");
        if (cfg.dim == 3 && (cfg.mode == "coupled" || cfg.mode == "contraction")) {
            if (!cfg.ns3d) throw ConfigError("3D fluid solves need ns3d = 1");
            if (cfg.n > 64) throw ConfigError("3D fluid solves are capped at n = 64");
        }
    }
    if (cfg.mode == "fp" || cfg.mode == "ledger") {
        DriftSpec probe;
        probe.alpha = cfg.alpha;
        probe.beta = cfg.beta;
        probe.check_admissible(cfg.dim, cfg.p);
    }
    if (cfg.mode == "coupled" || cfg.mode == "contraction") {
        if (!(cfg.a > 0.5 * cfg.dim))
            throw ConfigError("norm exponent must satisfy a > d/2");
        if (cfg.sweeps < 1) throw ConfigError("sweeps must be >= 1");
        if (cfg.mode == "contraction" && cfg.sweeps < 4)
            throw ConfigError("contraction mode needs sweeps >= 4");
    }
    if (cfg.mode == "w2" && (cfg.field_a.empty() || cfg.field_b.empty()))
        throw ConfigError("w2 mode needs field_a and field_b");
    if (cfg.mode == "ledger" && cfg.traj_dir.empty())
        throw ConfigError("ledger mode needs traj_dir");
    return cfg;
}

namespace {
std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ' ';
        s += v[i];
    }
    return s;
}
}  // namespace

std::string dump_config(const ExperimentConfig& c) {
    std::ostringstream o;
    o << "mode = " << c.mode << '\n';
    o << "dim = " << c.dim << '\n';
    o << "n = " << c.n << '\n';
    o << "L = " << fmt_g17(c.L) << '\n';
    o << "T = " << fmt_g17(c.T) << '\n';
    o << "dt = " << fmt_g17(c.dt) << '\n';
    o << "sample_every = " << c.sample_every << '\n';
    o << "p = " << fmt_g17(c.p) << '\n';
    o << "a = " << fmt_g17(c.a) << '\n';
    o << "alpha = " << fmt_g17(c.alpha) << '\n';
    o << "beta = " << fmt_g17(c.beta) << '\n';
    o << "seed = " << c.seed << '\n';
    o << "rho0 = " << join(c.rho0) << '\n';
    o << "c0 = " << join(c.c0) << '\n';
    o << "u0 = " << join(c.u0) << '\n';
    o << "drift = " << join(c.drift) << '\n';
    o << "phi = " << join(c.phi) << '\n';
    o << "chi = " << join(c.chi) << '\n';
    o << "kappa = " << join(c.kappa) << '\n';
    o << "M = " << fmt_g17(c.M) << '\n';
    o << "sweeps = " << c.sweeps << '\n';
    o << "c_fit = " << fmt_g17(c.c_fit) << '\n';
    o << "eps_rel = " << fmt_g17(c.eps_rel) << '\n';
    o << "out = " << c.out << '\n';
    if (!c.field_a.empty()) o << "field_a = " << c.field_a << '\n';
    if (!c.field_b.empty()) o << "field_b = " << c.field_b << '\n';
    if (!c.traj_dir.empty()) o << "traj_dir = " << c.traj_dir << '\n';
    o << "ns3d = " << (c.ns3d ? 1 : 0) << '\n';
    o << "holder_pair = " << (c.holder_pair ? 1 : 0) << '\n';
    o << "dump_fields = " << (c.dump_fields ? 1 : 0) << '\n';
    return o.str();
}

std::string config_hash(const ExperimentConfig& cfg) {
    return hex16(fnv1a64(dump_config(cfg)));
}

}  // namespace ksns
