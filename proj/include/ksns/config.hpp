#pragma once

#include <string>
#include <vector>

#include "ksns/util.hpp"

namespace ksns {

/// Flat key = value experiment configuration ('#' starts a comment).
/// Unset dt (0) means "CFL-safe default, chosen and reported at run time".
struct ExperimentConfig {
    std::string mode = "fp";  // fp | coupled | contraction | w2 | ledger
    int dim = 2;
    int n = 64;
    double L = 8.0;
    double T = 0.1;
    double dt = 0.0;
    int sample_every = 1;
    double p = 2.0;      // Lebesgue exponent for the density bounds
    double a = 2.0;      // norm exponent of the coupled solution classes
    double alpha = 4.0;  // drift space integrability
    double beta = 4.0;   // drift time integrability
    std::uint64_t seed = 1;
    std::vector<std::string> rho0 = {"gaussian", "0.4"};
    std::vector<std::string> c0 = {"const", "1"};
    std::vector<std::string> u0 = {"zero"};
    std::vector<std::string> drift = {"none"};
    std::vector<std::string> phi = {"none"};
    std::vector<std::string> chi = {"poly", "0"};
    std::vector<std::string> kappa = {"poly", "0", "1"};
    double M = 30.0;     // smallness scale for contraction certification
    int sweeps = 6;
    double c_fit = 1.0;  // frozen growth-bound constant (calibration value)
    double eps_rel = 1e-3;
    std::string out = "out";
    std::string field_a, field_b;  // w2 mode inputs
    std::string traj_dir;          // ledger mode input
    bool ns3d = false;
    bool holder_pair = true;   // run the dt/2 companion for the stability entry
    bool dump_fields = false;  // write per-sample KSNS1 files
};

/// Parse and validate; throws ConfigError naming the first offending line.
ExperimentConfig parse_config(const std::string& text);

/// Canonical dump; parse(dump(parse(x))) == parse(x).
std::string dump_config(const ExperimentConfig& cfg);

/// Hash of the canonical dump, stamped into every output file header.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace ksns
