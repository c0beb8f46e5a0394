#pragma once

#include <ostream>

#include "ksns/config.hpp"
#include "ksns/coupled.hpp"
#include "ksns/diagnostics.hpp"

namespace ksns {

/// Experiment instances assembled from a config (shared by the CLI and the
/// test suites so both exercise the same construction path).
struct FpInstance {
    TorusGrid grid;
    DensityField rho0;
    DriftSpec drift;
    double dt = 0.0;  // resolved (CFL-safe default when the config left it 0)
    bool dt_defaulted = false;
};
FpInstance build_fp_instance(const ExperimentConfig& cfg);

struct CoupledInstance {
    TorusGrid grid;
    CoupledData data;
    double dt = 0.0;
    bool dt_defaulted = false;
};
CoupledInstance build_coupled_instance(const ExperimentConfig& cfg);

/// Distance between two KSNS1 density files. method: "auto" (exact if the
/// support fits, otherwise an error advising sinkhorn), "exact", "sinkhorn".
double w2_files(const std::string& path_a, const std::string& path_b,
                const std::string& method, double epsilon);

/// Execute a config. Artifacts are written atomically under outdir; byte
/// identical across repeated runs for a fixed config + seed. Returns 0 when
/// every check passes, 1 otherwise; config and numeric errors throw.
int run_experiment(const ExperimentConfig& cfg, const std::string& outdir,
                   std::ostream& log);

}  // namespace ksns
