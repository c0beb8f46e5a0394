#pragma once

#include "ksns/fokker_planck.hpp"
#include "ksns/grid.hpp"

namespace ksns {

/// Problem data for the coupled system: initial fields, potential gradient,
/// sensitivity functions.
struct CoupledData {
    DensityField rho0;
    ScalarField c0;
    VectorField u0;
    VectorField grad_phi;
    SensitivityFns fns;
};

/// One iterate (rho_k, c_k, u_k) on a common uniform time grid.
struct IterateTriple {
    std::vector<double> times;
    std::vector<DensityField> rho;
    std::vector<ScalarField> c;
    std::vector<VectorField> u;
    int k = 1;
};

/// Structural audit of a sweep's data flow: the concentration solve consumes
/// only previous-iterate fields, the density drift consumes the concentration
/// just solved, the fluid force consumes the density just solved.
struct SweepAudit {
    bool c_from_previous_iterate = false;
    bool rho_drift_uses_current_c = false;
    bool u_force_uses_current_rho = false;
    double max_c = 0.0;      // sup over nodes of max c
    double max_div = 0.0;    // sup over nodes of ||div u||_inf
    StepStats rho_stats;
};

/// Constant-in-time extension of the initial data (the first iterate).
IterateTriple make_initial_iterate(const CoupledData& data, double T, double dt);

/// One sweep of the iteration: per time slab solve, in order,
///   c_{k+1} from u_k, c_k, rho_k (frozen sink);
///   rho_{k+1} with drift u_k + chi(c_k) grad c_{k+1};
///   u_{k+1} from advection by u_k and force -rho_{k+1} grad phi.
/// Equations are solved over the whole slab before the next unknown.
IterateTriple picard_sweep(const IterateTriple& prev, const CoupledData& data,
                           double T, double dt, SweepAudit* audit = nullptr);

/// Norm parameters of the solution classes: sup-in-time L^a for the density,
/// the parabolic norm for concentration and velocity; eta = 1 - d/(2a).
struct NormBundle {
    double x_a = 0.0;
    double y_a_c = 0.0;
    double y_a_u = 0.0;
    double a = 2.0;
    double eta = 0.0;
};

/// sup over nodes of the spatial L^a norm.
double discrete_xa_norm(const std::vector<ScalarField>& traj, double a);
/// ( sum dt ||.||_{W^{2,a}}^2 )^{1/2} + ( sum dt ||d_t .||_{L^a}^2 )^{1/2}
/// with per-interval forward time differences.
double discrete_ya_norm(const std::vector<double>& times,
                        const std::vector<ScalarField>& traj, double a);
double discrete_ya_norm(const std::vector<double>& times,
                        const std::vector<VectorField>& traj, double a);

NormBundle compute_norm_bundle(const IterateTriple& it, double a);

/// Smallness of the initial data against a user-chosen M (each norm < M/6).
/// Contraction certification is refused outside this regime.
struct SmallnessReport {
    double rho_norm = 0.0;  // max(||rho0||_1, ||rho0||_a)
    double c_norm = 0.0;    // ||c0||_{W^{2,a}}
    double u_norm = 0.0;    // ||u0||_{W^{2,a}}
    double M = 0.0;
    bool ok = false;
};
SmallnessReport validate_smallness(const CoupledData& data, double a, double M);

struct ContractionReport {
    struct Row {
        int k = 0;
        double d_rho = 0.0, d_u = 0.0, d_c = 0.0, d_total = 0.0;
        double ratio = 0.0;  // D_k / D_{k-1}; 0 on the first row and for 0/0
    };
    std::vector<Row> rows;
    bool certified = false;  // ratios <= 1/2 for all k >= 3
    bool weak = false;       // ratios < 1 for all k >= 2
    bool diverged = false;   // D_k increased for 3 consecutive k
    IterateTriple last;      // final iterate, for downstream diagnostics
    SweepAudit worst_audit;
};

/// K sweeps with difference norms D_k = ||d_k rho||_{X_a} + ||d_k u||_{Y_a}
/// + ||d_k c||_{Y_a} and their ratios. Divergence is reported, not raised.
/// Requires K >= 4; picard_iterate is the same loop without that floor.
ContractionReport contraction_study(const CoupledData& data, double a, double T,
                                    double dt, int K);
ContractionReport picard_iterate(const CoupledData& data, double a, double T, double dt,
                                 int K);

}  // namespace ksns
