#pragma once

#include <string>

#include "ksns/fokker_planck.hpp"
#include "ksns/transport.hpp"

namespace ksns {

/// One verified inequality: both sides at the binding point, the constant in
/// play, and the signed margin (nonnegative means the check holds).
struct LedgerEntry {
    std::string name;
    std::string anchor;  // terse tag for the inequality shape
    double lhs_max = 0.0;
    double rhs_min = 0.0;
    double fitted_const = 0.0;
    double margin = 0.0;
    bool pass = false;
};

class DiagnosticsLedger {
public:
    /// Every enabled check appears exactly once; duplicate names throw.
    void add(LedgerEntry e);
    const std::vector<LedgerEntry>& entries() const { return entries_; }
    bool all_pass() const;
    std::string render_csv(const std::string& config_hash) const;

private:
    std::vector<LedgerEntry> entries_;
};

/// Exponential growth bound in the drift norm: for q in {1, 2, p},
///   max_t ||rho(t)||_q <= ||rho0||_q exp(C_fit V^e T^w),
/// V the declared space-time drift norm, e = 2 alpha/(alpha-d),
/// w = (beta - e)/beta. Records the minimal constant that would make the
/// bound hold; passes with the frozen C_fit.
LedgerEntry check_lp_bound(const FPTrajectory& traj, const DriftSpec& drift, double p,
                           double c_fit, double T);

/// sup over sample pairs of W2(rho_s, rho_t)/sqrt(t-s); passes when finite.
LedgerEntry check_holder_w2(const FPTrajectory& traj, const MetricOptions& opts = {});

/// Pair rule for a dt-halving companion run: the two measured constants must
/// agree within 20% relative.
LedgerEntry check_holder_stability(const LedgerEntry& coarse, const LedgerEntry& fine);

/// Constants of the negative-entropy bound, fixed by the analytic argument
/// (independent of any data): a_d by quadrature of the radial integral,
/// b_p = 1/(p-1).
double entropy_moment_constant_a(int dim);
double entropy_moment_constant_b(double p);

/// -int_{rho<1} rho ln rho <= m2(rho) + a  and
///  int_{rho>1} rho ln rho <= b int rho^p, with the frozen (a, b) above.
LedgerEntry check_entropy_moment_bound(const DensityField& rho, double p);
LedgerEntry check_entropy_moment_bound(const FPTrajectory& traj, double p);

/// H(rho_t) + (1/2) int_0^t Fisher <= H(rho_0) + 2 int_0^t int |v|^2 rho,
/// with 5% quadrature headroom.
LedgerEntry check_entropy_dissipation(const FPTrajectory& traj, const DriftSpec& drift);

/// m2(rho_t) <= e^t (m2(rho_0) + int_0^t (||v_s||_{2p'}^2 ||rho_s||_p + 2d) ds),
/// with 5% quadrature headroom.
LedgerEntry check_second_moment_growth(const FPTrajectory& traj, const DriftSpec& drift,
                                       double p);

/// metric_derivative(t) <= 1.05 ||w_t||_{L2(rho_t)} at interior samples,
/// w = -grad rho / rho + v (Fisher floor at vacuum).
LedgerEntry check_metric_derivative_bound(const FPTrajectory& traj, const DriftSpec& drift,
                                          const MetricOptions& opts = {});

enum class HeatCheckMode { data, source };

/// Heat-window scaling study on a T-ladder {T, T/2, T/4}: solve the heat
/// equation (single low mode as data or as a time-constant source), measure
/// ||grad w||_{L^beta_t L^alpha_x} per window, and regress the exponent of
/// the window length against the predicted one: 1/beta for the data branch,
/// 1 - d/(2 alpha) for the source branch. Passes within 15%. A zero
/// amplitude is the degenerate 0 = 0 instance and passes trivially.
/// Preconditions: d/alpha + 2/beta = 1, alpha > d, 1 < gamma <= alpha.
LedgerEntry check_heat_smoothing(const TorusGrid& grid, double alpha, double beta,
                                 double gamma, HeatCheckMode mode, double T,
                                 double amplitude = 1.0);

}  // namespace ksns
