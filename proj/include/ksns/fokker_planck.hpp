#pragma once

#include "ksns/grid.hpp"

namespace ksns {

/// Drift for the density equation: cell samples at the solver time nodes
/// plus the declared space-time integrability pair. A drift may carry a
/// corner-sampled streamfunction per node (2D), in which case the advection
/// substep uses exactly divergence-free face velocities.
struct DriftSpec {
    std::vector<VectorField> samples;  // size 1 (static) or N+1 (per node)
    std::vector<ScalarField> stream;   // empty, or aligned with samples
    double alpha = 4.0;
    double beta = 4.0;

    const VectorField& at(std::size_t node) const {
        return samples.size() == 1 ? samples[0] : samples.at(node);
    }
    const ScalarField* stream_at(std::size_t node) const {
        if (stream.empty()) return nullptr;
        return stream.size() == 1 ? &stream[0] : &stream.at(node);
    }
    bool static_in_time() const { return samples.size() == 1; }

    /// Admissibility of (alpha, beta) for dimension d and Lebesgue exponent p:
    /// alpha > d, beta >= 2, d/alpha + 2/beta <= 1, and alpha >= 2p' on the
    /// low-integrability branch (which covers every finite p when d = 2).
    void check_admissible(int d, double p) const;

    /// Time-space norm of the drift: lp_norm in space at each node,
    /// trapezoidal beta-integral in time (max over nodes for beta = inf).
    double space_time_norm(double T) const;
};

struct StepStats {
    double preclip_min = 0.0;   // most negative pre-clip value seen
    double clipped_mass = 0.0;  // total mass removed by clipping
    double mass_drift = 0.0;    // |mass - 1| before renormalization, worst
    void absorb(const StepStats& s) {
        preclip_min = std::min(preclip_min, s.preclip_min);
        clipped_mass += s.clipped_mass;
        mass_drift = std::max(mass_drift, s.mass_drift);
    }
};

/// Positivity budgets; exceeding either aborts the run (invariants are
/// certified, not silently repaired). The trigonometric diffusion propagator
/// is not a positive matrix: applied to the kinks the upwind substep leaves
/// at velocity sign changes, it undershoots at the interpolation scale
/// (~1e-8 at desk resolutions, vanishing with h). The budgets sit one order
/// above that scale; anything larger indicates a real defect and aborts.
constexpr double kPreclipBudget = -1e-6;
constexpr double kMassBudget = 1e-6;

/// One Strang step of the drift-diffusion equation: half-step exact spectral
/// diffusion, conservative upwind advection of the flux v*rho, half-step
/// diffusion. CFL precondition dt <= min(h/(2 max|v|), h^2/(2 dim)).
DensityField step_fp(const DensityField& rho, const VectorField& v, double dt,
                     const ScalarField* stream = nullptr, StepStats* stats = nullptr);

struct FPTrajectory {
    std::vector<double> times;
    std::vector<DensityField> states;
    double dt = 0.0;
    double drift_norm = 0.0;  // ||v|| in the declared L^beta_t L^alpha_x
    StepStats stats;
};

FPTrajectory solve_fp(const DensityField& rho0, const DriftSpec& drift, double T,
                      double dt, int sample_every = 1);

/// Truncate the drift to magnitude <= truncation (skip if nonpositive or
/// infinite), then convolve with a unit-mass Gaussian of radius r. The
/// streamfunction is dropped: truncation does not preserve it. If `distance`
/// is given it receives ||v_r - v|| in the declared space-time norm.
DriftSpec mollify_drift(const DriftSpec& drift, double radius, double truncation,
                        double T, double* distance = nullptr);

/// Test function phi(t,x) = psi(t) * sum of Fourier modes, with a smooth
/// envelope psi vanishing (with derivative) at t = T. Gradients and
/// laplacians are analytic.
struct TestFn {
    struct Mode {
        std::array<int, 3> m{0, 0, 0};
        double amp_cos = 0.0;
        double amp_sin = 0.0;
    };
    std::vector<Mode> modes;
    double L = 1.0;  // domain side (fixes the wavenumbers)
    double T = 1.0;  // envelope support

    double envelope(double t) const;
    double envelope_dt(double t) const;
    double space(const double* x, int dim) const;
    double space_laplacian(const double* x, int dim) const;
    void space_gradient(const double* x, int dim, double* out) const;
};

/// | integral of (dphi/dt + Lap phi + grad phi . v) rho dx dt
///   + integral of phi(0) rho0 dx |
/// on the trajectory's time grid. The dphi/dt term is paired so that the
/// space-constant case reduces to the discrete mass identity exactly.
double weak_form_residual(const FPTrajectory& traj, const DriftSpec& drift,
                          const TestFn& phi);

}  // namespace ksns
