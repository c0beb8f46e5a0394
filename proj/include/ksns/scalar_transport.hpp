#pragma once

#include "ksns/grid.hpp"

namespace ksns {

/// Concentration with its running bounds; max c never exceeds max c0 by more
/// than roundoff (the advection substep uses exactly divergence-free face
/// velocities, so the discrete scheme obeys the maximum principle).
struct ConcentrationState {
    ScalarField c;
    double c_min = 0.0;
    double c_max = 0.0;

    static ConcentrationState wrap(ScalarField f);
};

/// One Strang step of the concentration equation: half-step spectral
/// diffusion, upwind advection by u, reaction substep, half-step diffusion.
/// The reaction uses the exact exponential integrator when kappa(c)/c is
/// constant and a positivity-clamped explicit Euler step otherwise.
/// Preconditions: u divergence-free to 1e-8, CFL as in step_fp, c >= 0.
ScalarField step_c(const ScalarField& c, const VectorField& u, const DensityField& rho,
                   const SensitivityFns& fns, double dt);

/// Picard variant: the sink kappa(c_prev) rho_prev is a frozen nonnegative
/// field, applied explicitly with a positivity clamp.
ScalarField step_c_frozen_sink(const ScalarField& c, const VectorField& u,
                               const ScalarField& sink, double dt);

/// Discrete consumption integral: (integral of c_before - c_after) / dt.
/// Advection and diffusion integrate to zero on the torus, so this is the
/// discrete sink integral.
double consumption_record(const ScalarField& c_before, const ScalarField& c_after,
                          const DensityField& rho, double dt);

}  // namespace ksns
