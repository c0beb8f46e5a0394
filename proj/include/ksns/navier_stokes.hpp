#pragma once

#include "ksns/grid.hpp"

namespace ksns {

/// Velocity plus the per-step diagnostics the invariants are stated on.
struct FluidState {
    VectorField u;
    double energy = 0.0;   // (1/2) ||u||_2^2
    double max_div = 0.0;  // sup-norm of the spectral divergence
};

constexpr double kDivergenceBudget = 1e-8;
constexpr int kMax3dResolution = 64;  // 3D runs are desk-scale only

/// Spectral projection onto divergence-free fields; idempotent, removes
/// exactly the gradient part.
VectorField leray_project(const VectorField& g);

double kinetic_energy(const VectorField& u);

/// Dealiased convective term -(w . grad) w.
VectorField advection_term(const VectorField& w);

/// Mean of u times the domain volume (momentum integral), per component.
std::array<double, 3> momentum(const VectorField& u);

/// Linear update u <- e^{dt Lap} P(u + dt * source): exact implicit
/// diffusion via the heat multiplier, then projection. The iteration scheme
/// feeds frozen advection and forcing through `source`.
FluidState step_stokes(const VectorField& u, const VectorField& source, double dt);

/// Full semi-implicit step: explicit dealiased advection, explicit force
/// -rho grad(phi), exact diffusion, projection. CFL: dt <= h/(2 max|u|).
FluidState step_ns(const VectorField& u, const DensityField& rho,
                   const VectorField& grad_phi, double dt);

}  // namespace ksns
