#pragma once

#include <random>

#include "ksns/grid.hpp"

namespace ksns {

/// Seeded low-mode Fourier field generators for experiment data and test
/// suites. Mode coefficients are drawn in a fixed lexicographic order, so a
/// seed pins the field exactly.

/// Sum of random modes with |m|_inf <= kmax (zero mean), rescaled so
/// max |f| = amp.
ScalarField random_smooth_scalar(const TorusGrid& g, std::mt19937_64& rng, int kmax,
                                 double amp);

/// Independent random smooth components.
VectorField random_smooth_drift(const TorusGrid& g, std::mt19937_64& rng, int kmax,
                                double amp);

/// Gradient of a random smooth potential (a compressive drift).
VectorField compressive_drift(const TorusGrid& g, std::mt19937_64& rng, int kmax,
                              double amp);

/// 2D divergence-free drift from a random streamfunction: cell samples of
/// the rotated gradient plus the corner-sampled streamfunction that makes
/// the upwind face velocities divergence-free exactly.
struct StreamDrift {
    VectorField cells;
    ScalarField corners;  // psi at (i+1/2, j+1/2) h
};
StreamDrift divfree_drift(const TorusGrid& g, std::mt19937_64& rng, int kmax, double amp);

/// Strictly positive random density: exp of a random smooth field, normalized.
DensityField random_density(const TorusGrid& g, std::mt19937_64& rng, int kmax,
                            double contrast = 1.0);

/// Isotropic Gaussian centered on the torus, normalized on the grid.
DensityField gaussian_density(const TorusGrid& g, double sigma);
/// Two symmetric bumps offset along the first axis.
DensityField two_bump_density(const TorusGrid& g, double sigma, double offset);

ScalarField gaussian_scalar(const TorusGrid& g, double amp, double sigma, double base);

/// Taylor-Green velocity at the fundamental wavenumber (dim = 2).
VectorField taylor_green(const TorusGrid& g, double amp);

/// Analytic gradient of a Gaussian potential bump centered on the torus.
VectorField grad_phi_gaussian(const TorusGrid& g, double amp, double width);

/// Mass within 10h of the domain boundary; the localization check at startup
/// requires this to be <= 1e-8.
double boundary_ring_mass(const DensityField& rho);

}  // namespace ksns
