#pragma once

#include <functional>

#include "ksns/grid.hpp"

namespace ksns {

/// Weighted point cloud in [0,L)^dim; weights nonnegative, unit total mass.
/// Distances between atoms use unwrapped coordinates: the torus is a
/// truncation device, not an intrinsic geometry.
struct DiscreteMeasure {
    int dim = 1;
    std::vector<double> points;   // point-major: points[p*dim + axis]
    std::vector<double> weights;  // same length / dim

    std::size_t size() const { return weights.size(); }
    const double* point(std::size_t p) const { return &points[p * dim]; }
    void validate() const;  // weights >= 0, sum 1 +- 1e-12
    double second_moment_about(const double* c) const;
};

/// Coupling between two measures, stored sparsely.
struct TransportPlan {
    struct Entry {
        int row, col;
        double mass;
    };
    std::vector<double> row_weights, col_weights;
    std::vector<Entry> entries;

    /// Marginal feasibility: row/col sums within 1e-9, entries >= 0.
    bool feasible(double tol = 1e-9) const;
    double max_marginal_error() const;
};

/// Image measure under a map; equal image points have weights merged.
DiscreteMeasure pushforward(const DiscreteMeasure& mu,
                            const std::function<void(const double*, double*)>& map);

/// Capacity bound for the exact solver (dense transportation simplex).
constexpr std::size_t kExactSupportCap = 4096;

struct ExactResult {
    double distance = 0.0;  // quadratic-cost optimal transport distance
    double primal = 0.0;    // sum gamma_ij |x_i-y_j|^2 at the optimum
    double dual = 0.0;      // dual objective, certifies the gap
    TransportPlan plan;
};

/// Exact quadratic-cost OT via the transportation simplex; primal-dual gap
/// certified to 1e-9 relative. Throws CapacityError above kExactSupportCap.
ExactResult w2_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

struct SinkhornOptions {
    double epsilon = 1e-3;
    int max_iter = 200000;
    double tol = 1e-8;    // L1 marginal violation at convergence
    bool debias = true;   // Sinkhorn-divergence debiasing
    double omega = 1.9;   // overrelaxation; safeguarded back to 1 on stall
};

struct SinkhornResult {
    double distance = 0.0;      // sqrt of (debiased) plan cost, clamped at 0
    double cost = 0.0;          // raw plan cost <gamma, c>
    double marginal_err = 0.0;  // converged L1 violation
    int iterations = 0;
};

/// Entropic OT with fixed epsilon, log-domain updates. Throws NumericError
/// carrying the last marginal violation if max_iter is exhausted.
SinkhornResult w2_sinkhorn(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                           const SinkhornOptions& opts);

/// Exact 1D distance via piecewise-constant quantile integration.
double w2_1d_quantile(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Grid density -> point cloud, one atom per cell at the cell coordinate.
/// If max_support > 0 and the cell count exceeds it, cells are merged in
/// blocks (power-of-two side) with the atom at the block's center of mass.
DiscreteMeasure measure_from_density(const DensityField& rho,
                                     std::size_t max_support = 0);

struct MetricOptions {
    std::size_t exact_cap = 2048;  // use the exact solver up to this support
    std::size_t coarsen_to = 256;  // block-merge grid densities above this
    double sinkhorn_epsilon_rel = 1e-3;  // epsilon = rel * diam^2 fallback
};

/// Pitch of the block-merged point cloud measure_from_density would produce.
double coarsened_pitch(const TorusGrid& g, std::size_t max_support);

/// Exact 1D distance between two grid densities read as piecewise-constant
/// profiles (piecewise-linear CDFs): resolves displacements below the cell
/// pitch, which atom clouds on a shared grid cannot.
double w2_1d_density(const DensityField& a, const DensityField& b);

/// W2 between two grid densities with the policy above; 1D fields go through
/// the density-level quantile route.
double w2_between(const DensityField& a, const DensityField& b,
                  const MetricOptions& opts = {});

/// Metric derivative of a density curve at node t_index: symmetric difference
/// quotient of W2, one-sided at the endpoints. Needs >= 3 samples inside,
/// >= 2 at the boundary.
double metric_derivative(const std::vector<double>& times,
                         const std::vector<DensityField>& states,
                         std::size_t t_index, const MetricOptions& opts = {});

}  // namespace ksns
