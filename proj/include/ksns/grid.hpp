#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ksns/util.hpp"

namespace ksns {

/// Uniform periodic grid on [0,L)^dim standing in for free space; densities
/// are expected to stay localized well inside the cell (checked at startup by
/// the experiment layer). dim = 2 is the primary configuration, dim = 3 is
/// supported at coarse resolution and dim = 1 exists for validation oracles.
struct TorusGrid {
    int dim = 2;
    int n = 64;      // points per axis, power of two, >= 8
    double L = 1.0;  // physical side length

    TorusGrid() = default;
    TorusGrid(int dim_, int n_, double L_);

    double h() const { return L / n; }
    std::int64_t cells() const;
    double cell_volume() const;  // h^dim
    double coord(int i) const { return i * h(); }
    double center() const { return 0.5 * L; }

    /// Lexicographic index of multi-index (last axis fastest).
    std::int64_t flat(const std::array<int, 3>& idx) const;
    std::array<int, 3> unflat(std::int64_t id) const;
    /// Neighbor index with periodic wrap along `axis` (step +1 or -1).
    std::int64_t shift(std::int64_t id, int axis, int step) const;

    bool operator==(const TorusGrid& o) const {
        return dim == o.dim && n == o.n && L == o.L;
    }
};

/// Real scalar samples, one per cell, lexicographic layout.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const TorusGrid& g, double fill = 0.0)
        : grid_(g), v_(static_cast<std::size_t>(g.cells()), fill) {}
    ScalarField(const TorusGrid& g, std::vector<double> values);

    const TorusGrid& grid() const { return grid_; }
    std::size_t size() const { return v_.size(); }
    double operator[](std::size_t i) const { return v_[i]; }
    double& operator[](std::size_t i) { return v_[i]; }
    const std::vector<double>& values() const { return v_; }
    std::vector<double>& values() { return v_; }

    bool all_finite() const;

private:
    TorusGrid grid_;
    std::vector<double> v_;
};

/// dim-component real field, component-major layout.
class VectorField {
public:
    VectorField() = default;
    explicit VectorField(const TorusGrid& g, double fill = 0.0)
        : grid_(g), v_(static_cast<std::size_t>(g.cells()) * g.dim, fill) {}

    const TorusGrid& grid() const { return grid_; }
    double comp(int c, std::size_t i) const { return v_[c * ncells() + i]; }
    double& comp(int c, std::size_t i) { return v_[c * ncells() + i]; }
    const std::vector<double>& values() const { return v_; }
    std::vector<double>& values() { return v_; }
    std::size_t ncells() const { return static_cast<std::size_t>(grid_.cells()); }

    /// Max over cells of the Euclidean norm.
    double max_norm() const;
    bool all_finite() const;

private:
    TorusGrid grid_;
    std::vector<double> v_;
};

/// Discrete probability density: nonnegative, unit mass to 1e-12.
/// Constructors enforce the invariants; use `normalized` to build one from
/// arbitrary nonnegative samples.
class DensityField {
public:
    DensityField() = default;
    /// Validates invariants; throws NumericError if violated.
    explicit DensityField(ScalarField f);
    /// Clamp negatives at 0 (must be tiny) is NOT done here; callers that
    /// repair fields do so explicitly and audited. This factory only rescales
    /// nonnegative samples to unit mass.
    static DensityField normalized(ScalarField f);

    const TorusGrid& grid() const { return field_.grid(); }
    const ScalarField& field() const { return field_; }
    double operator[](std::size_t i) const { return field_[i]; }
    std::size_t size() const { return field_.size(); }

private:
    ScalarField field_;
};

/// Chemotactic sensitivity chi and consumption rate kappa: nonnegative,
/// nondecreasing functions of the concentration with kappa(0) = 0.
/// Polynomial coefficients or tabulated samples with linear interpolation.
class SensitivityFns {
public:
    /// Defaults to chi = kappa = 0 (no chemotaxis, no consumption).
    SensitivityFns() : chi_c_{0.0}, kap_c_{0.0} {}

    static SensitivityFns polynomial(std::vector<double> chi_coeff,
                                     std::vector<double> kappa_coeff,
                                     double c_max_hint = 10.0);
    static SensitivityFns tabulated(std::vector<double> c_nodes,
                                    std::vector<double> chi_vals,
                                    std::vector<double> kappa_vals);

    double chi(double c) const;
    double kappa(double c) const;
    /// kappa(c) = r*c for some constant r (enables the exact exponential
    /// reaction integrator); returns r via out parameter.
    bool kappa_linear(double& rate) const;

private:
    bool poly_ = true;
    std::vector<double> chi_c_, kap_c_;              // polynomial coefficients
    std::vector<double> nodes_, chi_t_, kap_t_;      // table
    double eval_poly(const std::vector<double>& c, double x) const;
    double eval_table(const std::vector<double>& y, double x) const;
    void validate(double c_max_hint) const;
};

// ---- discrete functionals ----

/// h^dim * sum of samples, fixed lexicographic order.
double integrate(const ScalarField& f);

/// (h^dim sum |f|^p)^(1/p); max|f| for p = infinity. p < 1 rejected.
double lp_norm(const ScalarField& f, double p);
double lp_norm(const VectorField& f, double p);  // pointwise Euclidean norm

/// Sum of lp norms of f and all centered-difference derivatives up to order k.
double sobolev_norm(const ScalarField& f, int k, double p);
/// Componentwise sum for vector fields.
double sobolev_norm(const VectorField& f, int k, double p);

/// h^dim sum |x - center|^2 rho(x), coordinates unwrapped in [0,L)^dim.
double second_moment(const DensityField& rho);

/// h^dim sum rho ln rho with 0 ln 0 = 0.
double entropy(const DensityField& rho);

/// h^dim sum |grad rho|^2 / max(rho, 1e-14); spectral gradient.
double fisher_information(const DensityField& rho);

constexpr double kFisherFloor = 1e-14;

// ---- spectral differential operators (see spectral.hpp for the engine) ----
VectorField gradient(const ScalarField& f);
ScalarField divergence(const VectorField& g);
ScalarField laplacian(const ScalarField& f);

}  // namespace ksns
