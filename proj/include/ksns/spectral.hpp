#pragma once

#include <complex>
#include <vector>

#include "ksns/grid.hpp"

namespace ksns {

/// Fourier-multiplier operators on the periodic grid. One engine is cached
/// per (dim, n, L); plans use FFTW_ESTIMATE so results are reproducible
/// run-to-run on a machine. Odd-order derivative multipliers zero the Nyquist
/// mode, and the laplacian is defined as div(grad(.)) so the operator
/// identity holds exactly in the discrete sense. Not thread-safe; the solver
/// is sequential by design (deterministic reduction orders).
class Spectral {
public:
    static const Spectral& get(const TorusGrid& g);

    ScalarField heat(const ScalarField& f, double t) const;          // e^{t Lap}
    VectorField heat(const VectorField& f, double t) const;
    /// Duhamel integral for a time-constant source: int_0^t e^{(t-s) Lap} h ds.
    ScalarField heat_duhamel(const ScalarField& h, double t) const;
    /// Exact-in-time semigroup of the compact finite-difference laplacian.
    /// Unlike the trigonometric propagator its matrix is elementwise
    /// nonnegative and doubly stochastic, so it preserves positivity and the
    /// maximum principle to roundoff; the density and concentration solvers
    /// use it for their diffusion substeps.
    ScalarField heat_positive(const ScalarField& f, double t) const;
    ScalarField gaussian_blur(const ScalarField& f, double r) const; // unit-mass kernel
    ScalarField derivative(const ScalarField& f, int axis) const;
    VectorField gradient(const ScalarField& f) const;
    ScalarField divergence(const VectorField& g) const;
    ScalarField laplacian(const ScalarField& f) const;
    /// Projection onto divergence-free fields (gradient part removed).
    VectorField leray(const VectorField& g) const;
    /// 2/3-rule truncation of high modes.
    ScalarField dealias(const ScalarField& f) const;
    VectorField dealias(const VectorField& f) const;
    /// Solve the compact-stencil (2nd-order finite-difference) Poisson
    /// problem Lap_h phi = rhs with zero-mean phi; used by the staggered
    /// projection of face velocities.
    ScalarField poisson_compact(const ScalarField& rhs) const;

    ~Spectral();
    Spectral(const Spectral&) = delete;
    Spectral& operator=(const Spectral&) = delete;

private:
    explicit Spectral(const TorusGrid& g);

    TorusGrid grid_;
    std::int64_t nreal_ = 0;    // n^dim
    std::int64_t ncplx_ = 0;    // n^(dim-1) * (n/2+1)
    int nc_last_ = 0;           // n/2+1
    void* plan_fwd_ = nullptr;  // fftw_plan
    void* plan_bwd_ = nullptr;
    double* rbuf_ = nullptr;
    std::complex<double>* cbuf_ = nullptr;

    std::vector<std::vector<double>> k_;      // wavenumber per axis index
    std::vector<std::vector<double>> k_odd_;  // same, Nyquist zeroed
    std::vector<std::vector<int>> m_;         // integer mode per axis index

    void forward(const std::vector<double>& in, std::complex<double>* out) const;
    void backward(const std::complex<double>* in, std::vector<double>& out) const;
    // multi-index of a complex-array entry, per axis
    void cplx_index(std::int64_t id, int* idx) const;

    template <class Mult>
    ScalarField apply_scalar(const ScalarField& f, Mult&& mult) const;
};

}  // namespace ksns
