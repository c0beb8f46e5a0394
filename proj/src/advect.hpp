#pragma once

// Internal finite-volume advection machinery shared by the density and
// concentration solvers: face velocities, first-order upwind fluxes, and a
// staggered projection that makes face fields divergence-free to roundoff.

#include "ksns/grid.hpp"
#include "ksns/spectral.hpp"

namespace ksns::detail {

/// Face-normal velocities; uf[axis][cell] is the speed on the face between
/// `cell` and its +1 neighbor along `axis`.
struct FaceVelocities {
    TorusGrid grid;
    std::vector<std::vector<double>> uf;

    double max_face_speed() const {
        double m = 0.0;
        for (const auto& c : uf)
            for (double x : c) m = std::max(m, std::abs(x));
        return m;
    }

    /// Max over cells of the discrete face divergence.
    double max_divergence() const {
        const std::size_t nc = static_cast<std::size_t>(grid.cells());
        double m = 0.0;
        for (std::size_t i = 0; i < nc; ++i) {
            double div = 0.0;
            for (int a = 0; a < grid.dim; ++a) {
                auto im = grid.shift(static_cast<std::int64_t>(i), a, -1);
                div += uf[a][i] - uf[a][im];
            }
            m = std::max(m, std::abs(div) / grid.h());
        }
        return m;
    }
};

inline FaceVelocities faces_from_cells(const VectorField& v) {
    const TorusGrid& g = v.grid();
    const std::size_t nc = v.ncells();
    FaceVelocities f;
    f.grid = g;
    f.uf.assign(g.dim, std::vector<double>(nc, 0.0));
    for (int a = 0; a < g.dim; ++a)
        for (std::size_t i = 0; i < nc; ++i) {
            auto ip = g.shift(static_cast<std::int64_t>(i), a, +1);
            f.uf[a][i] = 0.5 * (v.comp(a, i) + v.comp(a, ip));
        }
    return f;
}

/// 2D only: face velocities from a streamfunction sampled at cell corners
/// (psi[i,j] lives at (i+1/2, j+1/2)h). The discrete divergence of the
/// resulting face field telescopes to exactly zero.
inline FaceVelocities faces_from_stream2d(const ScalarField& psi_corner) {
    const TorusGrid& g = psi_corner.grid();
    if (g.dim != 2) throw ConfigError("streamfunction faces require dim = 2");
    const std::size_t nc = static_cast<std::size_t>(g.cells());
    const double invh = 1.0 / g.h();
    FaceVelocities f;
    f.grid = g;
    f.uf.assign(2, std::vector<double>(nc, 0.0));
    for (std::size_t i = 0; i < nc; ++i) {
        auto jm = g.shift(static_cast<std::int64_t>(i), 1, -1);
        auto im = g.shift(static_cast<std::int64_t>(i), 0, -1);
        f.uf[0][i] = (psi_corner[i] - psi_corner[jm]) * invh;   // x-face
        f.uf[1][i] = -(psi_corner[i] - psi_corner[im]) * invh;  // y-face
    }
    return f;
}

/// Staggered (MAC) projection: subtract the compact-stencil gradient part so
/// the face divergence vanishes to roundoff. Used for advecting velocities
/// that are divergence-free only in the spectral sense.
inline void mac_project(FaceVelocities& f) {
    const TorusGrid& g = f.grid;
    const std::size_t nc = static_cast<std::size_t>(g.cells());
    ScalarField div(g);
    for (std::size_t i = 0; i < nc; ++i) {
        double s = 0.0;
        for (int a = 0; a < g.dim; ++a) {
            auto im = g.shift(static_cast<std::int64_t>(i), a, -1);
            s += f.uf[a][i] - f.uf[a][im];
        }
        div[i] = s / g.h();
    }
    ScalarField phi = Spectral::get(g).poisson_compact(div);
    const double invh = 1.0 / g.h();
    for (int a = 0; a < g.dim; ++a)
        for (std::size_t i = 0; i < nc; ++i) {
            auto ip = g.shift(static_cast<std::int64_t>(i), a, +1);
            f.uf[a][i] -= (phi[ip] - phi[i]) * invh;
        }
}

/// Conservative first-order upwind step (unsplit, all axes from the same
/// input). Positivity-preserving under the CFL bound; mass telescopes.
inline ScalarField upwind_advect(const ScalarField& q, const FaceVelocities& f, double dt) {
    const TorusGrid& g = q.grid();
    const std::size_t nc = static_cast<std::size_t>(g.cells());
    const double lam = dt / g.h();
    std::vector<std::vector<double>> flux(g.dim, std::vector<double>(nc, 0.0));
    for (int a = 0; a < g.dim; ++a)
        for (std::size_t i = 0; i < nc; ++i) {
            auto ip = g.shift(static_cast<std::int64_t>(i), a, +1);
            double u = f.uf[a][i];
            flux[a][i] = u > 0.0 ? u * q[i] : u * q[ip];
        }
    ScalarField out(g);
    for (std::size_t i = 0; i < nc; ++i) {
        double dF = 0.0;
        for (int a = 0; a < g.dim; ++a) {
            auto im = g.shift(static_cast<std::int64_t>(i), a, -1);
            dF += flux[a][i] - flux[a][im];
        }
        out[i] = q[i] - lam * dF;
    }
    return out;
}

}  // namespace ksns::detail
