#include "ksns/navier_stokes.hpp"

#include <cmath>
#include <limits>

#include "ksns/spectral.hpp"

namespace ksns {

VectorField leray_project(const VectorField& g) {
    if (g.grid().dim == 3 && g.grid().n > kMax3dResolution)
        throw CapacityError("3D fluid solves are capped at n = " +
                            std::to_string(kMax3dResolution));
    return Spectral::get(g.grid()).leray(g);
}

double kinetic_energy(const VectorField& u) {
    double n2 = lp_norm(u, 2.0);
    return 0.5 * n2 * n2;
}

VectorField advection_term(const VectorField& w) {
    const TorusGrid& g = w.grid();
    const Spectral& sp = Spectral::get(g);
    const std::size_t nc = w.ncells();
    VectorField wt = sp.dealias(w);
    // grad of each dealiased component
    std::vector<VectorField> grads;
    grads.reserve(g.dim);
    for (int j = 0; j < g.dim; ++j) {
        ScalarField comp(g);
        for (std::size_t i = 0; i < nc; ++i) comp[i] = wt.comp(j, i);
        grads.push_back(sp.gradient(comp));
    }
    VectorField adv(g);
    for (int j = 0; j < g.dim; ++j)
        for (std::size_t i = 0; i < nc; ++i) {
            double s = 0.0;
            for (int a = 0; a < g.dim; ++a) s += wt.comp(a, i) * grads[j].comp(a, i);
            adv.comp(j, i) = -s;
        }
    return sp.dealias(adv);
}

std::array<double, 3> momentum(const VectorField& u) {
    const TorusGrid& g = u.grid();
    const std::size_t nc = u.ncells();
    std::array<double, 3> p{0.0, 0.0, 0.0};
    for (int c = 0; c < g.dim; ++c) {
        double s = 0.0;
        for (std::size_t i = 0; i < nc; ++i) s += u.comp(c, i);
        p[c] = s * g.cell_volume();
    }
    return p;
}

FluidState step_stokes(const VectorField& u, const VectorField& source, double dt) {
    const TorusGrid& g = u.grid();
    if (g.dim == 3 && g.n > kMax3dResolution)
        throw CapacityError("3D fluid solves are capped at n = " +
                            std::to_string(kMax3dResolution));
    const Spectral& sp = Spectral::get(g);
    const std::size_t total = u.values().size();
    VectorField next(g);
    for (std::size_t i = 0; i < total; ++i)
        next.values()[i] = u.values()[i] + dt * source.values()[i];
    next = sp.heat(next, dt);
    next = sp.leray(next);

    FluidState out;
    out.max_div = lp_norm(sp.divergence(next), std::numeric_limits<double>::infinity());
    if (out.max_div > kDivergenceBudget)
        throw NumericError("divergence budget exceeded: max |div u| = " +
                           fmt_g17(out.max_div));
    out.energy = kinetic_energy(next);
    out.u = std::move(next);
    return out;
}

FluidState step_ns(const VectorField& u, const DensityField& rho,
                   const VectorField& grad_phi, double dt) {
    const TorusGrid& g = u.grid();
    const double umax = u.max_norm();
    if (umax > 0.0 && dt > g.h() / (2.0 * umax))
        throw NumericError("CFL violated: dt = " + fmt_g17(dt) + ", admissible dt <= " +
                           fmt_g17(g.h() / (2.0 * umax)));
    VectorField source = advection_term(u);
    const std::size_t nc = u.ncells();
    for (int c = 0; c < g.dim; ++c)
        for (std::size_t i = 0; i < nc; ++i)
            source.comp(c, i) -= rho[i] * grad_phi.comp(c, i);
    return step_stokes(u, source, dt);
}

}  // namespace ksns
