#include "ksns/scalar_transport.hpp"

#include <cmath>

#include "advect.hpp"
#include "ksns/spectral.hpp"

namespace ksns {

ConcentrationState ConcentrationState::wrap(ScalarField f) {
    ConcentrationState s;
    s.c_min = s.c_max = f.size() ? f[0] : 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        s.c_min = std::min(s.c_min, f[i]);
        s.c_max = std::max(s.c_max, f[i]);
    }
    s.c = std::move(f);
    return s;
}

namespace {

void check_preconditions(const ScalarField& c, const VectorField& u, double dt) {
    const TorusGrid& g = c.grid();
    for (std::size_t i = 0; i < c.size(); ++i)
        if (c[i] < 0.0)
            throw NumericError("step_c requires a nonnegative concentration");
    double div = lp_norm(divergence(u), std::numeric_limits<double>::infinity());
    if (div > 1e-8)
        throw NumericError("step_c requires divergence-free u; got max |div u| = " +
                           fmt_g17(div));
    const double h = g.h();
    double umax = u.max_norm();
    double dt_max = std::min(umax > 0.0 ? h / (2.0 * umax)
                                        : std::numeric_limits<double>::infinity(),
                             h * h / (2.0 * g.dim));
    if (dt > dt_max)
        throw NumericError("CFL violated: dt = " + fmt_g17(dt) +
                           ", admissible dt <= " + fmt_g17(dt_max));
}

ScalarField advect_max_principle(const ScalarField& f, const VectorField& u, double dt) {
    // project the face field so the upwind update is a convex combination
    detail::FaceVelocities faces = detail::faces_from_cells(u);
    detail::mac_project(faces);
    return detail::upwind_advect(f, faces, dt);
}

ScalarField finish(ScalarField f) {
    double mn = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) mn = std::min(mn, f[i]);
    if (mn < -1e-12)
        throw NumericError("concentration nonnegativity budget exceeded: min = " +
                           fmt_g17(mn));
    for (auto& x : f.values())
        if (x < 0.0) x = 0.0;
    return f;
}

}  // namespace

ScalarField step_c(const ScalarField& c, const VectorField& u, const DensityField& rho,
                   const SensitivityFns& fns, double dt) {
    check_preconditions(c, u, dt);
    const Spectral& sp = Spectral::get(c.grid());
    ScalarField f = sp.heat_positive(c, 0.5 * dt);
    f = advect_max_principle(f, u, dt);
    double rate = 0.0;
    if (fns.kappa_linear(rate)) {
        for (std::size_t i = 0; i < f.size(); ++i)
            f[i] *= std::exp(-rate * rho[i] * dt);
    } else {
        for (std::size_t i = 0; i < f.size(); ++i)
            f[i] = std::max(f[i] - dt * fns.kappa(f[i]) * rho[i], 0.0);
    }
    f = sp.heat_positive(f, 0.5 * dt);
    return finish(std::move(f));
}

ScalarField step_c_frozen_sink(const ScalarField& c, const VectorField& u,
                               const ScalarField& sink, double dt) {
    check_preconditions(c, u, dt);
    const Spectral& sp = Spectral::get(c.grid());
    ScalarField f = sp.heat_positive(c, 0.5 * dt);
    f = advect_max_principle(f, u, dt);
    for (std::size_t i = 0; i < f.size(); ++i)
        f[i] = std::max(f[i] - dt * sink[i], 0.0);
    f = sp.heat_positive(f, 0.5 * dt);
    return finish(std::move(f));
}

double consumption_record(const ScalarField& c_before, const ScalarField& c_after,
                          const DensityField& rho, double dt) {
    if (!(c_before.grid() == rho.grid()))
        throw ConfigError("consumption_record: grid mismatch");
    return (integrate(c_before) - integrate(c_after)) / dt;
}

}  // namespace ksns
