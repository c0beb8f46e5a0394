#include "ksns/random_fields.hpp"

#include <cmath>

namespace ksns {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

struct ModeSum {
    struct Mode {
        int m[3];
        double a, b;
    };
    std::vector<Mode> modes;
    double k0 = 1.0;

    double eval(const double* x, int dim) const {
        double s = 0.0;
        for (const Mode& md : modes) {
            double phase = 0.0;
            for (int ax = 0; ax < dim; ++ax) phase += k0 * md.m[ax] * x[ax];
            s += md.a * std::cos(phase) + md.b * std::sin(phase);
        }
        return s;
    }

    // partial derivative along `axis`
    double eval_d(const double* x, int dim, int axis) const {
        double s = 0.0;
        for (const Mode& md : modes) {
            double phase = 0.0;
            for (int ax = 0; ax < dim; ++ax) phase += k0 * md.m[ax] * x[ax];
            s += (-md.a * std::sin(phase) + md.b * std::cos(phase)) * k0 * md.m[axis];
        }
        return s;
    }
};

ModeSum draw_modes(const TorusGrid& g, std::mt19937_64& rng, int kmax) {
    ModeSum ms;
    ms.k0 = kTwoPi / g.L;
    int lo[3] = {-kmax, -kmax, -kmax}, hi[3] = {kmax, kmax, kmax};
    for (int ax = g.dim; ax < 3; ++ax) lo[ax] = hi[ax] = 0;
    for (int m0 = lo[0]; m0 <= hi[0]; ++m0)
        for (int m1 = lo[1]; m1 <= hi[1]; ++m1)
            for (int m2 = lo[2]; m2 <= hi[2]; ++m2) {
                if (m0 == 0 && m1 == 0 && m2 == 0) continue;
                double decay = 1.0 + m0 * m0 + m1 * m1 + m2 * m2;
                ModeSum::Mode md;
                md.m[0] = m0;
                md.m[1] = m1;
                md.m[2] = m2;
                md.a = rand_range(rng, -1.0, 1.0) / decay;
                md.b = rand_range(rng, -1.0, 1.0) / decay;
                ms.modes.push_back(md);
            }
    return ms;
}

void cell_coords(const TorusGrid& g, std::size_t i, double* x) {
    auto idx = g.unflat(static_cast<std::int64_t>(i));
    for (int ax = 0; ax < g.dim; ++ax) x[ax] = g.coord(idx[ax]);
}

ScalarField sample_scalar(const TorusGrid& g, const ModeSum& ms) {
    ScalarField f(g);
    double x[3] = {0, 0, 0};
    for (std::size_t i = 0; i < f.size(); ++i) {
        cell_coords(g, i, x);
        f[i] = ms.eval(x, g.dim);
    }
    return f;
}

void rescale_max(std::vector<double>& v, double amp) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    if (m == 0.0) return;
    for (double& x : v) x *= amp / m;
}

}  // namespace

ScalarField random_smooth_scalar(const TorusGrid& g, std::mt19937_64& rng, int kmax,
                                 double amp) {
    ScalarField f = sample_scalar(g, draw_modes(g, rng, kmax));
    rescale_max(f.values(), amp);
    return f;
}

VectorField random_smooth_drift(const TorusGrid& g, std::mt19937_64& rng, int kmax,
                                double amp) {
    VectorField v(g);
    for (int c = 0; c < g.dim; ++c) {
        ScalarField f = sample_scalar(g, draw_modes(g, rng, kmax));
        for (std::size_t i = 0; i < f.size(); ++i) v.comp(c, i) = f[i];
    }
    rescale_max(v.values(), amp);
    return v;
}

VectorField compressive_drift(const TorusGrid& g, std::mt19937_64& rng, int kmax,
                              double amp) {
    ModeSum pot = draw_modes(g, rng, kmax);
    VectorField v(g);
    double x[3] = {0, 0, 0};
    for (std::size_t i = 0; i < v.ncells(); ++i) {
        cell_coords(g, i, x);
        for (int c = 0; c < g.dim; ++c) v.comp(c, i) = pot.eval_d(x, g.dim, c);
    }
    rescale_max(v.values(), amp);
    return v;
}

StreamDrift divfree_drift(const TorusGrid& g, std::mt19937_64& rng, int kmax, double amp) {
    if (g.dim != 2) throw ConfigError("divfree_drift is 2D only");
    ModeSum psi = draw_modes(g, rng, kmax);
    // scale the streamfunction so the rotated gradient has max amplitude amp
    StreamDrift sd;
    sd.cells = VectorField(g);
    double x[3] = {0, 0, 0};
    double vmax = 0.0;
    for (std::size_t i = 0; i < sd.cells.ncells(); ++i) {
        cell_coords(g, i, x);
        double vx = psi.eval_d(x, 2, 1);
        double vy = -psi.eval_d(x, 2, 0);
        sd.cells.comp(0, i) = vx;
        sd.cells.comp(1, i) = vy;
        vmax = std::max(vmax, std::sqrt(vx * vx + vy * vy));
    }
    double scale = vmax > 0.0 ? amp / vmax : 1.0;
    for (double& v : sd.cells.values()) v *= scale;
    sd.corners = ScalarField(g);
    const double half = 0.5 * g.h();
    for (std::size_t i = 0; i < sd.corners.size(); ++i) {
        cell_coords(g, i, x);
        x[0] += half;
        x[1] += half;
        sd.corners[i] = psi.eval(x, 2) * scale;
    }
    return sd;
}

DensityField random_density(const TorusGrid& g, std::mt19937_64& rng, int kmax,
                            double contrast) {
    ScalarField s = random_smooth_scalar(g, rng, kmax, contrast);
    ScalarField f(g);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::exp(s[i]);
    return DensityField::normalized(std::move(f));
}

DensityField gaussian_density(const TorusGrid& g, double sigma) {
    if (!(sigma > 0.0)) throw ConfigError("gaussian density needs sigma > 0");
    ScalarField f(g);
    const double c = g.center();
    double x[3] = {0, 0, 0};
    for (std::size_t i = 0; i < f.size(); ++i) {
        cell_coords(g, i, x);
        double d2 = 0.0;
        for (int ax = 0; ax < g.dim; ++ax) d2 += (x[ax] - c) * (x[ax] - c);
        f[i] = std::exp(-0.5 * d2 / (sigma * sigma));
    }
    return DensityField::normalized(std::move(f));
}

DensityField two_bump_density(const TorusGrid& g, double sigma, double offset) {
    ScalarField f(g);
    const double c = g.center();
    double x[3] = {0, 0, 0};
    for (std::size_t i = 0; i < f.size(); ++i) {
        cell_coords(g, i, x);
        double d2a = (x[0] - c - offset) * (x[0] - c - offset);
        double d2b = (x[0] - c + offset) * (x[0] - c + offset);
        for (int ax = 1; ax < g.dim; ++ax) {
            double dx = x[ax] - c;
            d2a += dx * dx;
            d2b += dx * dx;
        }
        f[i] = std::exp(-0.5 * d2a / (sigma * sigma)) +
               std::exp(-0.5 * d2b / (sigma * sigma));
    }
    return DensityField::normalized(std::move(f));
}

ScalarField gaussian_scalar(const TorusGrid& g, double amp, double sigma, double base) {
    ScalarField f(g);
    const double c = g.center();
    double x[3] = {0, 0, 0};
    for (std::size_t i = 0; i < f.size(); ++i) {
        cell_coords(g, i, x);
        double d2 = 0.0;
        for (int ax = 0; ax < g.dim; ++ax) d2 += (x[ax] - c) * (x[ax] - c);
        f[i] = base + amp * std::exp(-0.5 * d2 / (sigma * sigma));
    }
    return f;
}

VectorField taylor_green(const TorusGrid& g, double amp) {
    if (g.dim != 2) throw ConfigError("taylor_green is 2D only");
    VectorField u(g);
    const double k = kTwoPi / g.L;
    double x[3] = {0, 0, 0};
    for (std::size_t i = 0; i < u.ncells(); ++i) {
        cell_coords(g, i, x);
        u.comp(0, i) = amp * std::sin(k * x[0]) * std::cos(k * x[1]);
        u.comp(1, i) = -amp * std::cos(k * x[0]) * std::sin(k * x[1]);
    }
    return u;
}

VectorField grad_phi_gaussian(const TorusGrid& g, double amp, double width) {
    if (!(width > 0.0)) throw ConfigError("potential bump needs width > 0");
    VectorField v(g);
    const double c = g.center();
    double x[3] = {0, 0, 0};
    for (std::size_t i = 0; i < v.ncells(); ++i) {
        cell_coords(g, i, x);
        double d2 = 0.0;
        for (int ax = 0; ax < g.dim; ++ax) d2 += (x[ax] - c) * (x[ax] - c);
        double e = amp * std::exp(-0.5 * d2 / (width * width));
        for (int ax = 0; ax < g.dim; ++ax)
            v.comp(ax, i) = -(x[ax] - c) / (width * width) * e;
    }
    return v;
}

double boundary_ring_mass(const DensityField& rho) {
    const TorusGrid& g = rho.grid();
    const double ring = 10.0 * g.h();
    double mass = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        auto idx = g.unflat(static_cast<std::int64_t>(i));
        double dist = g.L;
        for (int ax = 0; ax < g.dim; ++ax) {
            double x = g.coord(idx[ax]);
            dist = std::min(dist, std::min(x, g.L - x));
        }
        if (dist < ring) mass += rho[i];
    }
    return mass * g.cell_volume();
}

}  // namespace ksns
