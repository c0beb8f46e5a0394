#include "ksns/grid.hpp"

#include <algorithm>
#include <cmath>

#include "ksns/spectral.hpp"

namespace ksns {

TorusGrid::TorusGrid(int dim_, int n_, double L_) : dim(dim_), n(n_), L(L_) {
    if (dim < 1 || dim > 3) throw ConfigError("grid dim must be 1, 2 or 3");
    if (n < 8 || (n & (n - 1)) != 0)
        throw ConfigError("grid n must be a power of two >= 8");
    if (!(L > 0.0)) throw ConfigError("grid side length must be positive");
}

std::int64_t TorusGrid::cells() const {
    std::int64_t c = 1;
    for (int a = 0; a < dim; ++a) c *= n;
    return c;
}

double TorusGrid::cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= h();
    return v;
}

std::int64_t TorusGrid::flat(const std::array<int, 3>& idx) const {
    std::int64_t id = 0;
    for (int a = 0; a < dim; ++a) id = id * n + idx[a];
    return id;
}

std::array<int, 3> TorusGrid::unflat(std::int64_t id) const {
    std::array<int, 3> idx{0, 0, 0};
    for (int a = dim - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(id % n);
        id /= n;
    }
    return idx;
}

std::int64_t TorusGrid::shift(std::int64_t id, int axis, int step) const {
    // stride of `axis` in the lexicographic layout
    std::int64_t stride = 1;
    for (int a = dim - 1; a > axis; --a) stride *= n;
    std::int64_t block = stride * n;
    std::int64_t base = (id / block) * block;
    std::int64_t rem = id - base;
    std::int64_t pos = rem / stride;
    std::int64_t off = rem - pos * stride;
    std::int64_t npos = (pos + step + n) % n;
    return base + npos * stride + off;
}

ScalarField::ScalarField(const TorusGrid& g, std::vector<double> values)
    : grid_(g), v_(std::move(values)) {
    if (v_.size() != static_cast<std::size_t>(g.cells()))
        throw ConfigError("scalar field size does not match grid");
}

bool ScalarField::all_finite() const {
    for (double x : v_)
        if (!std::isfinite(x)) return false;
    return true;
}

double VectorField::max_norm() const {
    const std::size_t nc = ncells();
    double m = 0.0;
    for (std::size_t i = 0; i < nc; ++i) {
        double s = 0.0;
        for (int c = 0; c < grid_.dim; ++c) {
            double x = comp(c, i);
            s += x * x;
        }
        m = std::max(m, s);
    }
    return std::sqrt(m);
}

bool VectorField::all_finite() const {
    for (double x : v_)
        if (!std::isfinite(x)) return false;
    return true;
}

DensityField::DensityField(ScalarField f) : field_(std::move(f)) {
    double mn = 0.0;
    for (std::size_t i = 0; i < field_.size(); ++i) mn = std::min(mn, field_[i]);
    if (mn < 0.0)
        throw NumericError("density has negative entries (min = " + fmt_g17(mn) + ")");
    double mass = integrate(field_);
    if (std::abs(mass - 1.0) > 1e-12)
        throw NumericError("density mass " + fmt_g17(mass) + " deviates from 1 beyond 1e-12");
}

DensityField DensityField::normalized(ScalarField f) {
    double mn = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) mn = std::min(mn, f[i]);
    if (mn < 0.0) throw NumericError("cannot normalize: negative samples");
    double mass = integrate(f);
    if (!(mass > 0.0)) throw NumericError("cannot normalize: zero mass");
    for (auto& x : f.values()) x /= mass;
    return DensityField(std::move(f));
}

// ---- sensitivity functions ----

SensitivityFns SensitivityFns::polynomial(std::vector<double> chi_coeff,
                                          std::vector<double> kappa_coeff,
                                          double c_max_hint) {
    SensitivityFns s;
    s.poly_ = true;
    s.chi_c_ = std::move(chi_coeff);
    s.kap_c_ = std::move(kappa_coeff);
    if (!s.kap_c_.empty() && s.kap_c_[0] != 0.0)
        throw ConfigError("kappa(0) must be 0");
    s.validate(c_max_hint);
    return s;
}

SensitivityFns SensitivityFns::tabulated(std::vector<double> c_nodes,
                                         std::vector<double> chi_vals,
                                         std::vector<double> kappa_vals) {
    SensitivityFns s;
    s.poly_ = false;
    s.nodes_ = std::move(c_nodes);
    s.chi_t_ = std::move(chi_vals);
    s.kap_t_ = std::move(kappa_vals);
    if (s.nodes_.size() < 2 || s.nodes_.size() != s.chi_t_.size() ||
        s.nodes_.size() != s.kap_t_.size())
        throw ConfigError("sensitivity table needs matching node/value lists");
    if (!std::is_sorted(s.nodes_.begin(), s.nodes_.end()))
        throw ConfigError("sensitivity table nodes must be increasing");
    if (s.nodes_.front() != 0.0 || s.kap_t_.front() != 0.0)
        throw ConfigError("sensitivity table must start at c = 0 with kappa(0) = 0");
    s.validate(s.nodes_.back());
    return s;
}

void SensitivityFns::validate(double c_max_hint) const {
    const int samples = 256;
    double prev_chi = -1.0, prev_kap = -1.0;
    for (int i = 0; i <= samples; ++i) {
        double c = c_max_hint * i / samples;
        double x = chi(c), k = kappa(c);
        if (x < 0.0 || k < 0.0)
            throw ConfigError("chi and kappa must be nonnegative on [0, c_max]");
        if (i > 0 && (x < prev_chi - 1e-15 || k < prev_kap - 1e-15))
            throw ConfigError("chi and kappa must be nondecreasing on [0, c_max]");
        prev_chi = x;
        prev_kap = k;
    }
    if (kappa(0.0) != 0.0) throw ConfigError("kappa(0) must be 0");
}

double SensitivityFns::eval_poly(const std::vector<double>& c, double x) const {
    double r = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) r = r * x + c[i];
    return r;
}

double SensitivityFns::eval_table(const std::vector<double>& y, double x) const {
    if (x <= nodes_.front()) return y.front();
    if (x >= nodes_.back()) return y.back();
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
    std::size_t j = static_cast<std::size_t>(it - nodes_.begin());
    double t = (x - nodes_[j - 1]) / (nodes_[j] - nodes_[j - 1]);
    return (1.0 - t) * y[j - 1] + t * y[j];
}

double SensitivityFns::chi(double c) const {
    return poly_ ? eval_poly(chi_c_, c) : eval_table(chi_t_, c);
}

double SensitivityFns::kappa(double c) const {
    return poly_ ? eval_poly(kap_c_, c) : eval_table(kap_t_, c);
}

bool SensitivityFns::kappa_linear(double& rate) const {
    if (!poly_) return false;
    for (std::size_t i = 0; i < kap_c_.size(); ++i)
        if (i != 1 && kap_c_[i] != 0.0) return false;
    rate = kap_c_.size() > 1 ? kap_c_[1] : 0.0;
    return true;
}

// ---- functionals ----

double integrate(const ScalarField& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f[i];
    return s * f.grid().cell_volume();
}

double lp_norm(const ScalarField& f, double p) {
    if (std::isinf(p)) {
        double m = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, std::abs(f[i]));
        return m;
    }
    if (p < 1.0) throw ConfigError("lp_norm requires p >= 1");
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += std::pow(std::abs(f[i]), p);
    return std::pow(s * f.grid().cell_volume(), 1.0 / p);
}

double lp_norm(const VectorField& f, double p) {
    const std::size_t nc = f.ncells();
    const int d = f.grid().dim;
    if (std::isinf(p)) return f.max_norm();
    if (p < 1.0) throw ConfigError("lp_norm requires p >= 1");
    double s = 0.0;
    for (std::size_t i = 0; i < nc; ++i) {
        double q = 0.0;
        for (int c = 0; c < d; ++c) q += f.comp(c, i) * f.comp(c, i);
        s += std::pow(q, 0.5 * p);
    }
    return std::pow(s * f.grid().cell_volume(), 1.0 / p);
}

namespace {

// centered first difference along axis
ScalarField diff1(const ScalarField& f, int axis) {
    const TorusGrid& g = f.grid();
    ScalarField out(g);
    const double inv2h = 1.0 / (2.0 * g.h());
    for (std::size_t i = 0; i < f.size(); ++i) {
        auto ip = g.shift(static_cast<std::int64_t>(i), axis, +1);
        auto im = g.shift(static_cast<std::int64_t>(i), axis, -1);
        out[i] = (f[ip] - f[im]) * inv2h;
    }
    return out;
}

// centered second difference along axis
ScalarField diff2(const ScalarField& f, int axis) {
    const TorusGrid& g = f.grid();
    ScalarField out(g);
    const double invh2 = 1.0 / (g.h() * g.h());
    for (std::size_t i = 0; i < f.size(); ++i) {
        auto ip = g.shift(static_cast<std::int64_t>(i), axis, +1);
        auto im = g.shift(static_cast<std::int64_t>(i), axis, -1);
        out[i] = (f[ip] - 2.0 * f[i] + f[im]) * invh2;
    }
    return out;
}

}  // namespace

double sobolev_norm(const ScalarField& f, int k, double p) {
    if (k != 1 && k != 2) throw ConfigError("sobolev_norm supports k in {1,2}");
    const int d = f.grid().dim;
    double s = lp_norm(f, p);
    std::vector<ScalarField> first;
    for (int a = 0; a < d; ++a) {
        first.push_back(diff1(f, a));
        s += lp_norm(first.back(), p);
    }
    if (k == 2) {
        for (int a = 0; a < d; ++a) s += lp_norm(diff2(f, a), p);
        for (int a = 0; a < d; ++a)
            for (int b = a + 1; b < d; ++b) s += lp_norm(diff1(first[a], b), p);
    }
    return s;
}

double sobolev_norm(const VectorField& f, int k, double p) {
    const TorusGrid& g = f.grid();
    double s = 0.0;
    for (int c = 0; c < g.dim; ++c) {
        ScalarField comp(g);
        for (std::size_t i = 0; i < comp.size(); ++i) comp[i] = f.comp(c, i);
        s += sobolev_norm(comp, k, p);
    }
    return s;
}

double second_moment(const DensityField& rho) {
    const TorusGrid& g = rho.grid();
    const double c = g.center();
    double s = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        auto idx = g.unflat(static_cast<std::int64_t>(i));
        double r2 = 0.0;
        for (int a = 0; a < g.dim; ++a) {
            double dx = g.coord(idx[a]) - c;
            r2 += dx * dx;
        }
        s += r2 * rho[i];
    }
    return s * g.cell_volume();
}

double entropy(const DensityField& rho) {
    double s = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        double r = rho[i];
        if (r > 0.0) s += r * std::log(r);
    }
    return s * rho.grid().cell_volume();
}

double fisher_information(const DensityField& rho) {
    // centered differences: the spectral gradient of a clipped density rings
    // at vacuum cells and the floor would amplify that noise
    const TorusGrid& g = rho.grid();
    const double inv2h = 1.0 / (2.0 * g.h());
    double s = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        double q = 0.0;
        for (int a = 0; a < g.dim; ++a) {
            auto ip = g.shift(static_cast<std::int64_t>(i), a, +1);
            auto im = g.shift(static_cast<std::int64_t>(i), a, -1);
            double d1 = (rho[ip] - rho[im]) * inv2h;
            q += d1 * d1;
        }
        s += q / std::max(rho[i], kFisherFloor);
    }
    return s * g.cell_volume();
}

VectorField gradient(const ScalarField& f) {
    return Spectral::get(f.grid()).gradient(f);
}

ScalarField divergence(const VectorField& g) {
    return Spectral::get(g.grid()).divergence(g);
}

ScalarField laplacian(const ScalarField& f) {
    return Spectral::get(f.grid()).laplacian(f);
}

}  // namespace ksns
