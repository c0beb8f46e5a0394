#include "ksns/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <tuple>

namespace ksns {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

Spectral::Spectral(const TorusGrid& g) : grid_(g) {
    const int d = g.dim;
    const int n = g.n;
    nc_last_ = n / 2 + 1;
    nreal_ = g.cells();
    ncplx_ = nreal_ / n * nc_last_;

    rbuf_ = fftw_alloc_real(static_cast<std::size_t>(nreal_));
    cbuf_ = reinterpret_cast<std::complex<double>*>(
        fftw_alloc_complex(static_cast<std::size_t>(ncplx_)));

    std::vector<int> dims(d, n);
    plan_fwd_ = fftw_plan_dft_r2c(d, dims.data(), rbuf_,
                                  reinterpret_cast<fftw_complex*>(cbuf_),
                                  FFTW_ESTIMATE);
    plan_bwd_ = fftw_plan_dft_c2r(d, dims.data(),
                                  reinterpret_cast<fftw_complex*>(cbuf_), rbuf_,
                                  FFTW_ESTIMATE);

    k_.resize(d);
    k_odd_.resize(d);
    m_.resize(d);
    const double k0 = kTwoPi / g.L;
    for (int a = 0; a < d; ++a) {
        int len = (a == d - 1) ? nc_last_ : n;
        k_[a].resize(len);
        k_odd_[a].resize(len);
        m_[a].resize(len);
        for (int i = 0; i < len; ++i) {
            int m = (i <= n / 2) ? i : i - n;
            m_[a][i] = m;
            k_[a][i] = k0 * m;
            k_odd_[a][i] = (std::abs(m) == n / 2) ? 0.0 : k0 * m;
        }
    }
}

Spectral::~Spectral() {
    fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
    fftw_free(rbuf_);
    fftw_free(cbuf_);
}

const Spectral& Spectral::get(const TorusGrid& g) {
    using Key = std::tuple<int, int, double>;
    static std::map<Key, std::unique_ptr<Spectral>> cache;
    Key key{g.dim, g.n, g.L};
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, std::unique_ptr<Spectral>(new Spectral(g))).first;
    return *it->second;
}

void Spectral::forward(const std::vector<double>& in, std::complex<double>* out) const {
    std::copy(in.begin(), in.end(), rbuf_);
    fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_fwd_), rbuf_,
                         reinterpret_cast<fftw_complex*>(cbuf_));
    std::copy(cbuf_, cbuf_ + ncplx_, out);
}

void Spectral::backward(const std::complex<double>* in, std::vector<double>& out) const {
    std::copy(in, in + ncplx_, cbuf_);
    fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_bwd_),
                         reinterpret_cast<fftw_complex*>(cbuf_), rbuf_);
    const double scale = 1.0 / static_cast<double>(nreal_);
    out.resize(static_cast<std::size_t>(nreal_));
    for (std::int64_t i = 0; i < nreal_; ++i) out[i] = rbuf_[i] * scale;
}

void Spectral::cplx_index(std::int64_t id, int* idx) const {
    const int d = grid_.dim;
    for (int a = d - 1; a >= 0; --a) {
        int len = (a == d - 1) ? nc_last_ : grid_.n;
        idx[a] = static_cast<int>(id % len);
        id /= len;
    }
}

template <class Mult>
ScalarField Spectral::apply_scalar(const ScalarField& f, Mult&& mult) const {
    std::vector<std::complex<double>> hat(static_cast<std::size_t>(ncplx_));
    forward(f.values(), hat.data());
    int idx[3] = {0, 0, 0};
    for (std::int64_t i = 0; i < ncplx_; ++i) {
        cplx_index(i, idx);
        hat[i] *= mult(idx);
    }
    ScalarField out(grid_);
    backward(hat.data(), out.values());
    return out;
}

ScalarField Spectral::heat(const ScalarField& f, double t) const {
    const int d = grid_.dim;
    return apply_scalar(f, [&](const int* idx) {
        double k2 = 0.0;
        for (int a = 0; a < d; ++a) {
            double k = k_[a][idx[a]];
            k2 += k * k;
        }
        return std::complex<double>(std::exp(-t * k2), 0.0);
    });
}

VectorField Spectral::heat(const VectorField& f, double t) const {
    VectorField out(grid_);
    const std::size_t nc = f.ncells();
    for (int c = 0; c < grid_.dim; ++c) {
        ScalarField comp(grid_);
        for (std::size_t i = 0; i < nc; ++i) comp[i] = f.comp(c, i);
        ScalarField hc = heat(comp, t);
        for (std::size_t i = 0; i < nc; ++i) out.comp(c, i) = hc[i];
    }
    return out;
}

ScalarField Spectral::heat_positive(const ScalarField& f, double t) const {
    const int d = grid_.dim;
    const double h = grid_.h();
    const double pi_over_n = 3.14159265358979323846 / grid_.n;
    return apply_scalar(f, [&](const int* idx) {
        double lam = 0.0;
        for (int a = 0; a < d; ++a) {
            double s = 2.0 * std::sin(pi_over_n * std::abs(m_[a][idx[a]])) / h;
            lam += s * s;
        }
        return std::complex<double>(std::exp(-t * lam), 0.0);
    });
}

ScalarField Spectral::heat_duhamel(const ScalarField& h, double t) const {
    const int d = grid_.dim;
    return apply_scalar(h, [&](const int* idx) {
        double k2 = 0.0;
        for (int a = 0; a < d; ++a) {
            double k = k_[a][idx[a]];
            k2 += k * k;
        }
        double m = (k2 == 0.0) ? t : (1.0 - std::exp(-t * k2)) / k2;
        return std::complex<double>(m, 0.0);
    });
}

ScalarField Spectral::gaussian_blur(const ScalarField& f, double r) const {
    const int d = grid_.dim;
    return apply_scalar(f, [&](const int* idx) {
        double k2 = 0.0;
        for (int a = 0; a < d; ++a) {
            double k = k_[a][idx[a]];
            k2 += k * k;
        }
        return std::complex<double>(std::exp(-0.5 * r * r * k2), 0.0);
    });
}

ScalarField Spectral::derivative(const ScalarField& f, int axis) const {
    return apply_scalar(f, [&](const int* idx) {
        return std::complex<double>(0.0, k_odd_[axis][idx[axis]]);
    });
}

VectorField Spectral::gradient(const ScalarField& f) const {
    VectorField out(grid_);
    const std::size_t nc = static_cast<std::size_t>(nreal_);
    for (int a = 0; a < grid_.dim; ++a) {
        ScalarField da = derivative(f, a);
        for (std::size_t i = 0; i < nc; ++i) out.comp(a, i) = da[i];
    }
    return out;
}

ScalarField Spectral::divergence(const VectorField& g) const {
    ScalarField out(grid_, 0.0);
    const std::size_t nc = g.ncells();
    for (int a = 0; a < grid_.dim; ++a) {
        ScalarField comp(grid_);
        for (std::size_t i = 0; i < nc; ++i) comp[i] = g.comp(a, i);
        ScalarField da = derivative(comp, a);
        for (std::size_t i = 0; i < nc; ++i) out[i] += da[i];
    }
    return out;
}

ScalarField Spectral::laplacian(const ScalarField& f) const {
    const int d = grid_.dim;
    return apply_scalar(f, [&](const int* idx) {
        double k2 = 0.0;
        for (int a = 0; a < d; ++a) {
            double k = k_odd_[a][idx[a]];
            k2 += k * k;
        }
        return std::complex<double>(-k2, 0.0);
    });
}

VectorField Spectral::leray(const VectorField& g) const {
    const int d = grid_.dim;
    const std::size_t nc = g.ncells();
    std::vector<std::vector<std::complex<double>>> hat(d);
    std::vector<double> tmp(static_cast<std::size_t>(nreal_));
    for (int c = 0; c < d; ++c) {
        hat[c].resize(static_cast<std::size_t>(ncplx_));
        for (std::size_t i = 0; i < nc; ++i) tmp[i] = g.comp(c, i);
        ScalarField comp(grid_, tmp);
        forward(comp.values(), hat[c].data());
    }
    int idx[3] = {0, 0, 0};
    for (std::int64_t i = 0; i < ncplx_; ++i) {
        cplx_index(i, idx);
        double k[3] = {0, 0, 0};
        double k2 = 0.0;
        for (int a = 0; a < d; ++a) {
            k[a] = k_odd_[a][idx[a]];
            k2 += k[a] * k[a];
        }
        if (k2 == 0.0) continue;
        std::complex<double> kdotu(0.0, 0.0);
        for (int a = 0; a < d; ++a) kdotu += k[a] * hat[a][i];
        for (int a = 0; a < d; ++a) hat[a][i] -= k[a] * kdotu / k2;
    }
    VectorField out(grid_);
    for (int c = 0; c < d; ++c) {
        backward(hat[c].data(), tmp);
        for (std::size_t i = 0; i < nc; ++i) out.comp(c, i) = tmp[i];
    }
    return out;
}

ScalarField Spectral::poisson_compact(const ScalarField& rhs) const {
    const int d = grid_.dim;
    const double h = grid_.h();
    const double pi_over_n = 3.14159265358979323846 / grid_.n;
    return apply_scalar(rhs, [&](const int* idx) {
        double lam = 0.0;
        for (int a = 0; a < d; ++a) {
            double s = 2.0 * std::sin(pi_over_n * std::abs(m_[a][idx[a]])) / h;
            lam -= s * s;
        }
        if (lam == 0.0) return std::complex<double>(0.0, 0.0);
        return std::complex<double>(1.0 / lam, 0.0);
    });
}

ScalarField Spectral::dealias(const ScalarField& f) const {
    const int d = grid_.dim;
    const int cut = grid_.n / 3;
    return apply_scalar(f, [&](const int* idx) {
        for (int a = 0; a < d; ++a)
            if (std::abs(m_[a][idx[a]]) > cut) return std::complex<double>(0.0, 0.0);
        return std::complex<double>(1.0, 0.0);
    });
}

VectorField Spectral::dealias(const VectorField& f) const {
    VectorField out(grid_);
    const std::size_t nc = f.ncells();
    for (int c = 0; c < grid_.dim; ++c) {
        ScalarField comp(grid_);
        for (std::size_t i = 0; i < nc; ++i) comp[i] = f.comp(c, i);
        ScalarField dc = dealias(comp);
        for (std::size_t i = 0; i < nc; ++i) out.comp(c, i) = dc[i];
    }
    return out;
}

}  // namespace ksns
