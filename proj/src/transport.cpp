#include "ksns/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ksns {

void DiscreteMeasure::validate() const {
    if (weights.empty() || points.size() != weights.size() * dim)
        throw ConfigError("measure has inconsistent point/weight sizes");
    double sum = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw NumericError("measure has a negative weight");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw NumericError("measure mass " + fmt_g17(sum) + " deviates from 1");
}

double DiscreteMeasure::second_moment_about(const double* c) const {
    double s = 0.0;
    for (std::size_t p = 0; p < size(); ++p) {
        double r2 = 0.0;
        for (int a = 0; a < dim; ++a) {
            double dx = point(p)[a] - c[a];
            r2 += dx * dx;
        }
        s += weights[p] * r2;
    }
    return s;
}

bool TransportPlan::feasible(double tol) const {
    if (max_marginal_error() > tol) return false;
    for (const auto& e : entries)
        if (e.mass < 0.0) return false;
    return true;
}

double TransportPlan::max_marginal_error() const {
    std::vector<double> rs(row_weights.size(), 0.0), cs(col_weights.size(), 0.0);
    for (const auto& e : entries) {
        rs[e.row] += e.mass;
        cs[e.col] += e.mass;
    }
    double err = 0.0;
    for (std::size_t i = 0; i < rs.size(); ++i)
        err = std::max(err, std::abs(rs[i] - row_weights[i]));
    for (std::size_t j = 0; j < cs.size(); ++j)
        err = std::max(err, std::abs(cs[j] - col_weights[j]));
    return err;
}

DiscreteMeasure pushforward(const DiscreteMeasure& mu,
                            const std::function<void(const double*, double*)>& map) {
    const int d = mu.dim;
    const std::size_t N = mu.size();
    std::vector<double> mapped(N * d);
    for (std::size_t p = 0; p < N; ++p) map(mu.point(p), &mapped[p * d]);

    // merge bitwise-equal image points (deterministic order)
    std::vector<std::size_t> order(N);
    std::iota(order.begin(), order.end(), 0);
    auto less = [&](std::size_t a, std::size_t b) {
        for (int c = 0; c < d; ++c) {
            if (mapped[a * d + c] < mapped[b * d + c]) return true;
            if (mapped[a * d + c] > mapped[b * d + c]) return false;
        }
        return false;
    };
    std::stable_sort(order.begin(), order.end(), less);

    DiscreteMeasure nu;
    nu.dim = d;
    for (std::size_t t = 0; t < N; ++t) {
        std::size_t p = order[t];
        bool same = !nu.weights.empty();
        if (same) {
            const double* last = &nu.points[(nu.weights.size() - 1) * d];
            for (int c = 0; c < d; ++c) same = same && last[c] == mapped[p * d + c];
        }
        if (same) {
            nu.weights.back() += mu.weights[p];
        } else {
            for (int c = 0; c < d; ++c) nu.points.push_back(mapped[p * d + c]);
            nu.weights.push_back(mu.weights[p]);
        }
    }
    return nu;
}

// ---------------------------------------------------------------------------
// Exact solver: dense transportation simplex with block pricing and a Bland
// fallback against degenerate stalling.
// ---------------------------------------------------------------------------

namespace {

struct CostFn {
    const DiscreteMeasure* mu;
    const DiscreteMeasure* nu;
    double operator()(int i, int j) const {
        const double* x = mu->point(i);
        const double* y = nu->point(j);
        double s = 0.0;
        for (int a = 0; a < mu->dim; ++a) {
            double dx = x[a] - y[a];
            s += dx * dx;
        }
        return s;
    }
};

struct Arc {
    int i, j;
    double flow;
};

class TransportSimplex {
public:
    TransportSimplex(const DiscreteMeasure& mu, const DiscreteMeasure& nu)
        : mu_(mu), nu_(nu), m_(static_cast<int>(mu.size())),
          n_(static_cast<int>(nu.size())), cost_{&mu, &nu} {
        double diam2 = bounding_diam2();
        pivot_tol_ = 1e-14 * (1.0 + diam2);
        northwest_init();
    }

    void solve() {
        rebuild_tree();
        const long max_pivots = 1000L * (m_ + n_) + 100000L;
        long degenerate_streak = 0;
        for (long pivot = 0; pivot < max_pivots; ++pivot) {
            int ei, ej;
            if (!price(ei, ej)) return;  // optimal
            double theta = apply_pivot(ei, ej);
            if (theta <= 0.0) {
                if (++degenerate_streak > 4L * (m_ + n_)) bland_ = true;
            } else {
                degenerate_streak = 0;
            }
            rebuild_tree();
        }
        throw NumericError("transportation simplex exceeded its pivot budget");
    }

    ExactResult result() const {
        ExactResult r;
        r.primal = 0.0;
        for (const Arc& a : basis_) r.primal += a.flow * cost_(a.i, a.j);
        r.dual = 0.0;
        for (int i = 0; i < m_; ++i) r.dual += mu_.weights[i] * u_[i];
        for (int j = 0; j < n_; ++j) r.dual += nu_.weights[j] * v_[j];
        double gap = std::abs(r.primal - r.dual) / std::max(1.0, std::abs(r.primal));
        if (gap > 1e-9)
            throw NumericError("simplex terminated with relative gap " + fmt_g17(gap));
        r.distance = std::sqrt(std::max(r.primal, 0.0));
        r.plan.row_weights = mu_.weights;
        r.plan.col_weights = nu_.weights;
        for (const Arc& a : basis_)
            if (a.flow > 0.0) r.plan.entries.push_back({a.i, a.j, a.flow});
        return r;
    }

private:
    const DiscreteMeasure& mu_;
    const DiscreteMeasure& nu_;
    int m_, n_;
    CostFn cost_;
    double pivot_tol_ = 1e-14;
    bool bland_ = false;
    std::vector<Arc> basis_;                 // m+n-1 arcs, spanning tree
    std::vector<std::vector<int>> adj_;      // node -> basis arc indices
    std::vector<int> parent_, parent_arc_, depth_;
    std::vector<double> u_, v_;
    long cursor_ = 0;

    double bounding_diam2() const {
        double d2 = 0.0;
        for (int a = 0; a < mu_.dim; ++a) {
            double lo = mu_.point(0)[a], hi = lo;
            for (std::size_t p = 0; p < mu_.size(); ++p) {
                lo = std::min(lo, mu_.point(p)[a]);
                hi = std::max(hi, mu_.point(p)[a]);
            }
            for (std::size_t p = 0; p < nu_.size(); ++p) {
                lo = std::min(lo, nu_.point(p)[a]);
                hi = std::max(hi, nu_.point(p)[a]);
            }
            d2 += (hi - lo) * (hi - lo);
        }
        return d2;
    }

    void northwest_init() {
        std::vector<double> ra = mu_.weights, rb = nu_.weights;
        int i = 0, j = 0;
        while (true) {
            double q = std::min(ra[i], rb[j]);
            basis_.push_back({i, j, q});
            ra[i] -= q;
            rb[j] -= q;
            if (i == m_ - 1 && j == n_ - 1) break;
            if (j == n_ - 1 || (ra[i] <= rb[j] && i < m_ - 1))
                ++i;
            else
                ++j;
        }
    }

    void rebuild_tree() {
        const int N = m_ + n_;
        adj_.assign(N, {});
        for (std::size_t t = 0; t < basis_.size(); ++t) {
            adj_[basis_[t].i].push_back(static_cast<int>(t));
            adj_[m_ + basis_[t].j].push_back(static_cast<int>(t));
        }
        parent_.assign(N, -1);
        parent_arc_.assign(N, -1);
        depth_.assign(N, -1);
        u_.assign(m_, 0.0);
        v_.assign(n_, 0.0);
        // BFS from row node 0; the basis is a spanning tree
        std::vector<int> queue{0};
        depth_[0] = 0;
        for (std::size_t qh = 0; qh < queue.size(); ++qh) {
            int node = queue[qh];
            for (int t : adj_[node]) {
                const Arc& a = basis_[t];
                int other = (node == a.i) ? m_ + a.j : a.i;
                if (depth_[other] >= 0) continue;
                depth_[other] = depth_[node] + 1;
                parent_[other] = node;
                parent_arc_[other] = t;
                double c = cost_(a.i, a.j);
                if (other >= m_)
                    v_[other - m_] = c - u_[a.i];
                else
                    u_[other] = c - v_[node - m_];
                queue.push_back(other);
            }
        }
    }

    // Entering-arc search. Returns false if no reduced cost is below the
    // pivot tolerance (optimal). Block scan from a moving cursor keeps the
    // per-pivot work sublinear in the arc count; Bland mode scans from arc 0
    // and takes the first candidate, which cannot cycle.
    bool price(int& ei, int& ej) {
        const long total = static_cast<long>(m_) * n_;
        const long block = std::max<long>(256, total / 64);
        long scanned = 0;
        long pos = bland_ ? 0 : cursor_;
        double best = -pivot_tol_;
        long best_pos = -1;
        while (scanned < total) {
            long stop = std::min<long>(block, total - scanned);
            for (long s = 0; s < stop; ++s, ++pos, ++scanned) {
                if (pos >= total) pos = 0;
                int i = static_cast<int>(pos / n_);
                int j = static_cast<int>(pos % n_);
                double r = cost_(i, j) - u_[i] - v_[j];
                if (r < best) {
                    best = r;
                    best_pos = pos;
                    if (bland_) break;
                }
            }
            if (best_pos >= 0) break;
        }
        if (best_pos < 0) return false;
        cursor_ = (best_pos + 1) % total;
        ei = static_cast<int>(best_pos / n_);
        ej = static_cast<int>(best_pos % n_);
        return true;
    }

    // Push flow around the unique cycle closed by the entering arc (ei, ej);
    // returns theta and swaps the leaving arc out of the basis.
    double apply_pivot(int ei, int ej) {
        int x = ei, y = m_ + ej;
        std::vector<int> px{x}, py{y};
        while (depth_[x] > depth_[y]) {
            x = parent_[x];
            px.push_back(x);
        }
        while (depth_[y] > depth_[x]) {
            y = parent_[y];
            py.push_back(y);
        }
        while (x != y) {
            x = parent_[x];
            y = parent_[y];
            px.push_back(x);
            py.push_back(y);
        }
        // cycle nodes: ei .. lca .. ej (py reversed, lca not repeated)
        std::vector<int> nodes = px;
        for (std::size_t t = py.size() - 1; t-- > 0;) nodes.push_back(py[t]);

        // arcs between consecutive nodes alternate -theta, +theta, ...
        std::vector<int> arcs;
        for (std::size_t t = 0; t + 1 < nodes.size(); ++t) {
            int child = depth_[nodes[t]] > depth_[nodes[t + 1]] ? nodes[t] : nodes[t + 1];
            arcs.push_back(parent_arc_[child]);
        }
        double theta = std::numeric_limits<double>::infinity();
        int leave_t = -1;
        for (std::size_t t = 0; t < arcs.size(); t += 2) {
            double f = basis_[arcs[t]].flow;
            long id = static_cast<long>(basis_[arcs[t]].i) * n_ + basis_[arcs[t]].j;
            if (f < theta ||
                (f == theta && leave_t >= 0 &&
                 id < static_cast<long>(basis_[arcs[leave_t]].i) * n_ + basis_[arcs[leave_t]].j)) {
                theta = f;
                leave_t = static_cast<int>(t);
            }
        }
        for (std::size_t t = 0; t < arcs.size(); ++t) {
            double sign = (t % 2 == 0) ? -1.0 : 1.0;
            basis_[arcs[t]].flow += sign * theta;
        }
        basis_[arcs[leave_t]] = {ei, ej, theta};
        return theta;
    }
};

DiscreteMeasure drop_zero_atoms(const DiscreteMeasure& mu) {
    DiscreteMeasure out;
    out.dim = mu.dim;
    for (std::size_t p = 0; p < mu.size(); ++p) {
        if (mu.weights[p] <= 0.0) continue;
        for (int a = 0; a < mu.dim; ++a) out.points.push_back(mu.point(p)[a]);
        out.weights.push_back(mu.weights[p]);
    }
    return out;
}

}  // namespace

ExactResult w2_exact(const DiscreteMeasure& mu_in, const DiscreteMeasure& nu_in) {
    DiscreteMeasure mu = drop_zero_atoms(mu_in);
    DiscreteMeasure nu = drop_zero_atoms(nu_in);
    mu.validate();
    nu.validate();
    if (mu.dim != nu.dim) throw ConfigError("w2_exact: dimension mismatch");
    if (mu.size() > kExactSupportCap || nu.size() > kExactSupportCap)
        throw CapacityError("w2_exact supports at most " +
                            std::to_string(kExactSupportCap) +
                            " atoms per side; got " + std::to_string(mu.size()) +
                            " x " + std::to_string(nu.size()));
    TransportSimplex simplex(mu, nu);
    simplex.solve();
    return simplex.result();
}

// ---------------------------------------------------------------------------
// Log-domain Sinkhorn
// ---------------------------------------------------------------------------

namespace {

struct SinkhornCore {
    const DiscreteMeasure& mu;
    const DiscreteMeasure& nu;
    double eps;
    std::vector<double> cost;  // dense m x n
    std::vector<double> f, g;

    SinkhornCore(const DiscreteMeasure& mu_, const DiscreteMeasure& nu_, double eps_)
        : mu(mu_), nu(nu_), eps(eps_) {
        const std::size_t m = mu.size(), n = nu.size();
        cost.resize(m * n);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double s = 0.0;
                for (int a = 0; a < mu.dim; ++a) {
                    double dx = mu.point(i)[a] - nu.point(j)[a];
                    s += dx * dx;
                }
                cost[i * n + j] = s;
            }
        f.assign(m, 0.0);
        g.assign(n, 0.0);
    }

    // one full (row, column) sweep, overrelaxed by omega
    void sweep(const std::vector<double>& logmu, const std::vector<double>& lognu,
               double omega) {
        const std::size_t m = mu.size(), n = nu.size();
        for (std::size_t i = 0; i < m; ++i) {
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < n; ++j)
                mx = std::max(mx, (g[j] - cost[i * n + j]) / eps);
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                s += std::exp((g[j] - cost[i * n + j]) / eps - mx);
            double fn = eps * (logmu[i] - mx - std::log(s));
            f[i] += omega * (fn - f[i]);
        }
        for (std::size_t j = 0; j < n; ++j) {
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < m; ++i)
                mx = std::max(mx, (f[i] - cost[i * n + j]) / eps);
            double s = 0.0;
            for (std::size_t i = 0; i < m; ++i)
                s += std::exp((f[i] - cost[i * n + j]) / eps - mx);
            double gn = eps * (lognu[j] - mx - std::log(s));
            g[j] += omega * (gn - g[j]);
        }
    }

    double marginal_l1() const {
        const std::size_t m = mu.size(), n = nu.size();
        double err = 0.0;
        std::vector<double> colsum(n, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            double rs = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                double gamma = std::exp((f[i] + g[j] - cost[i * n + j]) / eps);
                rs += gamma;
                colsum[j] += gamma;
            }
            err += std::abs(rs - mu.weights[i]);
        }
        for (std::size_t j = 0; j < n; ++j) err += std::abs(colsum[j] - nu.weights[j]);
        return err;
    }

    double plan_cost() const {
        const std::size_t m = mu.size(), n = nu.size();
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j)
                s += std::exp((f[i] + g[j] - cost[i * n + j]) / eps) * cost[i * n + j];
        return s;
    }
};

// Self-transport cost for the debiasing terms. The symmetric problem admits
// equal potentials f = g; the damped fixed-point update is stable where the
// alternating sweep crawls.
double sinkhorn_cost_self(const DiscreteMeasure& mu, const SinkhornOptions& opts,
                          double& marginal_err, int& iters) {
    SinkhornCore core(mu, mu, opts.epsilon);
    const std::size_t m = mu.size();
    std::vector<double> logmu(m);
    for (std::size_t i = 0; i < m; ++i) logmu[i] = std::log(mu.weights[i]);
    std::vector<double> fn(m);
    marginal_err = std::numeric_limits<double>::infinity();
    for (iters = 1; iters <= opts.max_iter; ++iters) {
        for (std::size_t i = 0; i < m; ++i) {
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < m; ++j)
                mx = std::max(mx, (core.f[j] - core.cost[i * m + j]) / core.eps);
            double s = 0.0;
            for (std::size_t j = 0; j < m; ++j)
                s += std::exp((core.f[j] - core.cost[i * m + j]) / core.eps - mx);
            fn[i] = core.eps * (logmu[i] - mx - std::log(s));
        }
        for (std::size_t i = 0; i < m; ++i)
            core.f[i] = 0.5 * (core.f[i] + fn[i]);
        if (iters % 10 == 0 || iters == opts.max_iter) {
            core.g = core.f;
            marginal_err = core.marginal_l1();
            if (marginal_err <= opts.tol) return core.plan_cost();
        }
    }
    throw NumericError("sinkhorn (self term) did not converge: marginal L1 violation " +
                       fmt_g17(marginal_err) + " after " +
                       std::to_string(opts.max_iter) + " iterations");
}

// converged raw entropic plan cost between two measures
double sinkhorn_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                     const SinkhornOptions& opts, double& marginal_err, int& iters) {
    SinkhornCore core(mu, nu, opts.epsilon);
    std::vector<double> logmu(mu.size()), lognu(nu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) logmu[i] = std::log(mu.weights[i]);
    for (std::size_t j = 0; j < nu.size(); ++j) lognu[j] = std::log(nu.weights[j]);
    marginal_err = std::numeric_limits<double>::infinity();
    double omega = std::max(1.0, opts.omega);
    double best_err = marginal_err;
    int worse_checks = 0;
    for (iters = 1; iters <= opts.max_iter; ++iters) {
        core.sweep(logmu, lognu, omega);
        if (iters % 10 == 0 || iters == opts.max_iter) {
            marginal_err = core.marginal_l1();
            if (marginal_err <= opts.tol) return core.plan_cost();
            // stall safeguard: overrelaxation can oscillate or limit-cycle;
            // fall back to the plain update once progress is lost
            if (omega > 1.0) {
                worse_checks = marginal_err > best_err ? worse_checks + 1 : 0;
                if (worse_checks >= 3 || marginal_err > 10.0 * best_err) omega = 1.0;
            }
            best_err = std::min(best_err, marginal_err);
        }
    }
    throw NumericError("sinkhorn did not converge: marginal L1 violation " +
                       fmt_g17(marginal_err) + " after " +
                       std::to_string(opts.max_iter) + " iterations");
}

}  // namespace

SinkhornResult w2_sinkhorn(const DiscreteMeasure& mu_in, const DiscreteMeasure& nu_in,
                           const SinkhornOptions& opts) {
    if (!(opts.epsilon > 0.0)) throw ConfigError("sinkhorn requires epsilon > 0");
    DiscreteMeasure mu = drop_zero_atoms(mu_in);
    DiscreteMeasure nu = drop_zero_atoms(nu_in);
    mu.validate();
    nu.validate();
    SinkhornResult r;
    double err_uv = 0.0;
    int it_uv = 0;
    const bool same = mu.dim == nu.dim && mu.points == nu.points &&
                      mu.weights == nu.weights;
    r.cost = same ? sinkhorn_cost_self(mu, opts, err_uv, it_uv)
                  : sinkhorn_cost(mu, nu, opts, err_uv, it_uv);
    r.marginal_err = err_uv;
    r.iterations = it_uv;
    double value = r.cost;
    if (opts.debias) {
        double e1 = 0, e2 = 0;
        int i1 = 0, i2 = 0;
        double cuu = sinkhorn_cost_self(mu, opts, e1, i1);
        double cvv = sinkhorn_cost_self(nu, opts, e2, i2);
        value = r.cost - 0.5 * cuu - 0.5 * cvv;
    }
    r.distance = std::sqrt(std::max(value, 0.0));
    return r;
}

double w2_1d_quantile(const DiscreteMeasure& mu_in, const DiscreteMeasure& nu_in) {
    if (mu_in.dim != 1 || nu_in.dim != 1)
        throw ConfigError("w2_1d_quantile requires 1D measures");
    DiscreteMeasure mu = drop_zero_atoms(mu_in);
    DiscreteMeasure nu = drop_zero_atoms(nu_in);
    mu.validate();
    nu.validate();

    auto sorted = [](const DiscreteMeasure& m) {
        std::vector<std::size_t> ord(m.size());
        std::iota(ord.begin(), ord.end(), 0);
        std::stable_sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) {
            return m.points[a] < m.points[b];
        });
        return ord;
    };
    auto oa = sorted(mu), ob = sorted(nu);

    double total = 0.0, s_prev = 0.0;
    double cumA = mu.weights[oa[0]], cumB = nu.weights[ob[0]];
    std::size_t ia = 0, ib = 0;
    while (true) {
        double s_next = std::min(cumA, cumB);
        double dx = mu.points[oa[ia]] - nu.points[ob[ib]];
        if (s_next > s_prev) total += (s_next - s_prev) * dx * dx;
        s_prev = s_next;
        bool advA = cumA <= s_next, advB = cumB <= s_next;
        if (advA) {
            if (++ia >= mu.size()) break;
            cumA += mu.weights[oa[ia]];
        }
        if (advB) {
            if (++ib >= nu.size()) break;
            cumB += nu.weights[ob[ib]];
        }
    }
    return std::sqrt(std::max(total, 0.0));
}

namespace {
int coarsen_block(const TorusGrid& g, std::size_t max_support) {
    int block = 1;
    if (max_support == 0) return block;
    auto support_at = [&](int b) {
        std::size_t s = 1;
        for (int a = 0; a < g.dim; ++a) s *= static_cast<std::size_t>(g.n / b);
        return s;
    };
    while (support_at(block) > max_support && block < g.n) block *= 2;
    return block;
}
}  // namespace

double coarsened_pitch(const TorusGrid& g, std::size_t max_support) {
    return g.h() * coarsen_block(g, max_support);
}

DiscreteMeasure measure_from_density(const DensityField& rho, std::size_t max_support) {
    const TorusGrid& g = rho.grid();
    const double vol = g.cell_volume();
    int block = coarsen_block(g, max_support);
    DiscreteMeasure m;
    m.dim = g.dim;
    if (block == 1) {
        for (std::size_t i = 0; i < rho.size(); ++i) {
            if (rho[i] <= 0.0) continue;
            auto idx = g.unflat(static_cast<std::int64_t>(i));
            for (int a = 0; a < g.dim; ++a) m.points.push_back(g.coord(idx[a]));
            m.weights.push_back(rho[i] * vol);
        }
        return m;
    }
    // block aggregation, atom at the block's center of mass
    const int nb = g.n / block;
    std::size_t nblocks = 1;
    for (int a = 0; a < g.dim; ++a) nblocks *= static_cast<std::size_t>(nb);
    std::vector<double> w(nblocks, 0.0), cm(nblocks * g.dim, 0.0);
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (rho[i] <= 0.0) continue;
        auto idx = g.unflat(static_cast<std::int64_t>(i));
        std::size_t bid = 0;
        for (int a = 0; a < g.dim; ++a) bid = bid * nb + idx[a] / block;
        double mass = rho[i] * vol;
        w[bid] += mass;
        for (int a = 0; a < g.dim; ++a) cm[bid * g.dim + a] += mass * g.coord(idx[a]);
    }
    for (std::size_t b = 0; b < nblocks; ++b) {
        if (w[b] <= 0.0) continue;
        for (int a = 0; a < g.dim; ++a) m.points.push_back(cm[b * g.dim + a] / w[b]);
        m.weights.push_back(w[b]);
    }
    return m;
}

double w2_1d_density(const DensityField& a, const DensityField& b) {
    const TorusGrid& g = a.grid();
    if (g.dim != 1 || !(b.grid() == g))
        throw ConfigError("w2_1d_density needs two 1D fields on one grid");
    const int n = g.n;
    const double h = g.h();
    // piecewise-linear CDFs at cell edges; cell i spans [i h, (i+1) h)
    std::vector<double> Fa(n + 1, 0.0), Fb(n + 1, 0.0);
    for (int i = 0; i < n; ++i) {
        Fa[i + 1] = Fa[i] + a[i] * h;
        Fb[i + 1] = Fb[i] + b[i] * h;
    }
    Fa[n] = Fb[n] = 1.0;  // mass is 1 by the density invariant

    // quantile by linear interpolation; flat CDF pieces give jumps, which sit
    // only at segment boundaries below
    auto quantile = [&](const std::vector<double>& F, double s) {
        auto it = std::lower_bound(F.begin(), F.end(), s);
        int k = static_cast<int>(it - F.begin());
        if (k == 0) return 0.0;
        double f0 = F[k - 1], f1 = F[k];
        if (f1 <= f0) return (k - 1) * h;
        return ((k - 1) + (s - f0) / (f1 - f0)) * h;
    };

    // both quantiles are linear between consecutive CDF knot values; 2-point
    // Gauss per segment is exact there and its nodes avoid the knots, where
    // flat CDF pieces make the quantile jump
    std::vector<double> knots;
    knots.reserve(2 * n + 2);
    for (int i = 0; i <= n; ++i) {
        knots.push_back(Fa[i]);
        knots.push_back(Fb[i]);
    }
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

    const double off = 0.5 / std::sqrt(3.0);
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        double s0 = knots[k], s1 = std::min(knots[k + 1], 1.0);
        if (s1 <= s0 || s0 >= 1.0) continue;
        double len = s1 - s0, mid = 0.5 * (s0 + s1);
        auto sq = [&](double s) {
            double d = quantile(Fa, s) - quantile(Fb, s);
            return d * d;
        };
        total += 0.5 * len * (sq(mid - off * len) + sq(mid + off * len));
    }
    return std::sqrt(std::max(total, 0.0));
}

double w2_between(const DensityField& a, const DensityField& b, const MetricOptions& opts) {
    if (a.grid().dim == 1 && b.grid() == a.grid()) return w2_1d_density(a, b);
    DiscreteMeasure mu = measure_from_density(a, opts.coarsen_to);
    DiscreteMeasure nu = measure_from_density(b, opts.coarsen_to);
    if (mu.size() <= opts.exact_cap && nu.size() <= opts.exact_cap)
        return w2_exact(mu, nu).distance;
    double d2 = 0.0;
    for (int ax = 0; ax < mu.dim; ++ax) {
        double lo = mu.point(0)[ax], hi = lo;
        for (std::size_t p = 0; p < mu.size(); ++p) {
            lo = std::min(lo, mu.point(p)[ax]);
            hi = std::max(hi, mu.point(p)[ax]);
        }
        for (std::size_t p = 0; p < nu.size(); ++p) {
            lo = std::min(lo, nu.point(p)[ax]);
            hi = std::max(hi, nu.point(p)[ax]);
        }
        d2 += (hi - lo) * (hi - lo);
    }
    SinkhornOptions so;
    so.epsilon = opts.sinkhorn_epsilon_rel * std::max(d2, 1e-30);
    return w2_sinkhorn(mu, nu, so).distance;
}

double metric_derivative(const std::vector<double>& times,
                         const std::vector<DensityField>& states,
                         std::size_t t_index, const MetricOptions& opts) {
    if (times.size() != states.size() || times.size() < 2)
        throw ConfigError("metric_derivative needs at least two samples");
    if (t_index >= times.size()) throw ConfigError("metric_derivative: index out of range");
    std::size_t lo, hi;
    if (t_index == 0) {
        lo = 0;
        hi = 1;
    } else if (t_index + 1 == times.size()) {
        lo = times.size() - 2;
        hi = times.size() - 1;
    } else {
        lo = t_index - 1;
        hi = t_index + 1;
    }
    double dist = w2_between(states[lo], states[hi], opts);
    return dist / (times[hi] - times[lo]);
}

}  // namespace ksns
