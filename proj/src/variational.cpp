#include "fbme/variational.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "fbme/errors.hpp"

namespace fbme {

namespace {

struct StepInputs {
    const SchemeConfig* cfg;
    std::span<const double> y;
    std::vector<double> dx, db;
    double dt = 0.0, corr = 0.0;  // corr = dt^{2H} / 2
};

// Level increments 1..N (index L) of
//   L^L_{c} V dx + s_L L^{L-1}_{ct} V db + corr sum_j (Lbar^L_c + [tilde] Ltilde^{L-1}_{c,ct})(dV_j V_j) + L^L_c V_0 dt
// with s_L = L when scale_db, else 1.
std::vector<Vec> level_increments(const StepInputs& in, const Stack& xi, int N, const Coefficients& c,
                                  const Coefficients& ct, bool tilde, bool scale_db) {
    const VectorFields& vf = in.cfg->vf;
    const std::size_t m = vf.m, d = vf.d;
    std::vector<Vec> out(static_cast<std::size_t>(N) + 1, Vec(m, 0.0));
    for (std::size_t j = 0; j < d; ++j) {
        Column col = vf.column(j);
        auto Lc = op_L_levels(N, col, in.y, xi, c);
        auto Lct = op_L_levels(N - 1, col, in.y, xi, ct);
        for (int L = 1; L <= N; ++L) {
            const auto l = static_cast<std::size_t>(L);
            const double s = scale_db ? static_cast<double>(L) : 1.0;
            for (std::size_t k = 0; k < m; ++k) {
                double v = Lc[l][k] * in.dx[j] + s * Lct[l - 1][k] * in.db[j];
                double corr = op_Lbar_pre(L, *col[k], in.y, xi, c, Lc);
                if (tilde) corr += op_Ltilde_pre(L - 1, *col[k], in.y, xi, c, Lct);
                out[l][k] += v + in.corr * corr;
            }
        }
    }
    if (vf.has_drift()) {
        for (int L = 1; L <= N; ++L)
            for (std::size_t k = 0; k < m; ++k)
                out[static_cast<std::size_t>(L)][k] += op_L(L, *vf.V0[k], in.y, xi, c) * in.dt;
    }
    return out;
}

void check_finite(const Vec& v, std::size_t step) {
    for (double x : v)
        if (!std::isfinite(x)) throw OverflowError("derivative recursion produced a non-finite value", step);
}

void check_paths(const SchemeConfig& cfg, const GridPath& y, const GridPath& x) {
    cfg.validate();
    if (x.dims() != cfg.vf.d) throw DomainError("driving path dimension does not match V");
    if (y.dims() != cfg.vf.m) throw DomainError("solution path dimension does not match V");
    if (!(x.grid() == y.grid())) throw DomainError("solution and noise live on different grids");
}

StepInputs inputs_at(const SchemeConfig& cfg, const GridPath& y, const GridPath& x, const GridPath* b,
                     std::size_t k) {
    StepInputs in;
    in.cfg = &cfg;
    in.y = y.at(k);
    in.dt = x.grid().dt();
    in.corr = 0.5 * std::pow(in.dt, 2.0 * cfg.hp.H);
    in.dx.resize(cfg.vf.d);
    in.db.assign(cfg.vf.d, 0.0);
    for (std::size_t j = 0; j < cfg.vf.d; ++j) {
        in.dx[j] = x(k + 1, j) - x(k, j);
        if (b) in.db[j] = (*b)(k + 1, j) - (*b)(k, j);
    }
    return in;
}

}  // namespace

Stack XiProcess::stack_at(std::size_t k) const {
    Stack s(levels.size());
    for (std::size_t l = 0; l < levels.size(); ++l) {
        auto v = levels[l].at(k);
        s[l].assign(v.begin(), v.end());
    }
    return s;
}

void require_order(const VectorFields& vf, int N) {
    const int need = std::max(N + 2, 3);
    if (vf.max_order() < need)
        throw CapabilityError("order " + std::to_string(N) + " needs derivatives of V up to " + std::to_string(need) +
                              ", fields provide " + std::to_string(vf.max_order()));
}

XiProcess xi_run(int N, const SchemeConfig& cfg, const GridPath& y, const GridPath& x, const GridPath& b,
                 const XiOptions& opt) {
    if (N < 1 || N > kMaxTreeDepth) throw DomainError("xi order must lie in 1..8");
    check_paths(cfg, y, x);
    if (!(b.grid() == x.grid()) || b.dims() != x.dims()) throw DomainError("b must match x");
    require_order(cfg.vf, N);
    const std::size_t n = x.steps(), m = cfg.vf.m;
    if (opt.start > n) throw DomainError("xi start index beyond grid");
    if (!opt.initial.empty() && opt.initial.size() != static_cast<std::size_t>(N))
        throw DomainError("xi initial values need one vector per level");

    XiProcess out;
    out.c = opt.c;
    out.ct = opt.ct;
    out.levels.push_back(y);
    for (int L = 1; L <= N; ++L) {
        GridPath lvl(x.grid(), m);
        if (!opt.initial.empty()) {
            const Vec& v0 = opt.initial[static_cast<std::size_t>(L - 1)];
            if (v0.size() != m) throw DomainError("xi initial value has wrong dimension");
            for (std::size_t k = 0; k <= opt.start; ++k)
                for (std::size_t i = 0; i < m; ++i) lvl(k, i) = v0[i];
        }
        out.levels.push_back(std::move(lvl));
    }
    for (std::size_t k = opt.start; k < n; ++k) {
        Stack xi = out.stack_at(k);
        auto inc = level_increments(inputs_at(cfg, y, x, &b, k), xi, N, opt.c, opt.ct, true, false);
        for (int L = 1; L <= N; ++L) {
            const auto l = static_cast<std::size_t>(L);
            check_finite(inc[l], k + 1);
            for (std::size_t i = 0; i < m; ++i) out.levels[l](k + 1, i) = xi[l][i] + inc[l][i];
        }
    }
    return out;
}

std::vector<GridPath> directional_derivative_run(int L, const SchemeConfig& cfg, const GridPath& y,
                                                 const GridPath& x, const GridPath& h) {
    if (L < 1 || L > kMaxTreeDepth) throw DomainError("derivative order must lie in 1..8");
    check_paths(cfg, y, x);
    if (!(h.grid() == x.grid()) || h.dims() != x.dims()) throw DomainError("direction must match x");
    require_order(cfg.vf, L);
    const std::size_t n = x.steps(), m = cfg.vf.m;
    std::vector<GridPath> z{y};
    for (int l = 1; l <= L; ++l) z.emplace_back(x.grid(), m);
    for (std::size_t k = 0; k < n; ++k) {
        Stack s(z.size());
        for (std::size_t l = 0; l < z.size(); ++l) {
            auto v = z[l].at(k);
            s[l].assign(v.begin(), v.end());
        }
        auto inc = level_increments(inputs_at(cfg, y, x, &h, k), s, L, Coefficients::unit(), Coefficients::unit(),
                                    false, true);
        for (int l = 1; l <= L; ++l) {
            const auto li = static_cast<std::size_t>(l);
            check_finite(inc[li], k + 1);
            for (std::size_t i = 0; i < m; ++i) z[li](k + 1, i) = s[li][i] + inc[li][i];
        }
    }
    return z;
}

GridPath fd_oracle(int L, const SchemeConfig& cfg, const GridPath& x, const GridPath& h, double eps) {
    if (!(eps > 0.0)) throw DomainError("finite-difference step must be positive");
    GridPath up = euler_run(cfg, x.scaled_sum(h, eps));
    GridPath dn = euler_run(cfg, x.scaled_sum(h, -eps));
    GridPath out(x.grid(), cfg.vf.m);
    if (L == 1) {
        for (std::size_t k = 0; k <= x.steps(); ++k)
            for (std::size_t i = 0; i < cfg.vf.m; ++i) out(k, i) = (up(k, i) - dn(k, i)) / (2.0 * eps);
    } else if (L == 2) {
        GridPath mid = euler_run(cfg, x);
        for (std::size_t k = 0; k <= x.steps(); ++k)
            for (std::size_t i = 0; i < cfg.vf.m; ++i)
                out(k, i) = (up(k, i) - 2.0 * mid(k, i) + dn(k, i)) / (eps * eps);
    } else {
        throw DomainError("finite-difference oracle supports orders 1 and 2");
    }
    return out;
}

std::vector<double> noise_direction(std::size_t d, std::size_t j, bool summed) {
    if (summed) return std::vector<double>(d, 1.0);
    if (j >= d) throw DomainError("noise coordinate out of range");
    std::vector<double> w(d, 0.0);
    w[j] = 1.0;
    return w;
}

namespace {

// First-order tangent started at t_{k0 + 1} with sum_j w_j V_j(y_{k0}).
GridPath tangent_from(const SchemeConfig& cfg, const GridPath& y, const GridPath& x, std::size_t k0,
                      const std::vector<double>& w) {
    const std::size_t n = x.steps(), m = cfg.vf.m, d = cfg.vf.d;
    GridPath xi(x.grid(), m);
    std::vector<double> V(m * d);
    cfg.vf.eval(y.at(k0), V);
    for (std::size_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += w[j] * V[i * d + j];
        xi(k0 + 1, i) = s;
    }
    for (std::size_t k = k0 + 1; k < n; ++k) {
        Stack st{Vec(), Vec(xi.at(k).begin(), xi.at(k).end())};
        auto inc = level_increments(inputs_at(cfg, y, x, nullptr, k), st, 1, Coefficients::unit(),
                                    Coefficients::unit(), false, false);
        check_finite(inc[1], k + 1);
        for (std::size_t i = 0; i < m; ++i) xi(k + 1, i) = st[1][i] + inc[1][i];
    }
    return xi;
}

// sum_j w_j <dV_j(y), v>
Vec first_order_jump(const VectorFields& vf, std::span<const double> y, const std::vector<double>& w,
                     std::span<const double> v) {
    Vec out(vf.m, 0.0);
    std::vector<std::span<const double>> vecs{v};
    for (std::size_t j = 0; j < vf.d; ++j) {
        if (w[j] == 0.0) continue;
        for (std::size_t i = 0; i < vf.m; ++i) out[i] += w[j] * contract(vf.comp(i, j), y, vecs);
    }
    return out;
}

}  // namespace

PointDerivativeResult point_derivative_run(const SchemeConfig& cfg, const GridPath& y, const GridPath& x,
                                           const PointDerivative& spec) {
    check_paths(cfg, y, x);
    require_order(cfg.vf, spec.r2 ? 2 : 1);
    const std::size_t n = x.steps(), m = cfg.vf.m;
    if (spec.w.size() != cfg.vf.d) throw DomainError("derivative weights need one entry per noise coordinate");
    PointDerivativeResult res;
    res.k0 = x.grid().cell_of(spec.r);
    res.first = tangent_from(cfg, y, x, res.k0, spec.w);
    if (!spec.r2) return res;

    const std::vector<double>& w2 = spec.w2.empty() ? spec.w : spec.w2;
    if (w2.size() != cfg.vf.d) throw DomainError("second derivative weights need one entry per noise coordinate");
    res.k0b = x.grid().cell_of(*spec.r2);
    res.first2 = tangent_from(cfg, y, x, res.k0b, w2);
    const GridPath& a = res.first;
    const GridPath& b = *res.first2;
    const std::size_t ks = std::max(res.k0, res.k0b);

    GridPath xi2(x.grid(), m);
    Vec jump(m, 0.0);
    if (res.k0 > res.k0b) jump = first_order_jump(cfg.vf, y.at(res.k0), spec.w, b.at(res.k0));
    if (res.k0b > res.k0) jump = first_order_jump(cfg.vf, y.at(res.k0b), w2, a.at(res.k0b));
    for (std::size_t i = 0; i < m; ++i) xi2(ks + 1, i) = jump[i];

    // level-2 step with two different first-order slots, by polarisation of the quadratic part
    for (std::size_t k = ks + 1; k < n; ++k) {
        StepInputs in = inputs_at(cfg, y, x, nullptr, k);
        Vec second(xi2.at(k).begin(), xi2.at(k).end());
        auto step2 = [&](const Vec& v) {
            Stack st{Vec(), v, second};
            return level_increments(in, st, 2, Coefficients::unit(), Coefficients::unit(), false, false)[2];
        };
        Vec plus(m), minus(m), zero(m, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            plus[i] = a(k, i) + b(k, i);
            minus[i] = a(k, i) - b(k, i);
        }
        Vec ip = step2(plus), im = step2(minus), i0 = step2(zero);
        for (std::size_t i = 0; i < m; ++i) xi2(k + 1, i) = second[i] + 0.25 * (ip[i] - im[i]) + i0[i];
        check_finite(Vec(xi2.at(k + 1).begin(), xi2.at(k + 1).end()), k + 1);
    }
    res.second = std::move(xi2);
    return res;
}

double p_process(const XiProcess& xi, std::size_t k, int L) {
    if (L < 0) return 0.0;
    if (L == 0) return 1.0;
    if (L > xi.order()) throw DomainError("P^L needs Xi up to level L");
    std::vector<double> norm(static_cast<std::size_t>(L) + 1, 0.0);
    for (int l = 1; l <= L; ++l) {
        double mx = 0.0;
        for (double v : xi.levels[static_cast<std::size_t>(l)].at(k)) mx = std::max(mx, std::abs(v));
        norm[static_cast<std::size_t>(l)] = mx;
    }
    // best[s] = largest product over multisets with parts summing to exactly s
    std::vector<double> best(static_cast<std::size_t>(L) + 1, 0.0);
    best[0] = 1.0;
    for (int part = 1; part <= L; ++part)
        for (int s = part; s <= L; ++s)
            best[static_cast<std::size_t>(s)] = std::max(best[static_cast<std::size_t>(s)],
                                                         best[static_cast<std::size_t>(s - part)] *
                                                             norm[static_cast<std::size_t>(part)]);
    double out = 1.0;
    for (int s = 1; s <= L; ++s) out = std::max(out, best[static_cast<std::size_t>(s)]);
    return out;
}

}  // namespace fbme
