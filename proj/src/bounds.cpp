#include "fbme/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "fbme/errors.hpp"

namespace fbme {

Bracket Kmu_bracket(double mu, std::size_t terms) {
    if (!(mu > 1.0)) throw DomainError("K_mu needs mu > 1");
    long double s = 0.0L;
    for (std::size_t l = terms; l >= 1; --l) s += std::pow(static_cast<long double>(l), -static_cast<long double>(mu));
    const long double N = static_cast<long double>(terms);
    const long double m = mu;
    long double lo = s + std::pow(N + 1.0L, 1.0L - m) / (m - 1.0L);
    long double hi = s + std::pow(N, 1.0L - m) / (m - 1.0L);
    const double two = std::pow(2.0, mu);
    return {two * static_cast<double>(lo), two * static_cast<double>(hi)};
}

double Kmu(double mu) {
    if (!(mu > 1.0)) throw DomainError("K_mu needs mu > 1");
    const std::size_t terms = 10000;
    long double s = 0.0L;
    for (std::size_t l = terms; l >= 1; --l) s += std::pow(static_cast<long double>(l), -static_cast<long double>(mu));
    const long double N = static_cast<long double>(terms), m = mu;
    // Euler-Maclaurin tail for sum_{l > N} l^{-mu}
    long double tail = std::pow(N, 1.0L - m) / (m - 1.0L) - 0.5L * std::pow(N, -m) + m / 12.0L * std::pow(N, -m - 1.0L) -
                       m * (m + 1.0L) * (m + 2.0L) / 720.0L * std::pow(N, -m - 3.0L);
    return std::pow(2.0, mu) * static_cast<double>(s + tail);
}

namespace {

void compositions(int L, std::vector<int>& cur, const std::function<void(const std::vector<int>&)>& fn) {
    if (L == 0) {
        fn(cur);
        return;
    }
    for (int first = 1; first <= L; ++first) {
        cur.push_back(first);
        compositions(L - first, cur, fn);
        cur.pop_back();
    }
}

}  // namespace

ConstantLedger build_ledger(const VectorFields& vf, int N, double p, std::optional<double> mu) {
    if (N < 1 || N > kMaxTreeDepth) throw DomainError("ledger order must lie in 1..8");
    if (!(p > 2.0 && p < 3.0)) throw DomainError("ledger needs 2 < p < 3");
    vf.validate();
    ConstantLedger g;
    g.N = N;
    g.p = p;
    g.mu = mu.value_or(3.0 / p);
    g.Kmu = Kmu(g.mu);
    g.C0 = vf.C0(N + 2);
    if (!std::isfinite(g.C0)) throw CapabilityError("ledger needs bounded derivatives of V up to order N + 2");
    const double C0 = g.C0;
    const auto sz = static_cast<std::size_t>(N) + 1;
    for (auto* v : {&g.C1, &g.C2, &g.C3, &g.C4, &g.C5, &g.C6, &g.C7, &g.C8, &g.K1, &g.K2, &g.K3, &g.K4})
        v->assign(sz, 0.0);
    auto at = [](const std::vector<double>& v, int L) { return ConstantLedger::at(v, L); };
    auto lvl = [](int L) { return static_cast<std::size_t>(L); };

    g.C1[0] = C0;
    g.C2[0] = 2.0 * C0 * C0;
    g.C3[0] = 0.0;
    for (int L = 1; L <= N; ++L) {
        double c1 = 0;
        for (const auto& br : tree_level(L)) c1 += br.lemma_coeff.value() * C0;
        g.C1[lvl(L)] = c1;
    }
    for (int L = 1; L <= N; ++L) {
        double c2 = 0, c3 = 0;
        for (const auto& br : tree_level(L)) {
            const double c = br.lemma_coeff.value();
            double sum_c1 = 0, sum_c1m = 0;
            for (int r = 2; r <= br.stats.alpha; ++r) {
                sum_c1 += at(g.C1, br.stats.at(r));
                sum_c1m += at(g.C1, br.stats.at(r) - 1);
            }
            c2 += c * C0 * (C0 + sum_c1);
            c3 += c * C0 * sum_c1m;
        }
        g.C2[lvl(L)] = c2;
        g.C3[lvl(L)] = c3;
    }
    for (int L = 0; L <= N; ++L) {
        g.K1[lvl(L)] = at(g.C1, L) + at(g.C1, L - 1) + 1.0;
        g.K2[lvl(L)] = at(g.C2, L) + at(g.C2, L - 1) + at(g.C3, L) + at(g.C3, L - 1) + 1.0;
    }
    g.C4[0] = 2.0;
    for (int L = 1; L <= N; ++L) {
        double best = 0.0;
        std::vector<int> cur;
        compositions(L, cur, [&](const std::vector<int>& parts) {
            double prod = std::pow(2.0, L + 1);
            for (int q : parts) prod *= g.K1[lvl(q)];
            best = std::max(best, prod);
        });
        g.C4[lvl(L)] = best;
    }
    g.C5[0] = C0 * g.K1[0];
    for (int L = 1; L <= N; ++L) {
        double s = 0.0;
        for (const auto& br : tree_level(L)) {
            double k = g.K1[1];
            for (int r = 2; r <= br.stats.alpha; ++r) k += g.K1[lvl(br.stats.at(r))];
            s += br.lemma_coeff.value() * C0 * k;
        }
        g.C5[lvl(L)] = 2.0 * s * (1.0 + g.C4[lvl(L)]);
    }
    // increments of Lbar^L(dV V) and Ltilde^L(dV V), following the same scheme as C5
    g.C6[0] = 2.0 * C0 * C0 * g.K1[0];
    g.C7[0] = 0.0;
    for (int L = 1; L <= N; ++L) {
        double s6 = 0.0, s7 = 0.0;
        for (const auto& br : tree_level(L)) {
            const double c = br.lemma_coeff.value();
            const int alpha = br.stats.alpha;
            double ksum = g.K1[1];
            for (int r = 2; r <= alpha; ++r) ksum += g.K1[lvl(br.stats.at(r))];
            double t6 = C0 * C0 * ksum;
            double t7 = 0.0;
            for (int r = 2; r <= alpha; ++r) {
                const int lr = br.stats.at(r);
                double kother = g.K1[1];
                for (int q = 2; q <= alpha; ++q)
                    if (q != r) kother += g.K1[lvl(br.stats.at(q))];
                t6 += C0 * (g.C1[lvl(lr)] * kother + g.C5[lvl(lr)]);
                t7 += C0 * (g.C1[lvl(lr - 1)] * kother + g.C5[lvl(lr - 1)]);
            }
            s6 += c * t6;
            s7 += c * t7;
        }
        g.C6[lvl(L)] = 2.0 * s6 * (1.0 + g.C4[lvl(L)]);
        g.C7[lvl(L)] = 2.0 * s7 * (1.0 + g.C4[lvl(L)]);
    }
    g.C8[0] = C0 * (g.K1[0] * g.K1[0] + g.K2[0]);
    for (int L = 1; L <= N; ++L) {
        double s = 0.0;
        for (const auto& br : tree_level(L)) {
            double t = g.K1[0] * g.K1[0] + g.K2[0] + g.K1[0] * g.C4[lvl(L)];
            for (int r = 2; r <= br.stats.alpha; ++r) {
                const auto lr = lvl(br.stats.at(r));
                t += g.K2[lr] + g.K1[lr] * g.C4[lvl(L)];
            }
            s += br.lemma_coeff.value() * C0 * t;
        }
        g.C8[lvl(L)] = 2.0 * s;
    }
    double root = 0.5;
    for (int L = 0; L <= N; ++L) {
        g.K4[lvl(L)] = std::max(at(g.C8, L) + at(g.C8, L - 1) + 4.0 * g.C6[lvl(L)] + 4.0 * g.C7[lvl(L)], 1.0);
        g.K3[lvl(L)] = std::max(g.Kmu * g.K4[lvl(L)], 1.0);
        root = std::min({root, 1.0 / g.K2[lvl(L)], 1.0 / g.K3[lvl(L)]});
    }
    g.alpha_root = root;
    g.alpha = std::pow(root, p);
    return g;
}

std::size_t GreedyPartition::count(IntervalClass c) const {
    return static_cast<std::size_t>(std::count(cls.begin(), cls.end(), c));
}

GreedyPartition greedy_partition(const ControlOmega& om, double alpha) {
    if (!(alpha > 0.0)) throw DomainError("partition threshold must be positive");
    const std::size_t n = om.noise().grid().n;
    GreedyPartition part;
    part.alpha = alpha;
    part.points.push_back(0);
    std::size_t s = 0;
    while (s < n) {
        ControlOmega::RowScan scan(om, s);
        scan.advance();
        double w = scan.value();
        if (w <= alpha) {
            ControlOmega::RowScan probe = scan;
            while (probe.advance() && probe.value() <= alpha) {
                scan = probe;
            }
            w = scan.value();
        }
        const std::size_t next = scan.end();
        part.points.push_back(next);
        part.omega.push_back(w);
        part.cls.push_back(w > alpha ? IntervalClass::S2 : (w >= 0.5 * alpha ? IntervalClass::S0 : IntervalClass::S1));
        s = next;
    }
    return part;
}

MProducts m_products(const GreedyPartition& part, const LiftedNoise& noise, double K, double p) {
    MProducts out;
    const double dt2H = std::pow(noise.grid().dt(), 2.0 * noise.H);
    for (std::size_t j = 0; j < part.size(); ++j) {
        switch (part.cls[j]) {
            case IntervalClass::S0: out.log_M0 += std::log1p(K * std::pow(part.omega[j], 1.0 / p)); break;
            case IntervalClass::S1: out.log_M1 += std::log1p(K * std::pow(part.omega[j], 1.0 / p)); break;
            case IntervalClass::S2:
                out.log_M2 += std::log1p(K * noise.w.level1_norm(part.points[j], part.points[j + 1]) + K * dt2H);
                break;
        }
    }
    return out;
}

OmegaTable::OmegaTable(const ControlOmega& om) : n_(om.noise().grid().n), v_((n_ + 1) * (n_ + 1), 0.0) {
    for (std::size_t j = 0; j <= n_; ++j) {
        auto row = om.row(j, n_);
        for (std::size_t k = j; k <= n_; ++k) v_[j * (n_ + 1) + k] = row[k - j];
    }
}

RemainderTable::RemainderTable(int L, const XiProcess& xi, const LiftedNoise& noise, const SchemeConfig& cfg)
    : L_(L), n_(noise.grid().n), m_(cfg.vf.m), d_(cfg.vf.d), xi_(&xi), noise_(&noise), dt_(noise.grid().dt()) {
    if (L < 0 || L > xi.order()) throw DomainError("remainder level outside the computed xi levels");
    if (noise.d != d_ || !(noise.grid() == xi.y().grid())) throw DomainError("noise does not match the xi process");
    const VectorFields& vf = cfg.vf;
    snap_.resize(n_ + 1);
    for (std::size_t k = 0; k <= n_; ++k) {
        Stack st = xi.stack_at(k);
        auto y = xi.y().at(k);
        Snapshot& S = snap_[k];
        S.A.assign(m_ * d_, 0.0);
        S.B.assign(m_ * d_, 0.0);
        for (auto* v : {&S.Cb, &S.Ct1, &S.Ct, &S.Cb1}) v->assign(d_ * d_ * m_, 0.0);
        S.drift.assign(m_, 0.0);
        std::vector<std::vector<Vec>> lc(d_), lct(d_);
        for (std::size_t a = 0; a < d_; ++a) {
            Column col = vf.column(a);
            lc[a] = op_L_levels(std::max(L, 0), col, y, st, xi.c);
            lct[a] = op_L_levels(std::max(L - 1, 0), col, y, st, xi.ct);
            for (std::size_t i = 0; i < m_; ++i) {
                S.A[i * d_ + a] = lc[a][static_cast<std::size_t>(L)][i];
                S.B[i * d_ + a] = L >= 1 ? lct[a][static_cast<std::size_t>(L - 1)][i] : 0.0;
            }
        }
        for (std::size_t a = 0; a < d_; ++a)
            for (std::size_t b = 0; b < d_; ++b)
                for (std::size_t i = 0; i < m_; ++i) {
                    const ScalarField& f = vf.comp(i, b);
                    const std::size_t e = (a * d_ + b) * m_ + i;
                    S.Cb[e] = op_Lbar_pre(L, f, y, st, xi.c, lc[a]);
                    S.Ct1[e] = op_Ltilde_pre(L - 1, f, y, st, xi.c, lct[a]);
                    S.Ct[e] = op_Ltilde_pre(L, f, y, st, xi.c, lct[a]);
                    S.Cb1[e] = op_Lbar_pre(L - 1, f, y, st, xi.c, lc[a]);
                }
        if (vf.has_drift())
            for (std::size_t i = 0; i < m_; ++i) S.drift[i] = op_L(L, *vf.V0[i], y, st, xi.c);
    }
}

void RemainderTable::block_terms(std::size_t s, std::size_t t, const Snapshot& S, Vec& out, double sign) const {
    const LiftedNoise& nz = *noise_;
    std::vector<double> M(d_ * d_);
    auto add = [&](const std::vector<double>& C, Block blk, const StepSums& sums) {
        nz.centred(blk, sums, s, t, M);
        for (std::size_t e = 0; e < d_ * d_; ++e)
            for (std::size_t i = 0; i < m_; ++i) out[i] += sign * C[e * m_ + i] * M[e];
    };
    add(S.Cb, nz.xx(), nz.q);
    add(S.Ct1, nz.bb(), nz.qb);
    add(S.Ct, nz.bx(), nz.qt);
    add(S.Cb1, nz.xb(), nz.qxb);
    for (std::size_t i = 0; i < m_; ++i) {
        double v = S.drift[i] * (nz.grid().time(t) - nz.grid().time(s));
        for (std::size_t a = 0; a < d_; ++a)
            v += S.A[i * d_ + a] * nz.w.base().increment(s, t, a) + S.B[i * d_ + a] * nz.w.base().increment(s, t, d_ + a);
        out[i] += sign * v;
    }
}

Vec RemainderTable::at(std::size_t s, std::size_t t) const {
    Vec out(m_, 0.0);
    const GridPath& X = xi_->levels[static_cast<std::size_t>(L_)];
    for (std::size_t i = 0; i < m_; ++i) out[i] = -(X(t, i) - X(s, i));
    block_terms(s, t, snap_[s], out, 1.0);
    return out;
}

Vec RemainderTable::delta_from_terms(std::size_t s, std::size_t u, std::size_t t) const {
    const LiftedNoise& nz = *noise_;
    const GridPath& w = nz.w.base();
    const Snapshot& Ss = snap_[s];
    const Snapshot& Su = snap_[u];
    Vec out(m_, 0.0);
    // E1, E2: increments of the first-order coefficients against the later increment
    for (std::size_t i = 0; i < m_; ++i)
        for (std::size_t a = 0; a < d_; ++a) {
            out[i] -= (Su.A[i * d_ + a] - Ss.A[i * d_ + a]) * w.increment(u, t, a);
            out[i] -= (Su.B[i * d_ + a] - Ss.B[i * d_ + a]) * w.increment(u, t, d_ + a);
        }
    // E3, E4: second-order coefficients at s against products of the two increments
    for (std::size_t a = 0; a < d_; ++a)
        for (std::size_t b = 0; b < d_; ++b) {
            const double xx = w.increment(s, u, a) * w.increment(u, t, b);
            const double bx = w.increment(s, u, d_ + a) * w.increment(u, t, b);
            const double bb = w.increment(s, u, d_ + a) * w.increment(u, t, d_ + b);
            const double xb = w.increment(s, u, a) * w.increment(u, t, d_ + b);
            for (std::size_t i = 0; i < m_; ++i) {
                const std::size_t e = (a * d_ + b) * m_ + i;
                out[i] += Ss.Cb[e] * xx + Ss.Ct[e] * bx + Ss.Ct1[e] * bb + Ss.Cb1[e] * xb;
            }
        }
    // E5: increments of the second-order coefficients against the later centred blocks
    Snapshot diff;
    auto sub = [](const std::vector<double>& x, const std::vector<double>& y) {
        std::vector<double> r(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] - y[i];
        return r;
    };
    diff.Cb = sub(Su.Cb, Ss.Cb);
    diff.Ct1 = sub(Su.Ct1, Ss.Ct1);
    diff.Ct = sub(Su.Ct, Ss.Ct);
    diff.Cb1 = sub(Su.Cb1, Ss.Cb1);
    diff.A.assign(m_ * d_, 0.0);
    diff.B.assign(m_ * d_, 0.0);
    diff.drift.assign(m_, 0.0);
    block_terms(u, t, diff, out, -1.0);
    // drift coefficient increment
    for (std::size_t i = 0; i < m_; ++i)
        out[i] -= (Su.drift[i] - Ss.drift[i]) * (nz.grid().time(t) - nz.grid().time(u));
    return out;
}

double RemainderTable::local_defect(std::size_t s, std::size_t t) const {
    const GridPath& X = xi_->levels[static_cast<std::size_t>(L_)];
    const GridPath& w = noise_->w.base();
    const Snapshot& S = snap_[s];
    double worst = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
        double v = X(t, i) - X(s, i) - S.drift[i] * (w.grid().time(t) - w.grid().time(s));
        for (std::size_t a = 0; a < d_; ++a)
            v -= S.A[i * d_ + a] * w.increment(s, t, a) + S.B[i * d_ + a] * w.increment(s, t, d_ + a);
        worst = std::max(worst, std::abs(v));
    }
    return worst;
}

double RemainderTable::lbar_increment(std::size_t s, std::size_t u) const {
    double worst = 0.0;
    for (std::size_t e = 0; e < snap_[s].Cb.size(); ++e)
        worst = std::max(worst, std::abs(snap_[u].Cb[e] - snap_[s].Cb[e]));
    return worst;
}

double RemainderTable::ltilde_increment(std::size_t s, std::size_t u) const {
    double worst = 0.0;
    for (std::size_t e = 0; e < snap_[s].Ct.size(); ++e)
        worst = std::max(worst, std::abs(snap_[u].Ct[e] - snap_[s].Ct[e]));
    return worst;
}

SewingReport sewing_verify(std::size_t n, const std::function<double(std::size_t, std::size_t)>& norm_R,
                           const std::function<double(std::size_t, std::size_t, std::size_t)>& delta_R,
                           const std::function<double(std::size_t, std::size_t)>& omega, double mu) {
    SewingReport rep;
    rep.Kmu = Kmu(mu);
    auto ratio = [](double num, double om_mu) {
        if (num == 0.0) return 0.0;
        return om_mu > 0.0 ? num / om_mu : std::numeric_limits<double>::infinity();
    };
    for (std::size_t k = 0; k < n; ++k) rep.one_step = std::max(rep.one_step, ratio(norm_R(k, k + 1), std::pow(omega(k, k + 1), mu)));
    for (std::size_t s = 0; s <= n; ++s)
        for (std::size_t t = s + 2; t <= n; ++t) {
            const double om = std::pow(omega(s, t), mu);
            for (std::size_t u = s + 1; u < t; ++u) {
                rep.max_delta = std::max(rep.max_delta, ratio(delta_R(s, u, t), om));
                ++rep.triples;
            }
        }
    rep.kappa = std::max(rep.one_step, rep.max_delta);
    for (std::size_t s = 0; s <= n; ++s)
        for (std::size_t t = s + 1; t <= n; ++t) {
            ++rep.pairs;
            const double r = norm_R(s, t);
            if (rep.kappa == 0.0) {
                if (r != 0.0) ++rep.violations;
                continue;
            }
            const double q = ratio(r, rep.kappa * std::pow(omega(s, t), mu));
            rep.max_ratio = std::max(rep.max_ratio, q);
            if (q > rep.Kmu * (1.0 + 1e-12)) ++rep.violations;
        }
    return rep;
}

SewingReport sewing_verify(const RemainderTable& R, const OmegaTable& om, double mu) {
    const std::size_t n = R.steps();
    if (om.steps() != n) throw DomainError("control table does not match remainder grid");
    const std::size_t m = R.dims();
    std::vector<double> table((n + 1) * (n + 1) * m, 0.0);
    for (std::size_t s = 0; s <= n; ++s)
        for (std::size_t t = s; t <= n; ++t) {
            Vec v = R.at(s, t);
            std::copy(v.begin(), v.end(), table.begin() + static_cast<std::ptrdiff_t>((s * (n + 1) + t) * m));
        }
    auto val = [&](std::size_t s, std::size_t t, std::size_t i) { return table[(s * (n + 1) + t) * m + i]; };
    auto norm = [&](std::size_t s, std::size_t t) {
        double w = 0.0;
        for (std::size_t i = 0; i < m; ++i) w = std::max(w, std::abs(val(s, t, i)));
        return w;
    };
    auto delta = [&](std::size_t s, std::size_t u, std::size_t t) {
        double w = 0.0;
        for (std::size_t i = 0; i < m; ++i) w = std::max(w, std::abs(val(s, t, i) - val(s, u, i) - val(u, t, i)));
        return w;
    };
    return sewing_verify(n, norm, delta, [&](std::size_t s, std::size_t t) { return om(s, t); }, mu);
}

BoundReport bound_check(int L, const XiProcess& xi, const LiftedNoise& noise, const GreedyPartition& part,
                        const ControlOmega& om, const ConstantLedger& ledger, double K, const SchemeConfig& cfg) {
    if (L < 1 || L > xi.order() || L > ledger.N) throw DomainError("bound level outside computed range");
    if (!(K > 0.0)) throw DomainError("bound constant K must be positive");
    const std::size_t n = noise.grid().n;
    const double p = om.p();
    BoundReport rep;
    rep.L = L;
    rep.K2 = ledger.K2[static_cast<std::size_t>(L)];
    rep.K1 = ledger.K1[static_cast<std::size_t>(L)];
    rep.intervals = part.size();
    rep.s0 = part.count(IntervalClass::S0);
    rep.s1 = part.count(IntervalClass::S1);
    rep.s2 = part.count(IntervalClass::S2);
    const double dt2H = std::pow(noise.grid().dt(), 2.0 * noise.H);
    for (std::size_t j = 0; j < part.size(); ++j)
        if (part.cls[j] == IntervalClass::S2 &&
            noise.w.level1_norm(part.points[j], part.points[j + 1]) + dt2H > std::pow(part.omega[j], 1.0 / p))
            rep.delta_small_enough = false;
    rep.M = m_products(part, noise, K, p);
    rep.lhs = p_variation_norm(xi.levels[static_cast<std::size_t>(L)], 0, n, p);
    rep.omega_total = om(0, n);
    rep.log_rhs_over_K = std::log(rep.omega_total) / p + std::log(static_cast<double>(part.size())) +
                         static_cast<double>(L) * rep.M.log_total();
    rep.log_rho = std::log(rep.lhs) - rep.log_rhs_over_K;

    RemainderTable R(L, xi, noise, cfg);
    const GridPath& X = xi.levels[static_cast<std::size_t>(L)];
    const double C6 = ledger.C6[static_cast<std::size_t>(L)], C7 = ledger.C7[static_cast<std::size_t>(L)];
    for (std::size_t j = 0; j < part.size(); ++j) {
        if (part.cls[j] == IntervalClass::S2) continue;
        const std::size_t a = part.points[j], b = part.points[j + 1];
        for (std::size_t s = a; s < b; ++s) {
            auto row = om.row(s, b);
            const double P = p_process(xi, s, L);
            for (std::size_t t = s + 1; t <= b; ++t) {
                const double w = row[t - s];
                if (!(w > 0.0)) continue;
                ++rep.pairs_checked;
                rep.max_defect_ratio = std::max(rep.max_defect_ratio, R.local_defect(s, t) / (std::pow(w, 2.0 / p) * P));
                double inc = 0.0;
                for (std::size_t i = 0; i < X.dims(); ++i) inc = std::max(inc, std::abs(X.increment(s, t, i)));
                rep.max_increment_ratio = std::max(rep.max_increment_ratio, inc / (std::pow(w, 1.0 / p) * P));
                const double scale = P * std::pow(w, 1.0 / p);
                rep.max_C6_ratio = std::max(rep.max_C6_ratio, R.lbar_increment(s, t) / (C6 * scale));
                if (C7 > 0.0) rep.max_C7_ratio = std::max(rep.max_C7_ratio, R.ltilde_increment(s, t) / (C7 * scale));
            }
        }
    }
    rep.defect_ok = rep.max_defect_ratio <= rep.K2;
    rep.increment_ok = rep.max_increment_ratio <= rep.K1;
    return rep;
}

}  // namespace fbme
