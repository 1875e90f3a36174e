#include "fbme/tree_calculus.hpp"

#include "fbme/errors.hpp"

namespace fbme {

namespace {

void check_levels(int L, const Stack& xi) {
    if (L > kMaxTreeDepth) throw DomainError("tree operators support levels up to 8");
    if (L > 0 && static_cast<int>(xi.size()) <= L) throw DomainError("stack too short for requested level");
}

void check_order(const ScalarField& f, int k) {
    if (k > f.max_order()) throw CapabilityError("field provides derivatives up to order " +
                                                 std::to_string(f.max_order()) + ", need " + std::to_string(k));
}

double contract_rec(const ScalarField& f, std::span<const double> y, std::span<const std::span<const double>> vecs,
                    std::vector<int>& idx, std::size_t pos, double weight) {
    if (pos == vecs.size()) return weight * f.partial(idx, y);
    double s = 0.0;
    for (std::size_t a = 0; a < vecs[pos].size(); ++a) {
        double w = vecs[pos][a];
        if (w == 0.0) continue;
        idx[pos] = static_cast<int>(a);
        s += contract_rec(f, y, vecs, idx, pos + 1, weight * w);
    }
    return s;
}

std::span<const double> level(const Stack& xi, int l) { return xi[static_cast<std::size_t>(l)]; }

}  // namespace

Coefficients Coefficients::custom(std::function<double(int, const BranchInfo&)> fn) {
    Coefficients c(Kind::Custom);
    c.fn_ = std::move(fn);
    return c;
}

double Coefficients::operator()(int L, const BranchInfo& b) const {
    switch (kind_) {
        case Kind::Unit: return 1.0;
        case Kind::Zero: return 0.0;
        case Kind::Lemma: return b.lemma_coeff.value();
        default: return fn_(L, b);
    }
}

double contract(const ScalarField& f, std::span<const double> y, std::span<const std::span<const double>> vecs) {
    check_order(f, static_cast<int>(vecs.size()));
    if (y.size() != f.input_dims()) throw DomainError("evaluation point has the wrong dimension");
    for (const auto& v : vecs)
        if (v.size() != f.input_dims()) throw DomainError("contraction vector has the wrong dimension");
    std::vector<int> idx(vecs.size(), 0);
    return contract_rec(f, y, vecs, idx, 0, 1.0);
}

double op_L(int L, const ScalarField& f, std::span<const double> y, const Stack& xi, const Coefficients& c) {
    if (L < 0) return 0.0;
    if (L == 0) return f.value(y);
    check_levels(L, xi);
    double s = 0.0;
    std::vector<std::span<const double>> vecs;
    for (const auto& br : tree_level(L)) {
        double cf = c(L, br);
        if (cf == 0.0) continue;
        vecs.clear();
        for (int r = 2; r <= br.stats.alpha; ++r) vecs.push_back(level(xi, br.stats.at(r)));
        s += cf * contract(f, y, vecs);
    }
    return s;
}

Vec op_L(int L, const Column& g, std::span<const double> y, const Stack& xi, const Coefficients& c) {
    Vec out(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) out[k] = op_L(L, *g[k], y, xi, c);
    return out;
}

std::vector<Vec> op_L_levels(int L, const Column& g, std::span<const double> y, const Stack& xi,
                             const Coefficients& c) {
    std::vector<Vec> out;
    for (int l = 0; l <= L; ++l) out.push_back(op_L(l, g, y, xi, c));
    return out;
}

double op_Lbar_pre(int L, const ScalarField& f, std::span<const double> y, const Stack& xi, const Coefficients& c,
                   const std::vector<Vec>& lg) {
    if (L < 0) return 0.0;
    std::vector<std::span<const double>> vecs;
    if (L == 0) {
        vecs.push_back(lg[0]);
        return contract(f, y, vecs);
    }
    check_levels(L, xi);
    double s = 0.0;
    for (const auto& br : tree_level(L)) {
        double cf = c(L, br);
        if (cf == 0.0) continue;
        const int alpha = br.stats.alpha;
        vecs.clear();
        for (int r = 2; r <= alpha; ++r) vecs.push_back(level(xi, br.stats.at(r)));
        vecs.push_back(lg[0]);
        s += cf * contract(f, y, vecs);
        vecs.pop_back();
        for (int r = 2; r <= alpha; ++r) {
            auto saved = vecs[static_cast<std::size_t>(r - 2)];
            vecs[static_cast<std::size_t>(r - 2)] = lg[static_cast<std::size_t>(br.stats.at(r))];
            s += cf * contract(f, y, vecs);
            vecs[static_cast<std::size_t>(r - 2)] = saved;
        }
    }
    return s;
}

double op_Ltilde_pre(int L, const ScalarField& f, std::span<const double> y, const Stack& xi, const Coefficients& c,
                     const std::vector<Vec>& lg_tilde) {
    if (L <= 0) return 0.0;
    check_levels(L, xi);
    double s = 0.0;
    std::vector<std::span<const double>> vecs;
    for (const auto& br : tree_level(L)) {
        double cf = c(L, br);
        if (cf == 0.0) continue;
        const int alpha = br.stats.alpha;
        vecs.clear();
        for (int r = 2; r <= alpha; ++r) vecs.push_back(level(xi, br.stats.at(r)));
        for (int r = 2; r <= alpha; ++r) {
            auto saved = vecs[static_cast<std::size_t>(r - 2)];
            vecs[static_cast<std::size_t>(r - 2)] = lg_tilde[static_cast<std::size_t>(br.stats.at(r) - 1)];
            s += cf * contract(f, y, vecs);
            vecs[static_cast<std::size_t>(r - 2)] = saved;
        }
    }
    return s;
}

double op_Lbar(int L, const ScalarField& f, const Column& g, std::span<const double> y, const Stack& xi,
               const Coefficients& c) {
    if (L < 0) return 0.0;
    return op_Lbar_pre(L, f, y, xi, c, op_L_levels(L, g, y, xi, c));
}

double op_Ltilde(int L, const ScalarField& f, const Column& g, std::span<const double> y, const Stack& xi,
                 const Coefficients& c, const Coefficients& ct) {
    if (L <= 0) return 0.0;
    return op_Ltilde_pre(L, f, y, xi, c, op_L_levels(L - 1, g, y, xi, ct));
}

double tree_chain_rule(const ScalarField& f, std::span<const double> F, const Stack& D, int N) {
    if (N < 1) throw DomainError("chain rule order must be at least 1");
    return op_L(N, f, F, D, Coefficients::unit());
}

ProductTerms tree_product_rule(const ScalarField& f, const ScalarField& g, std::span<const double> F, const Stack& D,
                               const Vec& Dg, int N) {
    if (N < 1) throw DomainError("product rule order must be at least 1");
    check_levels(N, D);
    if (static_cast<int>(Dg.size()) <= N) throw DomainError("need D^l g for l = 1..N");
    ProductTerms out;
    const double gF = g.value(F);
    std::vector<std::span<const double>> vecs;
    for (const auto& br : tree_level(N)) {
        const int alpha = br.stats.alpha;
        vecs.clear();
        for (int r = 2; r <= alpha; ++r) vecs.push_back(level(D, br.stats.at(r)));
        out.M1 += gF * contract(f, F, vecs);
        for (int r = 2; r <= alpha; ++r) {
            std::vector<std::span<const double>> rest;
            for (int q = 2; q <= alpha; ++q)
                if (q != r) rest.push_back(level(D, br.stats.at(q)));
            out.M2 += Dg[static_cast<std::size_t>(br.stats.at(r))] * contract(f, F, rest);
        }
    }
    return out;
}

}  // namespace fbme
