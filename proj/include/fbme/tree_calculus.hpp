#pragma once

#include <functional>
#include <span>
#include <vector>

#include "fbme/smooth_map.hpp"
#include "fbme/trees.hpp"

namespace fbme {

using Vec = std::vector<double>;
// stack[l], l = 1..N, holds the level-l vector; stack[0] is not read.
using Stack = std::vector<Vec>;
// A map R^m -> R^m given by its m scalar components.
using Column = std::vector<const ScalarField*>;

// Coefficient family c_{L,i} indexed by level and branch of the level-L tree.
class Coefficients {
public:
    enum class Kind { Unit, Zero, Lemma, Custom };

    static Coefficients unit() { return Coefficients(Kind::Unit); }
    static Coefficients zero() { return Coefficients(Kind::Zero); }
    // ell_2! ... ell_alpha! / L!
    static Coefficients lemma() { return Coefficients(Kind::Lemma); }
    static Coefficients custom(std::function<double(int, const BranchInfo&)> fn);

    Kind kind() const { return kind_; }
    double operator()(int L, const BranchInfo& b) const;

private:
    explicit Coefficients(Kind k) : kind_(k) {}
    Kind kind_;
    std::function<double(int, const BranchInfo&)> fn_;
};

// <d^k f(y), v_1 (x) ... (x) v_k>
double contract(const ScalarField& f, std::span<const double> y, std::span<const std::span<const double>> vecs);

// L^L_{xi,c} f(y) = sum_{i in A_L} c_{L,i} <d^{ell_1} f(y), xi^{ell_2} (x) ... (x) xi^{ell_alpha}>
// with L^0 = Id and L^{-1} = 0.
double op_L(int L, const ScalarField& f, std::span<const double> y, const Stack& xi, const Coefficients& c);
Vec op_L(int L, const Column& g, std::span<const double> y, const Stack& xi, const Coefficients& c);

// L-bar^L(df . g): L-bar^0 = Id, L-bar^{-1} = 0.
double op_Lbar(int L, const ScalarField& f, const Column& g, std::span<const double> y, const Stack& xi,
               const Coefficients& c);
// L-tilde^L(df . g): outer family c, inner family ct; zero for L <= 0.
double op_Ltilde(int L, const ScalarField& f, const Column& g, std::span<const double> y, const Stack& xi,
                 const Coefficients& c, const Coefficients& ct);

// Same operators with lg[l] = L^l_{xi,.} g(y) precomputed for l = 0..L (lg[0] = g(y)).
double op_Lbar_pre(int L, const ScalarField& f, std::span<const double> y, const Stack& xi, const Coefficients& c,
                   const std::vector<Vec>& lg);
double op_Ltilde_pre(int L, const ScalarField& f, std::span<const double> y, const Stack& xi, const Coefficients& c,
                     const std::vector<Vec>& lg_tilde);
std::vector<Vec> op_L_levels(int L, const Column& g, std::span<const double> y, const Stack& xi,
                             const Coefficients& c);

// D^N f(F) from the derivative stack D^1 F .. D^N F.
double tree_chain_rule(const ScalarField& f, std::span<const double> F, const Stack& D, int N);

struct ProductTerms {
    double M1 = 0.0;
    double M2 = 0.0;
    double total() const { return M1 + M2; }
};
// D^N (f g)(F) split as in the product rule; Dg[l] = D^l (g o F), l = 1..N.
ProductTerms tree_product_rule(const ScalarField& f, const ScalarField& g, std::span<const double> F, const Stack& D,
                               const Vec& Dg, int N);

}  // namespace fbme
