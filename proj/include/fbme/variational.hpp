#pragma once

#include <optional>
#include <vector>

#include "fbme/scheme.hpp"
#include "fbme/tree_calculus.hpp"

namespace fbme {

// Levels Xi^0 = y, Xi^1 .. Xi^N on the scheme grid.
struct XiProcess {
    std::vector<GridPath> levels;
    Coefficients c = Coefficients::lemma();
    Coefficients ct = Coefficients::lemma();

    int order() const { return static_cast<int>(levels.size()) - 1; }
    const GridPath& y() const { return levels[0]; }
    // stack at grid index k: stack[l] = Xi^l_{t_k}
    Stack stack_at(std::size_t k) const;
};

struct XiOptions {
    Coefficients c = Coefficients::lemma();
    Coefficients ct = Coefficients::lemma();
    std::size_t start = 0;          // Xi^L constant on [0, t_start]
    std::vector<Vec> initial;       // Xi^L_{t_start}, L = 1..N (index L-1); zero when empty
};

// Smoothness needed for order N: derivatives up to max(N + 2, 3).
void require_order(const VectorFields& vf, int N);

XiProcess xi_run(int N, const SchemeConfig& cfg, const GridPath& y, const GridPath& x, const GridPath& b,
                 const XiOptions& opt = {});

// z^l = d^l/de^l y^n(x + e h) at e = 0 for l = 0..L (index l).
std::vector<GridPath> directional_derivative_run(int L, const SchemeConfig& cfg, const GridPath& y,
                                                 const GridPath& x, const GridPath& h);

// Central differences of euler_run along x + e h: order 1 or 2.
GridPath fd_oracle(int L, const SchemeConfig& cfg, const GridPath& x, const GridPath& h, double eps);

// Pointwise Malliavin derivative D_r y of the scheme in the direction sum_j w_j e_j of the
// noise, and optionally the second derivative D_{r'} D_r y.
struct PointDerivative {
    double r = 0.0;
    std::vector<double> w;                 // weights over noise coordinates
    std::optional<double> r2;
    std::vector<double> w2;
};
struct PointDerivativeResult {
    GridPath first;                        // D_r y
    std::optional<GridPath> first2;        // D_{r'} y
    std::optional<GridPath> second;        // D_{r'} D_r y
    std::size_t k0 = 0, k0b = 0;
};
PointDerivativeResult point_derivative_run(const SchemeConfig& cfg, const GridPath& y, const GridPath& x,
                                           const PointDerivative& spec);
// unit weight vector e_j, or all ones when summed
std::vector<double> noise_direction(std::size_t d, std::size_t j, bool summed);

// max(1, max over multisets of parts in 1..L with sum <= L of prod |Xi^{part}_{t_k}|); P^0 = 1, P^{-1} = 0.
double p_process(const XiProcess& xi, std::size_t k, int L);

}  // namespace fbme
