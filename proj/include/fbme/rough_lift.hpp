#pragma once

#include <functional>
#include <span>
#include <vector>

#include "fbme/grid.hpp"

namespace fbme {

// Step-2 lift (x^1, x^2) of a path on a grid. Pairs are addressed by grid indices j <= k.
// Small grids keep every pair in a table; larger ones keep x^2_{0,t} and use Chen's
// relation x^2_{st} = x^2_{0t} - x^2_{0s} - x^1_{0s} (x) x^1_{st}.
class RoughLift {
public:
    static constexpr std::size_t kDefaultDenseLimit = 1024;

    // Iterated integrals of the piecewise-linear interpolation of `fine`, reported on the
    // grid with fine.steps() / refine steps.
    static RoughLift piecewise_linear(const GridPath& fine, std::size_t refine = 1,
                                      std::size_t dense_limit = kDefaultDenseLimit);

    const GridPath& base() const { return base_; }
    const Grid& grid() const { return base_.grid(); }
    std::size_t dims() const { return base_.dims(); }
    bool dense() const { return !table_.empty(); }

    double level2(std::size_t j, std::size_t k, std::size_t a, std::size_t b) const;
    void level2(std::size_t j, std::size_t k, std::span<double> out) const;
    // max_{a,b} |x^{2,ab}_{jk}|
    double level2_norm(std::size_t j, std::size_t k) const;
    double level1_norm(std::size_t j, std::size_t k) const;
    // Dense storage only; used to perturb a lift in tests.
    void set_level2(std::size_t j, std::size_t k, std::size_t a, std::size_t b, double v);

private:
    std::size_t pair_index(std::size_t j, std::size_t k) const;

    GridPath base_;
    std::vector<double> prefix_;  // x^2_{0,t_k}, (n+1) * d * d
    std::vector<double> table_;   // dense upper triangle incl. diagonal
};

// Largest |x^2_{st} - x^2_{su} - x^2_{ut} - x^1_{su} (x) x^1_{ut}| over all s <= u <= t.
double check_chen(const RoughLift& lift);
struct Triple {
    std::size_t s, u, t;
};
double check_chen(const RoughLift& lift, std::span<const Triple> triples);

// sup over partitions a = i_0 < ... < i_r = b of sum |inc(i_l, i_{l+1})|^p.
double p_variation(const std::function<double(std::size_t, std::size_t)>& inc_norm, std::size_t a, std::size_t b,
                   double p);
// ||path||_{p-var,[a,b]} under the max-abs norm of increments.
double p_variation_norm(const GridPath& path, std::size_t a, std::size_t b, double p);

// Rectangular block of a (2d) x (2d) level-2 matrix.
struct Block {
    std::size_t row0 = 0, col0 = 0, rows = 0, cols = 0;
};

// Running sums over grid steps of one-step level-2 values of a block, with
// `diag_shift` removed from diagonal entries: s_{jk} = sum_{j <= l < k} (x^2_{l,l+1} - shift I).
class StepSums {
public:
    StepSums() = default;
    StepSums(const RoughLift& lift, Block block, double diag_shift);

    std::size_t rows() const { return block_.rows; }
    std::size_t cols() const { return block_.cols; }
    const Block& block() const { return block_; }
    double value(std::size_t j, std::size_t k, std::size_t a, std::size_t b) const;
    void value(std::size_t j, std::size_t k, std::span<double> out) const;
    double norm(std::size_t j, std::size_t k) const;

private:
    Block block_;
    std::size_t n_ = 0;
    std::vector<double> partial_;
};

// q^{ij}_{st} = sum (x^{2,ij}_{t_k t_{k+1}} - 1/2 dt^{2H} 1_{i=j}).
StepSums build_q(const RoughLift& lift, double H);

// Lift of w = (x, b) with the associated running sums.
// q, qb: the x-x and b-b blocks with diagonal centring.
// wt: the b-then-x block (rows b, cols x); xb: the x-then-b block (rows x, cols b).
struct LiftedNoise {
    std::size_t d = 0;
    double H = 0.4;
    RoughLift w;
    StepSums q, qb, qt, qxb;

    const Grid& grid() const { return w.grid(); }
    Block xx() const { return {0, 0, d, d}; }
    Block bb() const { return {d, d, d, d}; }
    Block bx() const { return {d, 0, d, d}; }
    Block xb() const { return {0, d, d, d}; }
    // block of x^2_{jk} minus the matching running sum
    void centred(Block blk, const StepSums& sums, std::size_t j, std::size_t k, std::span<double> out) const;
};

LiftedNoise lift_noise(const GridPath& x, const GridPath& b, double H,
                       std::size_t dense_limit = RoughLift::kDefaultDenseLimit);
// (w-tilde, q-tilde) for a lift of w = (x, b): block view and its running sums.
std::pair<Block, StepSums> build_cross(const RoughLift& lift_w);

// omega(s,t) = ||w^1||^p_{p-var} + ||w^2||^{p/2}_{p/2-var} + ||q||^{p/2}_{p/2-var} + ||q^b||^{p/2}_{p/2-var}
class ControlOmega {
public:
    ControlOmega(const LiftedNoise& noise, double p);

    double p() const { return p_; }
    const LiftedNoise& noise() const { return *noise_; }
    double operator()(std::size_t j, std::size_t k) const;
    // omega(j, u) for u = j..k_end
    std::vector<double> row(std::size_t j, std::size_t k_end) const;

    // Extends omega(j, .) one grid point at a time.
    class RowScan {
    public:
        RowScan(const ControlOmega& om, std::size_t j);
        std::size_t end() const { return u_; }
        double value() const;
        bool advance();

    private:
        const ControlOmega* om_;
        std::size_t j_, u_;
        std::vector<double> best_[4];
    };

    double term(int which, std::size_t j, std::size_t k) const;

private:
    const LiftedNoise* noise_;
    double p_;
};

}  // namespace fbme
