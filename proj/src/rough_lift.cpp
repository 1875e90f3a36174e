#include "fbme/rough_lift.hpp"

#include <algorithm>
#include <cmath>

#include "fbme/errors.hpp"

namespace fbme {

RoughLift RoughLift::piecewise_linear(const GridPath& fine, std::size_t refine, std::size_t dense_limit) {
    if (refine == 0 || fine.steps() % refine != 0) throw DomainError("refinement must divide the fine step count");
    const std::size_t n = fine.steps() / refine;
    const std::size_t d = fine.dims();
    const std::size_t dd = d * d;

    RoughLift lift;
    lift.base_ = fine.restrict_to(n);

    // one-step values from the fine linear pieces, relative to the left coarse point
    std::vector<double> step(n * dd, 0.0);
    std::vector<double> delta(d);
    for (std::size_t k = 0; k < n; ++k) {
        double* S = step.data() + k * dd;
        for (std::size_t f = k * refine; f < (k + 1) * refine; ++f) {
            for (std::size_t a = 0; a < d; ++a) delta[a] = fine(f + 1, a) - fine(f, a);
            for (std::size_t a = 0; a < d; ++a) {
                double run = fine(f, a) - fine(k * refine, a) + 0.5 * delta[a];
                for (std::size_t b = 0; b < d; ++b) S[a * d + b] += run * delta[b];
            }
        }
    }

    const GridPath& x = lift.base_;
    lift.prefix_.assign((n + 1) * dd, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double* A = lift.prefix_.data() + k * dd;
        double* B = lift.prefix_.data() + (k + 1) * dd;
        const double* S = step.data() + k * dd;
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b)
                B[a * d + b] = A[a * d + b] + S[a * d + b] + (x(k, a) - x(0, a)) * (x(k + 1, b) - x(k, b));
    }

    if (n <= dense_limit) {
        lift.table_.assign((n + 1) * (n + 2) / 2 * dd, 0.0);
        for (std::size_t j = 0; j <= n; ++j) {
            for (std::size_t k = j; k < n; ++k) {
                const double* cur = lift.table_.data() + lift.pair_index(j, k) * dd;
                double* nxt = lift.table_.data() + lift.pair_index(j, k + 1) * dd;
                const double* S = step.data() + k * dd;
                for (std::size_t a = 0; a < d; ++a)
                    for (std::size_t b = 0; b < d; ++b)
                        nxt[a * d + b] = cur[a * d + b] + S[a * d + b] + (x(k, a) - x(j, a)) * (x(k + 1, b) - x(k, b));
            }
        }
    }
    return lift;
}

std::size_t RoughLift::pair_index(std::size_t j, std::size_t k) const {
    const std::size_t n = grid().n;
    return j * (n + 1) - j * (j - 1) / 2 + (k - j);
}

double RoughLift::level2(std::size_t j, std::size_t k, std::size_t a, std::size_t b) const {
    const std::size_t d = dims();
    if (j > k) throw DomainError("level-2 pair must satisfy j <= k");
    if (dense()) return table_[pair_index(j, k) * d * d + a * d + b];
    const double* A = prefix_.data() + j * d * d;
    const double* B = prefix_.data() + k * d * d;
    return B[a * d + b] - A[a * d + b] - (base_(j, a) - base_(0, a)) * (base_(k, b) - base_(j, b));
}

void RoughLift::level2(std::size_t j, std::size_t k, std::span<double> out) const {
    const std::size_t d = dims();
    if (dense()) {
        const double* src = table_.data() + pair_index(j, k) * d * d;
        std::copy(src, src + d * d, out.begin());
        return;
    }
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b) out[a * d + b] = level2(j, k, a, b);
}

double RoughLift::level2_norm(std::size_t j, std::size_t k) const {
    const std::size_t d = dims();
    double m = 0.0;
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b) m = std::max(m, std::abs(level2(j, k, a, b)));
    return m;
}

double RoughLift::level1_norm(std::size_t j, std::size_t k) const {
    double m = 0.0;
    for (std::size_t a = 0; a < dims(); ++a) m = std::max(m, std::abs(base_.increment(j, k, a)));
    return m;
}

void RoughLift::set_level2(std::size_t j, std::size_t k, std::size_t a, std::size_t b, double v) {
    if (!dense()) throw DomainError("set_level2 needs dense storage");
    const std::size_t d = dims();
    table_[pair_index(j, k) * d * d + a * d + b] = v;
}

namespace {

double chen_residual(const RoughLift& lift, std::size_t s, std::size_t u, std::size_t t) {
    const std::size_t d = lift.dims();
    const GridPath& x = lift.base();
    double worst = 0.0;
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b) {
            double r = lift.level2(s, t, a, b) - lift.level2(s, u, a, b) - lift.level2(u, t, a, b) -
                       x.increment(s, u, a) * x.increment(u, t, b);
            worst = std::max(worst, std::abs(r));
        }
    return worst;
}

}  // namespace

double check_chen(const RoughLift& lift) {
    const std::size_t n = lift.grid().n;
    double worst = 0.0;
    for (std::size_t s = 0; s <= n; ++s)
        for (std::size_t u = s; u <= n; ++u)
            for (std::size_t t = u; t <= n; ++t) worst = std::max(worst, chen_residual(lift, s, u, t));
    return worst;
}

double check_chen(const RoughLift& lift, std::span<const Triple> triples) {
    double worst = 0.0;
    for (const auto& tr : triples) {
        if (!(tr.s <= tr.u && tr.u <= tr.t && tr.t <= lift.grid().n)) throw DomainError("triple out of order");
        worst = std::max(worst, chen_residual(lift, tr.s, tr.u, tr.t));
    }
    return worst;
}

double p_variation(const std::function<double(std::size_t, std::size_t)>& inc_norm, std::size_t a, std::size_t b,
                   double p) {
    if (a > b) throw DomainError("p-variation interval reversed");
    std::vector<double> best(b - a + 1, 0.0);
    for (std::size_t k = a + 1; k <= b; ++k) {
        double m = 0.0;
        for (std::size_t i = a; i < k; ++i) m = std::max(m, best[i - a] + std::pow(inc_norm(i, k), p));
        best[k - a] = m;
    }
    return best[b - a];
}

double p_variation_norm(const GridPath& path, std::size_t a, std::size_t b, double p) {
    auto inc = [&](std::size_t i, std::size_t k) {
        double m = 0.0;
        for (std::size_t c = 0; c < path.dims(); ++c) m = std::max(m, std::abs(path.increment(i, k, c)));
        return m;
    };
    return std::pow(p_variation(inc, a, b, p), 1.0 / p);
}

StepSums::StepSums(const RoughLift& lift, Block block, double diag_shift) : block_(block), n_(lift.grid().n) {
    if (block.row0 + block.rows > lift.dims() || block.col0 + block.cols > lift.dims())
        throw DomainError("block outside lift dimensions");
    const std::size_t sz = block.rows * block.cols;
    partial_.assign((n_ + 1) * sz, 0.0);
    for (std::size_t k = 0; k < n_; ++k)
        for (std::size_t a = 0; a < block.rows; ++a)
            for (std::size_t b = 0; b < block.cols; ++b) {
                double v = lift.level2(k, k + 1, block.row0 + a, block.col0 + b);
                if (a == b) v -= diag_shift;
                partial_[(k + 1) * sz + a * block.cols + b] = partial_[k * sz + a * block.cols + b] + v;
            }
}

double StepSums::value(std::size_t j, std::size_t k, std::size_t a, std::size_t b) const {
    const std::size_t sz = block_.rows * block_.cols;
    return partial_[k * sz + a * block_.cols + b] - partial_[j * sz + a * block_.cols + b];
}

void StepSums::value(std::size_t j, std::size_t k, std::span<double> out) const {
    for (std::size_t a = 0; a < block_.rows; ++a)
        for (std::size_t b = 0; b < block_.cols; ++b) out[a * block_.cols + b] = value(j, k, a, b);
}

double StepSums::norm(std::size_t j, std::size_t k) const {
    double m = 0.0;
    for (std::size_t a = 0; a < block_.rows; ++a)
        for (std::size_t b = 0; b < block_.cols; ++b) m = std::max(m, std::abs(value(j, k, a, b)));
    return m;
}

StepSums build_q(const RoughLift& lift, double H) {
    const std::size_t d = lift.dims();
    return StepSums(lift, Block{0, 0, d, d}, 0.5 * std::pow(lift.grid().dt(), 2.0 * H));
}

std::pair<Block, StepSums> build_cross(const RoughLift& lift_w) {
    if (lift_w.dims() % 2 != 0) throw DomainError("cross block needs a lift of w = (x, b)");
    const std::size_t d = lift_w.dims() / 2;
    Block blk{d, 0, d, d};
    return {blk, StepSums(lift_w, blk, 0.0)};
}

void LiftedNoise::centred(Block blk, const StepSums& sums, std::size_t j, std::size_t k,
                          std::span<double> out) const {
    for (std::size_t a = 0; a < blk.rows; ++a)
        for (std::size_t b = 0; b < blk.cols; ++b)
            out[a * blk.cols + b] = w.level2(j, k, blk.row0 + a, blk.col0 + b) - sums.value(j, k, a, b);
}

LiftedNoise lift_noise(const GridPath& x, const GridPath& b, double H, std::size_t dense_limit) {
    if (x.dims() != b.dims()) throw DomainError("x and b must have the same dimension");
    LiftedNoise out;
    out.d = x.dims();
    out.H = H;
    out.w = RoughLift::piecewise_linear(x.concat(b), 1, dense_limit);
    const double shift = 0.5 * std::pow(x.grid().dt(), 2.0 * H);
    out.q = StepSums(out.w, out.xx(), shift);
    out.qb = StepSums(out.w, out.bb(), shift);
    out.qt = StepSums(out.w, out.bx(), 0.0);
    out.qxb = StepSums(out.w, out.xb(), 0.0);
    return out;
}

ControlOmega::ControlOmega(const LiftedNoise& noise, double p) : noise_(&noise), p_(p) {
    if (!(p > 2.0)) throw DomainError("control needs p > 2");
}

double ControlOmega::term(int which, std::size_t j, std::size_t k) const {
    switch (which) {
        case 0: return std::pow(noise_->w.level1_norm(j, k), p_);
        case 1: return std::pow(noise_->w.level2_norm(j, k), 0.5 * p_);
        case 2: return std::pow(noise_->q.norm(j, k), 0.5 * p_);
        default: return std::pow(noise_->qb.norm(j, k), 0.5 * p_);
    }
}

double ControlOmega::operator()(std::size_t j, std::size_t k) const {
    RowScan scan(*this, j);
    while (scan.end() < k) scan.advance();
    return scan.value();
}

std::vector<double> ControlOmega::row(std::size_t j, std::size_t k_end) const {
    std::vector<double> out{0.0};
    RowScan scan(*this, j);
    while (scan.end() < k_end) {
        scan.advance();
        out.push_back(scan.value());
    }
    return out;
}

ControlOmega::RowScan::RowScan(const ControlOmega& om, std::size_t j) : om_(&om), j_(j), u_(j) {
    for (auto& b : best_) b.assign(1, 0.0);
}

double ControlOmega::RowScan::value() const {
    return best_[0].back() + best_[1].back() + best_[2].back() + best_[3].back();
}

bool ControlOmega::RowScan::advance() {
    if (u_ >= om_->noise_->grid().n) return false;
    ++u_;
    for (int t = 0; t < 4; ++t) {
        double m = 0.0;
        for (std::size_t i = j_; i < u_; ++i) m = std::max(m, best_[t][i - j_] + om_->term(t, i, u_));
        best_[t].push_back(m);
    }
    return true;
}

}  // namespace fbme
