#include "fbme/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "fbme/errors.hpp"
#include "fbme/gaussian.hpp"

namespace fbme {

void SchemeConfig::validate() const {
    vf.validate();
    if (y0.size() != vf.m) throw DomainError("initial value has " + std::to_string(y0.size()) +
                                             " components, expected " + std::to_string(vf.m));
    if (grid.n == 0) throw DomainError("scheme grid is empty");
    if (vf.max_order() < 1) throw CapabilityError("scheme needs first derivatives of V");
}

double SchemeConfig::correction_scale() const { return std::pow(grid.dt(), 2.0 * hp.H); }

GridPath euler_run(const SchemeConfig& cfg, const GridPath& x) {
    cfg.validate();
    if (x.dims() != cfg.vf.d) throw DomainError("driving path dimension does not match V");
    const Grid& g = x.grid();
    const std::size_t m = cfg.vf.m, d = cfg.vf.d;
    const double dt = g.dt();
    const double corr = 0.5 * std::pow(dt, 2.0 * cfg.hp.H);
    GridPath y(g, m);
    for (std::size_t i = 0; i < m; ++i) y(0, i) = cfg.y0[i];
    std::vector<double> V(m * d), dvv(m), next(m);
    for (std::size_t k = 0; k < g.n; ++k) {
        auto yk = y.at(k);
        cfg.vf.eval(yk, V);
        for (std::size_t i = 0; i < m; ++i) {
            double s = yk[i];
            if (cfg.vf.has_drift()) s += cfg.vf.V0[i]->value(yk) * dt;
            for (std::size_t j = 0; j < d; ++j) s += V[i * d + j] * (x(k + 1, j) - x(k, j));
            next[i] = s;
        }
        for (std::size_t j = 0; j < d; ++j) {
            cfg.vf.dVV(j, j, yk, dvv);
            for (std::size_t i = 0; i < m; ++i) next[i] += corr * dvv[i];
        }
        for (std::size_t i = 0; i < m; ++i) {
            if (!std::isfinite(next[i])) throw OverflowError("euler scheme produced a non-finite value", k + 1);
            y(k + 1, i) = next[i];
        }
    }
    return y;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(count, static_cast<std::size_t>(std::max(threads, 1))));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::exception_ptr err;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < count; i += workers) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(mu);
                    if (!err) err = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

namespace {

double end_gap(const GridPath& a, const GridPath& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.dims(); ++i) m = std::max(m, std::abs(a(a.steps(), i) - b(b.steps(), i)));
    return m;
}

}  // namespace

ConvergenceReport coupled_refinement_errors(const SchemeConfig& cfg, const std::vector<std::size_t>& levels,
                                            const std::vector<std::uint64_t>& seeds, int threads) {
    cfg.validate();
    if (levels.size() < 3) throw DomainError("convergence study needs at least three levels");
    for (std::size_t i = 1; i < levels.size(); ++i)
        if (levels[i] % levels[i - 1] != 0 || levels[i] <= levels[i - 1])
            throw DomainError("levels must be increasing and nested");
    if (levels.back() != cfg.grid.n) throw DomainError("finest level must equal the scheme grid");
    if (seeds.empty()) throw DomainError("convergence study needs at least one seed");

    const std::size_t L = levels.size();
    std::vector<std::vector<double>> vs_finest(seeds.size(), std::vector<double>(L, 0.0));
    std::vector<std::vector<double>> consecutive(seeds.size(), std::vector<double>(L - 1, 0.0));
    increment_cholesky(cfg.grid, cfg.hp.H);
    parallel_for(seeds.size(), threads, [&](std::size_t s) {
        GridPath fine = sample_fbm(cfg.grid, cfg.hp.H, cfg.vf.d, seeds[s]);
        std::vector<GridPath> runs;
        for (std::size_t n : levels) {
            SchemeConfig c = cfg;
            c.grid = Grid(n, cfg.grid.T);
            runs.push_back(euler_run(c, fine.restrict_to(n)));
        }
        for (std::size_t l = 0; l < L; ++l) vs_finest[s][l] = end_gap(runs[l], runs.back());
        for (std::size_t l = 0; l + 1 < L; ++l) consecutive[s][l] = end_gap(runs[l], runs[l + 1]);
    });

    ConvergenceReport rep;
    rep.levels = levels;
    rep.seeds = seeds.size();
    auto rms = [&](const std::vector<std::vector<double>>& e, std::size_t l) {
        double acc = 0.0;
        for (const auto& row : e) acc += row[l] * row[l];
        return std::sqrt(acc / static_cast<double>(e.size()));
    };
    for (std::size_t l = 0; l < L; ++l) rep.rms_vs_finest.push_back(rms(vs_finest, l));
    for (std::size_t l = 0; l + 1 < L; ++l) rep.rms_consecutive.push_back(rms(consecutive, l));

    // least squares of log2(error) on log2(n) over the consecutive differences
    const std::size_t k = L - 1;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::vector<double> xs, ys;
    for (std::size_t l = 0; l < k; ++l) {
        double xv = std::log2(static_cast<double>(levels[l]));
        double yv = std::log2(std::max(rep.rms_consecutive[l], 1e-300));
        xs.push_back(xv);
        ys.push_back(yv);
        sx += xv;
        sy += yv;
        sxx += xv * xv;
        sxy += xv * yv;
    }
    const double kk = static_cast<double>(k);
    const double den = kk * sxx - sx * sx;
    const double slope = (kk * sxy - sx * sy) / den;
    const double icpt = (sy - slope * sx) / kk;
    double ss = 0.0;
    for (std::size_t l = 0; l < k; ++l) ss += std::pow(ys[l] - icpt - slope * xs[l], 2);
    rep.rate = -slope;
    rep.rate_stderr = k > 2 ? std::sqrt(ss / (kk - 2.0) / (sxx - sx * sx / kk)) : 0.0;
    return rep;
}

double davie_defect(const SchemeConfig& cfg, const GridPath& y, const RoughLift& lift, double mu) {
    cfg.validate();
    const std::size_t n = y.steps();
    if (lift.grid().n != n || lift.dims() != cfg.vf.d) throw DomainError("lift does not match the scheme path");
    const std::size_t m = cfg.vf.m, d = cfg.vf.d;
    const std::size_t stride = std::max<std::size_t>(1, n / 256);
    const double dt = y.grid().dt();
    std::vector<double> V(m * d), dvv(m), drift_sum(m);
    std::vector<std::vector<double>> dvv_all(d * d, std::vector<double>(m));
    double worst = 0.0;
    for (std::size_t j = 0; j < n; j += stride) {
        auto ys = y.at(j);
        cfg.vf.eval(ys, V);
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b) cfg.vf.dVV(b, a, ys, dvv_all[a * d + b]);
        std::fill(drift_sum.begin(), drift_sum.end(), 0.0);
        for (std::size_t k = j + 1; k <= n; ++k) {
            if (cfg.vf.has_drift())
                for (std::size_t i = 0; i < m; ++i) drift_sum[i] += cfg.vf.V0[i]->value(y.at(k - 1)) * dt;
            if ((k - j) % stride != 0 && k != n) continue;
            double res = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                double r = y(k, i) - y(j, i) - drift_sum[i];
                for (std::size_t a = 0; a < d; ++a) r -= V[i * d + a] * lift.base().increment(j, k, a);
                for (std::size_t a = 0; a < d; ++a)
                    for (std::size_t b = 0; b < d; ++b) r -= dvv_all[a * d + b][i] * lift.level2(j, k, a, b);
                res = std::max(res, std::abs(r));
            }
            worst = std::max(worst, res / std::pow(y.grid().time(k) - y.grid().time(j), mu));
        }
    }
    return worst;
}

}  // namespace fbme
