#include <cmath>
#include <functional>

#include <gtest/gtest.h>

#include "fbme/errors.hpp"
#include "fbme/gaussian.hpp"
#include "fbme/variational.hpp"

using namespace fbme;

namespace {

SchemeConfig bank_config(std::size_t n, double H = 0.4) {
    SchemeConfig cfg;
    cfg.vf = make_bank("sincos-m2d2", 2, 2);
    cfg.hp = HurstParams::with_default_p(H);
    cfg.grid = Grid(n, 1.0);
    cfg.y0 = {0.1, -0.2};
    return cfg;
}

double max_gap(const GridPath& a, const GridPath& b) {
    double e = 0.0;
    for (std::size_t k = 0; k <= a.steps(); ++k)
        for (std::size_t i = 0; i < a.dims(); ++i) e = std::max(e, std::abs(a(k, i) - b(k, i)));
    return e;
}

// x with eps * w added to every point after index k0
GridPath bump(const GridPath& x, std::size_t k0, const std::vector<double>& w, double eps) {
    GridPath out = x;
    for (std::size_t k = k0 + 1; k <= x.steps(); ++k)
        for (std::size_t j = 0; j < x.dims(); ++j) out(k, j) += eps * w[j];
    return out;
}

}  // namespace

TEST(Malliavin, DirectionalDerivativeMatchesFiniteDifferences) {
    auto cfg = bank_config(128);
    GridPath x = sample_fbm(cfg.grid, 0.4, 2, 7);
    GridPath y = euler_run(cfg, x);
    std::vector<double> w{1.0, 0.5};
    GridPath h = cameron_martin_direction(cfg.grid, 0.5, 0.4, w);
    auto z = directional_derivative_run(2, cfg, y, x, h);
    EXPECT_EQ(max_gap(z[0], y), 0.0);
    EXPECT_LT(max_gap(z[1], fd_oracle(1, cfg, x, h, 1e-4)), 1e-8);
    EXPECT_LT(max_gap(z[2], fd_oracle(2, cfg, x, h, 1e-4)), 1e-5);
    EXPECT_THROW(fd_oracle(3, cfg, x, h, 1e-4), DomainError);
}

TEST(Xi, DerivativesInBReproduceDirectionalDerivatives) {
    auto cfg = bank_config(64);
    GridPath x = sample_fbm(cfg.grid, 0.4, 2, 9), b = sample_fbm(cfg.grid, 0.4, 2, companion_seed(9));
    GridPath y = euler_run(cfg, x);
    GridPath h = cameron_martin_direction(cfg.grid, 0.3, 0.4, std::vector<double>{0.5, -1.0});
    auto z = directional_derivative_run(3, cfg, y, x, h);
    const double e = 1e-2;
    auto xp = xi_run(2, cfg, y, x, b.scaled_sum(h, e));
    auto xm = xi_run(2, cfg, y, x, b.scaled_sum(h, -e));
    auto x0 = xi_run(2, cfg, y, x, b);
    GridPath d1(cfg.grid, 2), d2(cfg.grid, 2);
    for (std::size_t k = 0; k <= 64; ++k)
        for (std::size_t i = 0; i < 2; ++i) {
            d1(k, i) = (xp.levels[1](k, i) - xm.levels[1](k, i)) / (2 * e);
            d2(k, i) = (xp.levels[2](k, i) - 2 * x0.levels[2](k, i) + xm.levels[2](k, i)) / (e * e);
        }
    EXPECT_LT(max_gap(d1, z[1]), 1e-10);
    EXPECT_LT(max_gap(d2, z[2]), 1e-8);

    // Xi^1 is linear in b with no constant part
    auto xh = xi_run(1, cfg, y, x, h);
    EXPECT_LT(max_gap(xh.levels[1], z[1]), 1e-13);
}

TEST(Xi, ZeroCompanionNoiseLeavesOnlyCorrectionTerm) {
    auto cfg = bank_config(32);
    GridPath x = sample_fbm(cfg.grid, 0.4, 2, 1);
    GridPath y = euler_run(cfg, x);
    auto xi = xi_run(2, cfg, y, x, GridPath(cfg.grid, 2));
    EXPECT_EQ(max_gap(xi.levels[1], GridPath(cfg.grid, 2)), 0.0);
    EXPECT_EQ(xi.order(), 2);
    EXPECT_EQ(max_gap(xi.y(), y), 0.0);

    // level 2 then solves a linear recursion forced by corr * dV_j V_j
    const VectorFields& vf = cfg.vf;
    const double corr = 0.5 * std::pow(cfg.grid.dt(), 0.8);
    GridPath X(cfg.grid, 2);
    for (std::size_t k = 0; k < 32; ++k) {
        auto yk = y.at(k);
        for (std::size_t i = 0; i < 2; ++i) {
            double inc = 0.0;
            for (std::size_t j = 0; j < 2; ++j) {
                const ScalarField& V = vf.comp(i, j);
                for (int l = 0; l < 2; ++l) {
                    int one[1] = {l};
                    double dV = V.partial(one, yk);
                    inc += dV * X(k, l) * x.increment(k, k + 1, j);
                    inc += corr * dV * vf.comp(l, j).value(yk);
                    double inner = 0.0;
                    for (int p = 0; p < 2; ++p) {
                        int two[2] = {l, p};
                        int onep[1] = {p};
                        inc += corr * V.partial(two, yk) * X(k, l) * vf.comp(p, j).value(yk);
                        inner += vf.comp(l, j).partial(onep, yk) * X(k, p);
                    }
                    inc += corr * dV * inner;
                }
            }
            X(k + 1, i) = X(k, i) + inc;
        }
    }
    EXPECT_GT(max_gap(X, GridPath(cfg.grid, 2)), 1e-3);
    EXPECT_LT(max_gap(xi.levels[2], X), 1e-13);
}

TEST(Xi, StartIndexAndInitialValues) {
    auto cfg = bank_config(32);
    GridPath x = sample_fbm(cfg.grid, 0.4, 2, 1), b = sample_fbm(cfg.grid, 0.4, 2, 2);
    GridPath y = euler_run(cfg, x);
    XiOptions opt;
    opt.start = 10;
    opt.initial = {Vec{1.0, 0.0}, Vec{0.0, 0.0}};
    auto xi = xi_run(2, cfg, y, x, b, opt);
    for (std::size_t k = 0; k <= 10; ++k) EXPECT_EQ(xi.levels[1](k, 0), 1.0);
    EXPECT_NE(xi.levels[1](11, 0), 1.0);
    opt.initial.pop_back();
    EXPECT_THROW(xi_run(2, cfg, y, x, b, opt), DomainError);
    opt.initial.clear();
    opt.start = 40;
    EXPECT_THROW(xi_run(2, cfg, y, x, b, opt), DomainError);
    EXPECT_THROW(xi_run(9, cfg, y, x, b), DomainError);
}

TEST(Xi, CapabilityError) {
    auto cfg = bank_config(16);
    VectorFields vf;
    vf.m = vf.d = 1;
    vf.V = {std::make_shared<FiniteDifferenceField>(1, [](std::span<const double> y) { return std::cos(y[0]); })};
    cfg.vf = vf;
    cfg.y0 = {0.0};
    GridPath x = sample_fbm(cfg.grid, 0.4, 1, 3);
    GridPath y = euler_run(cfg, x);
    EXPECT_NO_THROW(xi_run(2, cfg, y, x, x));
    EXPECT_THROW(xi_run(3, cfg, y, x, x), CapabilityError);
    EXPECT_THROW(require_order(vf, 3), CapabilityError);
}

TEST(PointDerivative, LinearFieldClosedForm) {
    const double sigma = 0.8;
    SchemeConfig cfg = bank_config(40, 0.45);
    cfg.vf.m = cfg.vf.d = 1;
    cfg.vf.V = {std::make_shared<PolynomialField>(1, std::vector<Monomial>{{sigma, {1}}})};
    cfg.y0 = {1.1};
    GridPath x = sample_fbm(cfg.grid, 0.45, 1, 12);
    GridPath y = euler_run(cfg, x);
    PointDerivative spec{0.33, {1.0}, std::nullopt, {}};
    auto res = point_derivative_run(cfg, y, x, spec);
    ASSERT_EQ(res.k0, 13u);
    for (std::size_t k = 0; k <= 40; ++k) {
        double expect = k <= res.k0 ? 0.0 : sigma * y(res.k0, 0) * y(k, 0) / y(res.k0 + 1, 0);
        EXPECT_NEAR(res.first(k, 0), expect, 1e-12 * (1 + std::abs(expect))) << k;
    }
}

TEST(PointDerivative, MatchesIncrementPerturbation) {
    auto cfg = bank_config(48);
    GridPath x = sample_fbm(cfg.grid, 0.4, 2, 21);
    GridPath y = euler_run(cfg, x);
    std::vector<double> w{0.3, 1.0}, w2 = noise_direction(2, 0, false);
    PointDerivative spec{0.6, w, 0.25, w2};
    auto res = point_derivative_run(cfg, y, x, spec);
    const double e = 1e-4;
    GridPath fd(cfg.grid, 2);
    GridPath up = euler_run(cfg, bump(x, res.k0, w, e)), dn = euler_run(cfg, bump(x, res.k0, w, -e));
    for (std::size_t k = 0; k <= 48; ++k)
        for (std::size_t i = 0; i < 2; ++i) fd(k, i) = (up(k, i) - dn(k, i)) / (2 * e);
    EXPECT_LT(max_gap(res.first, fd), 1e-7);

    const double e2 = 1e-3;
    auto run = [&](double a, double b) { return euler_run(cfg, bump(bump(x, res.k0, w, a), res.k0b, w2, b)); };
    GridPath pp = run(e2, e2), pm = run(e2, -e2), mp = run(-e2, e2), mm = run(-e2, -e2);
    GridPath mixed(cfg.grid, 2);
    for (std::size_t k = 0; k <= 48; ++k)
        for (std::size_t i = 0; i < 2; ++i) mixed(k, i) = (pp(k, i) - pm(k, i) - mp(k, i) + mm(k, i)) / (4 * e2 * e2);
    ASSERT_TRUE(res.second.has_value());
    EXPECT_LT(max_gap(*res.second, mixed), 1e-5);

    // symmetric in the two points
    PointDerivative swapped{0.25, w2, 0.6, w};
    auto res2 = point_derivative_run(cfg, y, x, swapped);
    EXPECT_LT(max_gap(*res2.second, *res.second), 1e-12);
    EXPECT_THROW(noise_direction(2, 2, false), DomainError);
    EXPECT_EQ(noise_direction(3, 0, true), (std::vector<double>{1, 1, 1}));
}

TEST(PProcess, MatchesEnumeration) {
    auto cfg = bank_config(16);
    GridPath x = sample_fbm(cfg.grid, 0.4, 2, 5), b = sample_fbm(cfg.grid, 0.4, 2, 6);
    GridPath y = euler_run(cfg, x);
    auto xi = xi_run(4, cfg, y, x, b.scaled_sum(b, 20.0));
    for (std::size_t k : {3u, 9u, 16u})
        for (int L = 1; L <= 4; ++L) {
            std::vector<double> nrm(L + 1);
            for (int l = 1; l <= L; ++l)
                for (std::size_t i = 0; i < 2; ++i) nrm[l] = std::max(nrm[l], std::abs(xi.levels[l](k, i)));
            double best = 1.0;
            // nondecreasing part sequences with sum <= L
            std::function<void(int, int, double)> rec = [&](int minpart, int left, double prod) {
                best = std::max(best, prod);
                for (int p = minpart; p <= left; ++p) rec(p, left - p, prod * nrm[p]);
            };
            rec(1, L, 1.0);
            EXPECT_NEAR(p_process(xi, k, L), best, 1e-12 * best);
        }
    EXPECT_EQ(p_process(xi, 3, 0), 1.0);
    EXPECT_EQ(p_process(xi, 3, -1), 0.0);
    EXPECT_THROW(p_process(xi, 3, 5), DomainError);
}
