#include <cmath>

#include <gtest/gtest.h>

#include "fbme/errors.hpp"
#include "fbme/gaussian.hpp"
#include "fbme/scheme.hpp"

using namespace fbme;

namespace {

VectorFields scalar_field(FieldPtr f) {
    VectorFields vf;
    vf.m = vf.d = 1;
    vf.V = {std::move(f)};
    return vf;
}

SchemeConfig config(VectorFields vf, std::size_t n, double H, std::vector<double> y0) {
    SchemeConfig cfg;
    cfg.vf = std::move(vf);
    cfg.hp = HurstParams::with_default_p(H);
    cfg.grid = Grid(n, 1.0);
    cfg.y0 = std::move(y0);
    return cfg;
}

}  // namespace

TEST(Euler, LinearFieldIsProductOfFactors) {
    const double sigma = 0.7, H = 0.4;
    auto cfg = config(scalar_field(std::make_shared<PolynomialField>(1, std::vector<Monomial>{{sigma, {1}}})), 64, H,
                      {1.3});
    GridPath x = sample_fbm(cfg.grid, H, 1, 2);
    GridPath y = euler_run(cfg, x);
    const double corr = 0.5 * sigma * sigma * std::pow(cfg.grid.dt(), 2 * H);
    double prod = 1.3;
    for (std::size_t k = 0; k < 64; ++k) {
        prod *= 1.0 + sigma * x.increment(k, k + 1, 0) + corr;
        EXPECT_NEAR(y(k + 1, 0), prod, 1e-12 * std::abs(prod));
    }
}

TEST(Euler, AdditiveNoiseIsExact) {
    auto cfg = config(make_bank("const", 2, 3, 0.5), 50, 0.35, {0.1, 0.2});
    GridPath x = sample_fbm(cfg.grid, 0.35, 3, 4);
    GridPath y = euler_run(cfg, x);
    std::vector<double> V(6);
    cfg.vf.eval(cfg.y0, V);
    for (std::size_t k = 0; k <= 50; ++k)
        for (std::size_t i = 0; i < 2; ++i) {
            double expect = cfg.y0[i];
            for (std::size_t j = 0; j < 3; ++j) expect += V[i * 3 + j] * x(k, j);
            EXPECT_NEAR(y(k, i), expect, 1e-13);
        }
}

TEST(Euler, DriftAddsDeterministicTerm) {
    auto cfg = config(make_bank("const", 1, 1, 0.0), 10, 0.4, {0.0});
    cfg.vf.V0 = {std::make_shared<ConstantField>(1, 2.0)};
    GridPath y = euler_run(cfg, sample_fbm(cfg.grid, 0.4, 1, 1));
    EXPECT_NEAR(y(10, 0), 2.0, 1e-14);
    EXPECT_NEAR(y(5, 0), 1.0, 1e-14);
}

TEST(Euler, InputValidation) {
    auto cfg = config(make_bank("sincos", 2, 2), 16, 0.4, {0.1});
    EXPECT_THROW(euler_run(cfg, sample_fbm(cfg.grid, 0.4, 2, 1)), DomainError);
    cfg.y0 = {0.1, 0.2};
    EXPECT_THROW(euler_run(cfg, sample_fbm(cfg.grid, 0.4, 3, 1)), DomainError);
}

TEST(Euler, OverflowReportsStep) {
    auto cfg = config(scalar_field(std::make_shared<PolynomialField>(1, std::vector<Monomial>{{1.0, {3}}})), 64, 0.45,
                      {1e3});
    GridPath x = sample_fbm(cfg.grid, 0.45, 1, 3);
    try {
        euler_run(cfg, x);
        FAIL() << "expected overflow";
    } catch (const OverflowError& e) {
        EXPECT_GE(e.step(), 1u);
        EXPECT_LE(e.step(), 64u);
    }
}

TEST(Euler, CoupledRefinementConverges) {
    auto cfg = config(make_bank("sincos-m2d2", 2, 2), 512, 0.45, {0.1, -0.2});
    std::vector<std::uint64_t> seeds;
    for (int s = 0; s < 40; ++s) seeds.push_back(500 + s);
    auto rep = coupled_refinement_errors(cfg, {32, 64, 128, 256, 512}, seeds, 2);
    ASSERT_EQ(rep.rms_consecutive.size(), 4u);
    EXPECT_EQ(rep.rms_vs_finest.back(), 0.0);
    for (std::size_t l = 0; l + 1 < rep.rms_consecutive.size(); ++l)
        EXPECT_LT(rep.rms_consecutive[l + 1], rep.rms_consecutive[l]);
    EXPECT_GT(rep.rate, 0.2);
    EXPECT_LT(rep.rate, 0.6);
    EXPECT_THROW(coupled_refinement_errors(cfg, {64, 512}, seeds), DomainError);
    EXPECT_THROW(coupled_refinement_errors(cfg, {32, 96, 512}, seeds), DomainError);
}

TEST(Euler, ParallelForVisitsEveryIndexAndRethrows) {
    std::vector<int> hits(97, 0);
    parallel_for(97, 4, [&](std::size_t i) { ++hits[i]; });
    for (int h : hits) EXPECT_EQ(h, 1);
    EXPECT_THROW(parallel_for(10, 3, [](std::size_t i) {
                     if (i == 7) throw DomainError("boom");
                 }),
                 DomainError);
}

TEST(Davie, OneStepDefectIsCorrectionMismatch) {
    const double sigma = 0.6, H = 0.4;
    auto cfg = config(scalar_field(std::make_shared<PolynomialField>(1, std::vector<Monomial>{{sigma, {1}}})), 1, H,
                      {0.8});
    GridPath x(cfg.grid, 1, {0.0, 0.37});
    GridPath y = euler_run(cfg, x);
    RoughLift lift = RoughLift::piecewise_linear(x);
    // dV V = sigma^2 y, x^2 = dx^2 / 2
    const double expect = std::abs(sigma * sigma * 0.8 * (0.5 - 0.5 * 0.37 * 0.37));
    EXPECT_NEAR(davie_defect(cfg, y, lift, 1.2), expect, 1e-14);
}

TEST(Davie, ConstantFieldHasNoDefect) {
    auto cfg = config(make_bank("const", 2, 2), 64, 0.4, {0.0, 0.0});
    GridPath x = sample_fbm(cfg.grid, 0.4, 2, 6);
    GridPath y = euler_run(cfg, x);
    EXPECT_LT(davie_defect(cfg, y, RoughLift::piecewise_linear(x), 1.5), 1e-12);
}
