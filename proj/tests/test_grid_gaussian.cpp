#include <cmath>

#include <gtest/gtest.h>

#include "fbme/errors.hpp"
#include "fbme/gaussian.hpp"

using namespace fbme;

TEST(Grid, TimesAndCells) {
    Grid g(8, 2.0);
    EXPECT_DOUBLE_EQ(g.dt(), 0.25);
    EXPECT_DOUBLE_EQ(g.time(3), 0.75);
    EXPECT_EQ(g.cell_of(0.75), 2u);  // r in (t_2, t_3]
    EXPECT_EQ(g.cell_of(0.76), 3u);
    EXPECT_EQ(g.cell_of(2.0), 7u);
    EXPECT_THROW(g.cell_of(0.0), DomainError);
    EXPECT_TRUE(Grid(16, 2.0).refines(g));
    EXPECT_FALSE(Grid(12, 2.0).refines(g));
    EXPECT_THROW(Grid(0, 1.0), DomainError);
}

TEST(Grid, HurstValidation) {
    EXPECT_THROW(HurstParams(0.3, 4.0), DomainError);
    EXPECT_THROW(HurstParams(0.6, 3.0), DomainError);
    EXPECT_THROW(HurstParams(0.4, 2.4), DomainError);
    auto hp = HurstParams::with_default_p(0.4);
    EXPECT_NEAR(hp.p, 2.75, 1e-15);
    EXPECT_NEAR(hp.mu(), 3.0 / 2.75, 1e-15);
}

TEST(Covariance, BrownianCaseIsMin) {
    for (double s : {0.0, 0.3, 0.7})
        for (double t : {0.1, 0.5, 1.0}) EXPECT_NEAR(fbm_covariance(s, t, 0.5), std::min(s, t), 1e-15);
}

TEST(Covariance, VarianceAndSymmetry) {
    for (double H : {0.35, 0.4, 0.45}) {
        EXPECT_NEAR(fbm_covariance(0.6, 0.6, H), std::pow(0.6, 2 * H), 1e-15);
        EXPECT_DOUBLE_EQ(fbm_covariance(0.2, 0.9, H), fbm_covariance(0.9, 0.2, H));
    }
    EXPECT_THROW(fbm_covariance(-0.1, 0.5, 0.4), DomainError);
}

TEST(Covariance, RectangleInnerProduct) {
    // Brownian case: overlap length of the two intervals
    EXPECT_NEAR(inner_product_rect(0.2, 0.6, 0.4, 0.9, 0.5), 0.2, 1e-15);
    EXPECT_NEAR(inner_product_rect(0.0, 0.3, 0.5, 0.9, 0.5), 0.0, 1e-15);
    // equal-length increments k steps apart: dt^{2H} (|k+1|^{2H} + |k-1|^{2H} - 2|k|^{2H}) / 2
    const double H = 0.4, dt = 0.125, h2 = 2 * H;
    for (int k = 0; k < 6; ++k) {
        double expect = 0.5 * std::pow(dt, h2) * (std::pow(k + 1.0, h2) + std::pow(std::abs(k - 1.0), h2) - 2 * std::pow(k, h2));
        EXPECT_NEAR(inner_product_rect(k * dt, (k + 1) * dt, 0.0, dt, H), expect, 1e-14) << k;
    }
    // negatively correlated disjoint increments for H < 1/2
    EXPECT_LT(inner_product_rect(0.0, 0.5, 0.5, 1.0, 0.4), 0.0);
}

TEST(Sampling, CholeskyReproducesCovariance) {
    clear_cholesky_cache();
    Grid g(32, 1.0);
    auto L = increment_cholesky(g, 0.4);
    Eigen::MatrixXd C = (*L) * L->transpose();
    for (std::size_t i = 0; i < g.n; ++i)
        for (std::size_t j = 0; j < g.n; ++j)
            EXPECT_NEAR(C(i, j), inner_product_rect(g.time(i), g.time(i + 1), g.time(j), g.time(j + 1), 0.4), 1e-13);
    EXPECT_EQ(increment_cholesky(g, 0.4).get(), L.get());
    EXPECT_EQ(cholesky_cache_size(), 1u);
    increment_cholesky(g, 0.45);
    EXPECT_EQ(cholesky_cache_size(), 2u);
}

TEST(Sampling, StreamsAreStablePerCoordinate) {
    Grid g(64, 1.0);
    GridPath a = sample_fbm(g, 0.4, 2, 11);
    GridPath b = sample_fbm(g, 0.4, 3, 11);
    GridPath c = sample_fbm(g, 0.4, 2, 11);
    for (std::size_t k = 0; k <= g.n; ++k)
        for (std::size_t i = 0; i < 2; ++i) {
            EXPECT_EQ(a(k, i), b(k, i));
            EXPECT_EQ(a(k, i), c(k, i));
        }
    GridPath other = sample_fbm(g, 0.4, 2, 12);
    EXPECT_NE(a(g.n, 0), other(g.n, 0));
    EXPECT_NE(a(g.n, 0), a(g.n, 1));
    EXPECT_EQ(a(0, 0), 0.0);
    EXPECT_NE(companion_seed(11), 11u);
}

TEST(Sampling, EmpiricalCovarianceMatchesKernel) {
    // 4000 paths, compare empirical E[x_s x_t] with R(s,t) at a few points
    const double H = 0.35;
    Grid g(8, 1.0);
    const int paths = 4000;
    const std::size_t pts[3][2] = {{2, 2}, {3, 8}, {5, 7}};
    for (auto [s, t] : pts) {
        double acc = 0, acc2 = 0;
        for (int r = 0; r < paths; ++r) {
            GridPath x = sample_fbm(g, H, 1, 1000 + r);
            double v = x(s, 0) * x(t, 0);
            acc += v;
            acc2 += v * v;
        }
        double mean = acc / paths, se = std::sqrt((acc2 / paths - mean * mean) / paths);
        EXPECT_NEAR(mean, fbm_covariance(g.time(s), g.time(t), H), 4 * se) << s << "," << t;
    }
}

TEST(Sampling, RestrictionKeepsCoarsePoints) {
    Grid g(64, 1.0);
    GridPath x = sample_fbm(g, 0.4, 2, 3);
    GridPath c = x.restrict_to(16);
    for (std::size_t k = 0; k <= 16; ++k) EXPECT_EQ(c(k, 1), x(4 * k, 1));
    EXPECT_THROW(x.restrict_to(24), DomainError);
}

TEST(CameronMartin, DirectionIsKernelSection) {
    Grid g(10, 1.0);
    GridPath h = cameron_martin_direction(g, 0.3, 0.4);
    for (std::size_t k = 0; k <= g.n; ++k) EXPECT_DOUBLE_EQ(h(k, 0), fbm_covariance(0.3, g.time(k), 0.4));
    EXPECT_EQ(h(0, 0), 0.0);
    std::vector<double> w{2.0, -1.0};
    GridPath h2 = cameron_martin_direction(g, 0.3, 0.4, w);
    EXPECT_DOUBLE_EQ(h2(5, 0), 2.0 * h(5, 0));
    EXPECT_DOUBLE_EQ(h2(5, 1), -h(5, 0));
    EXPECT_THROW(cameron_martin_direction(g, 1.5, 0.4), DomainError);
}
