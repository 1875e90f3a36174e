#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fbme/errors.hpp"
#include "fbme/gaussian.hpp"
#include "fbme/rough_lift.hpp"

using namespace fbme;

namespace {

GridPath smooth_path(std::size_t n) {
    GridPath p(Grid(n, 1.0), 2);
    for (std::size_t k = 0; k <= n; ++k) {
        double t = p.grid().time(k);
        p(k, 0) = t;
        p(k, 1) = t * t;
    }
    return p;
}

// all partitions of {a..b} by subset enumeration
double brute_p_variation(const GridPath& x, std::size_t a, std::size_t b, double p) {
    const std::size_t inner = b - a - 1;
    double best = 0.0;
    for (std::uint64_t mask = 0; mask < (1ull << inner); ++mask) {
        double s = 0.0;
        std::size_t prev = a;
        for (std::size_t i = 0; i <= inner; ++i) {
            std::size_t cur = i == inner ? b : a + 1 + i;
            if (i < inner && !(mask >> i & 1)) continue;
            double m = 0.0;
            for (std::size_t c = 0; c < x.dims(); ++c) m = std::max(m, std::abs(x.increment(prev, cur, c)));
            s += std::pow(m, p);
            prev = cur;
        }
        best = std::max(best, s);
    }
    return best;
}

}  // namespace

TEST(RoughLift, SmoothPathIteratedIntegrals) {
    // integral of t d(t^2) = 2/3, of t^2 dt = 1/3
    RoughLift lift = RoughLift::piecewise_linear(smooth_path(4 * 512), 512);
    EXPECT_EQ(lift.grid().n, 4u);
    EXPECT_NEAR(lift.level2(0, 4, 0, 1), 2.0 / 3.0, 1e-6);
    EXPECT_NEAR(lift.level2(0, 4, 1, 0), 1.0 / 3.0, 1e-6);
    EXPECT_NEAR(lift.level2(0, 4, 0, 0), 0.5, 1e-12);
    EXPECT_NEAR(lift.level2(0, 4, 1, 1), 0.5, 1e-12);
    // [1/2, 1]: integral of (t - 1/2) d(t^2) = 2/3 - 3/8 - ... computed directly
    double expect = (2.0 / 3.0) * (1.0 - 0.125) - 0.5 * (1.0 - 0.25);
    EXPECT_NEAR(lift.level2(2, 4, 0, 1), expect, 1e-6);
}

TEST(RoughLift, DiagonalIsHalfSquare) {
    Grid g(64, 1.0);
    GridPath x = sample_fbm(g, 0.4, 3, 5);
    RoughLift lift = RoughLift::piecewise_linear(x);
    for (std::size_t j : {0u, 7u, 30u})
        for (std::size_t k : {31u, 64u})
            for (std::size_t a = 0; a < 3; ++a) {
                double inc = x.increment(j, k, a);
                EXPECT_NEAR(lift.level2(j, k, a, a), 0.5 * inc * inc, 1e-13);
                for (std::size_t b = 0; b < 3; ++b)
                    EXPECT_NEAR(lift.level2(j, k, a, b) + lift.level2(j, k, b, a), inc * x.increment(j, k, b), 1e-13);
            }
}

TEST(RoughLift, ChenHoldsAndDetectsCorruption) {
    Grid g(32, 1.0);
    GridPath x = sample_fbm(g, 0.35, 2, 9);
    RoughLift lift = RoughLift::piecewise_linear(x.concat(sample_fbm(g, 0.35, 2, 10)));
    EXPECT_LT(check_chen(lift), 1e-12);
    lift.set_level2(3, 20, 1, 2, lift.level2(3, 20, 1, 2) + 1e-3);
    EXPECT_NEAR(check_chen(lift), 1e-3, 1e-9);
}

TEST(RoughLift, PrefixStorageMatchesDense) {
    Grid g(128, 1.0);
    GridPath x = sample_fbm(g, 0.4, 2, 21);
    RoughLift dense = RoughLift::piecewise_linear(x);
    RoughLift sparse = RoughLift::piecewise_linear(x, 1, 16);
    ASSERT_TRUE(dense.dense());
    ASSERT_FALSE(sparse.dense());
    EXPECT_THROW(sparse.set_level2(0, 1, 0, 0, 1.0), DomainError);
    std::mt19937_64 gen(1);
    std::uniform_int_distribution<std::size_t> pick(0, 128);
    std::vector<Triple> triples;
    for (int r = 0; r < 500; ++r) {
        std::size_t s = pick(gen), t = pick(gen);
        if (s > t) std::swap(s, t);
        for (std::size_t a = 0; a < 2; ++a)
            for (std::size_t b = 0; b < 2; ++b) EXPECT_NEAR(dense.level2(s, t, a, b), sparse.level2(s, t, a, b), 1e-13);
        std::size_t u = s + (t - s) / 2;
        triples.push_back({s, u, t});
    }
    EXPECT_LT(check_chen(sparse, triples), 1e-12);
    std::vector<Triple> bad{{5, 3, 9}};
    EXPECT_THROW(check_chen(sparse, bad), DomainError);
}

TEST(RoughLift, RefinementArgumentChecked) {
    GridPath x = smooth_path(12);
    EXPECT_THROW(RoughLift::piecewise_linear(x, 5), DomainError);
    EXPECT_THROW(RoughLift::piecewise_linear(x, 0), DomainError);
}

TEST(PVariation, MatchesBruteForce) {
    Grid g(10, 1.0);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        GridPath x = sample_fbm(g, 0.4, 2, seed);
        for (double p : {1.0, 2.5, 3.5}) {
            double brute = brute_p_variation(x, 0, 10, p);
            EXPECT_NEAR(std::pow(p_variation_norm(x, 0, 10, p), p), brute, 1e-12 * (1 + brute));
            EXPECT_NEAR(std::pow(p_variation_norm(x, 2, 7, p), p), brute_p_variation(x, 2, 7, p), 1e-12);
        }
    }
}

TEST(PVariation, MonotonePathSingleInterval) {
    GridPath x = smooth_path(20);
    // increments of a monotone path are superadditive under |.|^p for p >= 1
    EXPECT_NEAR(p_variation_norm(x, 0, 20, 3.0), 1.0, 1e-14);
    // p = 1 under the max norm: integral of max(1, 2t)
    EXPECT_NEAR(p_variation_norm(x, 0, 20, 1.0), 1.25, 1e-14);
    EXPECT_THROW(p_variation_norm(x, 5, 2, 2.0), DomainError);
}

TEST(StepSums, CentringAndBlocks) {
    Grid g(16, 1.0);
    const double H = 0.4;
    GridPath x = sample_fbm(g, H, 2, 4), b = sample_fbm(g, H, 2, companion_seed(4));
    LiftedNoise nz = lift_noise(x, b, H);
    const double shift = 0.5 * std::pow(g.dt(), 2 * H);
    double direct = 0.0;
    for (std::size_t k = 3; k < 11; ++k) direct += nz.w.level2(k, k + 1, 1, 1) - shift;
    EXPECT_NEAR(nz.q.value(3, 11, 1, 1), direct, 1e-14);
    double cross = 0.0;
    for (std::size_t k = 3; k < 11; ++k) cross += nz.w.level2(k, k + 1, 2, 1);
    EXPECT_NEAR(nz.qt.value(3, 11, 0, 1), cross, 1e-14);
    double xb = 0.0;
    for (std::size_t k = 3; k < 11; ++k) xb += nz.w.level2(k, k + 1, 0, 3);
    EXPECT_NEAR(nz.qxb.value(3, 11, 0, 1), xb, 1e-14);

    auto [blk, sums] = build_cross(nz.w);
    EXPECT_EQ(blk.row0, 2u);
    EXPECT_NEAR(sums.value(3, 11, 0, 1), cross, 1e-14);

    // centred block over one step is 0 off-diagonal, shift on the diagonal
    std::vector<double> out(4);
    nz.centred(nz.xx(), nz.q, 5, 6, out);
    EXPECT_NEAR(out[0], shift, 1e-15);
    EXPECT_NEAR(out[1], 0.0, 1e-15);
    EXPECT_THROW(lift_noise(x, sample_fbm(g, H, 3, 1), H), DomainError);
}

TEST(ControlOmega, SuperadditiveAndConsistent) {
    Grid g(24, 1.0);
    const double H = 0.4, p = 2.75;
    LiftedNoise nz = lift_noise(sample_fbm(g, H, 1, 8), sample_fbm(g, H, 1, companion_seed(8)), H);
    ControlOmega om(nz, p);
    auto row = om.row(2, 24);
    for (std::size_t u = 2; u <= 24; ++u) EXPECT_NEAR(row[u - 2], om(2, u), 1e-14);
    for (std::size_t s = 0; s < 24; s += 3)
        for (std::size_t u = s; u <= 24; u += 2)
            for (std::size_t t = u; t <= 24; t += 5) EXPECT_LE(om(s, u) + om(u, t), om(s, t) + 1e-12);
    // single step: sum of the four terms
    double one = 0.0;
    for (int w = 0; w < 4; ++w) one += om.term(w, 6, 7);
    EXPECT_NEAR(om(6, 7), one, 1e-15);
    EXPECT_EQ(om(4, 4), 0.0);
    EXPECT_THROW(ControlOmega(nz, 2.0), DomainError);
}
