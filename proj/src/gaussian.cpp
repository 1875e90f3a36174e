#include "fbme/gaussian.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <tuple>

#include "fbme/errors.hpp"

namespace fbme {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

void check_hurst(double H) {
    if (!(H > 0.0 && H < 1.0)) throw DomainError("Hurst index must lie in (0, 1)");
}

struct CacheKey {
    std::size_t n;
    double T, H;
    bool operator<(const CacheKey& o) const { return std::tie(n, T, H) < std::tie(o.n, o.T, o.H); }
};

struct CholeskyCache {
    std::shared_mutex mu;
    std::map<CacheKey, std::shared_ptr<const Eigen::MatrixXd>> entries;
};

CholeskyCache& cache() {
    static CholeskyCache c;
    return c;
}

}  // namespace

double fbm_covariance(double s, double t, double H) {
    check_hurst(H);
    if (s < 0.0 || t < 0.0) throw DomainError("covariance needs non-negative times");
    double h2 = 2.0 * H;
    return 0.5 * (std::pow(s, h2) + std::pow(t, h2) - std::pow(std::abs(t - s), h2));
}

double inner_product_rect(double u, double v, double s, double t, double H) {
    return fbm_covariance(v, t, H) - fbm_covariance(v, s, H) - fbm_covariance(u, t, H) + fbm_covariance(u, s, H);
}

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ (stream * 0xd1b54a32d192ed03ULL + 0x632be59bd9b4e019ULL));
}

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
    return std::mt19937_64(stream_key(seed, stream));
}

std::uint64_t companion_seed(std::uint64_t seed) { return splitmix64(seed ^ 0x62b0a5c3e1f7d249ULL); }

std::shared_ptr<const Eigen::MatrixXd> increment_cholesky(const Grid& grid, double H) {
    check_hurst(H);
    CacheKey key{grid.n, grid.T, H};
    auto& c = cache();
    {
        std::shared_lock lock(c.mu);
        auto it = c.entries.find(key);
        if (it != c.entries.end()) return it->second;
    }
    std::unique_lock lock(c.mu);
    auto it = c.entries.find(key);
    if (it != c.entries.end()) return it->second;

    const std::size_t n = grid.n;
    Eigen::MatrixXd cov(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            double v = inner_product_rect(grid.time(i), grid.time(i + 1), grid.time(j), grid.time(j + 1), H);
            cov(i, j) = v;
            cov(j, i) = v;
        }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
        throw FactorizationError("increment covariance is not positive definite (n=" + std::to_string(n) + ")");
    auto L = std::make_shared<const Eigen::MatrixXd>(llt.matrixL());
    c.entries.emplace(key, L);
    return L;
}

void clear_cholesky_cache() {
    auto& c = cache();
    std::unique_lock lock(c.mu);
    c.entries.clear();
}

std::size_t cholesky_cache_size() {
    auto& c = cache();
    std::shared_lock lock(c.mu);
    return c.entries.size();
}

GridPath sample_fbm(const Grid& grid, double H, std::size_t dims, std::uint64_t seed) {
    auto L = increment_cholesky(grid, H);
    const std::size_t n = grid.n;
    GridPath path(grid, dims);
    Eigen::VectorXd z(n);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t j = 0; j < dims; ++j) {
        auto gen = make_stream(seed, j);
        for (std::size_t k = 0; k < n; ++k) z[k] = normal(gen);
        Eigen::VectorXd inc = L->triangularView<Eigen::Lower>() * z;
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            acc += inc[k];
            path(k + 1, j) = acc;
        }
    }
    return path;
}

GridPath cameron_martin_direction(const Grid& grid, double anchor, double H) {
    const double w = 1.0;
    return cameron_martin_direction(grid, anchor, H, std::span<const double>(&w, 1));
}

GridPath cameron_martin_direction(const Grid& grid, double anchor, double H, std::span<const double> weights) {
    if (anchor < 0.0 || anchor > grid.T) throw DomainError("anchor must lie in [0, T]");
    GridPath h(grid, weights.size());
    for (std::size_t k = 0; k <= grid.n; ++k) {
        double r = fbm_covariance(anchor, grid.time(k), H);
        for (std::size_t i = 0; i < weights.size(); ++i) h(k, i) = weights[i] * r;
    }
    return h;
}

}  // namespace fbme
