#pragma once

#include <cstdint>
#include <memory>
#include <random>

#include <Eigen/Dense>

#include "fbme/grid.hpp"

namespace fbme {

double fbm_covariance(double s, double t, double H);
// <1_[u,v], 1_[s,t]> in the reproducing kernel space of fBm.
double inner_product_rect(double u, double v, double s, double t, double H);

// Streams are keyed by (seed, stream); stream j of seed s always yields the same
// normals, independent of how many other streams are drawn.
std::uint64_t stream_key(std::uint64_t seed, std::uint64_t stream);
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream);
// Seed of the independent companion path b paired with the path drawn from `seed`.
std::uint64_t companion_seed(std::uint64_t seed);

// Lower Cholesky factor of the increment covariance on `grid`. Cached per (grid, H).
std::shared_ptr<const Eigen::MatrixXd> increment_cholesky(const Grid& grid, double H);
void clear_cholesky_cache();
std::size_t cholesky_cache_size();

// d independent fBm coordinates started at 0; coordinate j uses stream (seed, j).
GridPath sample_fbm(const Grid& grid, double H, std::size_t dims, std::uint64_t seed);

// s -> R(anchor, s) on the grid (one coordinate).
GridPath cameron_martin_direction(const Grid& grid, double anchor, double H);
// Coordinate i of the result is weights[i] * R(anchor, .).
GridPath cameron_martin_direction(const Grid& grid, double anchor, double H, std::span<const double> weights);

}  // namespace fbme
