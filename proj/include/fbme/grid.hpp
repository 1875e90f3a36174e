#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fbme {

// Uniform grid t_k = k T / n, k = 0..n.
struct Grid {
    std::size_t n = 0;
    double T = 1.0;

    Grid() = default;
    Grid(std::size_t steps, double horizon);

    double dt() const { return T / static_cast<double>(n); }
    double time(std::size_t k) const { return T * static_cast<double>(k) / static_cast<double>(n); }
    // Index k with r in (t_k, t_{k+1}].
    std::size_t cell_of(double r) const;
    bool refines(const Grid& coarse) const;
    bool operator==(const Grid& o) const { return n == o.n && T == o.T; }
};

struct HurstParams {
    double H = 0.4;
    double p = 0.0;

    HurstParams() = default;
    HurstParams(double hurst, double p_exp);
    // p halfway between 1/H and 3.
    static HurstParams with_default_p(double hurst);
    double mu() const { return 3.0 / p; }
};

// Path sampled on a grid, `dims` coordinates per time point, row-major in time.
class GridPath {
public:
    GridPath() = default;
    GridPath(Grid g, std::size_t dims);
    GridPath(Grid g, std::size_t dims, std::vector<double> values);

    const Grid& grid() const { return grid_; }
    std::size_t dims() const { return dims_; }
    std::size_t steps() const { return grid_.n; }

    double operator()(std::size_t k, std::size_t i) const { return data_[k * dims_ + i]; }
    double& operator()(std::size_t k, std::size_t i) { return data_[k * dims_ + i]; }
    std::span<const double> at(std::size_t k) const { return {data_.data() + k * dims_, dims_}; }
    std::span<double> at(std::size_t k) { return {data_.data() + k * dims_, dims_}; }
    double increment(std::size_t j, std::size_t k, std::size_t i) const { return (*this)(k, i) - (*this)(j, i); }
    const std::vector<double>& raw() const { return data_; }

    // Values at the points of a coarser nested grid.
    GridPath restrict_to(std::size_t coarse_n) const;
    // Coordinates stacked side by side: (this, other).
    GridPath concat(const GridPath& other) const;
    GridPath scaled_sum(const GridPath& other, double eps) const;

private:
    Grid grid_;
    std::size_t dims_ = 0;
    std::vector<double> data_;
};

}  // namespace fbme
