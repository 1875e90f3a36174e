#include "fbme/grid.hpp"

#include <cmath>
#include <string>

#include "fbme/errors.hpp"

namespace fbme {

Grid::Grid(std::size_t steps, double horizon) : n(steps), T(horizon) {
    if (steps == 0) throw DomainError("grid needs at least one step");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("grid horizon must be positive");
}

std::size_t Grid::cell_of(double r) const {
    if (!(r > 0.0) || r > T) throw DomainError("time " + std::to_string(r) + " outside (0, T]");
    double k = std::ceil(r / dt() - 1e-12) - 1.0;
    if (k < 0.0) k = 0.0;
    return std::min(static_cast<std::size_t>(k), n - 1);
}

bool Grid::refines(const Grid& coarse) const { return T == coarse.T && coarse.n > 0 && n % coarse.n == 0; }

HurstParams::HurstParams(double hurst, double p_exp) : H(hurst), p(p_exp) {
    if (!(hurst > 1.0 / 3.0 && hurst <= 0.5)) throw DomainError("Hurst index must lie in (1/3, 1/2]");
    if (!(p_exp > 1.0 / hurst)) throw DomainError("p must exceed 1/H");
}

HurstParams HurstParams::with_default_p(double hurst) {
    if (!(hurst > 1.0 / 3.0 && hurst <= 0.5)) throw DomainError("Hurst index must lie in (1/3, 1/2]");
    return HurstParams(hurst, 0.5 * (1.0 / hurst + 3.0));
}

GridPath::GridPath(Grid g, std::size_t dims) : grid_(g), dims_(dims), data_((g.n + 1) * dims, 0.0) {}

GridPath::GridPath(Grid g, std::size_t dims, std::vector<double> values)
    : grid_(g), dims_(dims), data_(std::move(values)) {
    if (data_.size() != (g.n + 1) * dims) throw DomainError("path values do not match grid size");
}

GridPath GridPath::restrict_to(std::size_t coarse_n) const {
    if (coarse_n == 0 || grid_.n % coarse_n != 0) throw DomainError("coarse grid is not nested in path grid");
    std::size_t stride = grid_.n / coarse_n;
    GridPath out(Grid(coarse_n, grid_.T), dims_);
    for (std::size_t k = 0; k <= coarse_n; ++k)
        for (std::size_t i = 0; i < dims_; ++i) out(k, i) = (*this)(k * stride, i);
    return out;
}

GridPath GridPath::concat(const GridPath& other) const {
    if (!(other.grid_ == grid_)) throw DomainError("cannot stack paths on different grids");
    GridPath out(grid_, dims_ + other.dims_);
    for (std::size_t k = 0; k <= grid_.n; ++k) {
        for (std::size_t i = 0; i < dims_; ++i) out(k, i) = (*this)(k, i);
        for (std::size_t i = 0; i < other.dims_; ++i) out(k, dims_ + i) = other(k, i);
    }
    return out;
}

GridPath GridPath::scaled_sum(const GridPath& other, double eps) const {
    if (!(other.grid_ == grid_) || other.dims_ != dims_) throw DomainError("shape mismatch in path sum");
    GridPath out = *this;
    for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] += eps * other.data_[i];
    return out;
}

}  // namespace fbme
