#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "fbme/grid.hpp"
#include "fbme/rough_lift.hpp"
#include "fbme/smooth_map.hpp"

namespace fbme {

struct SchemeConfig {
    VectorFields vf;
    HurstParams hp;
    Grid grid;
    std::vector<double> y0;

    void validate() const;
    double correction_scale() const;  // dt^{2H}
};

// y_{k+1} = y_k + V_0(y_k) dt + V(y_k) dx_k + 1/2 sum_j dV_j V_j(y_k) dt^{2H}
GridPath euler_run(const SchemeConfig& cfg, const GridPath& x);

struct ConvergenceReport {
    std::vector<std::size_t> levels;
    std::vector<double> rms_vs_finest;       // per level, against the finest run
    std::vector<double> rms_consecutive;     // level n against level 2n
    double rate = 0.0;                       // minus the fitted slope of log2(rms_consecutive)
    double rate_stderr = 0.0;
    std::size_t seeds = 0;
};

// Runs every level on the finest-level noise restricted to coarser grids. cfg.grid is the
// finest grid; levels must be increasing and nested, the last one equal to cfg.grid.n.
ConvergenceReport coupled_refinement_errors(const SchemeConfig& cfg, const std::vector<std::size_t>& levels,
                                            const std::vector<std::uint64_t>& seeds, int threads = 1);

// max over sampled pairs of |dy_st - int V_0 - V(y_s) x^1_st - sum dV_b V_a(y_s) x^{2,ab}_st| / |t-s|^mu
double davie_defect(const SchemeConfig& cfg, const GridPath& y, const RoughLift& lift, double mu);

// Runs fn(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace fbme
