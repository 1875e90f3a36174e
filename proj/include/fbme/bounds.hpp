#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fbme/rough_lift.hpp"
#include "fbme/variational.hpp"

namespace fbme {

// 2^mu zeta(mu), mu > 1
double Kmu(double mu);
struct Bracket {
    double lo = 0.0, hi = 0.0;
};
// partial sum to `terms` plus the two integral tail bounds
Bracket Kmu_bracket(double mu, std::size_t terms = 1000000);

// Constants of the a-priori bound, indexed by level L = 0..N (level -1 is zero throughout).
struct ConstantLedger {
    int N = 0;
    double p = 0.0, mu = 0.0;
    double C0 = 0.0, Kmu = 0.0;
    std::vector<double> C1, C2, C3, C4, C5, C6, C7, C8, K1, K2, K3, K4;
    double alpha_root = 0.0;  // alpha^{1/p}
    double alpha = 0.0;

    // entry at level L of a table, zero for L = -1
    static double at(const std::vector<double>& v, int L) { return L < 0 ? 0.0 : v[static_cast<std::size_t>(L)]; }
};

// mu defaults to 3/p; needs p < 3 so that mu > 1.
ConstantLedger build_ledger(const VectorFields& vf, int N, double p, std::optional<double> mu = std::nullopt);

enum class IntervalClass { S0 = 0, S1 = 1, S2 = 2 };

struct GreedyPartition {
    double alpha = 0.0;
    std::vector<std::size_t> points;  // grid indices s_0 = 0 < ... < s_M = n
    std::vector<IntervalClass> cls;   // per interval
    std::vector<double> omega;        // omega(s_j, s_{j+1})
    std::size_t count(IntervalClass c) const;
    std::size_t size() const { return cls.size(); }
};

GreedyPartition greedy_partition(const ControlOmega& om, double alpha);

struct MProducts {
    double log_M0 = 0.0, log_M1 = 0.0, log_M2 = 0.0;
    double log_total() const { return log_M0 + log_M1 + log_M2; }
};
MProducts m_products(const GreedyPartition& part, const LiftedNoise& noise, double K, double p);

// omega(j, k) for every pair of a grid, j <= k
class OmegaTable {
public:
    explicit OmegaTable(const ControlOmega& om);
    std::size_t steps() const { return n_; }
    double operator()(std::size_t j, std::size_t k) const { return v_[j * (n_ + 1) + k]; }

private:
    std::size_t n_;
    std::vector<double> v_;
};

// Remainder R^L_{st} of the level-L process against its local expansion.
class RemainderTable {
public:
    RemainderTable(int L, const XiProcess& xi, const LiftedNoise& noise, const SchemeConfig& cfg);

    int level() const { return L_; }
    std::size_t steps() const { return n_; }
    std::size_t dims() const { return m_; }
    Vec at(std::size_t s, std::size_t t) const;
    // R_st - R_su - R_ut assembled from the increments of the expansion coefficients
    Vec delta_from_terms(std::size_t s, std::size_t u, std::size_t t) const;
    // |dXi_st - L^L V(y_s) dx_st - L^{L-1} V(y_s) db_st|
    double local_defect(std::size_t s, std::size_t t) const;
    // max-abs increment between s and u of Lbar^L(dV V) and of Ltilde^L(dV V)
    double lbar_increment(std::size_t s, std::size_t u) const;
    double ltilde_increment(std::size_t s, std::size_t u) const;

private:
    struct Snapshot {
        std::vector<double> A, B;              // m x d
        std::vector<double> Cb, Ct1, Ct, Cb1;  // d x d x m, entry (a, b) multiplies block entry (a, b)
        Vec drift;
    };
    void block_terms(std::size_t s, std::size_t t, const Snapshot& S, Vec& out, double sign) const;

    int L_;
    std::size_t n_, m_, d_;
    const XiProcess* xi_;
    const LiftedNoise* noise_;
    double dt_;
    std::vector<Snapshot> snap_;
};

struct SewingReport {
    double kappa = 0.0;        // rescaling making the hypotheses hold with constant 1
    double one_step = 0.0;     // max |R_{k,k+1}| / omega^mu
    double max_delta = 0.0;    // max |dR_sut| / omega_st^mu
    double max_ratio = 0.0;    // max |R_st| / (kappa omega_st^mu)
    double Kmu = 0.0;
    std::size_t pairs = 0, triples = 0, violations = 0;
    bool holds() const { return violations == 0; }
};

// `norm_R(s, t)` and `delta_R(s, u, t)` are |R_st| and |R_st - R_su - R_ut|.
SewingReport sewing_verify(std::size_t n, const std::function<double(std::size_t, std::size_t)>& norm_R,
                           const std::function<double(std::size_t, std::size_t, std::size_t)>& delta_R,
                           const std::function<double(std::size_t, std::size_t)>& omega, double mu);
SewingReport sewing_verify(const RemainderTable& R, const OmegaTable& om, double mu);

struct BoundReport {
    int L = 0;
    double lhs = 0.0;                 // ||Xi^L||_{p-var,[0,T]}
    double log_rhs_over_K = 0.0;      // log of omega^{1/p} |S| (M0 M1 M2)^L
    double log_rho = 0.0;             // log(lhs) - log_rhs_over_K
    double omega_total = 0.0;
    std::size_t intervals = 0, s0 = 0, s1 = 0, s2 = 0;
    MProducts M;
    // part (b) inside S0 and S1 intervals
    std::size_t pairs_checked = 0;
    double max_defect_ratio = 0.0;    // defect / (omega^{2/p} P^L_s)
    double K2 = 0.0;
    bool defect_ok = true;
    double max_increment_ratio = 0.0; // |dXi_st| / (omega^{1/p} P^L_s)
    double K1 = 0.0;
    bool increment_ok = true;
    // numeric audit of the derived C6, C7 over the same pairs
    double max_C6_ratio = 0.0, max_C7_ratio = 0.0;
    // |w^1| + dt^{2H} <= omega^{1/p} on every S2 step
    bool delta_small_enough = true;
};

BoundReport bound_check(int L, const XiProcess& xi, const LiftedNoise& noise, const GreedyPartition& part,
                        const ControlOmega& om, const ConstantLedger& ledger, double K, const SchemeConfig& cfg);

}  // namespace fbme
