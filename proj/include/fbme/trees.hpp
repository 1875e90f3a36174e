#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fbme {

constexpr int kMaxTreeDepth = 8;

struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    static Rational make(std::int64_t n, std::int64_t d);
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    Rational operator+(const Rational& o) const;
    Rational operator*(const Rational& o) const;
    bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
};

// A branch is a label sequence (1, i_2, ..., i_N); its children are (i, 1) ... (i, alpha_i).
using Branch = std::vector<int>;

struct BranchStats {
    // ell[0] = ell_1 = number of 1's; ell[r-1] = (number of r's) + 1 for r = 2..alpha
    std::vector<int> ell;
    int alpha = 0;

    int ell1() const { return ell[0]; }
    // ell_r with the 1-based index used in the tree formulas (r = 1..alpha)
    int at(int r) const { return ell[static_cast<std::size_t>(r - 1)]; }
};

BranchStats branch_stats(const Branch& branch);

// ell_2! ... ell_alpha! / N!
Rational lemma_coefficient(const BranchStats& st);

struct BranchInfo {
    Branch labels;
    BranchStats stats;
    Rational lemma_coeff;
};

// All branches of length N in lexicographic order, 1 <= N <= 8; N = 0 gives an empty list.
const std::vector<BranchInfo>& tree_level(int N);
std::vector<Branch> enumerate_tree(int N);

std::string branch_json(const BranchInfo& b);

}  // namespace fbme
