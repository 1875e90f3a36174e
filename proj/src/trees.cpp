#include "fbme/trees.hpp"

#include <array>
#include <numeric>
#include <sstream>
#include <string>

#include "fbme/errors.hpp"

namespace fbme {

Rational Rational::make(std::int64_t n, std::int64_t d) {
    if (d == 0) throw DomainError("zero denominator");
    if (d < 0) {
        n = -n;
        d = -d;
    }
    std::int64_t g = std::gcd(n < 0 ? -n : n, d);
    if (g == 0) g = 1;
    return Rational{n / g, d / g};
}

Rational Rational::operator+(const Rational& o) const {
    std::int64_t l = std::lcm(den, o.den);
    return make(num * (l / den) + o.num * (l / o.den), l);
}

Rational Rational::operator*(const Rational& o) const {
    Rational a = make(num, o.den);
    Rational b = make(o.num, den);
    return make(a.num * b.num, a.den * b.den);
}

BranchStats branch_stats(const Branch& branch) {
    if (branch.empty() || branch.front() != 1) throw DomainError("a branch starts with label 1 (position 1)");
    int ones = 0;
    for (std::size_t t = 0; t < branch.size(); ++t) {
        int v = branch[t];
        if (v < 1 || v > ones + 1)
            throw DomainError("label " + std::to_string(v) + " at position " + std::to_string(t + 1) +
                              " exceeds alpha of its parent");
        ones += (v == 1);
    }
    BranchStats st;
    st.alpha = ones + 1;
    st.ell.assign(static_cast<std::size_t>(st.alpha), 1);
    st.ell[0] = ones;
    for (int v : branch)
        if (v >= 2) ++st.ell[static_cast<std::size_t>(v - 1)];
    return st;
}

namespace {

std::int64_t factorial(int k) {
    std::int64_t f = 1;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

void grow(Branch& cur, int depth, std::vector<BranchInfo>& out) {
    BranchStats st = branch_stats(cur);
    if (static_cast<int>(cur.size()) == depth) {
        out.push_back({cur, st, lemma_coefficient(st)});
        return;
    }
    for (int c = 1; c <= st.alpha; ++c) {
        cur.push_back(c);
        grow(cur, depth, out);
        cur.pop_back();
    }
}

}  // namespace

Rational lemma_coefficient(const BranchStats& st) {
    std::int64_t num = 1;
    int N = 0;
    for (int r = 2; r <= st.alpha; ++r) {
        num *= factorial(st.at(r));
        N += st.at(r);
    }
    return Rational::make(num, factorial(N));
}

const std::vector<BranchInfo>& tree_level(int N) {
    static const std::array<std::vector<BranchInfo>, kMaxTreeDepth + 1> levels = [] {
        std::array<std::vector<BranchInfo>, kMaxTreeDepth + 1> all;
        for (int depth = 1; depth <= kMaxTreeDepth; ++depth) {
            Branch root{1};
            grow(root, depth, all[static_cast<std::size_t>(depth)]);
        }
        return all;
    }();
    if (N < 0 || N > kMaxTreeDepth) throw DomainError("tree depth must lie in 0..8");
    return levels[static_cast<std::size_t>(N)];
}

std::vector<Branch> enumerate_tree(int N) {
    std::vector<Branch> out;
    for (const auto& b : tree_level(N)) out.push_back(b.labels);
    return out;
}

std::string branch_json(const BranchInfo& b) {
    std::ostringstream os;
    auto list = [&](const std::vector<int>& v) {
        os << '[';
        for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
        os << ']';
    };
    os << "{\"labels\":";
    list(b.labels);
    os << ",\"ell\":";
    list(b.stats.ell);
    os << ",\"alpha\":" << b.stats.alpha << ",\"coeff\":\"" << b.lemma_coeff.num << '/' << b.lemma_coeff.den
       << "\"}";
    return os.str();
}

}  // namespace fbme
