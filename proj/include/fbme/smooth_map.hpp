#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace fbme {

constexpr double kUnbounded = std::numeric_limits<double>::infinity();

// Smooth scalar function on R^m with mixed partials up to max_order().
class ScalarField {
public:
    virtual ~ScalarField() = default;
    virtual std::size_t input_dims() const = 0;
    virtual int max_order() const = 0;
    // d^k f / dy_{idx[0]} ... dy_{idx[k-1]} at y; an empty idx gives f(y)
    virtual double partial(std::span<const int> idx, std::span<const double> y) const = 0;
    // sup over y and over index tuples of order k of |partial|
    virtual double sup_bound(int order) const = 0;

    double value(std::span<const double> y) const { return partial({}, y); }
};

using FieldPtr = std::shared_ptr<const ScalarField>;

class ConstantField : public ScalarField {
public:
    ConstantField(std::size_t m, double c) : m_(m), c_(c) {}
    std::size_t input_dims() const override { return m_; }
    int max_order() const override { return 64; }
    double partial(std::span<const int> idx, std::span<const double>) const override { return idx.empty() ? c_ : 0.0; }
    double sup_bound(int order) const override { return order == 0 ? std::abs(c_) : 0.0; }

private:
    std::size_t m_;
    double c_;
};

// a + b sin(c . y + e)
class SinField : public ScalarField {
public:
    SinField(double a, double b, std::vector<double> c, double e);
    std::size_t input_dims() const override { return c_.size(); }
    int max_order() const override { return 64; }
    double partial(std::span<const int> idx, std::span<const double> y) const override;
    double sup_bound(int order) const override;

private:
    double a_, b_, e_;
    std::vector<double> c_;
};

// a + b k tanh((c . y + e) / k): linear near the origin, saturating at a +- b k.
class ClippedLinearField : public ScalarField {
public:
    ClippedLinearField(double a, double b, std::vector<double> c, double e, double k);
    std::size_t input_dims() const override { return c_.size(); }
    int max_order() const override { return 12; }
    double partial(std::span<const int> idx, std::span<const double> y) const override;
    double sup_bound(int order) const override;

private:
    double a_, b_, e_, k_;
    std::vector<double> c_;
    // coefficients of P_j with tanh^{(j)} = P_j(tanh)
    std::vector<std::vector<double>> poly_;
    std::vector<double> poly_sup_;
};

struct Monomial {
    double coef = 0.0;
    std::vector<int> exps;
};

class PolynomialField : public ScalarField {
public:
    PolynomialField(std::size_t m, std::vector<Monomial> terms);
    std::size_t input_dims() const override { return m_; }
    int max_order() const override { return 64; }
    double partial(std::span<const int> idx, std::span<const double> y) const override;
    double sup_bound(int order) const override;
    int degree() const;

private:
    std::size_t m_;
    std::vector<Monomial> terms_;
};

// Wraps a plain function; partials of order <= 4 by nested central differences.
class FiniteDifferenceField : public ScalarField {
public:
    FiniteDifferenceField(std::size_t m, std::function<double(std::span<const double>)> f, double h = 1e-3);
    std::size_t input_dims() const override { return m_; }
    int max_order() const override { return 4; }
    double partial(std::span<const int> idx, std::span<const double> y) const override;
    double sup_bound(int) const override { return kUnbounded; }

private:
    std::size_t m_;
    std::function<double(std::span<const double>)> f_;
    double h_;
};

// Diffusion V: R^m -> R^{m x d} (component V^i_j) and optional drift V_0: R^m -> R^m.
struct VectorFields {
    std::size_t m = 0, d = 0;
    std::vector<FieldPtr> V;   // V[i * d + j]
    std::vector<FieldPtr> V0;  // empty or m entries

    const ScalarField& comp(std::size_t i, std::size_t j) const { return *V[i * d + j]; }
    bool has_drift() const { return !V0.empty(); }
    // column j as a map R^m -> R^m
    std::vector<const ScalarField*> column(std::size_t j) const;
    std::vector<const ScalarField*> drift() const;

    int max_order() const;
    // sup over components of V and derivative orders 0..order
    double C0(int order) const;
    void validate() const;

    // out[i * d + j] = V^i_j(y)
    void eval(std::span<const double> y, std::span<double> out) const;
    // (dV_a V_b)^k(y) = sum_l d_l V^k_a(y) V^l_b(y)
    void dVV(std::size_t a, std::size_t b, std::span<const double> y, std::span<double> out) const;
};

// Named banks: "const", "linear-clipped", "sincos-m2d2" (any m, d for the first two and
// for "sincos"). `scale` multiplies every amplitude.
VectorFields make_bank(const std::string& name, std::size_t m, std::size_t d, double scale = 1.0);
std::vector<std::string> bank_names();

}  // namespace fbme
