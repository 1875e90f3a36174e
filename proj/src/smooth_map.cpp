#include "fbme/smooth_map.hpp"

#include <algorithm>
#include <cmath>

#include "fbme/errors.hpp"

namespace fbme {

namespace {

double dot(const std::vector<double>& c, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) s += c[i] * y[i];
    return s;
}

double max_abs(const std::vector<double>& c) {
    double m = 0.0;
    for (double v : c) m = std::max(m, std::abs(v));
    return m;
}

double idx_product(const std::vector<double>& c, std::span<const int> idx) {
    double p = 1.0;
    for (int i : idx) p *= c[static_cast<std::size_t>(i)];
    return p;
}

}  // namespace

SinField::SinField(double a, double b, std::vector<double> c, double e) : a_(a), b_(b), e_(e), c_(std::move(c)) {}

double SinField::partial(std::span<const int> idx, std::span<const double> y) const {
    const double th = dot(c_, y) + e_;
    const std::size_t k = idx.size();
    double trig = 0.0;
    switch (k % 4) {
        case 0: trig = std::sin(th); break;
        case 1: trig = std::cos(th); break;
        case 2: trig = -std::sin(th); break;
        default: trig = -std::cos(th); break;
    }
    double v = b_ * idx_product(c_, idx) * trig;
    return k == 0 ? a_ + v : v;
}

double SinField::sup_bound(int order) const {
    if (order == 0) return std::abs(a_) + std::abs(b_);
    return std::abs(b_) * std::pow(max_abs(c_), order);
}

ClippedLinearField::ClippedLinearField(double a, double b, std::vector<double> c, double e, double k)
    : a_(a), b_(b), e_(e), k_(k), c_(std::move(c)) {
    if (!(k > 0.0)) throw DomainError("clipping scale must be positive");
    // P_0(T) = T, P_{j+1} = P_j' (1 - T^2)
    poly_.push_back({0.0, 1.0});
    for (int j = 0; j < max_order(); ++j) {
        const auto& P = poly_.back();
        std::vector<double> dP(P.size() > 1 ? P.size() - 1 : 1, 0.0);
        for (std::size_t i = 1; i < P.size(); ++i) dP[i - 1] = static_cast<double>(i) * P[i];
        std::vector<double> next(dP.size() + 2, 0.0);
        for (std::size_t i = 0; i < dP.size(); ++i) {
            next[i] += dP[i];
            next[i + 2] -= dP[i];
        }
        poly_.push_back(next);
    }
    for (const auto& P : poly_) {
        double sup = 0.0;
        const int samples = 20000;
        for (int s = 0; s <= samples; ++s) {
            double T = -1.0 + 2.0 * s / samples, v = 0.0;
            for (std::size_t i = P.size(); i-- > 0;) v = v * T + P[i];
            sup = std::max(sup, std::abs(v));
        }
        poly_sup_.push_back(sup * (1.0 + 1e-6));
    }
}

double ClippedLinearField::partial(std::span<const int> idx, std::span<const double> y) const {
    const std::size_t k = idx.size();
    if (static_cast<int>(k) > max_order()) throw CapabilityError("clipped-linear field supports order <= 12");
    const double T = std::tanh((dot(c_, y) + e_) / k_);
    const auto& P = poly_[k];
    double v = 0.0;
    for (std::size_t i = P.size(); i-- > 0;) v = v * T + P[i];
    double out = b_ * k_ * std::pow(k_, -static_cast<double>(k)) * idx_product(c_, idx) * v;
    return k == 0 ? a_ + out : out;
}

double ClippedLinearField::sup_bound(int order) const {
    if (order == 0) return std::abs(a_) + std::abs(b_) * k_;
    return std::abs(b_) * k_ * std::pow(k_, -order) * std::pow(max_abs(c_), order) *
           poly_sup_[static_cast<std::size_t>(order)];
}

PolynomialField::PolynomialField(std::size_t m, std::vector<Monomial> terms) : m_(m), terms_(std::move(terms)) {
    for (auto& t : terms_) {
        if (t.exps.size() != m_) throw DomainError("monomial exponent count does not match dimension");
    }
}

int PolynomialField::degree() const {
    int deg = 0;
    for (const auto& t : terms_) {
        int s = 0;
        for (int e : t.exps) s += e;
        deg = std::max(deg, s);
    }
    return deg;
}

double PolynomialField::partial(std::span<const int> idx, std::span<const double> y) const {
    std::vector<int> mult(m_, 0);
    for (int i : idx) ++mult[static_cast<std::size_t>(i)];
    double total = 0.0;
    for (const auto& t : terms_) {
        double v = t.coef;
        for (std::size_t p = 0; p < m_ && v != 0.0; ++p) {
            int e = t.exps[p], k = mult[p];
            if (k > e) {
                v = 0.0;
                break;
            }
            for (int r = 0; r < k; ++r) v *= e - r;
            v *= std::pow(y[p], e - k);
        }
        total += v;
    }
    return total;
}

double PolynomialField::sup_bound(int order) const {
    int deg = degree();
    if (order > deg) return 0.0;
    if (order < deg) return kUnbounded;
    std::vector<double> zero(m_, 0.0);
    std::vector<int> idx(static_cast<std::size_t>(order), 0);
    double sup = 0.0;
    while (true) {
        sup = std::max(sup, std::abs(partial(idx, zero)));
        std::size_t pos = 0;
        while (pos < idx.size() && ++idx[pos] == static_cast<int>(m_)) idx[pos++] = 0;
        if (pos == idx.size()) break;
    }
    return sup;
}

FiniteDifferenceField::FiniteDifferenceField(std::size_t m, std::function<double(std::span<const double>)> f,
                                             double h)
    : m_(m), f_(std::move(f)), h_(h) {}

double FiniteDifferenceField::partial(std::span<const int> idx, std::span<const double> y) const {
    if (idx.empty()) return f_(y);
    if (static_cast<int>(idx.size()) > max_order()) throw CapabilityError("finite-difference field supports order <= 4");
    const double h = std::max(h_, std::pow(2.2e-16, 1.0 / (static_cast<double>(idx.size()) + 2.0)));
    std::vector<double> yy(y.begin(), y.end());
    const auto p = static_cast<std::size_t>(idx[0]);
    yy[p] = y[p] + h;
    double up = partial(idx.subspan(1), yy);
    yy[p] = y[p] - h;
    double dn = partial(idx.subspan(1), yy);
    return (up - dn) / (2.0 * h);
}

std::vector<const ScalarField*> VectorFields::column(std::size_t j) const {
    std::vector<const ScalarField*> out(m);
    for (std::size_t i = 0; i < m; ++i) out[i] = V[i * d + j].get();
    return out;
}

std::vector<const ScalarField*> VectorFields::drift() const {
    std::vector<const ScalarField*> out;
    for (const auto& f : V0) out.push_back(f.get());
    return out;
}

int VectorFields::max_order() const {
    int k = 1 << 20;
    for (const auto& f : V) k = std::min(k, f->max_order());
    for (const auto& f : V0) k = std::min(k, f->max_order());
    return k;
}

double VectorFields::C0(int order) const {
    double c = 0.0;
    for (const auto& f : V)
        for (int k = 0; k <= order; ++k) c = std::max(c, f->sup_bound(k));
    return c;
}

void VectorFields::validate() const {
    if (m == 0 || d == 0) throw DomainError("vector fields need m, d >= 1");
    if (V.size() != m * d) throw DomainError("diffusion needs m * d components");
    if (!V0.empty() && V0.size() != m) throw DomainError("drift needs m components");
    for (const auto& f : V)
        if (!f || f->input_dims() != m) throw DomainError("diffusion component has wrong input dimension");
    for (const auto& f : V0)
        if (!f || f->input_dims() != m) throw DomainError("drift component has wrong input dimension");
}

void VectorFields::eval(std::span<const double> y, std::span<double> out) const {
    for (std::size_t i = 0; i < m * d; ++i) out[i] = V[i]->value(y);
}

void VectorFields::dVV(std::size_t a, std::size_t b, std::span<const double> y, std::span<double> out) const {
    std::vector<double> vb(m);
    for (std::size_t l = 0; l < m; ++l) vb[l] = comp(l, b).value(y);
    for (std::size_t k = 0; k < m; ++k) {
        double s = 0.0;
        for (std::size_t l = 0; l < m; ++l) {
            int idx = static_cast<int>(l);
            s += comp(k, a).partial(std::span<const int>(&idx, 1), y) * vb[l];
        }
        out[k] = s;
    }
}

VectorFields make_bank(const std::string& name, std::size_t m, std::size_t d, double scale) {
    if (m == 0 || d == 0) throw DomainError("bank dimensions must be positive");
    VectorFields vf;
    vf.m = m;
    vf.d = d;
    auto coeffs = [&](std::size_t i, std::size_t j, double& a, double& b, std::vector<double>& c, double& e) {
        double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
        a = scale * (i == j ? 0.5 : 0.2 * sign);
        b = scale * 0.4 / static_cast<double>(1 + i + j);
        c.assign(m, 0.0);
        for (std::size_t l = 0; l < m; ++l) c[l] = (l == (i + j) % m) ? 1.0 : 0.5 * ((l % 2 == 0) ? 1.0 : -1.0);
        e = 0.3 * static_cast<double>(1 + i + 2 * j);
    };
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            double a, b, e;
            std::vector<double> c;
            coeffs(i, j, a, b, c, e);
            if (name == "const") {
                vf.V.push_back(std::make_shared<ConstantField>(m, a + b));
            } else if (name == "linear-clipped") {
                vf.V.push_back(std::make_shared<ClippedLinearField>(a, b, c, e, 2.0));
            } else if (name == "sincos" || name == "sincos-m2d2") {
                if (name == "sincos-m2d2" && (m != 2 || d != 2)) throw DomainError("bank sincos-m2d2 needs m = d = 2");
                vf.V.push_back(std::make_shared<SinField>(a, b, c, e));
            } else {
                throw DomainError("unknown vector-field bank '" + name + "'");
            }
        }
    return vf;
}

std::vector<std::string> bank_names() { return {"const", "linear-clipped", "sincos", "sincos-m2d2"}; }

}  // namespace fbme
