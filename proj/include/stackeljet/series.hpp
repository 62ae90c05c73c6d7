#pragma once

#include <cmath>
#include <map>
#include <vector>

#include "ratexpr.hpp"

namespace stackeljet {

template <class T>
T scalar_from_rational(const Rational& q);
template <>
inline double scalar_from_rational<double>(const Rational& q) { return to_double(q); }
template <>
inline Rational scalar_from_rational<Rational>(const Rational& q) { return q; }

inline double scalar_sqrt(double x) {
    if (x <= 0) throw std::domain_error("series sqrt: constant term must be positive");
    return std::sqrt(x);
}
inline Rational scalar_sqrt(const Rational& x) {
    Rational r;
    if (!rat_sqrt_exact(x, r))
        throw std::domain_error("series sqrt: constant term is not an exact square");
    return r;
}

// First-order dual number a + b*eps, eps^2 = 0: forward-mode derivative
// carrier for exact or floating scalars.
template <class T>
struct Dual {
    T a{}, b{};
    Dual() = default;
    /*implicit*/ Dual(T a_) : a(std::move(a_)) {}
    Dual(T a_, T b_) : a(std::move(a_)), b(std::move(b_)) {}
    template <class U = T, class = std::enable_if_t<!std::is_same_v<U, Rational>>>
    /*implicit*/ Dual(const Rational& q) : a(scalar_from_rational<T>(q)) {}
    template <class U = T, class = std::enable_if_t<!std::is_same_v<U, double> &&
                                                    !std::is_same_v<U, Rational>>>
    /*implicit*/ Dual(double x) : a(T(x)) {}

    friend Dual operator+(const Dual& x, const Dual& y) { return {x.a + y.a, x.b + y.b}; }
    friend Dual operator-(const Dual& x, const Dual& y) { return {x.a - y.a, x.b - y.b}; }
    friend Dual operator-(const Dual& x) { return {-x.a, -x.b}; }
    friend Dual operator*(const Dual& x, const Dual& y) {
        return {x.a * y.a, x.a * y.b + x.b * y.a};
    }
    friend Dual operator/(const Dual& x, const Dual& y) {
        if (y.a == T(0)) throw std::domain_error("Dual: division by pure-infinitesimal");
        T inv = T(1) / y.a;
        return {x.a * inv, (x.b - x.a * y.b * inv) * inv};
    }
    friend bool operator==(const Dual& x, const Dual& y) { return x.a == y.a && x.b == y.b; }
};

template <>
inline Dual<double> scalar_from_rational<Dual<double>>(const Rational& q) { return Dual<double>(q); }
template <>
inline Dual<Rational> scalar_from_rational<Dual<Rational>>(const Rational& q) { return Dual<Rational>(q); }

// Degree-k Taylor jet with ring operations; all arithmetic truncates at the
// common order. Coefficients are Taylor coefficients (not derivatives).
template <class T>
class TruncatedSeries {
public:
    TruncatedSeries() = default;
    TruncatedSeries(int order, T constant) : c_(size_t(order) + 1, T(0)) {
        c_[0] = std::move(constant);
    }
    explicit TruncatedSeries(std::vector<T> coeffs) : c_(std::move(coeffs)) {}

    static TruncatedSeries identity(int order, T at0 = T(0)) {
        TruncatedSeries s(order, std::move(at0));
        if (order >= 1) s.c_[1] = T(1);
        return s;
    }

    int order() const { return static_cast<int>(c_.size()) - 1; }
    const T& operator[](int j) const { return c_[size_t(j)]; }
    T& operator[](int j) { return c_[size_t(j)]; }
    const std::vector<T>& coeffs() const { return c_; }

    friend TruncatedSeries operator+(const TruncatedSeries& x, const TruncatedSeries& y) {
        TruncatedSeries out = x;
        for (int j = 0; j <= std::min(x.order(), y.order()); ++j) out.c_[size_t(j)] = x[j] + y[j];
        out.c_.resize(size_t(std::min(x.order(), y.order())) + 1);
        return out;
    }
    friend TruncatedSeries operator-(const TruncatedSeries& x, const TruncatedSeries& y) {
        TruncatedSeries out = x;
        for (int j = 0; j <= std::min(x.order(), y.order()); ++j) out.c_[size_t(j)] = x[j] - y[j];
        out.c_.resize(size_t(std::min(x.order(), y.order())) + 1);
        return out;
    }
    friend TruncatedSeries operator-(const TruncatedSeries& x) {
        TruncatedSeries out = x;
        for (auto& v : out.c_) v = -v;
        return out;
    }
    friend TruncatedSeries operator*(const TruncatedSeries& x, const TruncatedSeries& y) {
        int k = std::min(x.order(), y.order());
        TruncatedSeries out(k, T(0));
        for (int i = 0; i <= k; ++i) {
            if (x[i] == T(0)) continue;
            for (int j = 0; i + j <= k; ++j) out.c_[size_t(i + j)] = out.c_[size_t(i + j)] + x[i] * y[j];
        }
        return out;
    }
    TruncatedSeries operator*(const T& s) const {
        TruncatedSeries out = *this;
        for (auto& v : out.c_) v = v * s;
        return out;
    }

    // 1/this; requires an invertible constant term.
    TruncatedSeries reciprocal() const {
        if (c_[0] == T(0)) throw std::domain_error("TruncatedSeries: reciprocal of zero constant term");
        TruncatedSeries out(order(), T(1) / c_[0]);
        for (int m = 1; m <= order(); ++m) {
            T acc = T(0);
            for (int j = 1; j <= m; ++j) acc = acc + c_[size_t(j)] * out[m - j];
            out.c_[size_t(m)] = -(acc / c_[0]);
        }
        return out;
    }
    friend TruncatedSeries operator/(const TruncatedSeries& x, const TruncatedSeries& y) {
        return x * y.reciprocal();
    }

    // Square root with positive (exact where applicable) constant term.
    TruncatedSeries sqrt() const {
        TruncatedSeries out(order(), scalar_sqrt(c_[0]));
        T two_s0 = out[0] + out[0];
        for (int m = 1; m <= order(); ++m) {
            T acc = c_[size_t(m)];
            for (int j = 1; j < m; ++j) acc = acc - out[j] * out[m - j];
            out.c_[size_t(m)] = acc / two_s0;
        }
        return out;
    }

    // this(g(x)) with g(0) = 0.
    TruncatedSeries compose(const TruncatedSeries& g) const {
        if (!(g[0] == T(0)))
            throw std::domain_error("TruncatedSeries::compose: inner series must vanish at 0");
        int k = std::min(order(), g.order());
        TruncatedSeries out(k, c_[size_t(order())]);
        for (int j = order() - 1; j >= 0; --j) {
            out = out * g;
            out.c_[0] = out.c_[0] + c_[size_t(j)];
        }
        return out;
    }

    // x -> a*x: multiply coefficient j by a^j.
    TruncatedSeries scale_x(const T& a) const {
        TruncatedSeries out = *this;
        T f = T(1);
        for (int j = 1; j <= order(); ++j) {
            f = f * a;
            out.c_[size_t(j)] = out.c_[size_t(j)] * f;
        }
        return out;
    }

    // Between derivative-jets and Taylor coefficients.
    static TruncatedSeries from_derivatives(const std::vector<T>& derivs) {
        TruncatedSeries out(static_cast<int>(derivs.size()) - 1, T(0));
        T fact = scalar_from_rational<T>(Rational(1));
        for (size_t j = 0; j < derivs.size(); ++j) {
            if (j > 1) fact = fact * scalar_from_rational<T>(Rational(long(j)));
            out.c_[j] = derivs[j] / fact;
        }
        return out;
    }
    std::vector<T> to_derivatives() const {
        std::vector<T> out(c_);
        T fact = scalar_from_rational<T>(Rational(1));
        for (size_t j = 0; j < out.size(); ++j) {
            if (j > 1) fact = fact * scalar_from_rational<T>(Rational(long(j)));
            out[j] = out[j] * fact;
        }
        return out;
    }

private:
    std::vector<T> c_;
};


// Evaluate a polynomial / rational expression with every variable bound to a
// series; exactness is preserved when T carries exact scalars.
template <class T>
TruncatedSeries<T> poly_at_series(const MultiPoly& p,
                                  const std::map<VarId, TruncatedSeries<T>>& vals, int order) {
    TruncatedSeries<T> out(order, T(0));
    for (const auto& t : p.terms()) {
        TruncatedSeries<T> prod(order, scalar_from_rational<T>(t.coeff));
        for (const auto& f : t.mono.factors()) {
            auto it = vals.find(f.var);
            if (it == vals.end())
                throw std::domain_error("poly_at_series: unbound variable " + var_name(f.var));
            for (std::int32_t e = 0; e < f.exp; ++e) prod = prod * it->second;
        }
        out = out + prod;
    }
    return out;
}

template <class T>
TruncatedSeries<T> expr_at_series(const RationalExpr& e,
                                  const std::map<VarId, TruncatedSeries<T>>& vals, int order) {
    TruncatedSeries<T> n = poly_at_series(e.num(), vals, order);
    if (e.is_polynomial()) return n * scalar_from_rational<T>(Rational(1) / e.den().constant_value());
    return n / poly_at_series(e.den(), vals, order);
}

// Taylor-step the flow z' = field(z) from a point: returns the solution jets
// of all components to the requested order. Field entries are indexed 1..N
// in `wx`/`px`; constants in the expressions must be bound in `consts`.
template <class T>
struct FlowJet {
    std::vector<TruncatedSeries<T>> w, p;  // index 0 unused
};

template <class T>
FlowJet<T> solve_flow_jet(const std::vector<RationalExpr>& wx, const std::vector<RationalExpr>& px,
                          int N, const std::vector<T>& w0, const std::vector<T>& p0, int order,
                          const std::map<VarId, T>& consts = {}) {
    FlowJet<T> out;
    out.w.assign(size_t(N) + 1, TruncatedSeries<T>(order, T(0)));
    out.p.assign(size_t(N) + 1, TruncatedSeries<T>(order, T(0)));
    for (int i = 1; i <= N; ++i) {
        out.w[size_t(i)] = TruncatedSeries<T>(order, w0[size_t(i) - 1]);
        out.p[size_t(i)] = TruncatedSeries<T>(order, p0[size_t(i) - 1]);
    }
    std::map<VarId, TruncatedSeries<T>> vals;
    for (const auto& [v, c] : consts) vals.emplace(v, TruncatedSeries<T>(order, c));
    for (int m = 0; m < order; ++m) {
        for (int i = 1; i <= N; ++i) {
            vals.insert_or_assign(wvar(i), out.w[size_t(i)]);
            vals.insert_or_assign(pvar(i), out.p[size_t(i)]);
        }
        for (int i = 1; i <= N; ++i) {
            TruncatedSeries<T> fw = expr_at_series(wx[size_t(i)], vals, m);
            TruncatedSeries<T> fp = expr_at_series(px[size_t(i)], vals, m);
            T div = scalar_from_rational<T>(Rational(m + 1));
            out.w[size_t(i)][m + 1] = fw[m] / div;
            out.p[size_t(i)][m + 1] = fp[m] / div;
        }
    }
    return out;
}

} // namespace stackeljet
