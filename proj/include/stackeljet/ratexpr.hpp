#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>

#include "multipoly.hpp"

namespace stackeljet {

struct SingularEvaluation : std::domain_error {
    using std::domain_error::domain_error;
};

// Fraction of two MultiPoly. Normalization cancels the integer content and
// any common monomial factor, and fixes den's leading coefficient positive;
// no full multivariate gcd is attempted, so equality is decided by
// cross-multiplication.
class RationalExpr {
public:
    RationalExpr() : num_(), den_(1) {}
    /*implicit*/ RationalExpr(MultiPoly n) : num_(std::move(n)), den_(1) {}
    /*implicit*/ RationalExpr(const Rational& c) : num_(c), den_(1) {}
    /*implicit*/ RationalExpr(long c) : num_(Rational(c)), den_(1) {}
    RationalExpr(MultiPoly n, MultiPoly d) : num_(std::move(n)), den_(std::move(d)) {
        if (den_.is_zero()) throw std::domain_error("RationalExpr: zero denominator");
        normalize();
    }

    static RationalExpr variable(VarId v, std::int32_t e = 1) {
        if (e >= 0) return RationalExpr(MultiPoly::variable(v, e));
        return RationalExpr(MultiPoly(1), MultiPoly::variable(v, -e));
    }

    const MultiPoly& num() const { return num_; }
    const MultiPoly& den() const { return den_; }
    bool is_zero() const { return num_.is_zero(); }
    bool is_polynomial() const { return den_.is_constant(); }
    bool is_constant() const { return num_.is_constant() && den_.is_constant(); }
    Rational constant_value() const {
        return num_.constant_value() / den_.constant_value();
    }

    MultiPoly as_polynomial() const {
        if (!is_polynomial()) throw std::domain_error("RationalExpr: not a polynomial: " + str());
        return num_ / den_.constant_value();
    }

    RationalExpr operator-() const {
        RationalExpr out = *this;
        out.num_ = -out.num_;
        return out;
    }

    RationalExpr operator+(const RationalExpr& o) const {
        if (den_ == o.den_) return RationalExpr(num_ + o.num_, den_);
        return RationalExpr(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
    }
    RationalExpr operator-(const RationalExpr& o) const {
        if (den_ == o.den_) return RationalExpr(num_ - o.num_, den_);
        return RationalExpr(num_ * o.den_ - o.num_ * den_, den_ * o.den_);
    }
    RationalExpr operator*(const RationalExpr& o) const {
        return RationalExpr(num_ * o.num_, den_ * o.den_);
    }
    RationalExpr operator/(const RationalExpr& o) const {
        if (o.is_zero()) throw std::domain_error("RationalExpr: division by zero");
        return RationalExpr(num_ * o.den_, den_ * o.num_);
    }
    RationalExpr& operator+=(const RationalExpr& o) { return *this = *this + o; }
    RationalExpr& operator-=(const RationalExpr& o) { return *this = *this - o; }
    RationalExpr& operator*=(const RationalExpr& o) { return *this = *this * o; }
    RationalExpr& operator/=(const RationalExpr& o) { return *this = *this / o; }

    RationalExpr pow(long k) const {
        if (k >= 0) return RationalExpr(num_.pow(k), den_.pow(k));
        if (is_zero()) throw std::domain_error("RationalExpr: zero to negative power");
        return RationalExpr(den_.pow(-k), num_.pow(-k));
    }

    RationalExpr derivative(VarId v) const {
        if (den_.is_constant())
            return RationalExpr(num_.derivative(v), den_);
        return RationalExpr(num_.derivative(v) * den_ - num_ * den_.derivative(v),
                            den_ * den_);
    }

    RationalExpr substitute(VarId v, const RationalExpr& value) const {
        if (!num_.depends_on(v) && !den_.depends_on(v)) return *this;
        // clear v from num and den by multiplying with value.den^deg
        auto subst_poly = [&](const MultiPoly& p) {
            // returns (q, e) with p(v -> value) = q / value.den^e
            std::int32_t maxe = 0;
            for (const auto& t : p.terms()) maxe = std::max(maxe, t.mono.exponent(v));
            MultiPoly out;
            std::vector<MultiPoly> npow{MultiPoly(1)}, dpow{MultiPoly(1)};
            for (std::int32_t k = 1; k <= maxe; ++k) {
                npow.push_back(npow.back() * value.num());
                dpow.push_back(dpow.back() * value.den());
            }
            for (const auto& t : p.terms()) {
                std::int32_t e = t.mono.exponent(v);
                Monomial rest = e ? t.mono.divide(Monomial(v, e)) : t.mono;
                out += MultiPoly::term(t.coeff, rest) * npow[e] * dpow[maxe - e];
            }
            return std::pair<MultiPoly, std::int32_t>(out, maxe);
        };
        auto [n, en] = subst_poly(num_);
        auto [d, ed] = subst_poly(den_);
        // num/den = n / (value.den^en) / (d / value.den^ed)
        if (en > ed)
            d *= value.den().pow(en - ed);
        else if (ed > en)
            n *= value.den().pow(ed - en);
        if (d.is_zero()) throw SingularEvaluation("RationalExpr::substitute: denominator vanished");
        return RationalExpr(std::move(n), std::move(d));
    }

    RationalExpr substitute_values(const std::map<VarId, Rational>& vals) const {
        MultiPoly d = den_.substitute_values(vals);
        if (d.is_zero()) throw SingularEvaluation("RationalExpr: denominator vanished at point");
        return RationalExpr(num_.substitute_values(vals), std::move(d));
    }

    Rational evaluate(const std::map<VarId, Rational>& vals) const {
        Rational d = den_.evaluate(vals);
        if (d == 0) throw SingularEvaluation("RationalExpr: denominator vanished at point");
        return num_.evaluate(vals) / d;
    }

    template <class T>
    T evaluate_in(const std::map<VarId, T>& vals, const T& one) const {
        T n = num_.evaluate_in(vals, one);
        if (den_.is_constant()) {
            Rational c = den_.constant_value();
            return n * (one / (one * to_double_like<T>(c, one)));
        }
        return n / den_.evaluate_in(vals, one);
    }

    std::set<VarId> support() const {
        std::set<VarId> s = num_.support();
        for (VarId v : den_.support()) s.insert(v);
        return s;
    }
    bool depends_on(VarId v) const { return num_.depends_on(v) || den_.depends_on(v); }

    // Exact equality of values, decided by cross-multiplication.
    friend bool operator==(const RationalExpr& a, const RationalExpr& b) {
        if (a.den_ == b.den_) return a.num_ == b.num_;
        return a.num_ * b.den_ == b.num_ * a.den_;
    }
    friend bool operator!=(const RationalExpr& a, const RationalExpr& b) { return !(a == b); }

    std::string str() const {
        if (den_ == MultiPoly(1)) return num_.str();
        std::string n = num_.str(), d = den_.str();
        bool nsimple = num_.term_count() <= 1;
        bool dsimple = den_.is_monomial() && den_.leading_coeff() == 1;
        if (nsimple && dsimple) return n + "/" + den_.leading_monomial().str();
        return "(" + n + ")/(" + d + ")";
    }

private:
    template <class T>
    static T to_double_like(const Rational& q, const T& one) {
        if constexpr (std::is_constructible_v<T, Rational>)
            return T(q);
        else
            return one * to_double(q);
    }

    void normalize() {
        if (num_.is_zero()) {
            den_ = MultiPoly(1);
            return;
        }
        Monomial mg = Monomial::gcd(num_.monomial_content(), den_.monomial_content());
        if (!mg.is_one()) {
            num_ = num_.divide_by_monomial(mg);
            den_ = den_.divide_by_monomial(mg);
        }
        Rational cd = den_.content();
        if (den_.leading_coeff() < 0) cd = -cd;
        if (cd != 1) {
            num_ = num_ / cd;
            den_ = den_ / cd;
        }
    }

    MultiPoly num_, den_;
};

inline RationalExpr operator+(const MultiPoly& a, const RationalExpr& b) { return RationalExpr(a) + b; }
inline RationalExpr operator*(const MultiPoly& a, const RationalExpr& b) { return RationalExpr(a) * b; }

} // namespace stackeljet
