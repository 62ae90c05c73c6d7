#pragma once

#include <algorithm>
#include <boost/container/small_vector.hpp>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <unordered_map>
#include <vector>

#include "rational.hpp"
#include "varreg.hpp"

namespace stackeljet {

struct VarPow {
    VarId var;
    std::int32_t exp;
    friend bool operator==(const VarPow& a, const VarPow& b) {
        return a.var == b.var && a.exp == b.exp;
    }
};

// A monomial: product of variables with positive integer exponents, kept
// sorted in the canonical variable order.
class Monomial {
public:
    using Vec = boost::container::small_vector<VarPow, 4>;

    Monomial() = default;
    explicit Monomial(VarId v, std::int32_t e = 1) {
        if (e != 0) vp_.push_back({v, e});
    }

    static Monomial one() { return Monomial(); }

    bool is_one() const { return vp_.empty(); }
    const Vec& factors() const { return vp_; }

    long total_degree() const {
        long d = 0;
        for (const auto& f : vp_) d += f.exp;
        return d;
    }

    std::int32_t exponent(VarId v) const {
        for (const auto& f : vp_)
            if (f.var == v) return f.exp;
        return 0;
    }

    bool contains(VarId v) const { return exponent(v) != 0; }

    Monomial operator*(const Monomial& o) const {
        Monomial out;
        out.vp_.reserve(vp_.size() + o.vp_.size());
        size_t i = 0, j = 0;
        while (i < vp_.size() && j < o.vp_.size()) {
            if (vp_[i].var == o.vp_[j].var) {
                std::int32_t e = vp_[i].exp + o.vp_[j].exp;
                if (e != 0) out.vp_.push_back({vp_[i].var, e});
                ++i; ++j;
            } else if (var_before(vp_[i].var, o.vp_[j].var)) {
                out.vp_.push_back(vp_[i++]);
            } else {
                out.vp_.push_back(o.vp_[j++]);
            }
        }
        while (i < vp_.size()) out.vp_.push_back(vp_[i++]);
        while (j < o.vp_.size()) out.vp_.push_back(o.vp_[j++]);
        return out;
    }

    // Componentwise min (monomial gcd).
    static Monomial gcd(const Monomial& a, const Monomial& b) {
        Monomial out;
        size_t i = 0, j = 0;
        while (i < a.vp_.size() && j < b.vp_.size()) {
            if (a.vp_[i].var == b.vp_[j].var) {
                out.vp_.push_back({a.vp_[i].var, std::min(a.vp_[i].exp, b.vp_[j].exp)});
                ++i; ++j;
            } else if (var_before(a.vp_[i].var, b.vp_[j].var)) {
                ++i;
            } else {
                ++j;
            }
        }
        return out;
    }

    // Requires divisibility (every exponent of d <= ours).
    Monomial divide(const Monomial& d) const {
        Monomial out;
        size_t i = 0, j = 0;
        while (i < vp_.size()) {
            if (j < d.vp_.size() && vp_[i].var == d.vp_[j].var) {
                std::int32_t e = vp_[i].exp - d.vp_[j].exp;
                if (e < 0) throw std::domain_error("Monomial::divide: not divisible");
                if (e != 0) out.vp_.push_back({vp_[i].var, e});
                ++i; ++j;
            } else {
                out.vp_.push_back(vp_[i++]);
            }
        }
        if (j != d.vp_.size()) throw std::domain_error("Monomial::divide: not divisible");
        return out;
    }

    Monomial pow(std::int32_t k) const {
        Monomial out = *this;
        for (auto& f : out.vp_) f.exp *= k;
        if (k == 0) out.vp_.clear();
        return out;
    }

    // Number of factors (with multiplicity) drawn from `vars`; empty set
    // means all variables.
    long factor_count(const std::set<VarId>& vars) const {
        long c = 0;
        for (const auto& f : vp_)
            if (vars.empty() || vars.count(f.var)) c += f.exp;
        return c;
    }

    // graded-lex: degree first, then earlier variable with larger exponent wins.
    static int cmp(const Monomial& a, const Monomial& b) {
        long da = a.total_degree(), db = b.total_degree();
        if (da != db) return da < db ? -1 : 1;
        size_t i = 0, j = 0;
        while (i < a.vp_.size() && j < b.vp_.size()) {
            if (a.vp_[i].var == b.vp_[j].var) {
                if (a.vp_[i].exp != b.vp_[j].exp)
                    return a.vp_[i].exp < b.vp_[j].exp ? -1 : 1;
                ++i; ++j;
            } else if (var_before(a.vp_[i].var, b.vp_[j].var)) {
                return 1;  // a has the earlier variable -> a is larger
            } else {
                return -1;
            }
        }
        if (i < a.vp_.size()) return 1;
        if (j < b.vp_.size()) return -1;
        return 0;
    }

    friend bool operator==(const Monomial& a, const Monomial& b) { return a.vp_ == b.vp_; }
    friend bool operator!=(const Monomial& a, const Monomial& b) { return !(a == b); }

    size_t hash() const {
        size_t h = 0x9e3779b97f4a7c15ull;
        for (const auto& f : vp_) {
            h ^= (static_cast<size_t>(f.var) * 0x100000001b3ull) ^
                 (static_cast<size_t>(static_cast<std::uint32_t>(f.exp)) * 0xff51afd7ed558ccdull);
            h *= 0xc4ceb9fe1a85ec53ull;
        }
        return h;
    }

    std::string str() const {
        if (is_one()) return "1";
        std::string s;
        for (size_t i = 0; i < vp_.size(); ++i) {
            if (i) s += "*";
            s += var_name(vp_[i].var);
            if (vp_[i].exp != 1) s += "^" + std::to_string(vp_[i].exp);
        }
        return s;
    }

private:
    Vec vp_;
};

struct MonomialHash {
    size_t operator()(const Monomial& m) const { return m.hash(); }
};

// Multivariate polynomial with exact rational coefficients; terms are stored
// in strictly decreasing graded-lex order and never carry a zero coefficient,
// so equal polynomials compare equal term-by-term.
class MultiPoly {
public:
    struct Term {
        Monomial mono;
        Rational coeff;
    };

    MultiPoly() = default;
    /*implicit*/ MultiPoly(const Rational& c) {
        if (c != 0) terms_.push_back({Monomial::one(), c});
    }
    /*implicit*/ MultiPoly(long c) : MultiPoly(Rational(c)) {}

    static MultiPoly variable(VarId v, std::int32_t e = 1) {
        MultiPoly p;
        if (e == 0) return MultiPoly(1);
        p.terms_.push_back({Monomial(v, e), Rational(1)});
        return p;
    }
    static MultiPoly term(const Rational& c, const Monomial& m) {
        MultiPoly p;
        if (c != 0) p.terms_.push_back({m, c});
        return p;
    }

    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const {
        return terms_.empty() || (terms_.size() == 1 && terms_[0].mono.is_one());
    }
    Rational constant_value() const {
        if (terms_.empty()) return Rational(0);
        if (!is_constant()) throw std::domain_error("MultiPoly: not a constant");
        return terms_[0].coeff;
    }
    size_t term_count() const { return terms_.size(); }
    const std::vector<Term>& terms() const { return terms_; }

    bool is_monomial() const { return terms_.size() == 1; }
    const Monomial& leading_monomial() const {
        if (terms_.empty()) throw std::domain_error("MultiPoly: zero has no leading term");
        return terms_[0].mono;
    }
    const Rational& leading_coeff() const {
        if (terms_.empty()) throw std::domain_error("MultiPoly: zero has no leading term");
        return terms_[0].coeff;
    }

    MultiPoly operator-() const {
        MultiPoly out = *this;
        for (auto& t : out.terms_) t.coeff = -t.coeff;
        return out;
    }

    MultiPoly operator+(const MultiPoly& o) const { return merged(o, 1); }
    MultiPoly operator-(const MultiPoly& o) const { return merged(o, -1); }
    MultiPoly& operator+=(const MultiPoly& o) { return *this = *this + o; }
    MultiPoly& operator-=(const MultiPoly& o) { return *this = *this - o; }

    MultiPoly operator*(const MultiPoly& o) const {
        if (is_zero() || o.is_zero()) return MultiPoly();
        if (o.terms_.size() == 1) return scaled_by_term(o.terms_[0]);
        if (terms_.size() == 1) return o.scaled_by_term(terms_[0]);
        std::unordered_map<Monomial, Rational, MonomialHash> acc;
        acc.reserve(terms_.size() * 2);
        for (const auto& a : terms_)
            for (const auto& b : o.terms_) {
                Monomial m = a.mono * b.mono;
                auto [it, fresh] = acc.try_emplace(std::move(m), Rational(0));
                it->second += a.coeff * b.coeff;
            }
        return from_map(std::move(acc));
    }
    MultiPoly& operator*=(const MultiPoly& o) { return *this = *this * o; }

    MultiPoly operator*(const Rational& c) const {
        if (c == 0) return MultiPoly();
        MultiPoly out = *this;
        for (auto& t : out.terms_) t.coeff *= c;
        return out;
    }
    MultiPoly operator/(const Rational& c) const {
        if (c == 0) throw std::domain_error("MultiPoly: division by zero");
        return *this * (Rational(1) / c);
    }

    MultiPoly pow(long k) const {
        if (k < 0) throw std::domain_error("MultiPoly::pow: negative exponent");
        MultiPoly r(1), b = *this;
        while (k) {
            if (k & 1) r *= b;
            if (k >>= 1) b *= b;
        }
        return r;
    }

    MultiPoly derivative(VarId v) const {
        MultiPoly out;
        out.terms_.reserve(terms_.size());
        for (const auto& t : terms_) {
            std::int32_t e = t.mono.exponent(v);
            if (e == 0) continue;
            Monomial m = t.mono.divide(Monomial(v, 1));
            out.terms_.push_back({std::move(m), t.coeff * e});
        }
        std::sort(out.terms_.begin(), out.terms_.end(), term_desc);
        return out;
    }

    // Drop every term that contains one of `vars`.
    MultiPoly without_vars(const std::set<VarId>& vars) const {
        MultiPoly out;
        for (const auto& t : terms_) {
            bool hit = false;
            for (const auto& f : t.mono.factors())
                if (vars.count(f.var)) { hit = true; break; }
            if (!hit) out.terms_.push_back(t);
        }
        return out;
    }

    // Keep exactly the terms with fewer than `d` factors from `vars`
    // (counting multiplicity; empty set = all variables).
    MultiPoly truncate_by_factor_count(long d, const std::set<VarId>& vars = {}) const {
        MultiPoly out;
        for (const auto& t : terms_)
            if (t.mono.factor_count(vars) < d) out.terms_.push_back(t);
        return out;
    }

    MultiPoly substitute(VarId v, const MultiPoly& value) const {
        MultiPoly out;
        std::vector<MultiPoly> powers{MultiPoly(1)};
        for (const auto& t : terms_) {
            std::int32_t e = t.mono.exponent(v);
            if (e == 0) {
                out += MultiPoly::term(t.coeff, t.mono);
                continue;
            }
            while (static_cast<std::int32_t>(powers.size()) <= e)
                powers.push_back(powers.back() * value);
            Monomial rest = t.mono.divide(Monomial(v, e));
            out += powers[e].scaled_by_term({rest, t.coeff});
        }
        return out;
    }

    MultiPoly substitute_values(const std::map<VarId, Rational>& vals) const {
        MultiPoly out;
        for (const auto& t : terms_) {
            Rational c = t.coeff;
            Monomial rest;
            bool zero = false;
            for (const auto& f : t.mono.factors()) {
                auto it = vals.find(f.var);
                if (it == vals.end()) {
                    rest = rest * Monomial(f.var, f.exp);
                } else if (it->second == 0) {
                    zero = true;
                    break;
                } else {
                    c *= rat_pow(it->second, f.exp);
                }
            }
            if (!zero) out += MultiPoly::term(c, rest);
        }
        return out;
    }

    Rational evaluate(const std::map<VarId, Rational>& vals) const {
        Rational out(0);
        for (const auto& t : terms_) {
            Rational c = t.coeff;
            for (const auto& f : t.mono.factors()) {
                auto it = vals.find(f.var);
                if (it == vals.end())
                    throw std::domain_error("MultiPoly::evaluate: unbound variable " + var_name(f.var));
                c *= rat_pow(it->second, f.exp);
            }
            out += c;
        }
        return out;
    }

    // Evaluate in an arbitrary commutative ring T (series, dual numbers, ...).
    template <class T>
    T evaluate_in(const std::map<VarId, T>& vals, const T& one) const {
        T out = one - one;  // additive zero of T
        for (const auto& t : terms_) {
            T prod = one * to_double_like<T>(t.coeff, one);
            for (const auto& f : t.mono.factors()) {
                auto it = vals.find(f.var);
                if (it == vals.end())
                    throw std::domain_error("MultiPoly::evaluate_in: unbound variable " + var_name(f.var));
                for (std::int32_t k = 0; k < f.exp; ++k) prod = prod * it->second;
            }
            out = out + prod;
        }
        return out;
    }

    std::set<VarId> support() const {
        std::set<VarId> s;
        for (const auto& t : terms_)
            for (const auto& f : t.mono.factors()) s.insert(f.var);
        return s;
    }

    bool depends_on(VarId v) const {
        for (const auto& t : terms_)
            if (t.mono.contains(v)) return true;
        return false;
    }

    // Positive rational c with (*this)/c having coprime integer coefficients.
    Rational content() const {
        Rational g(0);
        for (const auto& t : terms_) {
            g = rat_gcd(g, t.coeff);
            if (g == 1) break;
        }
        return g;  // zero polynomial -> 0
    }

    // Componentwise min of exponents across all terms (the common monomial factor).
    Monomial monomial_content() const {
        if (terms_.empty()) return Monomial::one();
        Monomial g = terms_[0].mono;
        for (size_t i = 1; i < terms_.size() && !g.is_one(); ++i)
            g = Monomial::gcd(g, terms_[i].mono);
        return g;
    }

    MultiPoly divide_by_monomial(const Monomial& m) const {
        MultiPoly out;
        out.terms_.reserve(terms_.size());
        for (const auto& t : terms_) out.terms_.push_back({t.mono.divide(m), t.coeff});
        return out;  // order is preserved: dividing by a fixed monomial is monotone
    }

    friend bool operator==(const MultiPoly& a, const MultiPoly& b) {
        if (a.terms_.size() != b.terms_.size()) return false;
        for (size_t i = 0; i < a.terms_.size(); ++i)
            if (a.terms_[i].coeff != b.terms_[i].coeff || a.terms_[i].mono != b.terms_[i].mono)
                return false;
        return true;
    }
    friend bool operator!=(const MultiPoly& a, const MultiPoly& b) { return !(a == b); }

    std::string str() const {
        if (terms_.empty()) return "0";
        std::string s;
        for (size_t i = 0; i < terms_.size(); ++i) {
            const auto& t = terms_[i];
            Rational a = rat_abs(t.coeff);
            if (i == 0)
                s += t.coeff < 0 ? "-" : "";
            else
                s += t.coeff < 0 ? " - " : " + ";
            if (t.mono.is_one())
                s += to_string(a);
            else if (a == 1)
                s += t.mono.str();
            else
                s += to_string(a) + "*" + t.mono.str();
        }
        return s;
    }

private:
    template <class T>
    static T to_double_like(const Rational& q, const T& one) {
        if constexpr (std::is_constructible_v<T, Rational>)
            return T(q);
        else
            return one * to_double(q);
    }

    static bool term_desc(const Term& a, const Term& b) {
        return Monomial::cmp(a.mono, b.mono) > 0;
    }

    MultiPoly scaled_by_term(const Term& t) const {
        MultiPoly out;
        out.terms_.reserve(terms_.size());
        for (const auto& a : terms_) out.terms_.push_back({a.mono * t.mono, a.coeff * t.coeff});
        std::sort(out.terms_.begin(), out.terms_.end(), term_desc);
        return out;
    }

    MultiPoly merged(const MultiPoly& o, int s) const {
        MultiPoly out;
        out.terms_.reserve(terms_.size() + o.terms_.size());
        size_t i = 0, j = 0;
        while (i < terms_.size() && j < o.terms_.size()) {
            int c = Monomial::cmp(terms_[i].mono, o.terms_[j].mono);
            if (c > 0) {
                out.terms_.push_back(terms_[i++]);
            } else if (c < 0) {
                out.terms_.push_back(
                    {o.terms_[j].mono, s > 0 ? Rational(o.terms_[j].coeff) : Rational(-o.terms_[j].coeff)});
                ++j;
            } else {
                Rational v = s > 0 ? Rational(terms_[i].coeff + o.terms_[j].coeff)
                                   : Rational(terms_[i].coeff - o.terms_[j].coeff);
                if (v != 0) out.terms_.push_back({terms_[i].mono, std::move(v)});
                ++i; ++j;
            }
        }
        while (i < terms_.size()) out.terms_.push_back(terms_[i++]);
        while (j < o.terms_.size()) {
            out.terms_.push_back(
                {o.terms_[j].mono, s > 0 ? Rational(o.terms_[j].coeff) : Rational(-o.terms_[j].coeff)});
            ++j;
        }
        return out;
    }

    static MultiPoly from_map(std::unordered_map<Monomial, Rational, MonomialHash>&& acc) {
        MultiPoly out;
        out.terms_.reserve(acc.size());
        for (auto& [m, c] : acc)
            if (c != 0) out.terms_.push_back({m, std::move(c)});
        std::sort(out.terms_.begin(), out.terms_.end(), term_desc);
        return out;
    }

    std::vector<Term> terms_;
};

inline MultiPoly operator*(const Rational& c, const MultiPoly& p) { return p * c; }

} // namespace stackeljet
