#pragma once

#include <map>
#include <optional>
#include <variant>

#include "ratexpr.hpp"

namespace stackeljet {

struct UnregisteredVariable : std::domain_error {
    using std::domain_error::domain_error;
};

// Weighted grading: deg(w_i) = i, deg(p_i) = N+1-i+alpha, deg(c_j) = j,
// deg(d_i) = N + i + 2*alpha (so each Hamiltonian H_i is homogeneous),
// with alpha = n/2 when deg(m) = 0 and alpha = 0 when m(mu) = mu.
// Degrees are rationals since alpha may be a half-integer.
class GradingScheme {
public:
    GradingScheme(int N, int n, const Rational& alpha) : N_(N), n_(n), alpha_(alpha) {
        for (int i = 1; i <= N; ++i) {
            set(wvar(i), Rational(i));
            set(pvar(i), Rational(N + 1 - i) + alpha);
            set(dvar(i), Rational(N + i) + 2 * alpha);
        }
        for (int j = 1; j <= 2 * N + n; ++j) set(cvar(j), Rational(j));
        // opaque degree-0 constants of the general linear-m machinery
        for (const char* nm : {"m0", "m1", "lam"}) set(var(nm), Rational(0));
    }

    static GradingScheme for_deg0(int N, int n) { return GradingScheme(N, n, Rational(n, 2)); }
    static GradingScheme for_ch(int N) { return GradingScheme(N, 1, Rational(0)); }

    int N() const { return N_; }
    Rational alpha() const { return alpha_; }

    void set(VarId v, const Rational& d) { deg_[v] = d; }

    Rational var_degree(VarId v) const {
        auto it = deg_.find(v);
        if (it == deg_.end())
            throw UnregisteredVariable("grading: unregistered variable " + var_name(v));
        return it->second;
    }

    Rational monomial_degree(const Monomial& m) const {
        Rational d(0);
        for (const auto& f : m.factors()) d += var_degree(f.var) * f.exp;
        return d;
    }

private:
    int N_, n_;
    Rational alpha_;
    std::map<VarId, Rational> deg_;
};

// Outcome of a degree computation: the zero function has *any* degree;
// inhomogeneous input is reported with a witness pair of monomials.
struct AnyDegree {};
struct Inhomogeneous {
    Monomial a, b;
    Rational deg_a, deg_b;
};
using DegreeResult = std::variant<AnyDegree, Rational, Inhomogeneous>;

inline DegreeResult poly_degree(const MultiPoly& p, const GradingScheme& s) {
    if (p.is_zero()) return AnyDegree{};
    std::optional<Rational> d;
    const Monomial* first = nullptr;
    for (const auto& t : p.terms()) {
        Rational td = s.monomial_degree(t.mono);
        if (!d) {
            d = td;
            first = &t.mono;
        } else if (*d != td) {
            return Inhomogeneous{*first, t.mono, *d, td};
        }
    }
    return *d;
}

inline DegreeResult degree(const RationalExpr& e, const GradingScheme& s) {
    DegreeResult dn = poly_degree(e.num(), s);
    if (std::holds_alternative<AnyDegree>(dn)) return AnyDegree{};
    if (std::holds_alternative<Inhomogeneous>(dn)) return dn;
    DegreeResult dd = poly_degree(e.den(), s);
    if (std::holds_alternative<Inhomogeneous>(dd)) return dd;
    return std::get<Rational>(dn) - std::get<Rational>(dd);
}

inline bool is_homogeneous_of(const RationalExpr& e, const GradingScheme& s, const Rational& want) {
    DegreeResult d = degree(e, s);
    if (std::holds_alternative<AnyDegree>(d)) return true;
    if (std::holds_alternative<Inhomogeneous>(d)) return false;
    return std::get<Rational>(d) == want;
}

inline MultiPoly truncate_by_factor_count(const MultiPoly& e, long d,
                                          const std::set<VarId>& vars = {}) {
    return e.truncate_by_factor_count(d, vars);
}

struct DegreeCheck {
    bool pass;
    std::string detail;
};

// deg(h_kx) = (n/2) k + deg(h) when deg(m) = 0, and deg(h_kx) = deg(h) when
// m(mu) = mu. `hk` is the k-th prolongation of `h`.
inline DegreeCheck check_derivative_degree(const GradingScheme& s, int n_components,
                                           bool deg_m_zero, const RationalExpr& h,
                                           const RationalExpr& hk, int k) {
    DegreeResult dh = degree(h, s);
    DegreeResult dk = degree(hk, s);
    if (std::holds_alternative<Inhomogeneous>(dh)) {
        auto& w = std::get<Inhomogeneous>(dh);
        return {false, "base inhomogeneous: " + w.a.str() + " vs " + w.b.str()};
    }
    if (std::holds_alternative<Inhomogeneous>(dk)) {
        auto& w = std::get<Inhomogeneous>(dk);
        return {false, "derivative inhomogeneous: deg(" + w.a.str() + ")=" + to_string(w.deg_a) +
                           " vs deg(" + w.b.str() + ")=" + to_string(w.deg_b)};
    }
    if (std::holds_alternative<AnyDegree>(dk) || std::holds_alternative<AnyDegree>(dh))
        return {true, "vacuous (zero)"};
    Rational want = std::get<Rational>(dh);
    if (deg_m_zero) want += Rational(n_components, 2) * k;
    Rational got = std::get<Rational>(dk);
    if (got != want)
        return {false, "deg = " + to_string(got) + ", expected " + to_string(want)};
    return {true, ""};
}

} // namespace stackeljet
