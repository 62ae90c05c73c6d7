#pragma once

#include <stdexcept>
#include <vector>

#include "ratexpr.hpp"

namespace stackeljet {

struct ZeroDivisor : std::domain_error {
    using std::domain_error::domain_error;
};
struct NonMonicModulus : std::domain_error {
    using std::domain_error::domain_error;
};
struct NotInvertible : std::domain_error {
    using std::domain_error::domain_error;
};

// Univariate polynomial in the spectral parameter over the fraction field of
// the symbolic coefficient ring. coeffs_[k] is the mu^k coefficient.
class SpectralPoly {
public:
    SpectralPoly() = default;
    /*implicit*/ SpectralPoly(const RationalExpr& c) {
        coeffs_.push_back(c);
        trim();
    }
    /*implicit*/ SpectralPoly(const Rational& c) : SpectralPoly(RationalExpr(c)) {}
    /*implicit*/ SpectralPoly(long c) : SpectralPoly(RationalExpr(c)) {}
    explicit SpectralPoly(std::vector<RationalExpr> ascending) : coeffs_(std::move(ascending)) {
        trim();
    }

    static SpectralPoly mu_power(int k, const RationalExpr& c = RationalExpr(1)) {
        std::vector<RationalExpr> v(k + 1, RationalExpr());
        v[k] = c;
        return SpectralPoly(std::move(v));
    }

    bool is_zero() const { return coeffs_.empty(); }
    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }  // -1 for zero
    const RationalExpr& coeff(int k) const {
        static const RationalExpr zero;
        if (k < 0 || k > degree()) return zero;
        return coeffs_[k];
    }
    const RationalExpr& leading() const {
        if (is_zero()) throw std::domain_error("SpectralPoly: zero polynomial");
        return coeffs_.back();
    }
    bool is_monic() const { return !is_zero() && leading() == RationalExpr(1); }

    SpectralPoly operator-() const {
        SpectralPoly out = *this;
        for (auto& c : out.coeffs_) c = -c;
        return out;
    }
    SpectralPoly operator+(const SpectralPoly& o) const {
        std::vector<RationalExpr> v(std::max(coeffs_.size(), o.coeffs_.size()), RationalExpr());
        for (size_t i = 0; i < v.size(); ++i) v[i] = coeff(int(i)) + o.coeff(int(i));
        return SpectralPoly(std::move(v));
    }
    SpectralPoly operator-(const SpectralPoly& o) const { return *this + (-o); }
    SpectralPoly operator*(const SpectralPoly& o) const {
        if (is_zero() || o.is_zero()) return SpectralPoly();
        std::vector<RationalExpr> v(coeffs_.size() + o.coeffs_.size() - 1, RationalExpr());
        for (size_t i = 0; i < coeffs_.size(); ++i)
            for (size_t j = 0; j < o.coeffs_.size(); ++j)
                v[i + j] += coeffs_[i] * o.coeffs_[j];
        return SpectralPoly(std::move(v));
    }
    SpectralPoly operator*(const RationalExpr& c) const {
        SpectralPoly out = *this;
        for (auto& x : out.coeffs_) x *= c;
        out.trim();
        return out;
    }
    SpectralPoly& operator+=(const SpectralPoly& o) { return *this = *this + o; }
    SpectralPoly& operator-=(const SpectralPoly& o) { return *this = *this - o; }
    SpectralPoly& operator*=(const SpectralPoly& o) { return *this = *this * o; }

    friend bool operator==(const SpectralPoly& a, const SpectralPoly& b) {
        if (a.degree() != b.degree()) return false;
        for (int k = 0; k <= a.degree(); ++k)
            if (a.coeff(k) != b.coeff(k)) return false;
        return true;
    }
    friend bool operator!=(const SpectralPoly& a, const SpectralPoly& b) { return !(a == b); }

    RationalExpr evaluate(const RationalExpr& x) const {
        RationalExpr out;
        for (size_t i = coeffs_.size(); i-- > 0;) out = out * x + coeffs_[i];
        return out;
    }

    SpectralPoly mu_derivative() const {
        if (degree() < 1) return SpectralPoly();
        std::vector<RationalExpr> v(coeffs_.size() - 1, RationalExpr());
        for (size_t k = 1; k < coeffs_.size(); ++k) v[k - 1] = coeffs_[k] * RationalExpr(long(k));
        return SpectralPoly(std::move(v));
    }

    // Expand in powers of (mu - a): returns q with p(mu) = sum q_k (mu-a)^k,
    // by repeated synthetic division.
    SpectralPoly shifted(const RationalExpr& a) const {
        std::vector<RationalExpr> work(coeffs_);
        std::vector<RationalExpr> out(coeffs_.size(), RationalExpr());
        for (size_t k = 0; k < coeffs_.size(); ++k) {
            // divide work by (mu - a): remainder -> out[k]
            RationalExpr carry;
            for (size_t i = work.size(); i-- > 0;) {
                RationalExpr t = work[i] + carry * a;
                carry = t;
                work[i] = t;
            }
            out[k] = work[0];
            work.erase(work.begin());
            if (work.empty()) break;
        }
        return SpectralPoly(std::move(out));
    }

    std::string str() const {
        // coefficient list, highest degree first
        std::string s = "[";
        for (int k = degree(); k >= 0; --k) {
            s += coeff(k).str();
            if (k) s += ", ";
        }
        return s + "]";
    }

private:
    void trim() {
        while (!coeffs_.empty() && coeffs_.back().is_zero()) coeffs_.pop_back();
    }
    std::vector<RationalExpr> coeffs_;
};

inline SpectralPoly operator*(const RationalExpr& c, const SpectralPoly& p) { return p * c; }

// Exact Euclidean division over the fraction field: a = b*q + r, deg r < deg b.
inline std::pair<SpectralPoly, SpectralPoly> poly_divrem(const SpectralPoly& a,
                                                         const SpectralPoly& b) {
    if (b.is_zero()) throw ZeroDivisor("poly_divrem: division by the zero polynomial");
    std::vector<RationalExpr> rem(static_cast<size_t>(a.degree() + 1));
    for (int k = 0; k <= a.degree(); ++k) rem[k] = a.coeff(k);
    int db = b.degree();
    std::vector<RationalExpr> quo;
    if (a.degree() >= db) quo.assign(a.degree() - db + 1, RationalExpr());
    for (int k = a.degree(); k >= db; --k) {
        if (rem[k].is_zero()) continue;
        RationalExpr f = rem[k] / b.leading();
        quo[k - db] = f;
        for (int j = 0; j <= db; ++j) rem[k - db + j] -= f * b.coeff(j);
        rem[k] = RationalExpr();  // force exact cancellation of the top term
    }
    return {SpectralPoly(std::move(quo)), SpectralPoly(std::move(rem))};
}

// f mod modulus, with modulus monic of degree N; the result has degree < N.
inline SpectralPoly quotient_reduce(const SpectralPoly& f, const SpectralPoly& modulus) {
    if (modulus.is_zero() || !modulus.is_monic())
        throw NonMonicModulus("quotient_reduce: modulus must be monic");
    if (f.degree() < modulus.degree()) return f;
    return poly_divrem(f, modulus).second;
}

// Inverse of f in K[mu]/(modulus) over the fraction field. Solved through
// the multiplication-by-f matrix in the basis 1, mu, ..., mu^{N-1} and
// Cramer's rule, which keeps every intermediate a polynomial (no nested
// fraction towers). Throws NotInvertible when det (the resultant up to sign)
// is the zero expression.
inline SpectralPoly quotient_invert(const SpectralPoly& f, const SpectralPoly& modulus);

namespace detail_spectral {
// determinant by cofactor expansion over RationalExpr, skipping zeros
inline RationalExpr det_small(std::vector<std::vector<RationalExpr>>& a, int n) {
    if (n == 1) return a[0][0];
    RationalExpr out;
    int sign = 1;
    for (int j = 0; j < n; ++j) {
        if (!a[0][j].is_zero()) {
            std::vector<std::vector<RationalExpr>> m(static_cast<size_t>(n) - 1);
            for (int r = 1; r < n; ++r)
                for (int c = 0; c < n; ++c)
                    if (c != j) m[size_t(r) - 1].push_back(a[size_t(r)][size_t(c)]);
            RationalExpr d = det_small(m, n - 1) * a[0][size_t(j)];
            out += sign > 0 ? d : -d;
        }
        sign = -sign;
    }
    return out;
}
} // namespace detail_spectral

inline SpectralPoly quotient_invert(const SpectralPoly& f, const SpectralPoly& modulus) {
    if (modulus.is_zero() || !modulus.is_monic())
        throw NonMonicModulus("quotient_invert: modulus must be monic");
    int N = modulus.degree();
    SpectralPoly r = quotient_reduce(f, modulus);
    if (r.is_zero()) throw NotInvertible("quotient_invert: f is zero mod modulus");
    if (N == 1) return SpectralPoly(RationalExpr(1) / r.coeff(0));
    // columns k = coefficients of f * mu^k mod modulus
    std::vector<std::vector<RationalExpr>> A(static_cast<size_t>(N),
                                             std::vector<RationalExpr>(static_cast<size_t>(N)));
    SpectralPoly col = r;
    for (int k = 0; k < N; ++k) {
        for (int i = 0; i < N; ++i) A[size_t(i)][size_t(k)] = col.coeff(i);
        if (k + 1 < N) col = quotient_reduce(col * SpectralPoly::mu_power(1), modulus);
    }
    RationalExpr D = detail_spectral::det_small(A, N);
    if (D.is_zero()) throw NotInvertible("quotient_invert: vanishing resultant");
    std::vector<RationalExpr> g(static_cast<size_t>(N));
    for (int k = 0; k < N; ++k) {
        // replace column k by e_0
        std::vector<std::vector<RationalExpr>> Ak = A;
        for (int i = 0; i < N; ++i) Ak[size_t(i)][size_t(k)] = RationalExpr(i == 0 ? 1 : 0);
        g[size_t(k)] = detail_spectral::det_small(Ak, N) / D;
    }
    return SpectralPoly(std::move(g));
}

} // namespace stackeljet
