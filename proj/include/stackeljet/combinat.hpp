#pragma once

#include <vector>

#include "rational.hpp"

namespace stackeljet {

inline Int binomial(long n, long k) {
    if (k < 0 || k > n) return Int(0);
    k = std::min(k, n - k);
    Int r(1);
    for (long i = 1; i <= k; ++i) {
        r *= (n - k + i);
        r /= i;  // exact at every step
    }
    return r;
}

// Reduced tangent numbers t_1, t_2, ...:
//   t_1 = 1,   t_i = (1/2) sum_{j=1}^{i-1} C(2i-2, 2j-1) t_j t_{i-j}.
// The halving is exact (the sum is symmetric, hence even).
inline std::vector<Int> reduced_tangent(int upto) {
    std::vector<Int> t(size_t(upto) + 1, Int(0));
    if (upto >= 1) t[1] = 1;
    for (int i = 2; i <= upto; ++i) {
        Int s(0);
        for (int j = 1; j <= i - 1; ++j) s += binomial(2 * i - 2, 2 * j - 1) * t[size_t(j)] * t[size_t(i - j)];
        if (s % 2 != 0) throw std::logic_error("reduced_tangent: odd sum in halving step");
        t[size_t(i)] = s / 2;
    }
    return t;
}

// Alternative recursion t_{b+1} = sum_{l=0}^{b-1} C(2b-1, 2l) t_{l+1} t_{b-l}.
inline std::vector<Int> reduced_tangent_alt(int upto) {
    std::vector<Int> t(size_t(upto) + 1, Int(0));
    if (upto >= 1) t[1] = 1;
    for (int b = 1; b + 1 <= upto; ++b) {
        Int s(0);
        for (int l = 0; l <= b - 1; ++l) s += binomial(2 * b - 1, 2 * l) * t[size_t(l) + 1] * t[size_t(b - l)];
        t[size_t(b) + 1] = s;
    }
    return t;
}

// Independent oracle: solve y' = 1 + y^2 as an exact power series
// (y = tan), then extract t_n from the x^{2n-1} coefficient:
//   tan x = sum_n t_n 2^{n-1} x^{2n-1} / (2n-1)!.
inline std::vector<Int> reduced_tangent_series_oracle(int upto) {
    int maxdeg = 2 * upto - 1;
    std::vector<Rational> y(size_t(maxdeg) + 1, Rational(0));  // y[k] = coeff of x^k
    for (int m = 0; m < maxdeg; ++m) {
        // (m+1) y_{m+1} = [x^m](1 + y^2)
        Rational rhs = (m == 0) ? Rational(1) : Rational(0);
        for (int a = 0; a <= m; ++a) rhs += y[size_t(a)] * y[size_t(m - a)];
        y[size_t(m) + 1] = rhs / (m + 1);
    }
    std::vector<Int> t(size_t(upto) + 1, Int(0));
    Rational fact(1);
    for (int n = 1; n <= upto; ++n) {
        fact *= (2 * n - 2) > 0 ? Rational((2 * n - 2)) * (2 * n - 1) : Rational(1);
        Rational tn = y[size_t(2 * n - 1)] * fact / rat_pow(Rational(2), n - 1);
        if (den(tn) != 1) throw std::logic_error("tan series oracle: non-integer t_n");
        t[size_t(n)] = num(tn);
    }
    return t;
}

// s_0 = 1, s_i = 2^{i-1} for i > 0; solves
//   s_i = - sum_{j=0}^{i-1} C(2i-1, 2j) s_j (-1)^{i-j} t_{i-j}.
inline std::vector<Int> s_sequence(int upto) {
    std::vector<Int> s(size_t(upto) + 1, Int(0));
    s[0] = 1;
    Int p(1);
    for (int i = 1; i <= upto; ++i) {
        s[size_t(i)] = p;
        p *= 2;
    }
    return s;
}

// Evaluate the defining recursion directly (used to check s_sequence).
inline std::vector<Int> s_sequence_recursion(int upto) {
    std::vector<Int> t = reduced_tangent(upto);
    std::vector<Int> s(size_t(upto) + 1, Int(0));
    s[0] = 1;
    for (int i = 1; i <= upto; ++i) {
        Int acc(0);
        for (int j = 0; j <= i - 1; ++j) {
            Int term = binomial(2 * i - 1, 2 * j) * s[size_t(j)] * t[size_t(i - j)];
            if ((i - j) % 2 != 0) term = -term;
            acc += term;
        }
        s[size_t(i)] = -acc;
    }
    return s;
}

} // namespace stackeljet
