#pragma once

#include <random>

#include <stackeljet/stackeljet.hpp>

namespace sjt {

using namespace stackeljet;

inline RationalExpr W(int i) { return RationalExpr(MultiPoly::variable(wvar(i))); }
inline RationalExpr P(int i) { return RationalExpr(MultiPoly::variable(pvar(i))); }
inline RationalExpr C(int j) { return RationalExpr(MultiPoly::variable(cvar(j))); }
inline RationalExpr Q(long n, long d = 1) { return RationalExpr(Rational(n, d)); }

inline Rational rand_rational(std::mt19937& rng, int num_range = 9, int den_range = 4) {
    std::uniform_int_distribution<int> nu(-num_range, num_range);
    std::uniform_int_distribution<int> de(1, den_range);
    return Rational(nu(rng), de(rng));
}

inline MultiPoly rand_poly(std::mt19937& rng, const std::vector<VarId>& vars, int terms,
                           int max_exp = 3) {
    MultiPoly out;
    std::uniform_int_distribution<int> expd(0, max_exp);
    for (int t = 0; t < terms; ++t) {
        Monomial m;
        for (VarId v : vars) {
            int e = expd(rng);
            if (e > 0 && (rng() & 1)) m = m * Monomial(v, e);
        }
        out += MultiPoly::term(rand_rational(rng), m);
    }
    return out;
}

inline std::vector<Rational> rand_point(std::mt19937& rng, int n, int num_range = 5) {
    std::vector<Rational> v;
    for (int i = 0; i < n; ++i) v.push_back(rand_rational(rng, num_range, 3));
    return v;
}

} // namespace sjt
