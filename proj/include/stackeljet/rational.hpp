#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

namespace stackeljet {

// Arbitrary-precision integers and rationals. cpp_rational keeps
// gcd(|num|,den)=1 and den>0 as class invariants, which is exactly the
// canonical form we rely on for equality and serialization.
using Int = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Int num(const Rational& q) { return boost::multiprecision::numerator(q); }
inline Int den(const Rational& q) { return boost::multiprecision::denominator(q); }

inline int sign(const Rational& q) { return q.sign(); }

inline Rational rat_abs(const Rational& q) { return q < 0 ? Rational(-q) : q; }

inline Rational rat_pow(const Rational& q, long e) {
    if (e == 0) return Rational(1);
    if (e < 0) {
        if (q == 0) throw std::domain_error("rat_pow: zero to negative power");
        return rat_pow(Rational(1) / q, -e);
    }
    Rational r(1), b = q;
    unsigned long k = static_cast<unsigned long>(e);
    while (k) {
        if (k & 1) r *= b;
        b *= b;
        k >>= 1;
    }
    return r;
}

// gcd of rationals: the positive generator of the Z-module a*Z + b*Z.
inline Rational rat_gcd(const Rational& a, const Rational& b) {
    using boost::multiprecision::gcd;
    using boost::multiprecision::lcm;
    if (a == 0) return rat_abs(b);
    if (b == 0) return rat_abs(a);
    return Rational(gcd(num(a), num(b)), lcm(den(a), den(b)));
}

// Serialized as "p/q", or "p" when q = 1.
inline std::string to_string(const Rational& q) {
    std::ostringstream os;
    os << q;
    return os.str();
}

inline Rational parse_rational(const std::string& s) {
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rational(Int(s));
        Int p(s.substr(0, slash)), q(s.substr(slash + 1));
        if (q == 0) throw std::invalid_argument("zero denominator");
        if (q < 0) { p = -p; q = -q; }
        return Rational(p, q);
    } catch (const std::exception&) {
        throw std::invalid_argument("parse_rational: bad literal '" + s + "'");
    }
}

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

// Exact integer square root test; returns true and the root when n is a
// perfect square.
inline bool int_sqrt_exact(const Int& n, Int& root) {
    if (n < 0) return false;
    root = boost::multiprecision::sqrt(n);
    return root * root == n;
}

inline bool rat_sqrt_exact(const Rational& q, Rational& root) {
    if (q < 0) return false;
    Int rn, rd;
    if (!int_sqrt_exact(num(q), rn) || !int_sqrt_exact(den(q), rd)) return false;
    root = Rational(rn, rd);
    return true;
}

} // namespace stackeljet
