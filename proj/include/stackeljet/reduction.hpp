#pragma once

#include "combinat.hpp"
#include "jets.hpp"
#include "series.hpp"

namespace stackeljet {

struct DegenerateSystem : std::domain_error {
    using std::domain_error::domain_error;
};
struct ZeroInitialValue : std::domain_error {
    using std::domain_error::domain_error;
};
struct DegenerateM : std::domain_error {
    using std::domain_error::domain_error;
};
struct UnsupportedType : std::domain_error {
    using std::domain_error::domain_error;
};

// sigma_u(mu) = mu^n + sum u_j mu^{n-j} with the u_j treated as RationalExpr.
inline SpectralPoly sigma_u(const std::vector<RationalExpr>& u) {
    return char_poly(u);
}

// The finite-reduction map: solve the two defining conditions on
//   P(mu) = sigma_u(mu) sigma_w(mu)^2 - c(mu)
// (divisibility by m, quotient degree <= 2N-1) for u_1..u_n. The n
// conditions are linear in the u_j. Finite roots of m are supported up to
// deg(m) = 1; missing conditions are the vanishing of the top n - deg(m)
// coefficients (the root at infinity, via mu -> 1/lambda).
inline std::vector<RationalExpr> reduce(const BKMData& data, const SpectralPoly& c,
                                        const SpectralPoly& sw) {
    int n = data.n;
    int N = sw.degree();
    int degm = data.m.degree();
    if (degm > 1)
        throw UnsupportedType("reduce: finite roots only supported for deg(m) <= 1");
    SpectralPoly sw2 = sw * sw;

    // P = base + sum_j u_j * mu^{n-j} * sw2, base = mu^n sw2 - c
    SpectralPoly base = SpectralPoly::mu_power(n) * sw2 - c;
    std::vector<SpectralPoly> coef;  // multiplier of u_j
    for (int j = 1; j <= n; ++j) coef.push_back(SpectralPoly::mu_power(n - j) * sw2);

    // rows of the linear system A u = b
    std::vector<std::vector<RationalExpr>> A;
    std::vector<RationalExpr> b;
    auto add_condition = [&](auto&& extract) {
        std::vector<RationalExpr> row;
        for (int j = 0; j < n; ++j) row.push_back(extract(coef[size_t(j)]));
        A.push_back(std::move(row));
        b.push_back(-extract(base));
    };
    // top n - deg(m) coefficients vanish: mu^{2N+n-1} .. mu^{2N+deg(m)}
    for (int s = 1; s <= n - degm; ++s)
        add_condition([&](const SpectralPoly& q) { return q.coeff(2 * N + n - s); });
    // simple finite root of m
    if (degm == 1) {
        RationalExpr root = -(data.m.coeff(0) / data.m.coeff(1));
        add_condition([&](const SpectralPoly& q) { return q.evaluate(root); });
    }

    // Gaussian elimination over the expression field.
    std::vector<RationalExpr> u(static_cast<size_t>(n));
    std::vector<int> used(size_t(n), 0);
    std::vector<int> pivot_of_row(size_t(n), -1);
    for (int r = 0; r < n; ++r) {
        int pc = -1;
        for (int j = 0; j < n; ++j)
            if (!used[size_t(j)] && !A[size_t(r)][size_t(j)].is_zero()) { pc = j; break; }
        if (pc < 0) throw DegenerateSystem("reduce: singular linear system for u");
        used[size_t(pc)] = 1;
        pivot_of_row[size_t(r)] = pc;
        for (int r2 = r + 1; r2 < n; ++r2) {
            if (A[size_t(r2)][size_t(pc)].is_zero()) continue;
            RationalExpr f = A[size_t(r2)][size_t(pc)] / A[size_t(r)][size_t(pc)];
            for (int j = 0; j < n; ++j)
                A[size_t(r2)][size_t(j)] -= f * A[size_t(r)][size_t(j)];
            b[size_t(r2)] -= f * b[size_t(r)];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        int pc = pivot_of_row[size_t(r)];
        RationalExpr acc = b[size_t(r)];
        for (int j = 0; j < n; ++j)
            if (j != pc && !A[size_t(r)][size_t(j)].is_zero()) acc -= A[size_t(r)][size_t(j)] * u[size_t(j)];
        u[size_t(pc)] = acc / A[size_t(r)][size_t(pc)];
    }
    return u;
}

// Closed triangular form for deg(m) = 0: u_i solves
// sum_{j+k+l=i} u_j w_k w_l = c_i with u_0 = w_0 = 1; u_i is a polynomial in
// w_1..w_i, c_1..c_i, linear in w_i and c_i.
inline std::vector<RationalExpr> triangular_reduce_deg0(int n,
                                                        const std::vector<RationalExpr>& w,
                                                        const std::vector<RationalExpr>& cconst) {
    auto wat = [&](int k) -> RationalExpr {
        if (k == 0) return RationalExpr(1);
        if (k <= static_cast<int>(w.size())) return w[size_t(k) - 1];
        return RationalExpr();
    };
    std::vector<RationalExpr> u(size_t(n) + 1);
    u[0] = RationalExpr(1);
    for (int i = 1; i <= n; ++i) {
        RationalExpr acc = i <= static_cast<int>(cconst.size()) ? cconst[size_t(i) - 1] : RationalExpr();
        for (int j = 0; j < i; ++j)
            for (int k = 0; k <= i - j; ++k) {
                int l = i - j - k;
                acc -= u[size_t(j)] * wat(k) * wat(l);
            }
        u[size_t(i)] = acc;  // coefficient of u_i is w_0*w_0 = 1
    }
    return std::vector<RationalExpr>(u.begin() + 1, u.end());
}

// The symbolic reduction map attached to a system.
struct ReductionMap {
    BKMData data;
    SpectralPoly c;
    int N = 0;
    std::vector<RationalExpr> u;  // u_i as functions of w_1..w_N

    static ReductionMap build(const StackelSystem& sys) {
        ReductionMap r;
        r.data = sys.data();
        r.c = sys.c_assembled();
        r.N = sys.N();
        r.u = reduce(r.data, r.c, sigma_w(r.N));
        return r;
    }

    // Push a w-jet (series of all components w_1..w_N plus constant bindings)
    // through the map.
    template <class T>
    std::vector<TruncatedSeries<T>> push(const std::map<VarId, TruncatedSeries<T>>& wseries,
                                         int order) const {
        std::vector<TruncatedSeries<T>> out;
        for (const auto& ui : u) out.push_back(expr_at_series(ui, wseries, order));
        return out;
    }
};

// Jet pushforward u = R(w) on numeric jets: values are derivative lists per
// component; exact when T is exact.
template <class T>
std::vector<std::vector<T>> jet_pushforward(const ReductionMap& R,
                                            const std::vector<std::vector<T>>& wjet,
                                            const std::map<VarId, T>& consts = {}) {
    int order = static_cast<int>(wjet.at(0).size()) - 1;
    std::map<VarId, TruncatedSeries<T>> vals;
    for (int i = 1; i <= R.N; ++i)
        vals.emplace(wvar(i), TruncatedSeries<T>::from_derivatives(wjet[size_t(i) - 1]));
    for (const auto& [v, cst] : consts) vals.emplace(v, TruncatedSeries<T>(order, cst));
    std::vector<std::vector<T>> out;
    for (const auto& s : R.push(vals, order)) out.push_back(s.to_derivatives());
    return out;
}

// Invert the reduction on jets for deg(m) = 0: recovers the jets of
// w_1..w_n from the jets of u_1..u_n by the triangular relation
//   sum_{j+k+l=i} u_j w_k w_l = c_i.
template <class T>
std::vector<TruncatedSeries<T>> invert_reduction_jet_deg0(
    int n, const std::vector<TruncatedSeries<T>>& ujet, const std::vector<Rational>& cconst) {
    int order = ujet.at(0).order();
    TruncatedSeries<T> one(order, T(1));
    auto cat = [&](int i) {
        Rational v = i <= static_cast<int>(cconst.size()) ? cconst[size_t(i) - 1] : Rational(0);
        return TruncatedSeries<T>(order, scalar_from_rational<T>(v));
    };
    std::vector<TruncatedSeries<T>> w{one};  // w[0] = 1
    for (int i = 1; i <= n; ++i) {
        // 2 w_i = c_i - u_i - sum' u_j w_k w_l  (all terms with k,l < i, j < i or j = i with k=l=0 excluded)
        TruncatedSeries<T> acc = cat(i) - ujet[size_t(i) - 1];
        for (int j = 0; j < i; ++j)
            for (int k = 0; k <= i - j; ++k) {
                int l = i - j - k;
                if (k == i || l == i) continue;  // the 2 w_i term itself
                TruncatedSeries<T> uj = (j == 0) ? one : ujet[size_t(j) - 1];
                acc = acc - uj * w[size_t(k)] * w[size_t(l)];
            }
        w.push_back(acc * scalar_from_rational<T>(Rational(1, 2)));
    }
    return std::vector<TruncatedSeries<T>>(w.begin() + 1, w.end());
}

// CH-family inversion: w_N = sqrt(c_{2N+1}/u), positive branch, with
// sign(c_{2N+1}) = sign(u(0)).
template <class T>
TruncatedSeries<T> invert_reduction_jet_ch(const TruncatedSeries<T>& ujet, const T& c_top) {
    if (ujet[0] == T(0))
        throw ZeroInitialValue("CH inversion: u(0) = 0 is outside the admissible open set");
    TruncatedSeries<T> c(ujet.order(), c_top);
    return (c / ujet).sqrt();
}

// Gauge normalization of m(mu) = m_1 mu + m_0: a shift lambda_0 = m_0/m_1
// removing the constant term, and the scale a with a^2 m_1 = sign(m_1).
struct GaugeNormalization {
    Rational lambda0;
    double a;
    int m1_sign;
};

inline GaugeNormalization gauge_normalize(const Rational& m1, const Rational& m0) {
    if (m1 == 0) throw DegenerateM("gauge_normalize: m_1 = 0");
    GaugeNormalization g;
    g.lambda0 = m0 / m1;
    g.m1_sign = m1 > 0 ? 1 : -1;
    g.a = 1.0 / std::sqrt(std::abs(to_double(m1)));
    return g;
}

// Affine coordinate change defined by
//   mu^N + sum w_i mu^{N-i} = (mu-lambda)^N + sum v_i (mu-lambda)^{N-i}:
//   v_i = sum_{j=0}^{i} C(N-j, i-j) lambda^{i-j} w_j  (w_0 = 1),
// and the inverse with lambda -> -lambda. Momenta transform by the
// transpose of dw/dv.
struct VCoordinates {
    int N;
    RationalExpr lambda;

    std::vector<RationalExpr> v_from_w(const std::vector<RationalExpr>& w) const {
        return apply(w, lambda);
    }
    std::vector<RationalExpr> w_from_v(const std::vector<RationalExpr>& v) const {
        return apply(v, -lambda);
    }
    // dw/dv as a constant matrix: w_i = sum_j A_{ij} v_j + shift.
    PolyMatrix dw_dv() const {
        PolyMatrix A(N, N);
        for (int i = 1; i <= N; ++i)
            for (int j = 1; j <= i; ++j)
                A(i - 1, j - 1) =
                    RationalExpr(Rational(binomial(N - j, i - j))) * (-lambda).pow(i - j);
        return A;
    }
    std::vector<RationalExpr> p_w_from_p_v(const std::vector<RationalExpr>& pv) const {
        // p_v = (dw/dv)^T p_w  =>  p_w = ((dw/dv)^T)^{-1} p_v; the matrix is
        // unit lower triangular, solve by forward substitution on A^T x = pv.
        PolyMatrix A = dw_dv();
        std::vector<RationalExpr> pw(static_cast<size_t>(N));
        // (A^T)_{ji} = A_{ij}; A^T is unit upper triangular: row j: sum_{i>=j} A_{ij} pw_i = pv_j
        for (int j = N; j >= 1; --j) {
            RationalExpr acc = pv[size_t(j) - 1];
            for (int i = j + 1; i <= N; ++i) acc -= A(i - 1, j - 1) * pw[size_t(i) - 1];
            pw[size_t(j) - 1] = acc;  // A_{jj} = 1
        }
        return pw;
    }

private:
    std::vector<RationalExpr> apply(const std::vector<RationalExpr>& x,
                                    const RationalExpr& lam) const {
        std::vector<RationalExpr> out(static_cast<size_t>(N));
        for (int i = 1; i <= N; ++i) {
            RationalExpr acc;
            for (int j = 0; j <= i; ++j) {
                RationalExpr xj = (j == 0) ? RationalExpr(1) : x[size_t(j) - 1];
                acc += RationalExpr(Rational(binomial(N - j, i - j))) * lam.pow(i - j) * xj;
            }
            out[size_t(i) - 1] = acc;
        }
        return out;
    }
};

// q of the finite-gap pair (u, q) by BKM type. Type III: q = w_1. Type IV:
// q = (1/2) tr L = -u_1/2. Type II: q = sigma_u(lambda)^{-1/2} (numeric).
// Type I has no algebraic q.
inline RationalExpr constraint_q_expr(const BKMData& data, const ReductionMap& R) {
    switch (data.type()) {
        case BkmType::III:
            return RationalExpr(MultiPoly::variable(wvar(1)));
        case BkmType::IV:
            return -R.u[0] * RationalExpr(Rational(1, 2));
        default:
            throw UnsupportedType("constraint_q: only types III/IV have an expression in w");
    }
}

inline double constraint_q_value(const BKMData& data, const ReductionMap& R,
                                 const std::vector<double>& w,
                                 const std::map<VarId, double>& consts = {}) {
    std::map<VarId, TruncatedSeries<double>> vals;
    for (int i = 1; i <= R.N; ++i) vals.emplace(wvar(i), TruncatedSeries<double>(0, w[size_t(i) - 1]));
    for (const auto& [v, c] : consts) vals.emplace(v, TruncatedSeries<double>(0, c));
    auto u = R.push(vals, 0);
    switch (data.type()) {
        case BkmType::III:
            return w[0];
        case BkmType::IV:
            return -0.5 * u[0][0];
        case BkmType::II: {
            double s = 0.0, lam = to_double(*data.lambda), powl = 1.0;
            std::vector<double> uv;
            for (auto& s_ : u) uv.push_back(s_[0]);
            // sigma_u(lambda) = lambda^n + sum u_j lambda^{n-j}
            for (int j = data.n; j >= 1; --j) {
                s += uv[size_t(j) - 1] * powl;
                powl *= lam;
            }
            s += powl;
            if (s <= 0) throw SingularEvaluation("constraint_q: sigma_u(lambda) <= 0");
            return 1.0 / std::sqrt(s);
        }
        default:
            throw UnsupportedType("constraint_q: type I has no algebraic constraint");
    }
}

} // namespace stackeljet
