#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "grading.hpp"
#include "polymatrix.hpp"

namespace stackeljet {

enum class BkmType { I, II, III, IV };

inline const char* to_string(BkmType t) {
    switch (t) {
        case BkmType::I: return "I";
        case BkmType::II: return "II";
        case BkmType::III: return "III";
        case BkmType::IV: return "IV";
    }
    return "?";
}

// Construction data (n, L, m(mu)) of a BKM PDE, with L understood in
// companion form so only n and m are carried. lambda = nullopt means the
// spectral parameter sits at infinity.
struct BKMData {
    int n = 1;
    SpectralPoly m;                  // degree <= n, nonzero
    std::optional<Rational> lambda;  // nullopt = infinity

    BkmType type() const {
        if (lambda) {
            RationalExpr at = m.evaluate(RationalExpr(*lambda));
            return at.is_zero() ? BkmType::II : BkmType::I;
        }
        return m.coeff(n).is_zero() ? BkmType::IV : BkmType::III;
    }

    bool deg_m_zero() const { return m.degree() == 0; }

    static BKMData kdv_class(int n, const Rational& m0) {
        BKMData d;
        d.n = n;
        d.m = SpectralPoly(RationalExpr(m0));
        return d;
    }
    static BKMData ch_class(int n = 1) {
        BKMData d;
        d.n = n;
        d.m = SpectralPoly::mu_power(1);
        return d;
    }
    static BKMData linear_m(const Rational& m1, const Rational& m0) {
        BKMData d;
        d.n = 1;
        std::vector<RationalExpr> c{RationalExpr(m0), RationalExpr(m1)};
        d.m = SpectralPoly(std::move(c));
        return d;
    }
};

// The special polynomial c(mu) = base(mu) + m(mu) d(mu) + r(mu) with
// d(mu) = sum d_i mu^{N-i} (degree <= N-1) and deg r < deg m. The default
// base is mu^{2N+n}; the general linear-m pipeline installs a shifted power
// instead.
struct CPolyForm {
    int N = 1;
    std::vector<RationalExpr> d;        // d_1..d_N; default: symbolic d_i
    SpectralPoly r;                     // degree < deg(m)
    std::optional<SpectralPoly> base;   // monic of degree 2N+n; default mu^{2N+n}

    static CPolyForm symbolic_d(int N) {
        CPolyForm c;
        c.N = N;
        for (int i = 1; i <= N; ++i) c.d.push_back(RationalExpr(MultiPoly::variable(dvar(i))));
        return c;
    }
    static CPolyForm zero_d(int N) {
        CPolyForm c;
        c.N = N;
        c.d.assign(size_t(N), RationalExpr());
        return c;
    }
    // CH form: r = c_{2N+1}, symbolic by default.
    static CPolyForm ch(int N, std::optional<Rational> c_top = std::nullopt) {
        CPolyForm c = symbolic_d(N);
        c.r = c_top ? SpectralPoly(RationalExpr(*c_top))
                    : SpectralPoly(RationalExpr(MultiPoly::variable(cvar(2 * N + 1))));
        return c;
    }

    SpectralPoly assemble(const BKMData& data) const {
        SpectralPoly b = base ? *base : SpectralPoly::mu_power(2 * N + data.n);
        if (b.degree() != 2 * N + data.n || !b.is_monic())
            throw std::domain_error("CPolyForm: base must be monic of degree 2N+n");
        if (r.degree() >= std::max(data.m.degree(), 0) && !r.is_zero())
            throw std::domain_error("CPolyForm: deg(r) must be < deg(m)");
        SpectralPoly dp;
        for (int i = 1; i <= N; ++i) dp += SpectralPoly::mu_power(N - i, d[size_t(i) - 1]);
        return b + data.m * dp + r;
    }
};

// Companion matrix in the variables vars[0..N-1]: first column -vars,
// superdiagonal 1. Characteristic polynomial mu^N + sum vars_i mu^{N-i}.
inline PolyMatrix companion(const std::vector<RationalExpr>& vars) {
    int N = static_cast<int>(vars.size());
    PolyMatrix M(N, N);
    for (int i = 0; i < N; ++i) {
        M(i, 0) = -vars[size_t(i)];
        if (i + 1 < N) M(i, i + 1) = RationalExpr(1);
    }
    return M;
}

inline std::vector<RationalExpr> w_vars(int N) {
    std::vector<RationalExpr> v;
    for (int i = 1; i <= N; ++i) v.push_back(RationalExpr(MultiPoly::variable(wvar(i))));
    return v;
}
inline std::vector<RationalExpr> p_vars(int N) {
    std::vector<RationalExpr> v;
    for (int i = 1; i <= N; ++i) v.push_back(RationalExpr(MultiPoly::variable(pvar(i))));
    return v;
}

// Anti-triangular Hankel pattern: entry (i,j) (1-based) is 0 for i+j <= N,
// 1 for i+j = N+1, and vars_{i+j-N-1} for i+j > N+1.
inline PolyMatrix inverse_metric(const std::vector<RationalExpr>& vars) {
    int N = static_cast<int>(vars.size());
    PolyMatrix G(N, N);
    for (int i = 1; i <= N; ++i)
        for (int j = 1; j <= N; ++j) {
            if (i + j == N + 1)
                G(i - 1, j - 1) = RationalExpr(1);
            else if (i + j > N + 1)
                G(i - 1, j - 1) = vars[size_t(i + j - N - 1) - 1];
        }
    return G;
}
inline PolyMatrix inverse_metric(int N) { return inverse_metric(w_vars(N)); }

inline SpectralPoly char_poly(const std::vector<RationalExpr>& vars) {
    int N = static_cast<int>(vars.size());
    std::vector<RationalExpr> c(size_t(N) + 1);
    c[size_t(N)] = RationalExpr(1);
    for (int i = 1; i <= N; ++i) c[size_t(N - i)] = vars[size_t(i) - 1];
    return SpectralPoly(std::move(c));
}
inline SpectralPoly sigma_w(int N) { return char_poly(w_vars(N)); }

// The mu-expansion of (1/2) g^{-1}(det(mu Id - M)(M^T - mu Id)^{-1} p, p):
// returns K_1..K_N (coefficients of mu^{N-1}..mu^0). Uses the Horner
// accumulation of adj(mu Id - M^T); no symbolic fraction appears.
inline std::vector<RationalExpr> kinetic_energies(const std::vector<RationalExpr>& wv,
                                                  const std::vector<RationalExpr>& pv) {
    int N = static_cast<int>(wv.size());
    PolyMatrix A = companion(wv).transpose();
    PolyMatrix G = inverse_metric(wv);
    PolyMatrix B = PolyMatrix::identity(N);
    std::vector<RationalExpr> K(static_cast<size_t>(N));
    for (int i = 1; i <= N; ++i) {
        // B = B_{N-i} = adj coefficient of mu^{N-i}
        if (i > 1) {
            PolyMatrix AB = A * B;
            B = AB;
            for (int r = 0; r < N; ++r) B(r, r) += wv[size_t(i) - 2];
        }
        PolyMatrix GB = G * B;
        RationalExpr q;
        for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b) {
                const RationalExpr& g = GB(a, b);
                if (!g.is_zero()) q += g * pv[size_t(a)] * pv[size_t(b)];
            }
        K[size_t(i) - 1] = q * RationalExpr(Rational(-1, 2));
    }
    return K;
}
inline std::vector<RationalExpr> kinetic_energies(int N) {
    return kinetic_energies(w_vars(N), p_vars(N));
}

// V_1..V_N from f(M) = c(M)/m(M) expanded in the basis M^{N-1}..Id.
inline std::vector<RationalExpr> potentials(const BKMData& data, const SpectralPoly& c,
                                            const std::vector<RationalExpr>& wv) {
    return mat_apply_poly(c, data.m, char_poly(wv));
}
inline std::vector<RationalExpr> potentials(const BKMData& data, const CPolyForm& cform) {
    return potentials(data, cform.assemble(data), w_vars(cform.N));
}

inline RationalExpr poisson_bracket(const RationalExpr& F, const RationalExpr& G, int N) {
    RationalExpr out;
    for (int i = 1; i <= N; ++i) {
        VarId wi = wvar(i), pi = pvar(i);
        RationalExpr Fw = F.derivative(wi), Fp = F.derivative(pi);
        RationalExpr Gw = G.derivative(wi), Gp = G.derivative(pi);
        out += Fw * Gp - Fp * Gw;
    }
    return out;
}

// v_{i,k}: coefficients of M^k in the basis M^{N-1}, ..., Id, by the
// Cayley-Hamilton recursion. Returns the vector (v_{1,k}, ..., v_{N,k}).
inline std::vector<MultiPoly> v_ik_recursion(int N, int k) {
    std::vector<MultiPoly> v(static_cast<size_t>(N));
    if (k < N) {
        v[size_t(N - k) - 1] = MultiPoly(1);
        return v;
    }
    for (int i = 1; i <= N; ++i) v[size_t(i) - 1] = -MultiPoly::variable(wvar(i));
    for (int kk = N; kk < k; ++kk) {
        std::vector<MultiPoly> nv(static_cast<size_t>(N));
        const MultiPoly& v1 = v[0];
        for (int i = 1; i < N; ++i)
            nv[size_t(i) - 1] = v[size_t(i)] - v1 * MultiPoly::variable(wvar(i));
        nv[size_t(N) - 1] = -(v1 * MultiPoly::variable(wvar(N)));
        v = std::move(nv);
    }
    return v;
}

struct ZeroLevelError : std::domain_error {
    using std::domain_error::domain_error;
};

// A fully built reduced system: companion operator, metric, eom of the
// H_1 flow, and (lazily) all N Hamiltonians.
class StackelSystem {
public:
    StackelSystem(BKMData data, CPolyForm cform)
        : data_(std::move(data)), cform_(std::move(cform)), N_(cform_.N) {
        M_ = companion(w_vars(N_));
        g_inv_ = inverse_metric(N_);
        c_assembled_ = cform_.assemble(data_);
        auto K = kinetic_energies(N_);
        K1_ = K[0];
        V_ = potentials(data_, c_assembled_, w_vars(N_));
        H1_ = K1_ + V_[0];
        wx_.assign(size_t(N_) + 1, RationalExpr());
        px_.assign(size_t(N_) + 1, RationalExpr());
        for (int i = 1; i <= N_; ++i) {
            wx_[size_t(i)] = H1_.derivative(pvar(i));
            px_[size_t(i)] = -H1_.derivative(wvar(i));
        }
        K_full_ = std::move(K);
    }

    const BKMData& data() const { return data_; }
    const CPolyForm& cform() const { return cform_; }
    int N() const { return N_; }
    int n() const { return data_.n; }
    const PolyMatrix& M() const { return M_; }
    const PolyMatrix& g_inv() const { return g_inv_; }
    const SpectralPoly& c_assembled() const { return c_assembled_; }
    const RationalExpr& K1() const { return K1_; }
    const RationalExpr& V1() const { return V_[0]; }
    const RationalExpr& H1() const { return H1_; }
    const std::vector<RationalExpr>& kinetic() const { return K_full_; }
    const std::vector<RationalExpr>& potential() const { return V_; }

    RationalExpr hamiltonian(int i) const {
        return K_full_[size_t(i) - 1] + V_[size_t(i) - 1];
    }

    // (w_i)_x and (p_i)_x of the H_1 flow.
    const RationalExpr& wx(int i) const { return wx_[size_t(i)]; }
    const RationalExpr& px(int i) const { return px_[size_t(i)]; }

    // Hamiltonian vector field of an arbitrary generator.
    std::pair<std::vector<RationalExpr>, std::vector<RationalExpr>> field_of(
        const RationalExpr& Hgen) const {
        std::vector<RationalExpr> dw(size_t(N_) + 1), dp(size_t(N_) + 1);
        for (int i = 1; i <= N_; ++i) {
            dw[size_t(i)] = Hgen.derivative(pvar(i));
            dp[size_t(i)] = -Hgen.derivative(wvar(i));
        }
        return {dw, dp};
    }

    // Exact values of all H_i at a rational point, with d_i treated as zero
    // (i.e. the shifted Hamiltonians).
    std::vector<Rational> shifted_H_at(const std::vector<Rational>& w0,
                                       const std::vector<Rational>& p0) const {
        std::map<VarId, Rational> vals = point_map(w0, p0);
        for (int i = 1; i <= N_; ++i) vals[dvar(i)] = Rational(0);
        std::vector<Rational> out(static_cast<size_t>(N_));
        for (int i = 1; i <= N_; ++i) {
            try {
                out[size_t(i) - 1] = hamiltonian(i).evaluate(vals);
            } catch (const SingularEvaluation&) {
                throw ZeroLevelError("singular evaluation of H_" + std::to_string(i) +
                                     " at the given point");
            }
        }
        return out;
    }

    // d_i := -H~_i(w0, p0), so that all H_i vanish at (w0, p0).
    std::vector<Rational> place_on_zero_level(const std::vector<Rational>& w0,
                                              const std::vector<Rational>& p0) const {
        std::vector<Rational> d = shifted_H_at(w0, p0);
        for (auto& x : d) x = -x;
        return d;
    }

    // New system with the symbolic d_i replaced by concrete values.
    StackelSystem with_d_values(const std::vector<Rational>& dvals) const {
        CPolyForm cf = cform_;
        cf.d.clear();
        for (Rational x : dvals) cf.d.push_back(RationalExpr(x));
        return StackelSystem(data_, cf);
    }

    std::map<VarId, Rational> point_map(const std::vector<Rational>& w0,
                                        const std::vector<Rational>& p0) const {
        std::map<VarId, Rational> vals;
        for (int i = 1; i <= N_; ++i) {
            vals[wvar(i)] = w0[size_t(i) - 1];
            vals[pvar(i)] = p0[size_t(i) - 1];
        }
        return vals;
    }

    GradingScheme grading() const {
        if (data_.deg_m_zero()) return GradingScheme::for_deg0(N_, data_.n);
        return GradingScheme::for_ch(N_);
    }

private:
    BKMData data_;
    CPolyForm cform_;
    int N_;
    PolyMatrix M_, g_inv_;
    SpectralPoly c_assembled_;
    RationalExpr K1_, H1_;
    std::vector<RationalExpr> K_full_, V_;
    std::vector<RationalExpr> wx_, px_;
};

} // namespace stackeljet
