#pragma once

#include "odesim.hpp"

namespace stackeljet {

struct NoConvergence : std::runtime_error {
    double best_residual;
    int iterations;
    NoConvergence(double r, int it)
        : std::runtime_error("Newton did not converge (best residual " + std::to_string(r) + ")"),
          best_residual(r), iterations(it) {}
};

struct MatchResult {
    int N = 0;
    bool exact = false;
    bool converged = true;
    int iterations = 0;
    double residual = 0.0;  // max deviation of the achieved jet from the target

    // exact path
    std::vector<Rational> w0, p0, d;
    // float path (also mirrors the exact path)
    std::vector<double> w0d, p0d, dd;

    Rational c_top;           // trailing coefficient c_{2N+1} (CH family), else 0
    Rational lambda0;         // gauge shift (general linear m)
    double scale_a = 1.0;     // gauge scale (general linear m)
    std::vector<double> v0d;  // CH-frame coordinates (general linear m)
};

namespace detail {

inline void mirror_exact(MatchResult& r) {
    r.w0d.clear();
    r.p0d.clear();
    r.dd.clear();
    for (const auto& x : r.w0) r.w0d.push_back(to_double(x));
    for (const auto& x : r.p0) r.p0d.push_back(to_double(x));
    for (const auto& x : r.d) r.dd.push_back(to_double(x));
}

} // namespace detail

// ---------------------------------------------------------------------------
// Exact matcher for deg(m) = 0
// ---------------------------------------------------------------------------

inline int smallest_gap_number_deg0(int n, int order) {
    // Every even order k consumes the n fresh positions w_{nk/2+1..nk/2+n}
    // and every odd order n fresh momenta, so the positions run out first:
    // the smallest admissible gap number is n (floor(order/2) + 1).
    return n * (order / 2 + 1);
}

inline int max_order_deg0(int n, int N) { return 2 * (N / n) - 1; }

// Match the k-jets of u_1..u_n (derivative lists) with a finite-gap solution
// of the deg(m)=0 family, by the triangular assignment
//   w_1..w_n, p_N..p_{N-n+1}, w_{n+1}..w_{2n}, ...
// Each step solves one linear equation A + a_k z = target for the newly
// activated variable; a_k is read off a forward-mode (dual-number) jet
// propagation, never assumed from a closed form. Exact rational arithmetic
// throughout; unassigned initial conditions stay 0.
inline MatchResult match_deg_m0(const BKMData& data, const CPolyForm& cform,
                                const std::vector<std::vector<Rational>>& target_u) {
    const int n = data.n;
    const int order = static_cast<int>(target_u.at(0).size()) - 1;
    const int N = cform.N;
    if (order > max_order_deg0(n, N))
        throw std::domain_error("match_deg_m0: order too high for this gap number");
    StackelSystem sys(data, cform);

    // convert the u-target to a w-target through the triangular inverse
    std::vector<TruncatedSeries<Rational>> useries;
    for (const auto& comp : target_u)
        useries.push_back(TruncatedSeries<Rational>::from_derivatives(comp));
    auto wtarget = invert_reduction_jet_deg0(n, useries, {});
    std::vector<std::vector<Rational>> wtarget_deriv;
    for (auto& s : wtarget) wtarget_deriv.push_back(s.to_derivatives());

    std::vector<Rational> wval(size_t(N), Rational(0)), pval(size_t(N), Rational(0));
    auto propagate = [&](VarId unknown, int ord) {
        using D = Dual<Rational>;
        std::vector<D> w0(static_cast<size_t>(N)), p0(static_cast<size_t>(N));
        for (int i = 1; i <= N; ++i) {
            w0[size_t(i) - 1] = D(wval[size_t(i) - 1]);
            p0[size_t(i) - 1] = D(pval[size_t(i) - 1]);
            if (unknown == wvar(i)) w0[size_t(i) - 1].b = Rational(1);
            if (unknown == pvar(i)) p0[size_t(i) - 1].b = Rational(1);
        }
        std::vector<RationalExpr> wx(size_t(N) + 1), px(size_t(N) + 1);
        for (int i = 1; i <= N; ++i) {
            wx[size_t(i)] = sys.wx(i);
            px[size_t(i)] = sys.px(i);
        }
        return solve_flow_jet<D>(wx, px, N, w0, p0, ord);
    };

    for (int k = 0; k <= order; ++k) {
        for (int i = 1; i <= n; ++i) {
            VarId z;
            Rational* slot;
            if (k % 2 == 0) {
                int idx = n * (k / 2) + i;
                z = wvar(idx);
                slot = &wval[size_t(idx) - 1];
            } else {
                int idx = N + 1 - (n * ((k - 1) / 2) + i);
                z = pvar(idx);
                slot = &pval[size_t(idx) - 1];
            }
            Rational target = wtarget_deriv[size_t(i) - 1][size_t(k)];
            if (k == 0) {
                *slot = target;
                continue;
            }
            auto jet = propagate(z, k);
            Dual<Rational> got = jet.w[size_t(i)].to_derivatives()[size_t(k)];
            if (got.b == 0)
                throw std::logic_error("match_deg_m0: vanishing leading coefficient a_k");
            *slot = (target - got.a) / got.b;
        }
    }

    MatchResult out;
    out.N = N;
    out.exact = true;
    out.w0 = wval;
    out.p0 = pval;
    out.d = sys.place_on_zero_level(wval, pval);
    out.c_top = Rational(0);
    detail::mirror_exact(out);
    return out;
}

inline MatchResult match_deg_m0(int n, const Rational& m0,
                                const std::vector<std::vector<Rational>>& target_u,
                                int N_override = 0) {
    int order = static_cast<int>(target_u.at(0).size()) - 1;
    int N = N_override > 0 ? N_override : smallest_gap_number_deg0(n, order);
    return match_deg_m0(BKMData::kdv_class(n, m0), CPolyForm::symbolic_d(N), target_u);
}

// Exact re-prolongation: achieved u-jet (derivatives) from an initial
// condition, via series solution of the flow and the reduction map. This path
// is independent of the symbolic JetTable.
template <class T>
std::vector<std::vector<T>> achieved_ujet(const StackelSystem& sys, const ReductionMap& R,
                                          const std::vector<T>& w0, const std::vector<T>& p0,
                                          int order, const std::map<VarId, T>& consts = {}) {
    int N = sys.N();
    std::vector<RationalExpr> wx(size_t(N) + 1), px(size_t(N) + 1);
    for (int i = 1; i <= N; ++i) {
        wx[size_t(i)] = sys.wx(i);
        px[size_t(i)] = sys.px(i);
    }
    auto jet = solve_flow_jet<T>(wx, px, N, w0, p0, order, consts);
    std::map<VarId, TruncatedSeries<T>> vals;
    for (int i = 1; i <= N; ++i) vals.emplace(wvar(i), jet.w[size_t(i)]);
    for (const auto& [v, c] : consts) vals.emplace(v, TruncatedSeries<T>(order, c));
    std::vector<std::vector<T>> out;
    for (const auto& s : R.push(vals, order)) out.push_back(s.to_derivatives());
    return out;
}

struct VerifyReport {
    // deviation[c][j] = |achieved - target| for component c, derivative j
    std::vector<std::vector<double>> deviation;
    bool exact_zero = false;  // set on the exact path when all deviations vanish
    double max_deviation = 0.0;
};

inline VerifyReport verify_match(const StackelSystem& sys_with_d, const ReductionMap& R,
                                 const MatchResult& res,
                                 const std::vector<std::vector<Rational>>& target_exact,
                                 const std::map<VarId, Rational>& consts = {}) {
    int order = static_cast<int>(target_exact.at(0).size()) - 1;
    auto got = achieved_ujet<Rational>(sys_with_d, R, res.w0, res.p0, order, consts);
    VerifyReport rep;
    rep.exact_zero = true;
    rep.deviation.assign(got.size(), {});
    for (size_t c = 0; c < got.size(); ++c)
        for (size_t j = 0; j < got[c].size(); ++j) {
            Rational dlt = got[c][j] - target_exact[c][j];
            if (dlt != 0) rep.exact_zero = false;
            double a = std::abs(to_double(dlt));
            rep.deviation[c].push_back(a);
            rep.max_deviation = std::max(rep.max_deviation, a);
        }
    return rep;
}

inline VerifyReport verify_match_numeric(const StackelSystem& sys, const ReductionMap& R,
                                         const std::vector<double>& w0,
                                         const std::vector<double>& p0,
                                         const std::vector<std::vector<double>>& target,
                                         const std::map<VarId, double>& consts = {}) {
    int order = static_cast<int>(target.at(0).size()) - 1;
    auto got = achieved_ujet<double>(sys, R, w0, p0, order, consts);
    VerifyReport rep;
    rep.deviation.assign(got.size(), {});
    for (size_t c = 0; c < got.size(); ++c)
        for (size_t j = 0; j < got[c].size(); ++j) {
            double a = std::abs(got[c][j] - target[c][j]);
            rep.deviation[c].push_back(a);
            rep.max_deviation = std::max(rep.max_deviation, a);
        }
    return rep;
}

// ---------------------------------------------------------------------------
// Newton matcher for the CH family (m = mu)
// ---------------------------------------------------------------------------

struct NewtonOptions {
    double tol = 1e-9;
    int max_iter = 25;
    int max_backtrack = 8;  // halvings per step on residual increase
};

// Compiled Newton function: F_i(v) = (w_N)_{ix} and its Jacobian, from the
// symbolic jet table, over the layout (w_1..w_N, p_1..p_N).
class ChNewtonTables {
public:
    ChNewtonTables(const StackelSystem& sys, const std::map<VarId, Rational>& consts)
        : N_(sys.N()), dim_(2 * N_ - 2) {
        JetTable jt(sys);
        auto slots = state_slots(N_);
        vars_ = jt.newton_vars();
        for (int i = 1; i <= dim_; ++i) {
            RationalExpr e = jt.entry(wvar(N_), i);
            F_.emplace_back(e, slots, consts);
            for (int j = 1; j <= dim_; ++j)
                J_.emplace_back(e.derivative(vars_[size_t(j) - 1]), slots, consts);
        }
    }

    int dim() const { return dim_; }
    const std::vector<VarId>& vars() const { return vars_; }

    void eval(const double* state, std::vector<double>& F) const {
        F.resize(size_t(dim_));
        for (int i = 0; i < dim_; ++i) F[size_t(i)] = F_[size_t(i)].eval(state);
    }
    void jacobian(const double* state, std::vector<double>& J) const {
        J.resize(size_t(dim_) * size_t(dim_));
        for (size_t k = 0; k < J.size(); ++k) J[k] = J_[k].eval(state);
    }

private:
    int N_, dim_;
    std::vector<VarId> vars_;
    std::vector<Tape> F_, J_;
};

namespace detail {

// Dense LU solve with partial pivoting; returns false on (numerical) singularity.
inline bool lu_solve(std::vector<double> A, std::vector<double> b, int n,
                     std::vector<double>& x) {
    std::vector<int> piv(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) piv[size_t(i)] = i;
    for (int c = 0; c < n; ++c) {
        int best = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(A[size_t(r) * n + c]) > std::abs(A[size_t(best) * n + c])) best = r;
        if (std::abs(A[size_t(best) * n + c]) < 1e-300) return false;
        if (best != c) {
            for (int j = 0; j < n; ++j) std::swap(A[size_t(c) * n + j], A[size_t(best) * n + j]);
            std::swap(b[size_t(c)], b[size_t(best)]);
        }
        for (int r = c + 1; r < n; ++r) {
            double f = A[size_t(r) * n + c] / A[size_t(c) * n + c];
            if (f == 0.0) continue;
            for (int j = c; j < n; ++j) A[size_t(r) * n + j] -= f * A[size_t(c) * n + j];
            b[size_t(r)] -= f * b[size_t(c)];
        }
    }
    x.assign(size_t(n), 0.0);
    for (int r = n - 1; r >= 0; --r) {
        double acc = b[size_t(r)];
        for (int j = r + 1; j < n; ++j) acc -= A[size_t(r) * n + j] * x[size_t(j)];
        x[size_t(r)] = acc / A[size_t(r) * n + r];
    }
    return true;
}

} // namespace detail

inline int smallest_gap_number_ch(int order) { return order / 2 + (order % 2) + 1; }

namespace detail {

// One damped-Newton run at a fixed w_N(0) branch. Backtracking halves the
// step while the max-residual fails to decrease; if no damped step helps,
// the full step is taken anyway (the iteration is allowed a few
// non-monotone moves before giving up).
inline MatchResult ch_newton_branch(const StackelSystem& sys, const ChNewtonTables& tables,
                                    const std::map<VarId, Rational>& consts, int N,
                                    double wbar, const std::vector<double>& wN_target,
                                    const NewtonOptions& opt) {
    const int dim = 2 * N - 2;
    std::vector<double> state(static_cast<size_t>(2 * N), 0.0);
    state[size_t(N) - 1] = wbar;
    auto slots = state_slots(N);
    auto set_v = [&](const std::vector<double>& v) {
        for (int j = 0; j < dim; ++j)
            state[size_t(slots.at(tables.vars()[size_t(j)]))] = v[size_t(j)];
    };

    std::vector<double> v(static_cast<size_t>(dim), 0.0), F, Jm, dv;
    auto residual_of = [&](const std::vector<double>& vv) {
        set_v(vv);
        tables.eval(state.data(), F);
        double r = 0.0;
        for (int i = 0; i < dim; ++i)
            r = std::max(r, std::abs(F[size_t(i)] - wN_target[size_t(i) + 1]));
        return r;
    };

    double res = residual_of(v);
    double best = res;
    int it = 0, strikes = 0;
    while (res > opt.tol) {
        if (it >= opt.max_iter) throw NoConvergence(best, it);
        set_v(v);
        tables.jacobian(state.data(), Jm);
        tables.eval(state.data(), F);
        std::vector<double> rhs(static_cast<size_t>(dim));
        for (int i = 0; i < dim; ++i) rhs[size_t(i)] = wN_target[size_t(i) + 1] - F[size_t(i)];
        if (!detail::lu_solve(Jm, rhs, dim, dv)) throw NoConvergence(best, it);
        double step = 1.0;
        std::vector<double> vn(static_cast<size_t>(dim));
        double rn = res;
        bool decreased = false;
        for (int bt = 0; bt <= opt.max_backtrack; ++bt) {
            for (int j = 0; j < dim; ++j) vn[size_t(j)] = v[size_t(j)] + step * dv[size_t(j)];
            rn = residual_of(vn);
            if (std::isfinite(rn) && rn < res) {
                decreased = true;
                break;
            }
            step /= 2;
        }
        if (!decreased) {
            // full-step escape; bail out after repeated non-monotone moves
            if (++strikes > 4) throw NoConvergence(best, it);
            for (int j = 0; j < dim; ++j) vn[size_t(j)] = v[size_t(j)] + dv[size_t(j)];
            rn = residual_of(vn);
            if (!std::isfinite(rn)) throw NoConvergence(best, it);
        } else {
            strikes = 0;
        }
        v = vn;
        res = rn;
        best = std::min(best, res);
        ++it;
    }

    MatchResult out;
    out.N = N;
    out.converged = true;
    out.iterations = it;
    out.residual = res;
    set_v(v);
    out.w0d.assign(state.begin(), state.begin() + N);
    out.p0d.assign(state.begin() + N, state.end());
    std::map<VarId, Rational> cc = consts;
    for (int i = 1; i <= N; ++i) cc[dvar(i)] = Rational(0);
    for (int i = 1; i <= N; ++i) {
        Tape h(sys.hamiltonian(i), slots, cc);
        out.dd.push_back(-h.eval(state.data()));
    }
    return out;
}

} // namespace detail

// Newton solve of the CH jet-matching problem: w_N(0) absorbs the 0-th
// coefficient, p_N stays 0, and the unknowns v_1..v_{2N-2} are driven so
// that the jet of w_N matches the inverted target. Seed: the all-0 point,
// where the Jacobian is anti-triangular and invertible. The positive
// square-root branch of w_N(0) is tried first; if that Newton run fails,
// the mirror branch w_N(0) < 0 is tried (mu -> -mu maps one branch onto the
// other with the opposite signs of c and u, so for half of the sign/parity
// combinations only the mirror branch carries real solutions).
inline MatchResult match_ch_newton(const std::vector<double>& target_u_derivs,
                                   const NewtonOptions& opt = {}, int N_override = 0,
                                   std::optional<Rational> c_top_override = std::nullopt) {
    const int order = static_cast<int>(target_u_derivs.size()) - 1;
    double u0 = target_u_derivs.at(0);
    if (u0 == 0.0)
        throw ZeroInitialValue("match_ch_newton: u(0) = 0 is outside the admissible set");
    int N = N_override > 0 ? N_override : smallest_gap_number_ch(order);
    if (order > 2 * N - 2) throw std::domain_error("match_ch_newton: order exceeds 2N-2");
    const int dim = 2 * N - 2;

    // default c_{2N+1} = u(0) exactly, so w_N(0) = 1 and the all-0 seed sits
    // at the natural scale of the problem
    Rational c_top = c_top_override ? *c_top_override : Rational(u0);
    if ((u0 > 0) != (c_top > 0))
        throw std::domain_error("match_ch_newton: sign(c_{2N+1}) must match sign(u(0))");

    // target w_N jet from the u target (positive square-root branch);
    // unspecified higher orders of w_N are completed by zero derivatives,
    // which keeps the Newton system square when N exceeds the minimum
    auto us = TruncatedSeries<double>::from_derivatives(target_u_derivs);
    auto wser = invert_reduction_jet_ch(us, to_double(c_top));
    std::vector<double> wN_target = wser.to_derivatives();
    while (static_cast<int>(wN_target.size()) < dim + 1) wN_target.push_back(0.0);

    StackelSystem sys(BKMData::ch_class(), CPolyForm::ch(N));
    std::map<VarId, Rational> consts{{cvar(2 * N + 1), c_top}};
    ChNewtonTables tables(sys, consts);

    try {
        MatchResult r = detail::ch_newton_branch(sys, tables, consts, N, wN_target[0],
                                                 wN_target, opt);
        r.c_top = c_top;
        return r;
    } catch (const NoConvergence& first) {
        std::vector<double> mirror = wN_target;
        for (auto& x : mirror) x = -x;
        try {
            MatchResult r = detail::ch_newton_branch(sys, tables, consts, N, mirror[0],
                                                     mirror, opt);
            r.c_top = c_top;
            return r;
        } catch (const NoConvergence& second) {
            throw NoConvergence(std::min(first.best_residual, second.best_residual),
                                first.iterations + second.iterations);
        }
    }
}

// ---------------------------------------------------------------------------
// General linear m = m_1 mu + m_0 (m_1 > 0), reduced to CH by gauge + scaling
// ---------------------------------------------------------------------------

struct GeneralLinearMatch {
    MatchResult result;        // initial data in the original w-frame (doubles)
    MatchResult ch_result;     // the underlying CH solve (v-frame)
    GaugeNormalization gauge;
    Rational lambda_root;      // root of m
    StackelSystem original;    // system with base c = (mu - root)^{2N+1} + c_top
    ReductionMap reduction;

    GeneralLinearMatch(MatchResult r, MatchResult chr, GaugeNormalization g, Rational root,
                       StackelSystem sys, ReductionMap red)
        : result(std::move(r)), ch_result(std::move(chr)), gauge(g), lambda_root(std::move(root)),
          original(std::move(sys)), reduction(std::move(red)) {}
};

inline GeneralLinearMatch match_general_linear_m(const Rational& m1, const Rational& m0,
                                                 const std::vector<double>& target_u_derivs,
                                                 const NewtonOptions& opt = {},
                                                 int N_override = 0) {
    if (m1 <= 0)
        throw UnsupportedType("match_general_linear_m: constructive path requires m_1 > 0");
    GaugeNormalization g = gauge_normalize(m1, m0);
    Rational lroot = -g.lambda0;
    double sq = std::sqrt(to_double(m1));  // = 1/a

    // transport the target: u ~ (y) = u(y/a... ) - lambda0; derivative j picks (1/a)^j
    std::vector<double> ch_target = target_u_derivs;
    ch_target[0] -= to_double(g.lambda0);
    if (ch_target[0] == 0.0)
        throw ZeroInitialValue("match_general_linear_m: gauge-shifted u(0) vanishes");
    double f = 1.0;
    for (size_t j = 1; j < ch_target.size(); ++j) {
        f *= sq;
        ch_target[j] *= f;
    }

    MatchResult ch = match_ch_newton(ch_target, opt, N_override);
    int N = ch.N;

    // original system: c = (mu - lroot)^{2N+1} + m d(mu) + c_top
    BKMData data = BKMData::linear_m(m1, m0);
    CPolyForm cf = CPolyForm::symbolic_d(N);
    {
        SpectralPoly shift(std::vector<RationalExpr>{RationalExpr(-lroot), RationalExpr(1)});
        SpectralPoly base(RationalExpr(1));
        for (int k = 0; k < 2 * N + 1; ++k) base *= shift;
        cf.base = base + SpectralPoly(RationalExpr(ch.c_top));
    }
    StackelSystem sys(data, cf);
    ReductionMap R = ReductionMap::build(sys);

    // map the CH initial data back: positions via the affine v->w change at
    // lambda = lroot, momenta via the transpose inverse and the 1/a speed scale
    VCoordinates vc{N, RationalExpr(lroot)};
    std::vector<RationalExpr> vvals, pvals;
    for (double x : ch.w0d) vvals.push_back(RationalExpr(Rational(x)));
    for (double x : ch.p0d) pvals.push_back(RationalExpr(Rational(x * g.a)));
    auto wvals = vc.w_from_v(vvals);
    auto pw = vc.p_w_from_p_v(pvals);

    MatchResult out;
    out.N = N;
    out.c_top = ch.c_top;
    out.lambda0 = g.lambda0;
    out.scale_a = g.a;
    out.iterations = ch.iterations;
    out.converged = ch.converged;
    out.v0d = ch.w0d;
    for (const auto& e : wvals) out.w0d.push_back(to_double(e.constant_value()));
    for (const auto& e : pw) out.p0d.push_back(to_double(e.constant_value()));
    // zero-level placement on the original system
    {
        auto slots = state_slots(N);
        std::vector<double> state;
        state.insert(state.end(), out.w0d.begin(), out.w0d.end());
        state.insert(state.end(), out.p0d.begin(), out.p0d.end());
        std::map<VarId, Rational> cc;
        for (int i = 1; i <= N; ++i) cc[dvar(i)] = Rational(0);
        for (int i = 1; i <= N; ++i) {
            Tape h(sys.hamiltonian(i), slots, cc);
            out.dd.push_back(-h.eval(state.data()));
        }
    }
    // achieved residual against the original target
    {
        std::map<VarId, double> consts;
        for (int i = 1; i <= N; ++i) consts[dvar(i)] = out.dd[size_t(i) - 1];
        auto rep = verify_match_numeric(sys, R, out.w0d, out.p0d, {target_u_derivs}, consts);
        out.residual = rep.max_deviation;
    }
    return GeneralLinearMatch(std::move(out), std::move(ch), g, lroot, std::move(sys),
                              std::move(R));
}

} // namespace stackeljet
