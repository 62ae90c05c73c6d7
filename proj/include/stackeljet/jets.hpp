#pragma once

#include <mutex>
#include <unordered_map>

#include "stackel.hpp"

namespace stackeljet {

// Prolongation of the H_1 flow: derivatives (w_i)_{jx}, (p_i)_{jx} as exact
// expressions in the phase-space variables, with a shared memo table.
class JetTable {
public:
    explicit JetTable(const StackelSystem& sys) : sys_(&sys) {}

    const StackelSystem& system() const { return *sys_; }

    // Total derivative along the Hamiltonian field of H_1.
    RationalExpr total_derivative(const RationalExpr& e) const {
        RationalExpr out;
        for (int i = 1; i <= sys_->N(); ++i) {
            RationalExpr ew = e.derivative(wvar(i));
            if (!ew.is_zero()) out += ew * sys_->wx(i);
            RationalExpr ep = e.derivative(pvar(i));
            if (!ep.is_zero()) out += ep * sys_->px(i);
        }
        return out;
    }

    // k-fold total derivative of an arbitrary expression.
    RationalExpr prolong(const RationalExpr& e, int k) const {
        RationalExpr out = e;
        for (int j = 0; j < k; ++j) out = total_derivative(out);
        return out;
    }

    // Memoized (var)_{jx}.
    RationalExpr entry(VarId v, int j) const {
        if (j == 0) return RationalExpr(MultiPoly::variable(v));
        {
            std::lock_guard lk(mu_);
            auto it = memo_.find(key(v, j));
            if (it != memo_.end()) return it->second;
        }
        RationalExpr prev = entry(v, j - 1);
        RationalExpr cur = total_derivative(prev);
        std::lock_guard lk(mu_);
        return memo_.try_emplace(key(v, j), std::move(cur)).first->second;
    }

    // Taylor coefficients of a component along the flow: coefficient j is
    // (component)_{jx}/j!.
    std::vector<RationalExpr> taylor_coeffs(VarId component, int order) const {
        std::vector<RationalExpr> out;
        Rational fact(1);
        for (int j = 0; j <= order; ++j) {
            if (j > 0) fact *= j;
            out.push_back(entry(component, j) * RationalExpr(Rational(1) / fact));
        }
        return out;
    }

    // --- the all-0 specialization (w_1 = ... = w_{N-1} = p_1 = ... = p_N = 0) ---

    std::set<VarId> small_vars() const {
        std::set<VarId> s;
        for (int i = 1; i < sys_->N(); ++i) s.insert(wvar(i));
        for (int i = 1; i <= sys_->N(); ++i) s.insert(pvar(i));
        return s;
    }

    RationalExpr eval_all0(const RationalExpr& e) const {
        std::map<VarId, Rational> zeros;
        for (VarId v : small_vars()) zeros[v] = Rational(0);
        return e.substitute_values(zeros);
    }

    // Truncated derivative chain: result[j] agrees with (start)_{jx} on every
    // term having at most final_keep + (maxorder - j) factors from `smalls`.
    // One application of the total derivative lowers the factor count of a
    // term by at most one, so the budget shrinks by one per order and the
    // final entries are exact through factor count final_keep.
    std::vector<RationalExpr> truncated_chain(VarId start, int maxorder, long final_keep,
                                              const std::set<VarId>& smalls) const {
        std::vector<RationalExpr> out;
        out.reserve(size_t(maxorder) + 1);
        out.push_back(RationalExpr(MultiPoly::variable(start)));
        RationalExpr cur = out.back();
        for (int j = 1; j <= maxorder; ++j) {
            cur = total_derivative(cur);
            long keep = final_keep + (maxorder - j);
            cur = RationalExpr(cur.num().truncate_by_factor_count(keep + 1, smalls), cur.den());
            out.push_back(cur);
        }
        return out;
    }

    // Jacobian J[i][j] = d (w_N)_{ix} / d v_j |_{all 0}, i,j = 1..2N-2, with
    // v_j = w_{(j+1)/2} for odd j and p_{N-j/2} for even j.
    std::vector<std::vector<RationalExpr>> jacobian_all0() const {
        int N = sys_->N();
        int dim = 2 * N - 2;
        std::vector<VarId> v = newton_vars();
        auto chain = truncated_chain(wvar(N), dim, 1, small_vars());
        std::vector<std::vector<RationalExpr>> J(
            static_cast<size_t>(dim), std::vector<RationalExpr>(static_cast<size_t>(dim)));
        for (int i = 1; i <= dim; ++i)
            for (int j = 1; j <= dim; ++j)
                J[size_t(i) - 1][size_t(j) - 1] =
                    eval_all0(chain[size_t(i)].derivative(v[size_t(j) - 1]));
        return J;
    }

    // Variable ordering of the Newton unknowns (by increasing degree).
    std::vector<VarId> newton_vars() const {
        int N = sys_->N();
        std::vector<VarId> v;
        for (int j = 1; j <= 2 * N - 2; ++j)
            v.push_back(j % 2 ? wvar((j + 1) / 2) : pvar(N - j / 2));
        return v;
    }

private:
    static std::uint64_t key(VarId v, int j) {
        return (std::uint64_t(v) << 20) | std::uint64_t(j);
    }

    const StackelSystem* sys_;
    mutable std::mutex mu_;
    mutable std::unordered_map<std::uint64_t, RationalExpr> memo_;
};

// A k-jet of an R^s-valued curve at one basepoint: values[c][j] is the j-th
// derivative of component c.
struct JetPoint {
    Rational basepoint;
    std::vector<std::vector<Rational>> values;

    int order() const { return values.empty() ? -1 : static_cast<int>(values[0].size()) - 1; }
    int components() const { return static_cast<int>(values.size()); }
};

} // namespace stackeljet
