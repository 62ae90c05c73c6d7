#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>

#include "reduction.hpp"

namespace stackeljet {

struct SingularStart : std::domain_error {
    using std::domain_error::domain_error;
};
struct GridTooCoarse : std::domain_error {
    using std::domain_error::domain_error;
};

// Flat evaluation tape for one RationalExpr over a fixed state layout;
// constants are folded at compile time.
class Tape {
public:
    Tape() = default;
    Tape(const RationalExpr& e, const std::map<VarId, int>& slot,
         const std::map<VarId, Rational>& consts) {
        RationalExpr f = consts.empty() ? e : e.substitute_values(consts);
        compile(f.num(), num_, slot);
        compile(f.den(), den_, slot);
        if (den_.empty()) throw std::domain_error("Tape: zero denominator");
    }

    double eval(const double* state) const {
        double n = eval_terms(num_, state);
        if (den_is_one_) return n;
        double d = eval_terms(den_, state);
        return n / d;
    }

    bool finite_at(const double* state) const {
        if (den_is_one_) return true;
        return std::abs(eval_terms(den_, state)) > 0;
    }

private:
    struct Factor {
        int slot;
        int exp;
    };
    struct Term {
        double coeff;
        boost::container::small_vector<Factor, 4> factors;
    };

    void compile(const MultiPoly& p, std::vector<Term>& out, const std::map<VarId, int>& slot) {
        for (const auto& t : p.terms()) {
            Term term;
            term.coeff = to_double(t.coeff);
            for (const auto& f : t.mono.factors()) {
                auto it = slot.find(f.var);
                if (it == slot.end())
                    throw std::domain_error("Tape: unbound variable " + var_name(f.var));
                term.factors.push_back({it->second, f.exp});
            }
            out.push_back(std::move(term));
        }
        if (&out == &den_)
            den_is_one_ = den_.size() == 1 && den_[0].factors.empty() && den_[0].coeff == 1.0;
    }

    static double eval_terms(const std::vector<Term>& terms, const double* state) {
        double acc = 0.0;
        for (const auto& t : terms) {
            double v = t.coeff;
            for (const auto& f : t.factors) {
                double x = state[f.slot];
                int e = f.exp;
                double px = 1.0;
                while (e) {
                    if (e & 1) px *= x;
                    x *= x;
                    e >>= 1;
                }
                v *= px;
            }
            acc += v;
        }
        return acc;
    }

    std::vector<Term> num_, den_;
    bool den_is_one_ = true;
};

// State layout: w_1..w_N at slots 0..N-1, p_1..p_N at slots N..2N-1.
inline std::map<VarId, int> state_slots(int N) {
    std::map<VarId, int> m;
    for (int i = 1; i <= N; ++i) {
        m[wvar(i)] = i - 1;
        m[pvar(i)] = N + i - 1;
    }
    return m;
}

struct OdeOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double state_bound = 1e8;
    double max_step = 0.0;  // 0 = unlimited
    int samples = 201;
};

struct Trajectory {
    std::vector<double> x;                      // sample grid
    std::vector<std::vector<double>> state;     // per sample (dense output)
    std::vector<std::vector<double>> H;         // per sample: H_1..H_N
    bool escaped = false;
    double last_valid_x = 0.0;
    // conserved-quantity drift measured at the accepted integration nodes
    // (the samples above are interpolated and carry dense-output error)
    double node_energy_drift = 0.0;

    double max_energy_drift() const { return node_energy_drift; }
};

namespace detail {

// One Dormand-Prince 5(4) step attempt; returns the embedded error estimate.
struct Dopri5 {
    static constexpr int S = 7;
    std::function<void(const double*, double*)> f;
    int dim;

    void stages(const std::vector<double>& y, double h, std::array<std::vector<double>, S>& k,
                std::vector<double>& y5, std::vector<double>& y4) const {
        static const double A[7][6] = {
            {},
            {1.0 / 5},
            {3.0 / 40, 9.0 / 40},
            {44.0 / 45, -56.0 / 15, 32.0 / 9},
            {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
            {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
            {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
        static const double B4[7] = {5179.0 / 57600, 0.0,          7571.0 / 16695, 393.0 / 640,
                                     -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};
        std::vector<double> tmp(static_cast<size_t>(dim));
        for (int s = 0; s < S; ++s) {
            if (s == 0) {
                if (k[0].empty()) {
                    k[0].resize(size_t(dim));
                    f(y.data(), k[0].data());
                }
                continue;
            }
            for (int i = 0; i < dim; ++i) {
                double acc = 0.0;
                for (int j = 0; j < s; ++j) acc += A[s][j] * k[size_t(j)][size_t(i)];
                tmp[size_t(i)] = y[size_t(i)] + h * acc;
            }
            k[size_t(s)].resize(size_t(dim));
            f(tmp.data(), k[size_t(s)].data());
        }
        y5.resize(size_t(dim));
        y4.resize(size_t(dim));
        for (int i = 0; i < dim; ++i) {
            double acc5 = 0.0, acc4 = 0.0;
            for (int s = 0; s < S; ++s) {
                double ks = k[size_t(s)][size_t(i)];
                acc5 += (s < 6 ? A[6][s] : 0.0) * ks;  // 5th-order weights = last A row + k7*0
                acc4 += B4[s] * ks;
            }
            y5[size_t(i)] = y[size_t(i)] + h * acc5;
            y4[size_t(i)] = y[size_t(i)] + h * acc4;
        }
    }
};

struct StepRecord {
    double x;
    std::vector<double> y;
    std::vector<double> dy;
};

} // namespace detail

// Adaptive Dormand-Prince 5(4) with mixed error control and cubic-Hermite
// dense output. Integrates from x0 to x1 (either direction); on blow-up or
// step underflow it stops and flags the escape.
class Integrator {
public:
    Integrator(std::function<void(const double*, double*)> rhs, int dim)
        : rhs_(std::move(rhs)), dim_(dim) {}

    // Returns the accepted step chain; records.front() is the initial point.
    std::vector<detail::StepRecord> run(const std::vector<double>& y0, double x0, double x1,
                                        const OdeOptions& opt, bool& escaped,
                                        double& last_x) const {
        std::vector<detail::StepRecord> rec;
        escaped = false;
        std::vector<double> y = y0, dy(static_cast<size_t>(dim_));
        rhs_(y.data(), dy.data());
        if (!all_finite(dy)) throw SingularStart("integrate: right-hand side singular at start");
        rec.push_back({x0, y, dy});
        if (x0 == x1) {
            last_x = x0;
            return rec;
        }
        double dir = x1 > x0 ? 1.0 : -1.0;
        double h = dir * std::min(1e-2, std::abs(x1 - x0) / 10);
        if (opt.max_step > 0) h = dir * std::min(std::abs(h), opt.max_step);
        double x = x0;
        detail::Dopri5 stepper{rhs_, dim_};
        std::array<std::vector<double>, detail::Dopri5::S> k;
        int rejects_in_row = 0;
        while (dir * (x1 - x) > 0) {
            if (dir * (x + h - x1) > 0) h = x1 - x;
            std::vector<double> y5, y4;
            stepper.stages(y, h, k, y5, y4);
            double err = 0.0;
            bool finite = all_finite(y5);
            if (finite) {
                for (int i = 0; i < dim_; ++i) {
                    double sc = opt.abs_tol +
                                opt.rel_tol * std::max(std::abs(y[size_t(i)]), std::abs(y5[size_t(i)]));
                    double e = (y5[size_t(i)] - y4[size_t(i)]) / sc;
                    err += e * e;
                }
                err = std::sqrt(err / dim_);
            }
            if (finite && err <= 1.0 && all_finite(k[6])) {
                x += h;
                y = std::move(y5);
                k[0] = k[6];  // FSAL: k7 is f at the accepted point
                rec.push_back({x, y, k[0]});
                rejects_in_row = 0;
                if (max_abs(y) > opt.state_bound) {
                    escaped = true;
                    break;
                }
                double grow = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
                h *= std::clamp(grow, 0.2, 5.0);
                if (opt.max_step > 0 && std::abs(h) > opt.max_step) h = dir * opt.max_step;
            } else {
                double shrink = finite ? std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9) : 0.1;
                h *= shrink;
                if (++rejects_in_row > 60 || std::abs(h) < 1e-14 * std::max(1.0, std::abs(x))) {
                    escaped = true;
                    break;
                }
            }
        }
        last_x = x;
        return rec;
    }

    // Cubic Hermite evaluation on the accepted chain.
    static std::vector<double> sample(const std::vector<detail::StepRecord>& rec, double x) {
        if (rec.empty()) throw std::domain_error("sample: empty record");
        if (rec.size() == 1) return rec[0].y;
        bool fwd = rec.back().x >= rec.front().x;
        size_t hi = 1;
        while (hi + 1 < rec.size() && (fwd ? rec[hi].x < x : rec[hi].x > x)) ++hi;
        const auto& a = rec[hi - 1];
        const auto& b = rec[hi];
        double hx = b.x - a.x;
        if (hx == 0.0) return a.y;
        double t = (x - a.x) / hx;
        double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
        double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
        std::vector<double> out(a.y.size());
        for (size_t i = 0; i < out.size(); ++i)
            out[i] = h00 * a.y[i] + hx * h10 * a.dy[i] + h01 * b.y[i] + hx * h11 * b.dy[i];
        return out;
    }

private:
    static bool all_finite(const std::vector<double>& v) {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    }
    static double max_abs(const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }

    std::function<void(const double*, double*)> rhs_;
    int dim_;
};

// Compiled Hamiltonian field evaluator for a system (H_1 flow by default).
class CompiledFlow {
public:
    CompiledFlow(const StackelSystem& sys, const std::map<VarId, Rational>& consts,
                 const RationalExpr* generator = nullptr)
        : N_(sys.N()) {
        auto slots = state_slots(N_);
        if (generator) {
            auto [dw, dp] = sys.field_of(*generator);
            for (int i = 1; i <= N_; ++i) {
                fw_.emplace_back(dw[size_t(i)], slots, consts);
                fp_.emplace_back(dp[size_t(i)], slots, consts);
            }
        } else {
            for (int i = 1; i <= N_; ++i) {
                fw_.emplace_back(sys.wx(i), slots, consts);
                fp_.emplace_back(sys.px(i), slots, consts);
            }
        }
        for (int i = 1; i <= N_; ++i) h_.emplace_back(sys.hamiltonian(i), slots, consts);
    }

    int dim() const { return 2 * N_; }

    std::function<void(const double*, double*)> rhs() const {
        return [this](const double* y, double* dy) {
            for (int i = 0; i < N_; ++i) {
                dy[i] = fw_[size_t(i)].eval(y);
                dy[N_ + i] = fp_[size_t(i)].eval(y);
            }
        };
    }

    std::vector<double> energies(const double* y) const {
        std::vector<double> out;
        for (const auto& t : h_) out.push_back(t.eval(y));
        return out;
    }

private:
    int N_;
    std::vector<Tape> fw_, fp_, h_;
};

inline Trajectory integrate_x(const StackelSystem& sys, const std::map<VarId, Rational>& consts,
                              const std::vector<double>& w0, const std::vector<double>& p0,
                              double x_from, double x_to, const OdeOptions& opt = {}) {
    CompiledFlow flow(sys, consts);
    std::vector<double> y0;
    y0.insert(y0.end(), w0.begin(), w0.end());
    y0.insert(y0.end(), p0.begin(), p0.end());
    Integrator integ(flow.rhs(), flow.dim());
    Trajectory out;
    auto rec = integ.run(y0, x_from, x_to, opt, out.escaped, out.last_valid_x);
    {
        std::vector<double> H0 = flow.energies(rec.front().y.data());
        for (const auto& node : rec) {
            auto Hn = flow.energies(node.y.data());
            for (size_t i = 0; i < Hn.size(); ++i)
                out.node_energy_drift = std::max(out.node_energy_drift, std::abs(Hn[i] - H0[i]));
        }
    }
    double lo = x_from, hi = out.escaped ? out.last_valid_x : x_to;
    int n = std::max(2, opt.samples);
    for (int i = 0; i < n; ++i) {
        double x = lo + (hi - lo) * i / (n - 1);
        out.x.push_back(x);
        auto y = Integrator::sample(rec, x);
        out.H.push_back(flow.energies(y.data()));
        out.state.push_back(std::move(y));
    }
    return out;
}

struct FieldSample {
    std::vector<double> x, t;
    // u[c][it][ix], q[it][ix]
    std::vector<std::vector<std::vector<double>>> u;
    std::vector<std::vector<double>> q;
    std::vector<std::vector<std::vector<double>>> state;  // [it][ix][0..2N-1]
};

namespace detail {

// Exact node states along one flow: integrates from 0 through the sorted
// signed grid values, restarting at every node (no dense-output error at
// the nodes themselves).
inline std::map<double, std::vector<double>> states_at(const Integrator& integ,
                                                       const std::vector<double>& y0,
                                                       const std::vector<double>& grid,
                                                       const OdeOptions& opt,
                                                       const char* what) {
    std::map<double, std::vector<double>> out;
    std::vector<double> fwd, bwd;
    for (double g : grid) (g >= 0 ? fwd : bwd).push_back(g);
    std::sort(fwd.begin(), fwd.end());
    std::sort(bwd.begin(), bwd.end(), std::greater<>());
    for (auto* side : {&fwd, &bwd}) {
        std::vector<double> y = y0;
        double at = 0.0;
        for (double g : *side) {
            if (g != at) {
                bool esc;
                double last;
                auto rec = integ.run(y, at, g, opt, esc, last);
                if (esc)
                    throw SingularStart(std::string("joint_flow: ") + what +
                                        "-flow escaped inside the grid");
                y = rec.back().y;
                at = g;
            }
            out.emplace(g, y);
        }
    }
    return out;
}

} // namespace detail

// Joint flow of H_1 (parameter x) and H_2 (parameter t) from one initial
// condition, evaluated through the reduction map on a rectangular grid.
// Grids must contain 0 in their closed hull; the flow starts at (0, 0).
inline FieldSample joint_flow(const StackelSystem& sys, const ReductionMap& R,
                              const std::map<VarId, Rational>& consts,
                              const std::vector<double>& w0, const std::vector<double>& p0,
                              const std::vector<double>& x_grid, const std::vector<double>& t_grid,
                              const OdeOptions& opt = {}) {
    if (sys.data().type() != BkmType::III && sys.data().type() != BkmType::IV)
        throw UnsupportedType("joint_flow: time flow implemented for BKM types III/IV only");
    int N = sys.N();
    CompiledFlow xflow(sys, consts);
    RationalExpr H2 = sys.hamiltonian(2 > N ? N : 2);
    CompiledFlow tflow(sys, consts, &H2);

    std::vector<double> y0;
    y0.insert(y0.end(), w0.begin(), w0.end());
    y0.insert(y0.end(), p0.begin(), p0.end());

    auto slots = state_slots(N);
    std::vector<Tape> utapes;
    for (const auto& ui : R.u) utapes.emplace_back(ui, slots, consts);

    const OdeOptions& opt2 = opt;

    FieldSample out;
    out.x = x_grid;
    out.t = t_grid;
    out.u.assign(size_t(sys.n()),
                 std::vector<std::vector<double>>(t_grid.size(), std::vector<double>(x_grid.size())));
    out.q.assign(t_grid.size(), std::vector<double>(x_grid.size()));
    out.state.assign(t_grid.size(), {});

    // exact states at every t node, then exact states at every x node
    Integrator tint(tflow.rhs(), tflow.dim());
    auto slice_starts = detail::states_at(tint, y0, t_grid, opt2, "t");

    Integrator xint(xflow.rhs(), xflow.dim());
    for (size_t it = 0; it < t_grid.size(); ++it) {
        auto row = detail::states_at(xint, slice_starts.at(t_grid[it]), x_grid, opt2, "x");
        out.state[it].resize(x_grid.size());
        for (size_t ix = 0; ix < x_grid.size(); ++ix) {
            auto y = row.at(x_grid[ix]);
            for (size_t c = 0; c < utapes.size(); ++c) out.u[c][it][ix] = utapes[c].eval(y.data());
            std::vector<double> wslice(y.begin(), y.begin() + N);
            std::map<VarId, double> cmap;
            for (const auto& [v, r] : consts) cmap[v] = to_double(r);
            out.q[it][ix] = constraint_q_value(sys.data(), R, wslice, cmap);
            out.state[it][ix] = std::move(y);
        }
    }
    return out;
}

struct ResidualReport {
    std::vector<double> evolution_max, evolution_l2;  // per component
    double constraint_max = 0.0, constraint_l2 = 0.0;
    bool has_constraint = false;
};

// Central-difference residuals of the BKM system on the sampled field.
// Evolution (types III/IV, with zeta = -m(L) e_n in companion coordinates):
//   III: u_t = q_xxx zeta + (L + q Id) u_x
//   IV:  u_t = 1/2 (tr L)_xxx zeta + (L + 1/2 tr L Id) u_x
// Constraint (type III): 0 = 2q - m_n q_xx - tr L.
inline ResidualReport pde_residual(const FieldSample& f, const BKMData& data) {
    size_t NX = f.x.size(), NT = f.t.size();
    if (NX < 5 || NT < 5) throw GridTooCoarse("pde_residual: need at least 5 nodes per axis");
    double hx = f.x[1] - f.x[0];
    double ht = f.t[1] - f.t[0];
    int n = data.n;
    BkmType type = data.type();
    ResidualReport rep;
    rep.evolution_max.assign(size_t(n), 0.0);
    rep.evolution_l2.assign(size_t(n), 0.0);
    rep.has_constraint = type == BkmType::III;
    size_t count = 0, ccount = 0;

    auto dx = [&](const std::vector<std::vector<double>>& g, size_t it, size_t ix) {
        return (g[it][ix + 1] - g[it][ix - 1]) / (2 * hx);
    };
    auto dxx = [&](const std::vector<std::vector<double>>& g, size_t it, size_t ix) {
        return (g[it][ix + 1] - 2 * g[it][ix] + g[it][ix - 1]) / (hx * hx);
    };
    auto dxxx = [&](const std::vector<std::vector<double>>& g, size_t it, size_t ix) {
        return (g[it][ix + 2] - 2 * g[it][ix + 1] + 2 * g[it][ix - 1] - g[it][ix - 2]) /
               (2 * hx * hx * hx);
    };
    auto dt = [&](const std::vector<std::vector<double>>& g, size_t it, size_t ix) {
        return (g[it + 1][ix] - g[it - 1][ix]) / (2 * ht);
    };

    std::vector<double> mc(size_t(n) + 1, 0.0);
    for (int k = 0; k <= data.m.degree(); ++k) mc[size_t(k)] = to_double(data.m.coeff(k).constant_value());

    for (size_t it = 1; it + 1 < NT; ++it) {
        for (size_t ix = 2; ix + 2 < NX; ++ix) {
            std::vector<double> uval(static_cast<size_t>(n)), ux(static_cast<size_t>(n)), ut(static_cast<size_t>(n));
            for (int c = 0; c < n; ++c) {
                uval[size_t(c)] = f.u[size_t(c)][it][ix];
                ux[size_t(c)] = dx(f.u[size_t(c)], it, ix);
                ut[size_t(c)] = dt(f.u[size_t(c)], it, ix);
            }
            // companion L: (L v)_i = -u_i v_1 + v_{i+1}
            auto Lmat = [&](const std::vector<double>& v) {
                std::vector<double> out(static_cast<size_t>(n));
                for (int i = 0; i < n; ++i)
                    out[size_t(i)] = -uval[size_t(i)] * v[0] + (i + 1 < n ? v[size_t(i) + 1] : 0.0);
                return out;
            };
            // zeta = -m(L) e_n
            std::vector<double> en(size_t(n), 0.0);
            en[size_t(n) - 1] = 1.0;
            std::vector<double> zeta(size_t(n), 0.0), Lk = en;
            for (int k = 0;; ++k) {
                for (int i = 0; i < n; ++i) zeta[size_t(i)] -= mc[size_t(k)] * Lk[size_t(i)];
                if (k == data.m.degree()) break;
                Lk = Lmat(Lk);
            }
            double trL = -uval[0];
            std::vector<double> Lux = Lmat(ux);
            double third;
            double mult;
            if (type == BkmType::III) {
                third = dxxx(f.q, it, ix);
                mult = f.q[it][ix];
            } else {
                third = -0.5 * dxxx(f.u[0], it, ix);  // 1/2 (tr L)_xxx
                mult = 0.5 * trL;
            }
            for (int c = 0; c < n; ++c) {
                double rhs = third * zeta[size_t(c)] + Lux[size_t(c)] + mult * ux[size_t(c)];
                double r = std::abs(ut[size_t(c)] - rhs);
                rep.evolution_max[size_t(c)] = std::max(rep.evolution_max[size_t(c)], r);
                rep.evolution_l2[size_t(c)] += r * r;
            }
            ++count;
            if (rep.has_constraint) {
                double r = std::abs(2 * f.q[it][ix] - mc[size_t(n)] * dxx(f.q, it, ix) - trL);
                rep.constraint_max = std::max(rep.constraint_max, r);
                rep.constraint_l2 += r * r;
                ++ccount;
            }
        }
    }
    for (auto& v : rep.evolution_l2) v = std::sqrt(v / std::max<size_t>(count, 1));
    rep.constraint_l2 = std::sqrt(rep.constraint_l2 / std::max<size_t>(ccount, 1));
    return rep;
}

// Richardson-extrapolated numeric derivatives of a sampled scalar curve at 0.
inline std::vector<double> numeric_jet(const std::function<double(double)>& g, int order,
                                       double h0 = 1e-2) {
    std::vector<double> out;
    for (int k = 0; k <= order; ++k) {
        auto diff_k = [&](double h) {
            // central difference of order k with 2nd-order accuracy
            switch (k) {
                case 0: return g(0.0);
                case 1: return (g(h) - g(-h)) / (2 * h);
                case 2: return (g(h) - 2 * g(0.0) + g(-h)) / (h * h);
                case 3: return (g(2 * h) - 2 * g(h) + 2 * g(-h) - g(-2 * h)) / (2 * h * h * h);
                case 4:
                    return (g(2 * h) - 4 * g(h) + 6 * g(0.0) - 4 * g(-h) + g(-2 * h)) /
                           (h * h * h * h);
                default: throw std::domain_error("numeric_jet: order too large");
            }
        };
        // one Richardson step on the h^2 error term
        double d1 = diff_k(h0), d2 = diff_k(h0 / 2);
        out.push_back((4 * d2 - d1) / 3);
    }
    return out;
}

} // namespace stackeljet
