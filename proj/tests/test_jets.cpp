#include <catch2/catch_amalgamated.hpp>

#include <thread>

#include "helpers.hpp"

using namespace sjt;

namespace {
RationalExpr chfrac(int N, int power) {
    // (c_{2N+1}/w_N^2)^power
    return (C(2 * N + 1) / (W(N) * W(N))).pow(power);
}
}  // namespace

TEST_CASE("basic prolongation identities") {
    SECTION("CH: (w_1)_x = -p_N exactly") {
        for (int N : {2, 3, 4}) {
            StackelSystem sys(BKMData::ch_class(), CPolyForm::ch(N));
            JetTable jt(sys);
            CHECK(jt.entry(wvar(1), 1) == -P(N));
        }
    }
    SECTION("deg m = 0: (w_1)_x = -p_N as well") {
        StackelSystem sys(BKMData::kdv_class(1, Rational(1)), CPolyForm::symbolic_d(4));
        JetTable jt(sys);
        CHECK(jt.entry(wvar(1), 1) == -P(4));
    }
    SECTION("CH eom: (w_i)_x = -sum_{j<i} w_j p_{N+1-i+j}") {
        int N = 4;
        StackelSystem sys(BKMData::ch_class(), CPolyForm::ch(N));
        for (int i = 1; i <= N; ++i) {
            RationalExpr expect;
            for (int j = 0; j <= i - 1; ++j) {
                RationalExpr wj = j == 0 ? Q(1) : W(j);
                expect -= wj * P(N + 1 - i + j);
            }
            CHECK(sys.wx(i) == expect);
        }
    }
    SECTION("H_1 is conserved along its own flow") {
        StackelSystem sys(BKMData::ch_class(), CPolyForm::ch(3));
        JetTable jt(sys);
        CHECK(jt.prolong(sys.H1(), 1).is_zero());
    }
    SECTION("KdV N=4: (w_1)_{2x} = -3 w_1^2 + 2 w_2") {
        StackelSystem sys(BKMData::kdv_class(1, Rational(1)), CPolyForm::symbolic_d(4));
        JetTable jt(sys);
        CHECK(jt.entry(wvar(1), 2) == Q(-3) * W(1) * W(1) + Q(2) * W(2));
    }
}

TEST_CASE("taylor tables reproduce the classical fixtures") {
    SECTION("KdV N=4 through x^3") {
        StackelSystem sys(BKMData::kdv_class(1, Rational(1)), CPolyForm::symbolic_d(4));
        JetTable jt(sys);
        auto c = jt.taylor_coeffs(wvar(1), 3);
        CHECK(c[0] == W(1));
        CHECK(c[1] == -P(4));
        CHECK(c[2] == Q(-3, 2) * W(1) * W(1) + W(2));
        CHECK(c[3] == Q(2, 3) * P(4) * W(1) - Q(1, 3) * P(3));
    }
    SECTION("KdV N=5 through x^4") {
        StackelSystem sys(BKMData::kdv_class(1, Rational(1)), CPolyForm::symbolic_d(5));
        JetTable jt(sys);
        auto c = jt.taylor_coeffs(wvar(1), 4);
        CHECK(c[1] == -P(5));
        CHECK(c[3] == Q(2, 3) * P(5) * W(1) - Q(1, 3) * P(4));
        CHECK(c[4] == Q(5, 6) * W(1) * W(1) * W(1) - Q(5, 24) * P(5) * P(5) -
                          Q(5, 6) * W(1) * W(2) + Q(1, 6) * W(3));
    }
    SECTION("KB N=6: first-order coefficients") {
        StackelSystem sys(BKMData::kdv_class(2, Rational(1)), CPolyForm::symbolic_d(6));
        JetTable jt(sys);
        auto c1 = jt.taylor_coeffs(wvar(1), 2);
        auto c2 = jt.taylor_coeffs(wvar(2), 2);
        CHECK(c1[0] == W(1));
        CHECK(c2[1] == -(P(6) * W(1)) - P(5));
        // x^2 rows end in +w_3 and +w_4 respectively
        CHECK(c1[2].as_polynomial().terms().back().mono == Monomial(wvar(3)));
        CHECK(c1[2].as_polynomial().terms().back().coeff == Rational(1));
        CHECK(c2[2].as_polynomial().depends_on(wvar(4)));
    }
    SECTION("order 0 is the component itself") {
        StackelSystem sys(BKMData::ch_class(), CPolyForm::ch(2));
        JetTable jt(sys);
        CHECK(jt.taylor_coeffs(wvar(2), 0)[0] == W(2));
    }
}

TEST_CASE("truncated chains agree with full prolongation") {
    StackelSystem sys(BKMData::ch_class(), CPolyForm::ch(3));
    JetTable jt(sys);
    auto smalls = jt.small_vars();
    for (VarId v : {wvar(1), wvar(3), pvar(2)}) {
        for (int maxorder : {2, 4}) {
            for (long keep : {1L, 2L}) {
                auto chain = jt.truncated_chain(v, maxorder, keep, smalls);
                for (int j = 0; j <= maxorder; ++j) {
                    RationalExpr full = jt.entry(v, j);
                    long budget = keep + (maxorder - j);
                    // both sides truncated at the final budget must agree
                    RationalExpr a(chain[size_t(j)].num().truncate_by_factor_count(budget + 1, smalls),
                                   chain[size_t(j)].den());
                    RationalExpr b(full.num().truncate_by_factor_count(budget + 1, smalls),
                                   full.den());
                    CHECK(a == b);
                }
            }
        }
    }
}

TEST_CASE("all-0 evaluation: lemma values at small N") {
    for (int N : {2, 3, 4}) {
        StackelSystem sys(BKMData::ch_class(), CPolyForm::ch(N));
        JetTable jt(sys);
        auto smalls = jt.small_vars();
        auto t = reduced_tangent(N);
        int maxorder = 2 * N - 2;

        SECTION("vanishing and closed forms, N = " + std::to_string(N)) {
            for (int i = 1; i <= N - 1; ++i) {
                auto chain_w = jt.truncated_chain(wvar(i), std::min(2 * i, maxorder + 2), 0, smalls);
                for (int k = 0; k < 2 * i && k < static_cast<int>(chain_w.size()); ++k)
                    CHECK(jt.eval_all0(chain_w[size_t(k)]).is_zero());
                if (2 * i < static_cast<int>(chain_w.size()))
                    CHECK(jt.eval_all0(chain_w[size_t(2 * i)]) ==
                          Q(1 << (i - 1)) * chfrac(N, i));
                auto chain_p = jt.truncated_chain(pvar(N + 1 - i), 2 * i - 1, 0, smalls);
                for (int k = 0; k < 2 * i - 1; ++k)
                    CHECK(jt.eval_all0(chain_p[size_t(k)]).is_zero());
                RationalExpr expect = Q(i % 2 ? -1 : 1) * RationalExpr(Rational(t[size_t(i)])) *
                                      chfrac(N, i);
                CHECK(jt.eval_all0(chain_p[size_t(2 * i - 1)]) == expect);
            }
        }
    }
}

TEST_CASE("(w_N)_{kx} at all-0: odd orders vanish, even orders do not") {
    for (int N : {2, 3, 4}) {
        StackelSystem sys(BKMData::ch_class(), CPolyForm::ch(N));
        JetTable jt(sys);
        auto chain = jt.truncated_chain(wvar(N), 2 * N - 2, 0, jt.small_vars());
        for (int k = 1; k <= 2 * N - 2; ++k) {
            RationalExpr v = jt.eval_all0(chain[size_t(k)]);
            if (k % 2) {
                CHECK(v.is_zero());
            } else {
                // computational outcome: 2^{k/2} w_N (not claimed in closed form elsewhere)
                CHECK(v == Q(1 << (k / 2)) * W(N));
            }
        }
    }
}

TEST_CASE("jacobian at the all-0 point") {
    SECTION("N = 2 closed form") {
        StackelSystem sys(BKMData::ch_class(), CPolyForm::ch(2));
        JetTable jt(sys);
        auto J = jt.jacobian_all0();
        REQUIRE(J.size() == 2);
        CHECK(J[0][0] == RationalExpr());
        CHECK(J[0][1] == Q(-1));
        CHECK(J[1][0] == chfrac(2, 1));
        CHECK(J[1][1] == RationalExpr());
    }
    SECTION("anti-diagonal law and zero block, N <= 4") {
        for (int N : {2, 3, 4}) {
            StackelSystem sys(BKMData::ch_class(), CPolyForm::ch(N));
            JetTable jt(sys);
            auto J = jt.jacobian_all0();
            int dim = 2 * N - 2;
            for (int i = 1; i <= dim; ++i) {
                for (int j = 1; j < 2 * N - 1 - i; ++j) CHECK(J[size_t(i) - 1][size_t(j) - 1].is_zero());
                RationalExpr expect = Q(i % 2 ? -1 : 1) * Q(1L << ((i - 1) / 2)) * chfrac(N, i / 2);
                CHECK(J[size_t(i) - 1][size_t(2 * N - 2 - i)] == expect);
            }
        }
    }
    SECTION("determinant is nonzero as an expression") {
        StackelSystem sys(BKMData::ch_class(), CPolyForm::ch(3));
        JetTable jt(sys);
        auto J = jt.jacobian_all0();
        int dim = 2 * 3 - 2;
        PolyMatrix M(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) M(i, j) = J[size_t(i)][size_t(j)];
        CHECK_FALSE(M.det().is_zero());
    }
}

TEST_CASE("boundary partial derivatives (lemma families), N = 3") {
    int N = 3;
    StackelSystem sys(BKMData::ch_class(), CPolyForm::ch(N));
    JetTable jt(sys);
    auto smalls = jt.small_vars();
    auto t = reduced_tangent(N + 1);
    auto s = s_sequence(N);
    int maxj = 2 * N - 2;

    auto d_all0 = [&](const std::vector<RationalExpr>& chain, int j, VarId v) {
        return jt.eval_all0(chain[size_t(j)].derivative(v));
    };

    for (int i = 1; i <= N; ++i) {
        auto chw = jt.truncated_chain(wvar(i), maxj, 1, smalls);
        auto chp = i >= 1 && N + 1 - i >= 1 ? jt.truncated_chain(pvar(N + 1 - i), maxj, 1, smalls)
                                            : std::vector<RationalExpr>{};
        for (int k = 1; k <= N; ++k) {
            for (int j = 0; j <= maxj; ++j) {
                bool above = 2 * i > 2 * k + j;  // i > k + j/2
                if (above) {
                    CHECK(d_all0(chw, j, wvar(k)).is_zero());
                    CHECK(d_all0(chw, j, pvar(N + 1 - k)).is_zero());
                    CHECK(d_all0(chp, j, wvar(k)).is_zero());
                    CHECK(d_all0(chp, j, pvar(N + 1 - k)).is_zero());
                } else if (2 * i == 2 * k + j) {
                    // boundary: j even
                    CHECK(d_all0(chw, j, wvar(k)) ==
                          RationalExpr(Rational(s[size_t(j / 2)])) * chfrac(N, j / 2));
                    CHECK(d_all0(chw, j, pvar(N + 1 - k)).is_zero());
                    CHECK(d_all0(chp, j, wvar(k)).is_zero());
                    RationalExpr expect = Q(j / 2 % 2 ? -1 : 1) *
                                          RationalExpr(Rational(t[size_t(j / 2) + 1])) *
                                          chfrac(N, j / 2);
                    CHECK(d_all0(chp, j, pvar(N + 1 - k)) == expect);
                } else if (2 * i == 2 * k + j - 1) {
                    // odd-j anti-diagonal: d(w_i)_{jx}/dp_{N+1-k} = -2^{i-k} (c/w^2)^{i-k}
                    RationalExpr expect = Q(-1) * Q(1L << (i - k)) * chfrac(N, i - k);
                    CHECK(d_all0(chw, j, pvar(N + 1 - k)) == expect);
                }
            }
        }
    }
}

TEST_CASE("linear terms of deg(m)=0 Taylor coefficients (triangular structure)") {
    for (int n : {1, 2}) {
        for (int N : {4, 5}) {
            StackelSystem sys(BKMData::kdv_class(n, Rational(1)), CPolyForm::symbolic_d(N));
            JetTable jt(sys);
            std::set<VarId> all;
            for (int i = 1; i <= N; ++i) {
                all.insert(wvar(i));
                all.insert(pvar(i));
            }
            int kmax = 2 * (N / n) - 1;
            for (int i = 1; i <= n; ++i) {
                auto chain = jt.truncated_chain(wvar(i), kmax, 1, all);
                for (int k = 0; k <= kmax; ++k) {
                    MultiPoly lin = chain[size_t(k)].as_polynomial().truncate_by_factor_count(2, all);
                    VarId expect = k % 2 == 0 ? wvar(n * (k / 2) + i)
                                              : pvar(N + 1 - (n * ((k - 1) / 2) + i));
                    REQUIRE(lin.term_count() == 1);
                    CHECK(lin.leading_monomial() == Monomial(expect));
                    CHECK(lin.leading_coeff() != 0);
                }
            }
        }
    }
}

TEST_CASE("memo table is shared and thread-safe") {
    StackelSystem sys(BKMData::ch_class(), CPolyForm::ch(3));
    JetTable jt(sys);
    std::vector<std::thread> pool;
    std::vector<RationalExpr> results(8);
    for (int t = 0; t < 8; ++t)
        pool.emplace_back([&, t] { results[size_t(t)] = jt.entry(wvar(3), 4); });
    for (auto& th : pool) th.join();
    for (int t = 1; t < 8; ++t) CHECK(results[size_t(t)] == results[0]);
    CHECK(results[0] == jt.entry(wvar(3), 4));
}
