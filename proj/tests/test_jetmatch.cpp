#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace sjt;

TEST_CASE("exact matcher: frozen KdV instance") {
    // target w_1 Taylor coefficients (1, 2, 3, 4)  <=>  u = -2 w_1 with
    // derivatives (-2, -4, -12, -48); solved by w_1(0)=1, p_4(0)=-2,
    // w_2(0)=9/2, p_3(0)=-16 at N = 4
    std::vector<std::vector<Rational>> target{
        {Rational(-2), Rational(-4), Rational(-12), Rational(-48)}};
    MatchResult r = match_deg_m0(1, Rational(1), target, 4);
    REQUIRE(r.exact);
    CHECK(r.N == 4);
    CHECK(r.w0[0] == Rational(1));
    CHECK(r.p0[3] == Rational(-2));
    CHECK(r.w0[1] == Rational(9, 2));
    CHECK(r.p0[2] == Rational(-16));
    CHECK(r.w0[2] == Rational(0));
    CHECK(r.p0[0] == Rational(0));

    StackelSystem sys(BKMData::kdv_class(1, Rational(1)), CPolyForm::symbolic_d(4));
    ReductionMap R = ReductionMap::build(sys);
    std::map<VarId, Rational> consts;
    for (int i = 1; i <= 4; ++i) consts[dvar(i)] = r.d[size_t(i) - 1];
    auto rep = verify_match(sys, R, r, target, consts);
    CHECK(rep.exact_zero);
}

TEST_CASE("exact matcher: constant target at order 0") {
    std::vector<std::vector<Rational>> target{{Rational(5)}};
    MatchResult r = match_deg_m0(1, Rational(1), target);
    CHECK(r.N == 1);
    CHECK(r.w0[0] == Rational(-5, 2));
    CHECK(r.p0[0] == Rational(0));
}

TEST_CASE("exact matcher: random targets across n and order") {
    std::mt19937 rng(20240801);
    for (int trial = 0; trial < 12; ++trial) {
        int n = 1 + int(rng() % 3u);
        int k = int(rng() % 6u);
        std::vector<std::vector<Rational>> target;
        for (int c = 0; c < n; ++c) {
            std::vector<Rational> derivs;
            for (int j = 0; j <= k; ++j) derivs.push_back(rand_rational(rng));
            target.push_back(std::move(derivs));
        }
        MatchResult r = match_deg_m0(n, Rational(1), target);
        CHECK(r.N == smallest_gap_number_deg0(n, k));
        StackelSystem sys(BKMData::kdv_class(n, Rational(1)), CPolyForm::symbolic_d(r.N));
        ReductionMap R = ReductionMap::build(sys);
        std::map<VarId, Rational> consts;
        for (int i = 1; i <= r.N; ++i) consts[dvar(i)] = r.d[size_t(i) - 1];
        auto rep = verify_match(sys, R, r, target, consts);
        CHECK(rep.exact_zero);
    }
}

TEST_CASE("exact matcher: nonunit m_0") {
    std::vector<std::vector<Rational>> target{
        {Rational(1), Rational(1, 2), Rational(-3), Rational(7, 3)}};
    MatchResult r = match_deg_m0(1, Rational(3), target);
    StackelSystem sys(BKMData::kdv_class(1, Rational(3)), CPolyForm::symbolic_d(r.N));
    ReductionMap R = ReductionMap::build(sys);
    std::map<VarId, Rational> consts;
    for (int i = 1; i <= r.N; ++i) consts[dvar(i)] = r.d[size_t(i) - 1];
    CHECK(verify_match(sys, R, r, target, consts).exact_zero);
}

TEST_CASE("triangularity witness by symbolic support inspection") {
    int n = 2, N = 4;
    StackelSystem sys(BKMData::kdv_class(n, Rational(1)), CPolyForm::symbolic_d(N));
    JetTable jt(sys);
    std::set<VarId> assigned;
    int kmax = max_order_deg0(n, N);
    for (int k = 0; k <= kmax; ++k) {
        for (int i = 1; i <= n; ++i) {
            VarId fresh = k % 2 == 0 ? wvar(n * (k / 2) + i) : pvar(N + 1 - (n * ((k - 1) / 2) + i));
            // the order-k entry may involve only already-assigned variables
            // plus the fresh one
            for (VarId v : jt.entry(wvar(i), k).support()) {
                bool ok = assigned.count(v) || v == fresh;
                CHECK(ok);
            }
            assigned.insert(fresh);
        }
    }
}

TEST_CASE("Newton matcher: constant targets") {
    for (double ubar : {1.0, -1.0, 10.0, -10.0}) {
        for (int N : {2, 3}) {
            std::vector<double> target(size_t(2 * N - 1), 0.0);
            target[0] = ubar;
            MatchResult r = match_ch_newton(target, {}, N);
            CHECK(r.converged);
            CHECK(r.residual <= 1e-9);
            CHECK(std::abs(r.w0d[size_t(N) - 1]) == Catch::Approx(std::sqrt(std::abs(1.0 / ubar))));
            // pushforward check
            StackelSystem sys(BKMData::ch_class(), CPolyForm::ch(N));
            ReductionMap R = ReductionMap::build(sys);
            std::map<VarId, double> consts{{cvar(2 * N + 1), to_double(r.c_top)}};
            auto rep = verify_match_numeric(sys, R, r.w0d, r.p0d, {target}, consts);
            CHECK(rep.max_deviation <= 1e-8 * std::abs(ubar));
        }
    }
}

TEST_CASE("Newton matcher: perturbed constant targets converge quadratically") {
    std::mt19937 rng(4242);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int N : {2, 3, 4}) {
        for (double u0 : {1.0, -10.0}) {
            std::vector<double> target(size_t(2 * N - 1), 0.0);
            target[0] = u0;
            for (size_t j = 1; j < target.size(); ++j) target[j] = 0.01 * std::abs(u0) * unif(rng);
            MatchResult r = match_ch_newton(target, {}, N);
            CHECK(r.converged);
            CHECK(r.iterations <= 12);
            CHECK(r.residual <= 1e-9);
            StackelSystem sys(BKMData::ch_class(), CPolyForm::ch(N));
            ReductionMap R = ReductionMap::build(sys);
            std::map<VarId, double> consts{{cvar(2 * N + 1), to_double(r.c_top)}};
            auto rep = verify_match_numeric(sys, R, r.w0d, r.p0d, {target}, consts);
            CHECK(rep.max_deviation <= 1e-8 * std::max(1.0, std::abs(u0)));
        }
    }
}

TEST_CASE("Newton matcher: contracts") {
    SECTION("max_iter = 0 reports the seed mismatch") {
        std::vector<double> target{1.0, 0.5, 0.0};
        NewtonOptions opt;
        opt.max_iter = 0;
        try {
            match_ch_newton(target, opt);
            FAIL("expected NoConvergence");
        } catch (const NoConvergence& e) {
            CHECK(e.best_residual > 0.0);
            CHECK(e.iterations == 0);
        }
    }
    SECTION("u(0) = 0 rejected") {
        CHECK_THROWS_AS(match_ch_newton({0.0, 1.0, 0.0}), ZeroInitialValue);
    }
    SECTION("c sign must match u(0)") {
        CHECK_THROWS_AS(match_ch_newton({1.0, 0.0, 0.0}, {}, 0, Rational(-1)),
                        std::domain_error);
    }
}

TEST_CASE("general linear m") {
    SECTION("m = mu reduces to the plain CH path") {
        std::vector<double> target{2.0, 0.01, -0.02};
        auto gm = match_general_linear_m(Rational(1), Rational(0), target);
        MatchResult ch = match_ch_newton(target, {}, gm.result.N);
        REQUIRE(gm.result.w0d.size() == ch.w0d.size());
        for (size_t i = 0; i < ch.w0d.size(); ++i) {
            CHECK(gm.result.w0d[i] == Catch::Approx(ch.w0d[i]).margin(1e-12));
            CHECK(gm.result.p0d[i] == Catch::Approx(ch.p0d[i]).margin(1e-12));
        }
        CHECK(gm.result.residual <= 1e-8);
    }
    SECTION("m = 2 mu + 3: matched solution satisfies the v-frame identity") {
        std::vector<double> target{2.5, 0.02, -0.01, 0.005};
        auto gm = match_general_linear_m(Rational(2), Rational(3), target);
        const MatchResult& r = gm.result;
        CHECK(r.converged);
        // u_1(0) = c_{2N+1}/v_N(0)^2 + lambda0 to 1e-10
        double vN = r.v0d[size_t(r.N) - 1];
        double u0 = to_double(r.c_top) / (vN * vN) + to_double(r.lambda0);
        CHECK(std::abs(u0 - target[0]) <= 1e-10);
        // and the achieved jet matches the target through the original system
        CHECK(r.residual <= 1e-7);
    }
    SECTION("shifted u(0) = lambda0 rejected") {
        CHECK_THROWS_AS(match_general_linear_m(Rational(2), Rational(3), {1.5, 0.1}),
                        ZeroInitialValue);
    }
    SECTION("m_1 <= 0 unsupported") {
        CHECK_THROWS_AS(match_general_linear_m(Rational(-1), Rational(0), {1.0, 0.0}),
                        UnsupportedType);
    }
}

TEST_CASE("verify detects corruption") {
    std::vector<std::vector<Rational>> target{
        {Rational(1), Rational(2), Rational(3), Rational(4)}};
    MatchResult r = match_deg_m0(1, Rational(1), target);
    StackelSystem sys(BKMData::kdv_class(1, Rational(1)), CPolyForm::symbolic_d(r.N));
    ReductionMap R = ReductionMap::build(sys);
    std::map<VarId, Rational> consts;
    for (int i = 1; i <= r.N; ++i) consts[dvar(i)] = r.d[size_t(i) - 1];
    MatchResult bad = r;
    bad.w0[0] += Rational(1, 7);
    auto rep = verify_match(sys, R, bad, target, consts);
    CHECK_FALSE(rep.exact_zero);
    CHECK(rep.deviation[0][0] > 0.0);  // corrupting w_1(0) hits order 0 immediately
}

TEST_CASE("seed Jacobian is numerically invertible, N <= 6") {
    for (int N = 2; N <= 6; ++N) {
        StackelSystem sys(BKMData::ch_class(), CPolyForm::ch(N));
        JetTable jt(sys);
        auto J = jt.jacobian_all0();
        int dim = 2 * N - 2;
        std::map<VarId, Rational> vals{{wvar(N), Rational(1)}, {cvar(2 * N + 1), Rational(1)}};
        std::vector<double> M(size_t(dim) * size_t(dim));
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                M[size_t(i) * size_t(dim) + size_t(j)] =
                    to_double(J[size_t(i)][size_t(j)].evaluate(vals));
        // LU-based determinant magnitude
        double det = 1.0;
        for (int c = 0; c < dim; ++c) {
            int best = c;
            for (int rr = c + 1; rr < dim; ++rr)
                if (std::abs(M[size_t(rr) * dim + c]) > std::abs(M[size_t(best) * dim + c]))
                    best = rr;
            if (best != c)
                for (int j = 0; j < dim; ++j) std::swap(M[size_t(c) * dim + j], M[size_t(best) * dim + j]);
            det *= M[size_t(c) * dim + c];
            REQUIRE(std::abs(M[size_t(c) * dim + c]) > 1e-12);
            for (int rr = c + 1; rr < dim; ++rr) {
                double f = M[size_t(rr) * dim + c] / M[size_t(c) * dim + c];
                for (int j = c; j < dim; ++j) M[size_t(rr) * dim + j] -= f * M[size_t(c) * dim + j];
            }
        }
        CHECK(std::abs(det) > 1e-10);
    }
}
