#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace sjt;

TEST_CASE("variable degrees") {
    GradingScheme s = GradingScheme::for_deg0(4, 1);  // alpha = 1/2
    CHECK(s.var_degree(wvar(3)) == Rational(3));
    CHECK(s.var_degree(pvar(1)) == Rational(9, 2));
    CHECK(s.var_degree(cvar(2)) == Rational(2));
    CHECK_THROWS_AS(s.var_degree(var("nosuch")), UnregisteredVariable);
}

TEST_CASE("degree of expressions") {
    GradingScheme s = GradingScheme::for_ch(3);  // alpha = 0
    SECTION("single variable") {
        DegreeResult d = degree(W(3), s);
        REQUIRE(std::holds_alternative<Rational>(d));
        CHECK(std::get<Rational>(d) == Rational(3));
    }
    SECTION("zero has any degree") {
        CHECK(std::holds_alternative<AnyDegree>(degree(RationalExpr(), s)));
    }
    SECTION("inhomogeneous witness") {
        DegreeResult d = degree(W(1) + P(1), s);  // deg w1 = 1, deg p1 = 3
        REQUIRE(std::holds_alternative<Inhomogeneous>(d));
        auto wit = std::get<Inhomogeneous>(d);
        CHECK(wit.deg_a != wit.deg_b);
    }
    SECTION("fraction degree is num minus den") {
        DegreeResult d = degree(C(7) / (W(3) * W(3)), s);
        REQUIRE(std::holds_alternative<Rational>(d));
        CHECK(std::get<Rational>(d) == Rational(1));
    }
    SECTION("product and sum laws on random homogeneous inputs") {
        std::mt19937 rng(5150);
        for (int t = 0; t < 30; ++t) {
            // random homogeneous polys: pick a target degree, draw monomials of it
            auto make_homog = [&](int deg) {
                MultiPoly out;
                for (int tries = 0; tries < 24 && out.term_count() < 3; ++tries) {
                    // random monomial in w_1..w_3 with weighted degree deg
                    Monomial m;
                    int rem = deg;
                    while (rem > 0) {
                        int i = 1 + int(rng() % 3u);
                        if (i > rem) continue;
                        m = m * Monomial(wvar(i), 1);
                        rem -= i;
                    }
                    out += MultiPoly::term(rand_rational(rng), m);
                }
                return out;
            };
            int da = 2 + int(rng() % 4u), db = 2 + int(rng() % 4u);
            MultiPoly a = make_homog(da), b = make_homog(db);
            if (a.is_zero() || b.is_zero()) continue;
            DegreeResult dp = poly_degree(a * b, s);
            REQUIRE(std::holds_alternative<Rational>(dp));
            CHECK(std::get<Rational>(dp) == Rational(da + db));
            if (da == db) {
                DegreeResult ds = poly_degree(a + b, s);
                if (!std::holds_alternative<AnyDegree>(ds)) {
                    REQUIRE(std::holds_alternative<Rational>(ds));
                    CHECK(std::get<Rational>(ds) == Rational(da));
                }
            }
        }
    }
}

TEST_CASE("truncate by factor count") {
    int N = 5;
    MultiPoly P = MultiPoly::variable(wvar(1)) * MultiPoly::variable(wvar(N - 1)) +
                  MultiPoly::variable(wvar(N)) +
                  MultiPoly::variable(pvar(2)) * MultiPoly::variable(pvar(N));
    SECTION("all variables") {
        CHECK(truncate_by_factor_count(P, 2) == MultiPoly::variable(wvar(N)));
    }
    SECTION("w variables only") {
        std::set<VarId> wonly;
        for (int i = 1; i <= N; ++i) wonly.insert(wvar(i));
        MultiPoly expect = MultiPoly::variable(wvar(N)) +
                           MultiPoly::variable(pvar(2)) * MultiPoly::variable(pvar(N));
        CHECK(truncate_by_factor_count(P, 2, wonly) == expect);
    }
    SECTION("d = 1 keeps nothing of a constant-free polynomial") {
        CHECK(truncate_by_factor_count(P, 1) == MultiPoly());
    }
}

TEST_CASE("kinetic energy degree: N + 1 + 2 alpha") {
    for (int N : {1, 2, 3, 4, 5}) {
        for (int n : {1, 2, 3}) {
            GradingScheme s = GradingScheme::for_deg0(N, n);
            auto K = kinetic_energies(N);
            DegreeResult d = degree(K[0], s);
            REQUIRE(std::holds_alternative<Rational>(d));
            CHECK(std::get<Rational>(d) == Rational(N + 1) + Rational(n));
        }
    }
}

TEST_CASE("hamiltonians are homogeneous (deg H_i = N + i + 2 alpha)") {
    SECTION("deg m = 0 case") {
        for (int N : {2, 3, 4, 5}) {
            for (int n : {1, 2}) {
                if (n > N) continue;
                StackelSystem sys(BKMData::kdv_class(n, Rational(1)), CPolyForm::symbolic_d(N));
                GradingScheme s = sys.grading();
                for (int i = 1; i <= N; ++i)
                    CHECK(is_homogeneous_of(sys.hamiltonian(i), s, Rational(N + i + n)));
            }
        }
    }
    SECTION("CH case (H_1 of degree N + 1)") {
        for (int N : {2, 3, 4, 5}) {
            StackelSystem sys(BKMData::ch_class(), CPolyForm::ch(N));
            GradingScheme s = sys.grading();
            for (int i = 1; i <= N; ++i)
                CHECK(is_homogeneous_of(sys.hamiltonian(i), s, Rational(N + i)));
        }
    }
}

TEST_CASE("derivative degree law") {
    SECTION("KdV: one derivative raises degree by 1/2") {
        StackelSystem sys(BKMData::kdv_class(1, Rational(1)), CPolyForm::symbolic_d(4));
        JetTable jt(sys);
        GradingScheme s = sys.grading();
        auto chk = check_derivative_degree(s, 1, true, W(1), jt.entry(wvar(1), 1), 1);
        CHECK(chk.pass);
        DegreeResult d = degree(jt.entry(wvar(1), 1), s);
        REQUIRE(std::holds_alternative<Rational>(d));
        CHECK(std::get<Rational>(d) == Rational(3, 2));
    }
    SECTION("CH: degree preserved under four derivatives") {
        StackelSystem sys(BKMData::ch_class(), CPolyForm::ch(3));
        JetTable jt(sys);
        GradingScheme s = sys.grading();
        auto chk = check_derivative_degree(s, 1, false, W(3), jt.entry(wvar(3), 4), 4);
        CHECK(chk.pass);
    }
    SECTION("constants pass vacuously") {
        StackelSystem sys(BKMData::ch_class(), CPolyForm::ch(2));
        JetTable jt(sys);
        GradingScheme s = sys.grading();
        RationalExpr one(1);
        auto chk = check_derivative_degree(s, 1, false, one, jt.prolong(one, 3), 3);
        CHECK(chk.pass);
    }
}
