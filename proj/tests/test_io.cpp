#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace sjt;

TEST_CASE("system descriptor parsing") {
    SECTION("KdV descriptor") {
        json j = {{"n", 1}, {"m", {"1"}}, {"lambda", "inf"}, {"N", 4}};
        auto d = SystemDescriptor::from_json(j);
        CHECK(d.data.n == 1);
        CHECK(d.data.m.degree() == 0);
        CHECK(d.data.type() == BkmType::IV);
        CHECK(d.cform.N == 4);
        CHECK(d.cform.d.size() == 4);
    }
    SECTION("CH descriptor with numeric tail and d values") {
        json j = {{"n", 1}, {"m", {"1", "0"}}, {"N", 2}, {"c_tail", {"3/2"}},
                  {"d", {"1", "-2"}}};
        auto d = SystemDescriptor::from_json(j);
        CHECK(d.data.type() == BkmType::III);
        CHECK(d.cform.r.coeff(0) == Q(3, 2));
        CHECK(d.cform.d[0] == Q(1));
        StackelSystem sys(d.data, d.cform);
        CHECK(sys.N() == 2);
    }
    SECTION("unknown keys rejected") {
        json j = {{"n", 1}, {"m", {"1"}}, {"N", 2}, {"bogus", 1}};
        CHECK_THROWS_AS(SystemDescriptor::from_json(j), ConfigError);
    }
    SECTION("invalid shapes rejected") {
        CHECK_THROWS_AS(SystemDescriptor::from_json({{"n", 1}, {"N", 2}}), ConfigError);
        CHECK_THROWS_AS(SystemDescriptor::from_json({{"n", 1}, {"m", json::array()}, {"N", 2}}),
                        ConfigError);
        CHECK_THROWS_AS(
            SystemDescriptor::from_json({{"n", 1}, {"m", {"1", "0", "2"}}, {"N", 2}}),
            ConfigError);
        CHECK_THROWS_AS(
            SystemDescriptor::from_json({{"n", 1}, {"m", {"1"}}, {"N", 2}, {"d", {"1"}}}),
            ConfigError);
    }
}

TEST_CASE("jet io") {
    json j = {{"basepoint", "0"}, {"order", 2}, {"components", {{"1", "1/2", "-3"}}}};
    JetPoint p = jet_from_json(j);
    CHECK(p.order() == 2);
    CHECK(p.components() == 1);
    CHECK(p.values[0][1] == Rational(1, 2));
    json back = jet_to_json(p);
    CHECK(jet_from_json(back).values == p.values);
    CHECK_THROWS_AS(jet_from_json({{"components", {{"1", "2"}, {"1"}}}}), ConfigError);
    CHECK_THROWS_AS(jet_from_json({{"order", 3}, {"components", {{"1", "2"}}}}), ConfigError);
}

TEST_CASE("canonical taylor table text is deterministic") {
    StackelSystem sys(BKMData::kdv_class(1, Rational(1)), CPolyForm::symbolic_d(4));
    JetTable jt(sys);
    std::string a = taylor_table_text(jt, wvar(1), 3, "kdv N=4");
    std::string b = taylor_table_text(jt, wvar(1), 3, "kdv N=4");
    CHECK(a == b);
    CHECK(a.find("x^1: -p4") != std::string::npos);
    CHECK(a.find("x^2: -3/2*w1^2 + w2") != std::string::npos);
    CHECK(a.find("x^3: 2/3*w1*p4 - 1/3*p3") != std::string::npos);
}

TEST_CASE("match result serialization") {
    std::vector<std::vector<Rational>> target{{Rational(1), Rational(2)}};
    MatchResult r = match_deg_m0(1, Rational(1), target);
    json j = match_result_to_json(r);
    CHECK(j["exact"] == true);
    CHECK(j["N"] == r.N);
    CHECK(j["w0"].size() == size_t(r.N));
}

TEST_CASE("float formatting uses 17 significant digits") {
    CHECK(fmt17(1.0) == "1");
    CHECK(fmt17(0.1) == "0.10000000000000001");
}
