#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fconn/io.hpp"

using namespace fconn;

static Json sample_gl2() {
    return Json::parse(R"({
        "field": {"cyclotomic_order": 1},
        "group": {"kind": "gl", "n": 2},
        "ramification": 1,
        "precision": {"num": 8, "den": 1},
        "terms": [
            {"num": -2, "den": 1, "matrix": [[{"num":0,"den":1},{"num":0,"den":1}],
                                             [{"num":1,"den":1},{"num":0,"den":1}]]},
            {"num": -1, "den": 1, "matrix": [[{"num":0,"den":1},{"num":1,"den":1}],
                                             [{"num":0,"den":1},{"num":0,"den":1}]]}
        ]
    })");
}

TEST_CASE("rationals and big integers round-trip") {
    Rat q(-7, 3);
    CHECK(rat_from_json(rat_json(q)) == q);
    Int big("123456789012345678901234567890");
    CHECK(int_from_json(int_json(big)) == big);
    CHECK(int_json(big).is_string());
    CHECK(int_json(Int(42)).is_number_integer());
    CHECK_THROWS_AS(rat_from_json(Json::parse(R"({"num":1,"den":0})")), ParseError);
}

TEST_CASE("scalars over an extension field round-trip through coords") {
    auto F = Field::make_ext(1, {Rat(-2), Rat(0), Rat(1)}); // theta^2 = 2
    Scalar s = Scalar::theta(F) + Scalar::of(F, Rat(1, 3));
    Scalar back = scalar_from_json(F, scalar_json(s));
    CHECK(back == s);
    // plain rationals serialize without coords
    CHECK(!scalar_json(Scalar::of(F, Rat(5))).contains("coords"));
}

TEST_CASE("connection files parse with validation") {
    ConnectionFile cf = parse_connection(sample_gl2());
    CHECK(cf.ctx.kind == GroupKind::GL);
    CHECK(cf.A.dim() == 2);
    CHECK(cf.A.prec() == Rat(8));
    CHECK(cf.A.coeff(Rat(-2)).at(1, 0) == Scalar::one(cf.F));

    Json bad = sample_gl2();
    bad["terms"][1]["num"] = -2; // duplicate exponent
    CHECK_THROWS_AS(parse_connection(bad), ParseError);

    bad = sample_gl2();
    bad["terms"][0]["den"] = 2; // off the declared grid
    CHECK_THROWS_AS(parse_connection(bad), ParseError);

    bad = sample_gl2();
    bad["group"]["kind"] = "sl"; // E21 has trace 0, E12 too: still fine -> tweak
    bad["terms"][0]["matrix"][0][0] = Json{{"num", 1}, {"den", 1}};
    CHECK_THROWS_AS(parse_connection(bad), ParseError);

    bad = sample_gl2();
    bad["precision"] = Json{{"num", -3}, {"den", 1}};
    CHECK_THROWS_AS(parse_connection(bad), ParseError);
}

TEST_CASE("group contexts round-trip including levi products") {
    auto ctx = GroupContext::levi({GroupContext::sl(2), GroupContext::diag_torus(1)}, true);
    GroupContext back = group_from_json(group_json(ctx));
    CHECK(back.str() == ctx.str());
    CHECK(group_from_json(group_json(GroupContext::strict_upper(3))).kind
          == GroupKind::StrictUpper);
    CHECK_THROWS_AS(group_from_json(Json::parse(R"({"kind":"so","n":3})")), ParseError);
}

TEST_CASE("certificates round-trip and reports are byte-stable") {
    ConnectionFile cf = parse_connection(sample_gl2());
    ReductionResult rr = reduce(cf.A, cf.ctx);
    GaugeCert back = cert_from_json(cf.F, cert_json(rr.certificate));
    CHECK(verify_equivalence(cf.A, rr.series, back));

    Json a = canonical_json(rr.canonical);
    Json b = canonical_json(reduce(cf.A, cf.ctx).canonical);
    CHECK(dump_json(a) == dump_json(b));

    // series round-trip through its json term list
    Json sj = series_json(rr.series);
    CHECK(sj["ramification"] == rr.series.ram());
    CHECK(rat_from_json(sj["precision"]) == rr.series.prec());
}

TEST_CASE("monodromy invariants serialize") {
    auto F = Field::rationals();
    MatSeries A = MatSeries::zero(F, 2, Rat(4));
    Mat C(F, 2, 2);
    C.at(0, 0) = Scalar::of(F, Rat(1, 2));
    A.set_coeff(Rat(-1), C);
    Json j = invariant_json(regular_invariants(A, GroupContext::gl(2)));
    REQUIRE(j["classes"].size() == 2);
    CHECK(j["classes"][0]["multiplicity"] == 1);
}
