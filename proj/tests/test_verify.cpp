#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fconn/verify.hpp"

using namespace fconn;

static FieldPtr Q() { return Field::rationals(); }

static Mat E(const FieldPtr& F, long n, long i, long j) {
    Mat m(F, n, n);
    m.at(i, j) = Scalar::one(F);
    return m;
}

TEST_CASE("oracle: scalar pole of order three has slope two") {
    auto F = Q();
    Mat c(F, 1, 1);
    c.at(0, 0) = Scalar::of(F, 5);
    MatSeries A = MatSeries::monomial(F, 1, Rat(-3), c, Rat(4));
    auto s = oracle_newton_slopes(A, GroupContext::gl(1));
    REQUIRE(s.size() == 1);
    CHECK(s[0] == Rat(2));
}

TEST_CASE("oracle: semisimple gl2 leading term at t^-3") {
    auto F = Q();
    Mat d(F, 2, 2);
    d.at(0, 0) = Scalar::of(F, 2);
    d.at(1, 1) = Scalar::of(F, 3);
    MatSeries A = MatSeries::monomial(F, 2, Rat(-3), d, Rat(4));
    auto s = oracle_newton_slopes(A, GroupContext::gl(2));
    REQUIRE(s.size() == 2);
    CHECK(s[0] == Rat(2));
    CHECK(s[1] == Rat(2));
}

TEST_CASE("oracle: ramified sl2 instance has slope one half") {
    auto F = Q();
    MatSeries A = MatSeries::zero(F, 2, Rat(5));
    A.set_coeff(Rat(-2), E(F, 2, 1, 0));
    A.set_coeff(Rat(-1), E(F, 2, 0, 1));
    auto s = oracle_newton_slopes(A, GroupContext::gl(2));
    REQUIRE(s.size() == 2);
    CHECK(s[0] == Rat(1, 2));
    CHECK(s[1] == Rat(1, 2));
}

TEST_CASE("oracle: gauge-trivial and regular inputs give zero slopes") {
    auto F = Q();
    MatSeries A = MatSeries::monomial(F, 2, Rat(-2), E(F, 2, 1, 0), Rat(5));
    auto s = oracle_newton_slopes(A, GroupContext::gl(2));
    CHECK(s == std::vector<Rat>{Rat(0), Rat(0)});

    MatSeries B = MatSeries::monomial(F, 2, Rat(-1), E(F, 2, 0, 1), Rat(5));
    auto sb = oracle_newton_slopes(B, GroupContext::gl(2));
    CHECK(sb == std::vector<Rat>{Rat(0), Rat(0)});
}

TEST_CASE("oracle range limits") {
    auto F = Q();
    MatSeries deep = MatSeries::monomial(F, 1, Rat(-7), E(F, 1, 0, 0), Rat(2));
    CHECK_THROWS_AS(oracle_newton_slopes(deep, GroupContext::gl(1)), OracleOutOfRange);
    MatSeries frac(F, 1, 2, Rat(2));
    frac.set_coeff(Rat(-3, 2), E(F, 1, 0, 0));
    CHECK_THROWS_AS(oracle_newton_slopes(frac, GroupContext::gl(1)), OracleOutOfRange);
}

TEST_CASE("property drivers pass on seeded corpora") {
    for (const char* id : {"invariance-under-gauge", "principal-level", "determinacy-window",
                           "ramification-bound", "degree-divisibility", "orbit-dim-increase"}) {
        auto run = drive_property(id, 25, 20260827);
        INFO(id << ": " << run.detail);
        CHECK(run.passed);
    }
    CHECK_THROWS_AS(drive_property("no-such-property", 1, 1), Error);
}

TEST_CASE("property runs are reproducible from the seed") {
    auto a = drive_property("ramification-bound", 10, 42);
    auto b = drive_property("ramification-bound", 10, 42);
    CHECK(a.passed == b.passed);
    CHECK(a.detail == b.detail);
}
