#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fconn/reduce.hpp"

using namespace fconn;

static FieldPtr Q() { return Field::rationals(); }

static Mat E(const FieldPtr& F, long n, long i, long j) {
    Mat m(F, n, n);
    m.at(i, j) = Scalar::one(F);
    return m;
}

static Mat diag2(const FieldPtr& F, const Rat& a, const Rat& b) {
    Mat m(F, 2, 2);
    m.at(0, 0) = Scalar::of(F, a);
    m.at(1, 1) = Scalar::of(F, b);
    return m;
}

TEST_CASE("rank-one torus: regular part is stripped, residue survives") {
    auto F = Q();
    // (1/2) t^-1 + 3
    MatSeries A = MatSeries::zero(F, 1, Rat(6));
    Mat half(F, 1, 1), three(F, 1, 1);
    half.at(0, 0) = Scalar::of(F, Rat(1, 2));
    three.at(0, 0) = Scalar::of(F, 3);
    A.set_coeff(Rat(-1), half);
    A.set_coeff(Rat(0), three);

    auto rr = reduce(A, GroupContext::gl(1));
    CHECK(rr.canonical.levels.empty());
    CHECK(rr.canonical.residue == half); // no rational-part shift on a torus
    CHECK(rr.used_ramification == 1);
    CHECK(rr.residue_ram == 1);
    CHECK(rr.certificate.atoms.size() == 1);
    CHECK(verify_equivalence(A, rr.series, rr.certificate));
    CHECK(!principal_level(A, GroupContext::gl(1)));
}

TEST_CASE("rank-one torus with an irregular term") {
    auto F = Q();
    // 5 t^-3 + 2 t^-1 + 7 t^2
    MatSeries A = MatSeries::zero(F, 1, Rat(7));
    Mat c5(F, 1, 1), c2(F, 1, 1), c7(F, 1, 1);
    c5.at(0, 0) = Scalar::of(F, 5);
    c2.at(0, 0) = Scalar::of(F, 2);
    c7.at(0, 0) = Scalar::of(F, 7);
    A.set_coeff(Rat(-3), c5);
    A.set_coeff(Rat(-1), c2);
    A.set_coeff(Rat(2), c7);

    auto rr = reduce(A, GroupContext::gl(1));
    REQUIRE(rr.canonical.levels.size() == 1);
    CHECK(rr.canonical.levels[0] == Rat(-3));
    CHECK(rr.canonical.irr_coeffs[0] == c5);
    CHECK(rr.canonical.residue == c2);
    CHECK(rr.canonical.ram == 1);
    CHECK(rr.used_ramification == 1);
    CHECK(verify_equivalence(A, rr.series, rr.certificate));
    auto pl = principal_level(A, GroupContext::gl(1));
    REQUIRE(pl.has_value());
    CHECK(*pl == Rat(-3));
}

TEST_CASE("gl2: rational residue eigenvalues are sheared away") {
    auto F = Q();
    MatSeries A = MatSeries::monomial(F, 2, Rat(-1), diag2(F, Rat(1, 2), Rat(0)), Rat(5));
    auto rr = reduce(A, GroupContext::gl(2));
    CHECK(rr.canonical.levels.empty());
    CHECK(rr.canonical.residue.is_zero());
    CHECK(rr.canonical.normalized);
    CHECK(rr.used_ramification == 1); // the residue shear is tracked separately
    CHECK(rr.residue_ram == 2);
    CHECK(verify_equivalence(A, rr.series, rr.certificate));
}

TEST_CASE("gl2: irrational residue eigenvalues stay put") {
    auto F = Field::make_ext(1, {Rat(-2), Rat(0), Rat(1)}); // Q(sqrt 2)
    Mat d(F, 2, 2);
    d.at(0, 0) = Scalar::theta(F);
    d.at(1, 1) = -Scalar::theta(F);
    MatSeries A = MatSeries::monomial(F, 2, Rat(-1), d, Rat(4));
    auto rr = reduce(A, GroupContext::gl(2));
    CHECK(rr.canonical.levels.empty());
    CHECK(rr.canonical.normalized);
    CHECK(rr.used_ramification == 1);
    CHECK(rr.residue_ram == 1);
    // same eigenvalues, in the canonical order
    Mat C = rr.canonical.residue;
    CHECK(C.at(0, 1).is_zero());
    CHECK(C.at(1, 0).is_zero());
    CHECK(C.at(0, 0) + C.at(1, 1) == Scalar::zero(F));
    CHECK(C.at(0, 0) * C.at(0, 0) == Scalar::of(F, 2));
    CHECK(verify_equivalence(A, rr.series, rr.certificate));
}

TEST_CASE("gl2: a kept integer-eigenvalue component folds into the residue") {
    auto F = Q();
    // diag(1/2, -1/2) t^-1 + E12: aligned, with one kept component at e = 0
    MatSeries A = MatSeries::zero(F, 2, Rat(5));
    A.set_coeff(Rat(-1), diag2(F, Rat(1, 2), Rat(-1, 2)));
    A.set_coeff(Rat(0), E(F, 2, 0, 1));
    auto rr = reduce(A, GroupContext::gl(2));
    CHECK(rr.canonical.levels.empty());
    CHECK(rr.canonical.residue == E(F, 2, 0, 1)); // principal nilpotent residue
    CHECK(rr.canonical.normalized);
    CHECK(rr.used_ramification == 1);
    CHECK(verify_equivalence(A, rr.series, rr.certificate));
}

TEST_CASE("sl2: nilpotent leading term with nothing behind it (C1 shear)") {
    auto F = Q();
    MatSeries A = MatSeries::monomial(F, 2, Rat(-2), E(F, 2, 1, 0), Rat(4));
    auto rr = reduce(A, GroupContext::sl(2));
    CHECK(rr.canonical.levels.empty());
    CHECK(rr.canonical.residue.is_zero());
    CHECK(rr.trace.c2_steps == 0);
    REQUIRE(rr.trace.lambdas.size() == 1);
    CHECK(rr.trace.lambdas[0] == Rat(2));
    CHECK(verify_equivalence(A, rr.series, rr.certificate));
    CHECK(!principal_level(A, GroupContext::sl(2)));
}

TEST_CASE("sl2: C2 shear produces the half-integer level") {
    auto F = Q();
    MatSeries A = MatSeries::zero(F, 2, Rat(4));
    A.set_coeff(Rat(-2), E(F, 2, 1, 0));
    A.set_coeff(Rat(-1), E(F, 2, 0, 1));
    auto rr = reduce(A, GroupContext::sl(2));

    REQUIRE(rr.canonical.levels.size() == 1);
    CHECK(rr.canonical.levels[0] == Rat(-3, 2));
    CHECK(rr.canonical.ram == 2);
    Mat D = rr.canonical.irr_coeffs[0];
    CHECK(D == diag2(F, Rat(1), Rat(-1)));
    CHECK(rr.canonical.residue.is_zero());

    CHECK(rr.trace.c2_steps == 1);
    REQUIRE(rr.trace.deltas.size() == 1);
    CHECK(rr.trace.deltas[0] == Rat(1, 2));
    REQUIRE(rr.trace.orbit_dims.size() == 1);
    CHECK(rr.trace.orbit_dims[0] == 2);

    CHECK(rr.used_ramification == 4);
    CHECK(Int(rr.used_ramification) <= ramification_bound(GroupContext::sl(2)));
    CHECK(verify_equivalence(A, rr.series, rr.certificate));

    auto pl = principal_level(A, GroupContext::sl(2));
    REQUIRE(pl.has_value());
    CHECK(*pl == Rat(-3, 2));
}

TEST_CASE("sl2: semisimple leading term splits the group") {
    auto F = Q();
    MatSeries A = MatSeries::monomial(F, 2, Rat(-3), diag2(F, Rat(1), Rat(-1)), Rat(2));
    auto rr = reduce(A, GroupContext::sl(2));
    REQUIRE(rr.canonical.levels.size() == 1);
    CHECK(rr.canonical.levels[0] == Rat(-3));
    CHECK(rr.canonical.irr_coeffs[0] == diag2(F, Rat(1), Rat(-1)));
    CHECK(rr.canonical.residue.is_zero());
    CHECK(rr.used_ramification == 1);
    CHECK(verify_equivalence(A, rr.series, rr.certificate));
}

TEST_CASE("borel of gl2: regular solvable connection trivializes") {
    auto F = Q();
    MatSeries A = MatSeries::zero(F, 2, Rat(4));
    A.set_coeff(Rat(-1), diag2(F, Rat(1, 2), Rat(0)) + E(F, 2, 0, 1));
    auto rr = reduce(A, GroupContext::upper_triangular(2));
    CHECK(rr.canonical.levels.empty());
    CHECK(rr.canonical.residue.is_zero());
    CHECK(rr.residue_ram == 2);
    CHECK(Int(rr.used_ramification) <= ramification_bound(GroupContext::upper_triangular(2)));
    CHECK(verify_equivalence(A, rr.series, rr.certificate));
}

TEST_CASE("borel of gl2: irregular diagonal weight kills the whole radical") {
    auto F = Q();
    MatSeries A = MatSeries::zero(F, 2, Rat(4));
    A.set_coeff(Rat(-2), diag2(F, Rat(1), Rat(0)));
    A.set_coeff(Rat(-1), E(F, 2, 0, 1));
    auto rr = reduce(A, GroupContext::upper_triangular(2));
    REQUIRE(rr.canonical.levels.size() == 1);
    CHECK(rr.canonical.levels[0] == Rat(-2));
    CHECK(rr.canonical.irr_coeffs[0] == diag2(F, Rat(1), Rat(0)));
    CHECK(rr.canonical.residue.is_zero());
    CHECK(rr.used_ramification == 1);
    CHECK(verify_equivalence(A, rr.series, rr.certificate));
}

TEST_CASE("unipotent groups: everything but the residue dies") {
    auto F = Q();
    auto ctx = GroupContext::strict_upper(3);

    MatSeries A = MatSeries::zero(F, 3, Rat(3));
    A.set_coeff(Rat(-1), E(F, 3, 0, 1));
    A.set_coeff(Rat(-2), E(F, 3, 0, 2));
    auto rr = reduce(A, ctx);
    CHECK(rr.canonical.levels.empty());
    CHECK(rr.canonical.residue == E(F, 3, 0, 1));
    CHECK(verify_equivalence(A, rr.series, rr.certificate));

    // a case where the first pass leaves deeper junk behind
    MatSeries B = MatSeries::zero(F, 3, Rat(6));
    B.set_coeff(Rat(0), E(F, 3, 0, 1));
    B.set_coeff(Rat(-3), E(F, 3, 1, 2));
    auto rr2 = reduce(B, ctx);
    CHECK(rr2.canonical.levels.empty());
    CHECK(rr2.canonical.residue.is_zero());
    CHECK(verify_equivalence(B, rr2.series, rr2.certificate));
}

TEST_CASE("alignment of a first-kind connection") {
    auto F = Q();
    // nilpotent residue: every positive coefficient dies
    MatSeries A = MatSeries::zero(F, 2, Rat(4));
    A.set_coeff(Rat(-1), E(F, 2, 1, 0));
    A.set_coeff(Rat(0), E(F, 2, 0, 1));
    auto rr = align_first_kind(A, GroupContext::gl(2));
    CHECK(rr.series.coeff(Rat(-1)) == E(F, 2, 1, 0));
    for (auto& e : rr.series.support()) CHECK(e == Rat(-1));
    CHECK(verify_equivalence(A, rr.series, rr.certificate));
}

TEST_CASE("alignment refuses connections of the second kind") {
    auto F = Q();
    MatSeries A = MatSeries::monomial(F, 2, Rat(-2), E(F, 2, 1, 0), Rat(2));
    CHECK_THROWS_AS(align_first_kind(A, GroupContext::gl(2)), NotRegular);
    CHECK_THROWS_AS(reduce_regular_semisimple(A, GroupContext::gl(2)), NotRegular);
}

TEST_CASE("insufficient precision is reported with the required window") {
    auto F = Q();
    // the nilpotent analysis at r = -2 needs the window up to r + 2 = 0
    MatSeries A = MatSeries::monomial(F, 2, Rat(-2), E(F, 2, 1, 0), Rat(-1, 2));
    CHECK_THROWS_AS(reduce(A, GroupContext::sl(2)), InsufficientPrecision);
}

TEST_CASE("determinacy windows") {
    CHECK(determinacy_window(GroupContext::sl(2), Rat(-2), WindowKind::Irregular) == Rat(2));
    CHECK(determinacy_window(GroupContext::gl(3), Rat(-4), WindowKind::Irregular) == Rat(9));
    CHECK(determinacy_window(GroupContext::strict_upper(3), Rat(-1), WindowKind::Unipotent) ==
          Rat(0));
    CHECK(determinacy_window(GroupContext::strict_upper(3), Rat(-2), WindowKind::Unipotent) ==
          Rat(3));
    CHECK(determinacy_window(GroupContext::gl(2), Rat(1), WindowKind::Regular) == Rat(2));
}

TEST_CASE("ramification bounds") {
    CHECK(regular_ramification_bound(GroupContext::sl(2)) == Int(2));
    CHECK(ramification_bound(GroupContext::sl(2)) == Int(24));
    CHECK(regular_ramification_bound(GroupContext::diag_torus(3)) == Int(1));
    CHECK(ramification_bound(GroupContext::diag_torus(3)) == Int(1));
    CHECK(regular_ramification_bound(GroupContext::gl(2)) == Int(2));
}

TEST_CASE("canonical form round-trips through as_series") {
    auto F = Q();
    MatSeries A = MatSeries::zero(F, 2, Rat(4));
    A.set_coeff(Rat(-2), E(F, 2, 1, 0));
    A.set_coeff(Rat(-1), E(F, 2, 0, 1));
    auto rr = reduce(A, GroupContext::sl(2));
    MatSeries S = rr.canonical.as_series(F, 2, rr.series.prec());
    CHECK(S == rr.series);
}
