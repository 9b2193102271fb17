#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fconn/galois.hpp"

using namespace fconn;

static FieldPtr Q() { return Field::rationals(); }

static Mat scalar1(const FieldPtr& F, const Rat& v) {
    Mat m(F, 1, 1);
    m.at(0, 0) = Scalar::of(F, v);
    return m;
}

static MatSeries rank1(const FieldPtr& F, const Rat& res, const Rat& prec) {
    return MatSeries::monomial(F, 1, Rat(-1), scalar1(F, res), prec);
}

TEST_CASE("gl1 descent: phi = -1 over a double cover produces the half residue") {
    auto F = Q();
    CanonicalForm B;
    B.ram = 2;
    B.residue = Mat(F, 1, 1); // zero
    TwistedCocycle tc{2, scalar1(F, Rat(-1))};
    CHECK(is_twisted_cocycle(tc, B, GroupContext::gl(1)));

    MatSeries A = descend(B, tc, GroupContext::gl(1), F, Rat(4));
    CHECK(A.ram() == 1);
    CHECK(A.coeff(Rat(-1)) == scalar1(F, Rat(1, 2)));
    CHECK(A - rank1(F, Rat(1, 2), A.prec()) == MatSeries::zero(F, 1, A.prec()));
}

TEST_CASE("gl1 cocycle extraction from a hand-built shear certificate") {
    auto F = Q();
    MatSeries A = rank1(F, Rat(1, 2), Rat(4));
    ReductionResult rr;
    rr.series = MatSeries::zero(F, 1, Rat(4));
    rr.certificate.atoms.push_back(ShearAtom{{Int(-1)}, 2});
    rr.used_ramification = 1;
    rr.residue_ram = 2;
    rr.canonical.ram = 1;
    rr.canonical.residue = Mat(F, 1, 1);
    REQUIRE(verify_equivalence(A, rr.series, rr.certificate));

    TwistedCocycle tc = extract_cocycle(rr);
    CHECK(tc.b == 2);
    CHECK(tc.phi == scalar1(F, Rat(-1)));
    CHECK(is_twisted_cocycle(tc, rr.canonical, GroupContext::gl(1)));
}

TEST_CASE("sl2 descent of the ramified canonical form and reduction roundtrip") {
    auto F = Field::make(4); // contains i
    CanonicalForm B;
    B.ram = 2;
    B.levels = {Rat(-3, 2)};
    Mat D(F, 2, 2);
    D.at(0, 0) = Scalar::one(F);
    D.at(1, 1) = -Scalar::one(F);
    B.irr_coeffs = {D};
    B.residue = Mat(F, 2, 2);
    B.normalized = true;

    Mat phi(F, 2, 2);
    phi.at(0, 1) = Scalar::one(F);
    phi.at(1, 0) = -Scalar::one(F);
    TwistedCocycle tc{2, phi};
    CHECK(is_twisted_cocycle(tc, B, GroupContext::sl(2)));

    MatSeries A = descend(B, tc, GroupContext::sl(2), F, Rat(8));
    CHECK(A.ram() == 1);
    for (const Rat& q : A.support()) CHECK(is_integer(q));

    auto rr = reduce(A, GroupContext::sl(2));
    REQUIRE(rr.canonical.levels.size() == 1);
    CHECK(rr.canonical.levels[0] == Rat(-3, 2));
    CHECK(rr.canonical.ram == 2);
    CHECK(rr.canonical.irr_coeffs[0] == D);
    CHECK(rr.canonical.residue.is_zero());
    CHECK(verify_equivalence(A, rr.series, rr.certificate));

    TwistedCocycle back = extract_cocycle(rr);
    CHECK(back.b % 2 == 0);
    CHECK(is_twisted_cocycle({back.b, back.phi}, rr.canonical, GroupContext::gl(2)));
}

TEST_CASE("cover action is an action and scales irregular coefficients") {
    auto F = Field::make(4);
    CanonicalForm B;
    B.ram = 4;
    B.levels = {Rat(-3, 2), Rat(-5, 4)};
    Mat D1(F, 2, 2), D2(F, 2, 2);
    D1.at(0, 0) = Scalar::one(F);
    D1.at(1, 1) = -Scalar::one(F);
    D2.at(0, 0) = Scalar::of(F, Rat(2));
    D2.at(1, 1) = Scalar::of(F, Rat(3));
    B.irr_coeffs = {D1, D2};
    B.residue = Mat(F, 2, 2);

    auto g1 = galois_act(1, B, F);
    auto g2 = galois_act(1, g1, F);
    auto g3 = galois_act(2, B, F);
    for (int j = 0; j < 2; ++j) CHECK(g2.irr_coeffs[j] == g3.irr_coeffs[j]);
    auto g4 = galois_act(4, B, F);
    for (int j = 0; j < 2; ++j) CHECK(g4.irr_coeffs[j] == B.irr_coeffs[j]);
    // level -3/2: b*r = -6, scaling w4^6 = -1
    CHECK(g1.irr_coeffs[0] == B.irr_coeffs[0].scaled(-Scalar::one(F)));
    // level -5/4: b*r = -5, scaling w4^5 = i
    CHECK(g1.irr_coeffs[1] == B.irr_coeffs[1].scaled(root_of_unity(F, 4)));
}

TEST_CASE("regular invariants: classes fold mod Z and carry the orbit partition") {
    auto F = Q();
    // residue with eigenvalues 1/2, 3/2 (same class) and a nilpotent tail at 0
    MatSeries A = MatSeries::zero(F, 4, Rat(5));
    Mat C(F, 4, 4);
    C.at(0, 0) = Scalar::of(F, Rat(1, 2));
    C.at(1, 1) = Scalar::of(F, Rat(3, 2));
    C.at(2, 3) = Scalar::one(F); // nilpotent 2-block at eigenvalue 0
    A.set_coeff(Rat(-1), C);

    auto inv = regular_invariants(A, GroupContext::gl(4));
    // after reduction over gl4 the 1/2-classes fold to a single class at 1/2
    REQUIRE(inv.v.size() == 2);
    bool saw_zero = false, saw_half = false;
    for (size_t i = 0; i < inv.v.size(); ++i) {
        if (inv.v[i].first == Scalar::zero(F)) {
            saw_zero = true;
            CHECK(inv.v[i].second == 2);
            CHECK(inv.orbit[i] == std::vector<long>{2});
        }
        if (inv.v[i].first == Scalar::of(F, Rat(1, 2))) {
            saw_half = true;
            CHECK(inv.v[i].second == 2);
            CHECK(inv.orbit[i] == std::vector<long>{1, 1});
        }
    }
    CHECK(saw_zero);
    CHECK(saw_half);

    CHECK_THROWS_AS(regular_invariants(
                        MatSeries::monomial(F, 2, Rat(-2),
                                            [&] {
                                                Mat d(F, 2, 2);
                                                d.at(0, 0) = Scalar::one(F);
                                                d.at(1, 1) = -Scalar::one(F);
                                                return d;
                                            }(),
                                            Rat(3)),
                        GroupContext::gl(2)),
                    NotRegular);
}

TEST_CASE("equivalence over the base: integer residue shifts are trivial") {
    auto F = Q();
    auto ctx = GroupContext::gl(1);
    MatSeries A1 = rank1(F, Rat(1, 2), Rat(5));
    MatSeries A2 = rank1(F, Rat(3, 2), Rat(5));
    MatSeries A3 = rank1(F, Rat(1, 3), Rat(5));

    auto r12 = equivalent(A1, A2, ctx, false);
    CHECK(r12.equivalent);
    REQUIRE(r12.witness.has_value());
    CHECK(verify_equivalence(A1, A2, *r12.witness));

    auto r13 = equivalent(A1, A3, ctx, false);
    CHECK(!r13.equivalent);

    // over the closure every rational residue is trivial
    auto c13 = equivalent(A1, A3, ctx, true);
    CHECK(c13.equivalent);
    REQUIRE(c13.witness.has_value());
    CHECK(verify_equivalence(A1, A3, *c13.witness));
}

TEST_CASE("equivalence: levels separate, canonical data separates") {
    auto F = Q();
    auto ctx = GroupContext::sl(2);
    // ramified canonical class (C2 input) vs the regular class
    MatSeries A1 = MatSeries::zero(F, 2, Rat(6));
    Mat E21(F, 2, 2), E12(F, 2, 2);
    E21.at(1, 0) = Scalar::one(F);
    E12.at(0, 1) = Scalar::one(F);
    A1.set_coeff(Rat(-2), E21);
    A1.set_coeff(Rat(-1), E12);
    MatSeries A2 = MatSeries::monomial(F, 2, Rat(-2), E21, Rat(6));
    auto rep = equivalent(A1, A2, ctx, true);
    CHECK(!rep.equivalent);

    // the C2 class is base-equivalent to itself through a gauged copy
    Mat g(F, 2, 2);
    g.at(0, 0) = Scalar::of(F, Rat(2));
    g.at(1, 1) = Scalar::of(F, Rat(1, 2));
    GaugeCert w;
    w.atoms.push_back(ConstAtom{g});
    MatSeries A1g = apply_gauge(w, A1);
    auto self = equivalent(A1, A1g, ctx, false);
    CHECK(self.equivalent);
    REQUIRE(self.witness.has_value());
    CHECK(verify_equivalence(A1, A1g, *self.witness));
}

TEST_CASE("coxeter check: sl2 ramified form sits at the coxeter number") {
    auto F = Q();
    MatSeries A = MatSeries::zero(F, 2, Rat(6));
    Mat E21(F, 2, 2), E12(F, 2, 2);
    E21.at(1, 0) = Scalar::one(F);
    E12.at(0, 1) = Scalar::one(F);
    A.set_coeff(Rat(-2), E21);
    A.set_coeff(Rat(-1), E12);
    auto rr = reduce(A, GroupContext::sl(2));
    auto rep = coxeter_check(rr, GroupContext::sl(2));
    CHECK(rep.b == 2);
    CHECK(rep.divides_degree);
    CHECK(rep.at_coxeter);
    CHECK(rep.residue_central);
}
