#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fconn/gauge.hpp"

using namespace fconn;

static FieldPtr Q() { return Field::rationals(); }

TEST_CASE("exponential atom with negative exponent") {
    auto F = Q();
    Mat E21(F, 2, 2);
    E21.at(1, 0) = Scalar::one(F);

    // g = exp(-t^-1 E21) maps the zero connection to E21 t^-2
    GaugeCert c{{ExpAtom{E21.scaled(Scalar::of(F, -1)), Rat(-1)}}};
    MatSeries zero = MatSeries::zero(F, 2, Rat(10));
    MatSeries img = apply_gauge(c, zero);
    CHECK(img.coeff(Rat(-2)) == E21);
    CHECK(img.support().size() == 1);

    // and the inverse word trivializes it
    MatSeries target = MatSeries::monomial(F, 2, Rat(-2), E21, Rat(10));
    MatSeries back = apply_gauge(invert(c), target);
    CHECK(back.is_zero());
    CHECK(verify_equivalence(zero, target, c));
    CHECK(verify_equivalence(target, zero, invert(c)));
}

TEST_CASE("shear atoms") {
    auto F = Q();
    GaugeCert c{{ShearAtom{{Int(1), Int(-1)}, 1}}};
    MatSeries img = apply_gauge(c, MatSeries::zero(F, 2, Rat(8)));
    Mat d(F, 2, 2);
    d.at(0, 0) = Scalar::one(F);
    d.at(1, 1) = Scalar::of(F, -1);
    CHECK(img.coeff(Rat(-1)) == d);

    Mat E12(F, 2, 2);
    E12.at(0, 1) = Scalar::one(F);
    MatSeries a = MatSeries::monomial(F, 2, Rat(0), E12, Rat(8));
    MatSeries sheared = apply_gauge(c, a);
    CHECK(sheared.coeff(Rat(2)) == E12);
    CHECK(sheared.coeff(Rat(-1)) == d);

    // half-integer shear introduces ramification in the conjugation only
    GaugeCert h{{ShearAtom{{Int(1), Int(0)}, 2}}};
    MatSeries hs = apply_gauge(h, a);
    CHECK(hs.coeff(make_rat(1, 2)) == E12);
    CHECK(hs.coeff(Rat(-1)).at(0, 0) == Scalar::of(F, make_rat(1, 2)));
}

TEST_CASE("divergent exponentials are rejected") {
    auto F = Q();
    Mat H(F, 2, 2);
    H.at(0, 0) = Scalar::one(F);
    H.at(1, 1) = Scalar::of(F, -1);
    GaugeCert c{{ExpAtom{H, Rat(-1)}}};
    Mat E12(F, 2, 2);
    E12.at(0, 1) = Scalar::one(F);
    MatSeries a = MatSeries::monomial(F, 2, Rat(0), E12, Rat(5));
    CHECK_THROWS_AS(apply_gauge(c, a), DivergentExponential);
    CHECK_THROWS_AS(expand_atom(ExpAtom{H, Rat(0)}, F, 2, Rat(5)), DivergentExponential);
}

TEST_CASE("composition and inversion round trip") {
    auto F = Q();
    Mat E12(F, 2, 2), E21(F, 2, 2), g0(F, 2, 2);
    E12.at(0, 1) = Scalar::one(F);
    E21.at(1, 0) = Scalar::one(F);
    g0 = Mat::from_rat_rows(F, {{1, 2}, {1, 3}});

    MatSeries A = MatSeries::zero(F, 2, Rat(12));
    A.add_coeff(Rat(-1), Mat::from_rat_rows(F, {{2, 1}, {0, -1}}));
    A.add_coeff(Rat(0), Mat::from_rat_rows(F, {{0, 3}, {1, 0}}));
    A.add_coeff(Rat(2), Mat::from_rat_rows(F, {{1, 0}, {0, 1}}));

    GaugeCert c{{ConstAtom{g0}, ExpAtom{E12, make_rat(1, 2)},
                 ShearAtom{{Int(1), Int(0)}, 1}, ExpAtom{E21, Rat(2)}}};
    MatSeries B = apply_gauge(c, A);
    MatSeries back = apply_gauge(invert(c), B);
    CHECK(back == A);

    // compose(f, s) acts as "s first, then f"
    GaugeCert f{{ExpAtom{E12, Rat(1)}}};
    GaugeCert s{{ConstAtom{g0}}};
    CHECK(apply_gauge(compose(f, s), A) == apply_gauge(f, apply_gauge(s, A)));
}

TEST_CASE("expanded words match the series-level gauge action") {
    auto F = Q();
    Mat E12(F, 2, 2), E21(F, 2, 2);
    E12.at(0, 1) = Scalar::one(F);
    E21.at(1, 0) = Scalar::one(F);

    MatSeries A = MatSeries::zero(F, 2, Rat(9));
    A.add_coeff(Rat(-1), Mat::from_rat_rows(F, {{1, 0}, {0, 2}}));
    A.add_coeff(Rat(1), Mat::from_rat_rows(F, {{0, 1}, {1, 0}}));

    GaugeCert c{{ExpAtom{E21, Rat(1)}, ShearAtom{{Int(1), Int(0)}, 2},
                 ExpAtom{E12, make_rat(3, 2)}}};
    MatSeries g = expand(c, F, 2, Rat(9));
    MatSeries ginv = expand(invert(c), F, 2, Rat(9));
    CHECK((g * ginv).coeff(Rat(0)) == Mat::identity(F, 2));
    MatSeries direct = g * A * ginv + g.derivative() * ginv;
    CHECK(apply_gauge(c, A) == direct);

    // expansion of a single nilpotent exponential is exact
    MatSeries e = expand_atom(ExpAtom{E12, Rat(1)}, F, 2, Rat(6));
    CHECK(e.coeff(Rat(0)) == Mat::identity(F, 2));
    CHECK(e.coeff(Rat(1)) == E12);
    CHECK(e.support().size() == 2);
}

TEST_CASE("constant exponentials and denominators") {
    auto F = Q();
    Mat N(F, 3, 3);
    N.at(0, 1) = Scalar::one(F);
    N.at(1, 2) = Scalar::one(F);
    Mat e = exp_nilpotent(N);
    CHECK(e.at(0, 1) == Scalar::one(F));
    CHECK(e.at(0, 2) == Scalar::of(F, make_rat(1, 2)));
    CHECK(e.at(1, 2) == Scalar::one(F));
    CHECK(e.at(2, 0).is_zero());

    Mat E12(F, 2, 2);
    E12.at(0, 1) = Scalar::one(F);
    GaugeCert c{{ExpAtom{E12, make_rat(1, 2)}, ShearAtom{{Int(3), Int(1)}, 6},
                 RamifyAtom{4}}};
    CHECK(cert_denominator(c) == 6);
    GaugeCert c2{{ShearAtom{{Int(2), Int(4)}, 2}}};
    CHECK(cert_denominator(c2) == 1);
}

TEST_CASE("ramify markers act trivially") {
    auto F = Q();
    Mat E12(F, 2, 2);
    E12.at(0, 1) = Scalar::one(F);
    MatSeries a = MatSeries::monomial(F, 2, make_rat(-3, 2), E12, Rat(4));
    GaugeCert c{{RamifyAtom{3}}};
    MatSeries b = apply_gauge(c, a);
    CHECK(b == a);
    CHECK(b.ram() % 3 == 0);
    CHECK(std::holds_alternative<RamifyAtom>(invert_atom(c.atoms[0])));
}
