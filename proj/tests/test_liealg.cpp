#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fconn/liealg.hpp"

using namespace fconn;

static FieldPtr Q() { return Field::rationals(); }

static Mat ratmat(const FieldPtr& F, std::vector<std::vector<Rat>> rows) {
    return Mat::from_rat_rows(F, rows);
}

TEST_CASE("group contexts: dimensions and membership") {
    auto F = Q();
    auto gl2 = GroupContext::gl(2);
    auto sl2 = GroupContext::sl(2);
    auto b3 = GroupContext::upper_triangular(3);
    auto u3 = GroupContext::strict_upper(3);
    auto t2 = GroupContext::diag_torus(2);

    CHECK(gl2.dim() == 4);
    CHECK(sl2.dim() == 3);
    CHECK(b3.dim() == 6);
    CHECK(u3.dim() == 3);
    CHECK(t2.dim() == 2);
    CHECK((long)gl2.lie_basis(F).size() == gl2.dim());
    CHECK((long)sl2.lie_basis(F).size() == sl2.dim());
    CHECK((long)b3.lie_basis(F).size() == b3.dim());

    Mat m = ratmat(F, {{1, 2}, {3, -1}});
    CHECK(sl2.lie_contains(m));
    m.at(1, 1) = Scalar::of(F, 5);
    CHECK(!sl2.lie_contains(m));
    CHECK(gl2.lie_contains(m));

    Mat up = ratmat(F, {{1, 2, 3}, {0, 4, 5}, {0, 0, 6}});
    CHECK(b3.lie_contains(up));
    CHECK(!u3.lie_contains(up));
    CHECK(b3.group_contains(up));
    Mat uni = ratmat(F, {{1, 2, 3}, {0, 1, 5}, {0, 0, 1}});
    CHECK(u3.group_contains(uni));
    CHECK(!u3.group_contains(up));

    CHECK(gl2.group_contains(ratmat(F, {{1, 1}, {1, 2}})));
    CHECK(!gl2.group_contains(ratmat(F, {{1, 1}, {2, 2}})));
    CHECK(sl2.group_contains(ratmat(F, {{2, 1}, {1, 1}})));
    CHECK(!sl2.group_contains(ratmat(F, {{2, 0}, {0, 1}})));

    CHECK(gl2.height() == 1);
    CHECK(GroupContext::gl(3).height() == 2);
    CHECK(gl2.roots().size() == 2);
    CHECK(GroupContext::sl(3).roots().size() == 6);
}

TEST_CASE("levi products with radical") {
    auto F = Q();
    auto lev = GroupContext::levi({GroupContext::gl(1), GroupContext::gl(2)}, true);
    CHECK(lev.n == 3);
    CHECK(lev.dim() == 1 + 4 + 2);
    CHECK(lev.block_sizes() == std::vector<long>{1, 2});
    CHECK(!lev.is_reductive());
    Mat m = ratmat(F, {{1, 5, 6}, {0, 2, 3}, {0, 4, 7}});
    CHECK(lev.lie_contains(m));
    m.at(1, 0) = Scalar::one(F);
    CHECK(!lev.lie_contains(m));

    auto red = GroupContext::levi({GroupContext::gl(1), GroupContext::gl(2)}, false);
    CHECK(red.dim() == 5);
    CHECK(red.is_reductive());
    Mat g = ratmat(F, {{2, 0, 0}, {0, 1, 1}, {0, 1, 2}});
    CHECK(red.group_contains(g));
    g.at(0, 1) = Scalar::one(F);
    CHECK(!red.group_contains(g));
    CHECK(lev.group_contains(g));
    CHECK(lev.height() == 1);
}

TEST_CASE("jordan decomposition") {
    auto F = Q();
    // unipotent-style: semisimple part is the identity
    Mat m = ratmat(F, {{1, 1}, {0, 1}});
    auto jp = jordan_decompose(m);
    CHECK(jp.s == Mat::identity(F, 2));
    CHECK(jp.n == ratmat(F, {{0, 1}, {0, 0}}));

    // already semisimple with irrational eigenvalues: nilpotent part is zero
    Mat c = ratmat(F, {{0, 2}, {1, 0}});
    auto jp2 = jordan_decompose(c);
    CHECK(jp2.n.is_zero());
    CHECK(jp2.s == c);

    // 4x4 with charpoly (x^2-2)^2: s = diag(c, c), n = upper coupling
    Mat big(F, 4, 4);
    for (long i = 0; i < 2; ++i)
        for (long j = 0; j < 2; ++j) {
            big.at(i, j) = c.at(i, j);
            big.at(2 + i, 2 + j) = c.at(i, j);
        }
    big.at(0, 2) = Scalar::one(F);
    big.at(1, 3) = Scalar::one(F);
    auto jp3 = jordan_decompose(big);
    CHECK(is_nilpotent_mat(jp3.n));
    CHECK(!jp3.n.is_zero());
    CHECK(bracket(jp3.s, jp3.n).is_zero());
    CHECK(jp3.s + jp3.n == big);
    for (long i = 0; i < 2; ++i)
        for (long j = 0; j < 2; ++j) CHECK(jp3.s.at(i, j) == c.at(i, j));
}

TEST_CASE("sl2 triples") {
    auto F = Q();
    auto sl2 = GroupContext::sl(2);
    Mat Y = ratmat(F, {{0, 0}, {1, 0}});
    auto t = jm_triple(Y, sl2.lie_basis(F));
    CHECK(t.H == ratmat(F, {{1, 0}, {0, -1}}));
    CHECK(bracket(t.X, t.Y) == t.H);
    CHECK(bracket(t.H, t.X) == t.X.scaled(Scalar::of(F, 2)));

    // regular nilpotent in sl3
    auto sl3 = GroupContext::sl(3);
    Mat Y3(F, 3, 3);
    Y3.at(1, 0) = Scalar::one(F);
    Y3.at(2, 1) = Scalar::one(F);
    auto t3 = jm_triple(Y3, sl3.lie_basis(F));
    auto [g, eigs] = diagonalize_rational_semisimple(t3.H);
    CHECK(eigs == std::vector<Rat>{2, 0, -2});
    CHECK(g * t3.H * inverse(g) == ratmat(F, {{2, 0, 0}, {0, 0, 0}, {0, 0, -2}}));

    CHECK(lambda_of(Y, sl2) == Rat(2));
    CHECK(lambda_of(Y3, sl3) == Rat(3));

    // minimal nilpotent in sl3: H = diag(1, 0, -1)
    Mat Ym(F, 3, 3);
    Ym.at(2, 0) = Scalar::one(F);
    auto tm = jm_triple(Ym, sl3.lie_basis(F));
    auto [gm, em] = diagonalize_rational_semisimple(tm.H);
    CHECK(em == std::vector<Rat>{1, 0, -1});
    CHECK(lambda_of(Ym, sl3) == Rat(2));

    CHECK_THROWS_AS(jm_triple(Mat(F, 2, 2)), ZeroInput);
    CHECK_THROWS_AS(jm_triple(ratmat(F, {{1, 0}, {0, -1}})), NotNilpotent);
}

TEST_CASE("orbit dimensions") {
    auto F = Q();
    Mat Y3(F, 3, 3);
    Y3.at(1, 0) = Scalar::one(F);
    Y3.at(2, 1) = Scalar::one(F);
    CHECK(orbit_dim(Y3, GroupContext::sl(3)) == 6);
    CHECK(orbit_dim(Y3, GroupContext::gl(3)) == 6);
    Mat Ym(F, 3, 3);
    Ym.at(2, 0) = Scalar::one(F);
    CHECK(orbit_dim(Ym, GroupContext::sl(3)) == 4);
    Mat E21(F, 2, 2);
    E21.at(1, 0) = Scalar::one(F);
    CHECK(orbit_dim(E21, GroupContext::sl(2)) == 2);
    CHECK(orbit_dim(E21, GroupContext::gl(2)) == 2);
}

TEST_CASE("centralizers and ad matrices") {
    auto F = Q();
    auto sl2 = GroupContext::sl(2);
    Mat H = ratmat(F, {{1, 0}, {0, -1}});
    auto cb = centralizer_basis({H}, sl2);
    CHECK(cb.size() == 1);
    CHECK(bracket(cb[0], H).is_zero());

    Mat E21(F, 2, 2);
    E21.at(1, 0) = Scalar::one(F);
    CHECK(centralizer_basis({E21}, GroupContext::gl(2)).size() == 2);
    CHECK(centralizer_basis({E21}, sl2).size() == 1);

    auto basis = sl2.lie_basis(F);
    Mat adH = ad_matrix(H, basis);
    auto sp = rational_spectrum(adH);
    std::sort(sp.eigs.begin(), sp.eigs.end());
    CHECK(sp.eigs == std::vector<Rat>{-2, 0, 2});
    CHECK(sp.other_projection.is_zero());

    // coordinate round trip
    Mat m = ratmat(F, {{3, 5}, {7, -3}});
    auto v = coords_in_span(m, basis);
    CHECK(from_coords(v, basis) == m);
    Mat id = Mat::identity(F, 2);
    CHECK_THROWS_AS(coords_in_span(id, basis), DimensionMismatch);
}

TEST_CASE("rational spectrum projections") {
    auto F = Q();
    Mat m = ratmat(F, {{1, 1, 0}, {0, 1, 0}, {0, 0, 2}});
    auto sp = rational_spectrum(m);
    CHECK(sp.eigs.size() == 2);
    CHECK(sp.other_projection.is_zero());
    Mat sum(F, 3, 3);
    for (auto& p : sp.projections) {
        CHECK(p * p == p);
        CHECK(bracket(p, m).is_zero());
        sum = sum + p;
    }
    CHECK(sum == Mat::identity(F, 3));

    // mixed: one rational eigenvalue, one irrational pair
    Mat c = ratmat(F, {{0, 0, 3}, {1, 0, 3}, {0, 1, -1}}); // companion of (x-1)(x^2-3) = x^3+... check below
    // charpoly(x) = x^3 + x^2 - 3x - 3 = (x+1)(x^2-3)
    auto sp2 = rational_spectrum(c);
    CHECK(sp2.eigs == std::vector<Rat>{-1});
    CHECK(rank(sp2.other_projection) == 2);
    CHECK(sp2.projections[0] + sp2.other_projection == Mat::identity(F, 3));
}

TEST_CASE("eigen decompositions over K") {
    auto Fi = Field::make(4, 64); // contains i
    Mat rot = ratmat(Fi, {{0, -1}, {1, 0}});
    auto dec = k_eigen_decomposition(rot);
    CHECK(dec.size() == 2);
    Scalar i = root_of_unity(Fi, 4);
    CHECK(((dec[0].first == i && dec[1].first == -i) ||
           (dec[0].first == -i && dec[1].first == i)));
    for (auto& [lam, vs] : dec) CHECK(rot * vs == vs.scaled(lam));

    auto F2 = Field::make_ext(1, {-2, 0, 1}, 64); // Q(sqrt 2)
    Mat sq = ratmat(F2, {{0, 2}, {1, 0}});
    auto dec2 = k_eigen_decomposition(sq);
    CHECK(dec2.size() == 2);
    CHECK(dec2[0].first == -dec2[1].first);

    CHECK_THROWS_AS(k_eigen_decomposition(ratmat(Q(), {{0, 2}, {1, 0}})), FieldTooSmall);
    CHECK_THROWS_AS(k_eigen_decomposition(ratmat(Q(), {{0, -1}, {1, 0}})), FieldTooSmall);

    // joint decomposition of a commuting diagonal family
    auto F = Q();
    Mat d1 = ratmat(F, {{1, 0, 0}, {0, 1, 0}, {0, 0, 2}});
    Mat d2 = ratmat(F, {{3, 0, 0}, {0, 4, 0}, {0, 0, 4}});
    auto joint = simultaneous_eigen_decomposition({d1, d2});
    CHECK(joint.size() == 3);
    for (auto& [tuple, B] : joint) {
        CHECK(B.cols() == 1);
        CHECK(d1 * B == B.scaled(tuple[0]));
        CHECK(d2 * B == B.scaled(tuple[1]));
    }
}

TEST_CASE("nilpotent partitions") {
    auto F = Q();
    Mat reg(F, 3, 3);
    reg.at(0, 1) = Scalar::one(F);
    reg.at(1, 2) = Scalar::one(F);
    CHECK(nilpotent_partition(reg) == std::vector<long>{3});
    Mat sub(F, 3, 3);
    sub.at(0, 1) = Scalar::one(F);
    CHECK(nilpotent_partition(sub) == std::vector<long>{2, 1});
    CHECK(nilpotent_partition(Mat(F, 2, 2)) == std::vector<long>{1, 1});
    CHECK_THROWS_AS(nilpotent_partition(ratmat(F, {{1, 0}, {0, 0}})), NotNilpotent);
}

TEST_CASE("lower central series") {
    auto F = Q();
    auto u4 = GroupContext::strict_upper(4).lie_basis(F);
    auto levels = lower_central_series(u4);
    CHECK(levels.size() == 3);
    CHECK(levels[0].size() == 6);
    CHECK(levels[1].size() == 3);
    CHECK(levels[2].size() == 1);
    CHECK_THROWS_AS(lower_central_series(GroupContext::sl(2).lie_basis(F)), NotNilpotent);
}

TEST_CASE("lattice invariants") {
    auto li2 = lattice_invariants(GroupContext::sl(2));
    CHECK(li2.I == 2);
    CHECK(li2.J == 2);
    CHECK(li2.degrees == std::vector<long>{2});
    CHECK(li2.coxeter == 2);

    auto lg2 = lattice_invariants(GroupContext::gl(2));
    CHECK(lg2.I == 2);
    CHECK(lg2.J == 2);
    CHECK(lg2.degrees == std::vector<long>{1, 2});

    auto lg3 = lattice_invariants(GroupContext::gl(3));
    CHECK(lg3.I == 3);
    CHECK(lg3.J == 3);
    CHECK(lg3.coxeter == 3);

    auto lt = lattice_invariants(GroupContext::diag_torus(3));
    CHECK(lt.I == 1);
    CHECK(lt.J == 1);
    CHECK(lt.coxeter == 1);

    auto lev = GroupContext::levi({GroupContext::gl(2), GroupContext::gl(3)}, false);
    auto ll = lattice_invariants(lev);
    CHECK(ll.I == 6);
    CHECK(ll.J == 6);
    CHECK(ll.degrees == std::vector<long>{1, 2, 3});
    CHECK(ll.coxeter == 3);

    CHECK_THROWS(lattice_invariants(GroupContext::strict_upper(3)));
}
