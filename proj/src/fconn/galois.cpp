#include "fconn/galois.hpp"
#include <algorithm>
#include <random>
#include <sstream>

namespace fconn {

namespace {

long mod_pos(Int e, long m) {
    Int r = e % m;
    if (r < 0) r += m;
    return r.convert_to<long>();
}

// primitive b-th root of unity; unlike the raw field lookup this knows that
// -1 is always available
Scalar unity(const FieldPtr& F, long b) {
    if (b == 1) return Scalar::one(F);
    if (b == 2) return -Scalar::one(F);
    return root_of_unity(F, b);
}

// w^e for the b-th root of unity w, exponent reduced mod b
Scalar root_pow(const FieldPtr& F, long b, Int e) {
    if (b == 1) return Scalar::one(F);
    return unity(F, b).pow(mod_pos(e, b));
}

Rat rat_ceil(const Rat& q) { return Rat(-rat_floor(-q)); }

// class representative of a residue eigenvalue: the rational projection is
// folded into [0,1) over the base field, and removed entirely over the
// closure (where every rational shear is available)
Scalar class_rep(const Scalar& lam, bool over_closure) {
    Rat p = rational_projection(lam);
    Rat drop = over_closure ? p : Rat(rat_floor(p));
    return lam - Scalar::of(lam.field(), drop);
}

MonodromyInvariant invariants_of(const Mat& residue, bool over_closure) {
    JordanPair jp = jordan_decompose(residue);
    auto dec = k_eigen_decomposition(jp.s);
    // group eigenvalues by class; merge partitions of the nilpotent part
    std::vector<std::pair<Scalar, long>> reps;
    std::vector<std::vector<long>> parts;
    for (auto& [lam, basis] : dec) {
        Scalar rep = class_rep(lam, over_closure);
        auto restr = solve(basis, jp.n * basis);
        if (!restr) throw Error("nilpotent part does not preserve an eigenspace");
        std::vector<long> part = nilpotent_partition(*restr);
        long idx = -1;
        for (size_t i = 0; i < reps.size(); ++i)
            if (reps[i].first == rep) { idx = (long)i; break; }
        if (idx < 0) {
            reps.push_back({rep, basis.cols()});
            parts.push_back(part);
        } else {
            reps[idx].second += basis.cols();
            auto& p = parts[idx];
            p.insert(p.end(), part.begin(), part.end());
        }
    }
    std::vector<long> order(reps.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = (long)i;
    std::sort(order.begin(), order.end(), [&](long a, long b) {
        return reps[a].first.cmp(reps[b].first) < 0;
    });
    MonodromyInvariant inv;
    for (long i : order) {
        std::sort(parts[i].begin(), parts[i].end(), std::greater<long>());
        inv.v.push_back(reps[i]);
        inv.orbit.push_back(parts[i]);
    }
    return inv;
}

} // namespace

bool MonodromyInvariant::operator==(const MonodromyInvariant& o) const {
    if (v.size() != o.v.size()) return false;
    for (size_t i = 0; i < v.size(); ++i)
        if (v[i].second != o.v[i].second || !(v[i].first == o.v[i].first)) return false;
    return orbit == o.orbit;
}

std::string MonodromyInvariant::str() const {
    std::ostringstream os;
    for (size_t i = 0; i < v.size(); ++i) {
        os << (i ? ", " : "") << v[i].first.str() << "^" << v[i].second << " [";
        for (size_t j = 0; j < orbit[i].size(); ++j) os << (j ? " " : "") << orbit[i][j];
        os << "]";
    }
    return os.str();
}

CanonicalForm galois_act(long k, const CanonicalForm& B, const FieldPtr& F) {
    CanonicalForm out = B;
    for (size_t j = 0; j < B.levels.size(); ++j) {
        Rat br = Rat(B.ram) * B.levels[j];
        if (!is_integer(br)) throw Error("level denominator exceeds the form's grid");
        Scalar w = root_pow(F, B.ram, -rat_num(br) * k);
        out.irr_coeffs[j] = B.irr_coeffs[j].scaled(w);
    }
    return out;
}

MatSeries galois_act_series(const MatSeries& s) {
    long m = s.ram();
    const FieldPtr& F = s.field();
    MatSeries out(F, s.dim(), m, s.prec());
    for (auto& [key, c] : s.raw())
        out.set_coeff(Rat(Int(key), Int(m)), c.scaled(root_pow(F, m, Int(-key))));
    return out;
}

bool is_twisted_cocycle(const TwistedCocycle& tc, const CanonicalForm& B,
                        const GroupContext& ctx) {
    const Mat& phi = tc.phi;
    if (!phi.is_square() || phi.rows() != ctx.size()) return false;
    if (!ctx.group_contains(phi)) return false;
    const FieldPtr& F = phi.field();
    long n = phi.rows();
    // Ad(phi)^b = 1: phi^b is a central scalar
    Mat p = Mat::identity(F, n);
    for (long i = 0; i < tc.b; ++i) p = p * phi;
    Scalar c = p.at(0, 0);
    if (c.is_zero() || p != Mat::identity(F, n).scaled(c)) return false;
    // Ad(phi) fixes the residue and scales each D_j by w^(-b r_j)
    if (phi * B.residue != B.residue * phi) return false;
    if (tc.b % B.ram != 0) return false;
    for (size_t j = 0; j < B.levels.size(); ++j) {
        Rat br = Rat(B.ram) * B.levels[j];
        if (!is_integer(br)) return false;
        Scalar w = root_pow(F, tc.b, -rat_num(br) * Int(tc.b / B.ram));
        if (phi * B.irr_coeffs[j] != B.irr_coeffs[j].scaled(w) * phi) return false;
    }
    return true;
}

MatSeries descend(const CanonicalForm& B, const TwistedCocycle& tc,
                  const GroupContext& ctx, const FieldPtr& F, const Rat& prec) {
    long n = ctx.size();
    long b = tc.b;
    Mat phi = tc.phi.lifted(F);
    auto dec = k_eigen_decomposition(phi);
    long total = 0;
    for (auto& [lam, basis] : dec) total += basis.cols();
    if (total != n) throw NotACocycle("descent datum is not semisimple");

    // eigenvalue w_b^(-k) of phi  ->  shear exponent k/b on that eigenspace,
    // folded into (-1/2, 1/2]; half-integer k occurs when phi^b is a central
    // scalar
    auto fold = [](Rat t) {
        t -= Rat(rat_floor(t));
        if (t > Rat(1, 2)) t -= 1;
        return t;
    };
    auto exponent_of = [&](const Scalar& lam) -> Rat {
        if (b == 1) {
            if (lam == Scalar::one(F)) return Rat(0);
        } else {
            Scalar w = unity(F, b);
            Scalar pw = Scalar::one(F);
            for (long j = 0; j < b; ++j) {
                if (lam == pw) return fold(Rat(-j, b));
                pw = pw * w;
            }
            try {
                Scalar z = unity(F, 2 * b);
                Scalar zp = Scalar::one(F);
                for (long j = 0; j < 2 * b; ++j) {
                    if (lam == zp) return fold(Rat(-j, 2 * b));
                    zp = zp * z;
                }
            } catch (const FieldTooSmall&) {
                if (lam.pow(2 * b) == Scalar::one(F))
                    throw FieldTooSmall("descent needs a root of unity of order "
                                        + std::to_string(2 * b));
            }
        }
        throw NotACocycle("spectrum of the descent datum is not compatible with the cover");
    };

    std::vector<Rat> taus;
    Mat P(F, n, n);
    long col = 0;
    for (auto& [lam, basis] : dec) {
        Rat tau = exponent_of(lam);
        for (long j = 0; j < basis.cols(); ++j, ++col) {
            taus.push_back(tau);
            for (long i = 0; i < n; ++i) P.at(i, col) = basis.at(i, j);
        }
    }
    // an integer total defect can be spread out so determinant-constrained
    // groups stay inside their Lie algebra
    Rat defect(0);
    for (auto& t : taus) defect += t;
    while (is_integer(defect) && defect > 0) {
        auto it = std::max_element(taus.begin(), taus.end());
        *it -= 1;
        defect -= 1;
    }
    while (is_integer(defect) && defect < 0) {
        auto it = std::min_element(taus.begin(), taus.end());
        *it += 1;
        defect += 1;
    }
    long den = 1;
    for (auto& t : taus) den = lcm_long(den, rat_den(t).convert_to<long>());
    ShearAtom sh;
    sh.den = den;
    for (auto& t : taus) sh.lam.push_back(rat_num(t * den));

    GaugeCert y;
    y.atoms.push_back(ConstAtom{inverse(P)});
    y.atoms.push_back(sh);
    y.atoms.push_back(ConstAtom{P});
    MatSeries A = apply_gauge(y, B.as_series(F, n, prec));

    for (const Rat& q : A.support())
        if (!is_integer(q)) throw NotACocycle("descent left the integer grid");
    MatSeries out(F, n, 1, rat_ceil(A.prec()));
    for (const Rat& q : A.support()) out.set_coeff(q, A.coeff(q));
    return out;
}

TwistedCocycle extract_cocycle(const ReductionResult& rr, long cover) {
    long b = lcm_long(rr.used_ramification, rr.residue_ram);
    if (cover) {
        if (cover % b != 0) throw Error("requested cover does not refine the certificate grid");
        b = cover;
    }
    long n = rr.series.dim();
    if (b == 1) return {1, Mat::identity(rr.series.field(), n)};
    FieldPtr F = rr.series.field()->with_root_of_unity(b);
    const Rat& p = rr.series.prec();
    MatSeries yinv = expand(rr.certificate, F, n, p).with_ram(b);
    MatSeries y = expand(invert(rr.certificate), F, n, p).with_ram(b);
    MatSeries phi_series = yinv * galois_act_series(y);
    Mat phi = phi_series.coeff(0);
    if (!(phi_series - MatSeries::monomial(F, n, Rat(0), phi, phi_series.prec())).is_zero())
        throw NotACocycle("certificate word does not induce a constant cocycle");
    return {b, phi};
}

namespace {

// base-field residue classes of a regular reduction. When the reducing word
// went through ramified shears the raw residue classes are shifted by
// multiples of 1/b, so the form is pulled back to the integer grid through
// its descent cocycle before reading them off.
MonodromyInvariant f_invariants(const ReductionResult& rr, const GroupContext& ctx) {
    if (rr.used_ramification == 1) return invariants_of(rr.residue_unnormalized, false);
    try {
        TwistedCocycle tc = extract_cocycle(rr);
        MatSeries down = descend(rr.canonical, tc, ctx, tc.phi.field(), Rat(4));
        ReductionResult r2 = reduce(down, ctx);
        if (r2.used_ramification != 1)
            throw Undecidable("descended form still reduces through a cover");
        return invariants_of(r2.residue_unnormalized, false);
    } catch (const NotACocycle& e) {
        throw Undecidable(std::string("cannot descend the residue data: ") + e.what());
    }
}

} // namespace

MonodromyInvariant regular_invariants(const MatSeries& A, const GroupContext& ctx) {
    ReductionResult rr = reduce(A, ctx);
    if (!rr.canonical.levels.empty())
        throw NotRegular("connection has principal level " + rat_str(rr.canonical.levels.front()));
    return f_invariants(rr, ctx);
}

namespace {

// largest integer gap among the rational eigenvalues of a residue; the
// regular determinacy window is measured against it
long integer_gap(const Mat& residue) {
    long k = 0;
    try {
        JordanPair jp = jordan_decompose(residue);
        auto roots = rational_roots(squarefree_part(charpoly(jp.s)));
        for (auto& [a, ma] : roots)
            for (auto& [b, mb] : roots) {
                Rat d = a - b;
                if (is_integer(d) && Rat(k) < d) k = rat_num(d).convert_to<long>();
            }
    } catch (const Error&) {
        // irrational spectrum: conjugate eigenvalues never differ by an
        // integer, so no alignment gap to account for
    }
    return k;
}

std::optional<Int> iroot(Int v, long n) {
    if (v < 0) {
        if (n % 2 == 0) return std::nullopt;
        auto r = iroot(-v, n);
        if (!r) return std::nullopt;
        return -*r;
    }
    Int lo = 0, hi = v + 1;
    while (lo < hi) {
        Int mid = (lo + hi) / 2;
        Int p = 1;
        for (long i = 0; i < n; ++i) p *= mid;
        if (p < v)
            lo = mid + 1;
        else
            hi = mid;
    }
    Int p = 1;
    for (long i = 0; i < n; ++i) p *= lo;
    if (p == v) return lo;
    return std::nullopt;
}

// constant group element with g C1 g^-1 = C2, searched inside the
// intertwiner space g C1 = C2 g (the canonical residue fixes the class only
// up to constant conjugation, e.g. the scale of a nilpotent part)
std::optional<Mat> conjugator(const Mat& C1, const Mat& C2, const GroupContext& ctx) {
    const FieldPtr& F = C1.field();
    long n = C1.rows();
    Mat op(F, n * n, n * n);
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j)
            for (long k = 0; k < n; ++k) {
                op.at(i * n + j, i * n + k) += C1.at(k, j);
                op.at(i * n + j, k * n + j) -= C2.at(i, k);
            }
    Mat ker = nullspace(op);
    if (ker.cols() == 0) return std::nullopt;
    auto unpack = [&](const std::vector<Rat>& coeff) {
        Mat g(F, n, n);
        for (long c = 0; c < ker.cols(); ++c)
            if (coeff[c] != 0)
                for (long i = 0; i < n; ++i)
                    for (long j = 0; j < n; ++j)
                        g.at(i, j) += coeff[c] * ker.at(i * n + j, c);
        return g;
    };
    std::vector<std::vector<Rat>> combos;
    for (long c = 0; c < ker.cols(); ++c) {
        std::vector<Rat> e(ker.cols(), Rat(0));
        e[c] = Rat(1);
        combos.push_back(e);
    }
    std::mt19937 rng(12021); // deterministic small-coefficient sweep
    for (int t = 0; t < 64; ++t) {
        std::vector<Rat> e(ker.cols());
        for (auto& x : e) x = Rat((long)(rng() % 7) - 3);
        combos.push_back(std::move(e));
    }
    for (auto& e : combos) {
        Mat g = unpack(e);
        Scalar d = det(g);
        if (d == Scalar::zero(F)) continue;
        if (ctx.group_contains(g)) return g;
        if (ctx.kind == GroupKind::SL) {
            // rescale into the unimodular group when 1/det has an n-th root
            try {
                Rat r = d.as_rat();
                auto p = iroot(rat_den(r), n), q = iroot(rat_num(r), n);
                if (p && q && *q != 0) {
                    Scalar c = Scalar::of(F, Rat(*p) / Rat(*q));
                    Mat g2 = g;
                    for (long i = 0; i < n; ++i)
                        for (long j = 0; j < n; ++j) g2.at(i, j) *= c;
                    if (ctx.group_contains(g2)) return g2;
                }
            } catch (const Error&) {
            }
        }
    }
    return std::nullopt;
}

// first exponent where the gauged copy of A1 stops matching A2, provided it
// lies past `threshold` so the remaining tail cannot move the class; nullopt
// when the witness is inconclusive
std::optional<Rat> conclusive_window(const MatSeries& A1, const MatSeries& A2,
                                     const GaugeCert& w, const Rat& threshold) {
    try {
        MatSeries G = apply_gauge(w, A1);
        Rat W = std::min(G.prec(), A2.prec());
        MatSeries diff = G.truncated(W) - A2.truncated(W);
        auto e = diff.val();
        if (!e) return W >= threshold ? std::optional<Rat>(W) : std::nullopt;
        if (*e >= threshold) return *e;
    } catch (const Error&) {
    }
    return std::nullopt;
}

} // namespace

EquivalenceReport equivalent(const MatSeries& A1, const MatSeries& A2,
                             const GroupContext& ctx, bool over_closure) {
    ReductionResult r1 = reduce(A1, ctx);
    ReductionResult r2 = reduce(A2, ctx);
    const CanonicalForm& c1 = r1.canonical;
    const CanonicalForm& c2 = r2.canonical;

    auto threshold = [&]() {
        if (c1.levels.empty()) {
            long k = std::max(integer_gap(r1.residue_unnormalized),
                              integer_gap(r2.residue_unnormalized));
            return Rat(-1) + determinacy_window(ctx, Rat(k), WindowKind::Regular);
        }
        Rat r = c1.levels.front();
        return r + determinacy_window(ctx, r, WindowKind::Irregular);
    };

    auto with_witness = [&](EquivalenceReport rep) {
        if (!rep.equivalent || rep.witness) return rep;
        GaugeCert w = compose(invert(r2.certificate), r1.certificate);
        if (auto win = conclusive_window(A1, A2, w, threshold())) {
            rep.witness = w;
            rep.witness_window = *win;
        }
        return rep;
    };

    if (c1.levels != c2.levels)
        return {false, "principal level data differ", std::nullopt};

    auto is_diagonal = [](const Mat& m) {
        for (long i = 0; i < m.rows(); ++i)
            for (long j = 0; j < m.cols(); ++j)
                if (i != j && !m.at(i, j).is_zero()) return false;
        return true;
    };

    if (c1.levels.empty()) {
        MonodromyInvariant i1 = over_closure ? invariants_of(r1.residue_unnormalized, true)
                                             : f_invariants(r1, ctx);
        MonodromyInvariant i2 = over_closure ? invariants_of(r2.residue_unnormalized, true)
                                             : f_invariants(r2, ctx);
        if (!(i1 == i2))
            return {false, "monodromy invariants differ: {" + i1.str() + "} vs {" + i2.str() + "}",
                    std::nullopt};
        EquivalenceReport rep{true, "monodromy invariants agree", std::nullopt};
        rep = with_witness(rep);
        if (!rep.witness) {
            // the canonical residues may still differ by a constant
            // conjugation; splice one in between the two reduction words
            try {
                if (auto cg = conjugator(c1.residue, c2.residue, ctx)) {
                    GaugeCert w = r1.certificate;
                    w.atoms.push_back(ConstAtom{*cg});
                    w = compose(invert(r2.certificate), w);
                    if (auto win = conclusive_window(A1, A2, w, threshold())) {
                        rep.witness = w;
                        rep.witness_window = *win;
                    }
                }
            } catch (const Error&) {
            }
        }
        if (!rep.witness && is_diagonal(c1.residue) && is_diagonal(c2.residue)) {
            // residues are diagonal and in place: shift by the cocharacter of
            // the per-entry projection differences
            ShearAtom sh;
            sh.den = 1;
            bool ok = true;
            for (long i = 0; i < ctx.size(); ++i) {
                Rat d = rational_projection(c1.residue.at(i, i))
                        - rational_projection(c2.residue.at(i, i));
                if (!over_closure && !is_integer(d)) { ok = false; break; }
                sh.den = lcm_long(sh.den, rat_den(d).convert_to<long>());
            }
            if (ok) {
                for (long i = 0; i < ctx.size(); ++i) {
                    Rat d = rational_projection(c2.residue.at(i, i))
                            - rational_projection(c1.residue.at(i, i));
                    sh.lam.push_back(rat_num(d * sh.den));
                }
                GaugeCert w = r1.certificate;
                w.atoms.push_back(sh);
                w = compose(invert(r2.certificate), w);
                if (auto win = conclusive_window(A1, A2, w, threshold())) {
                    rep.witness = w;
                    rep.witness_window = *win;
                }
            }
        }
        return rep;
    }

    // irregular: canonical coefficient data must match
    if (c1.ram != c2.ram) return {false, "cover orders differ", std::nullopt};
    for (size_t j = 0; j < c1.levels.size(); ++j)
        if (c1.irr_coeffs[j] != c2.irr_coeffs[j])
            return {false, "irregular coefficients differ at level " + rat_str(c1.levels[j]),
                    std::nullopt};
    if (c1.normalized && c2.normalized) {
        if (c1.residue != c2.residue)
            return {false, "residues differ", std::nullopt};
    } else {
        MonodromyInvariant i1 = invariants_of(c1.residue, over_closure);
        MonodromyInvariant i2 = invariants_of(c2.residue, over_closure);
        if (!(i1 == i2)) return {false, "residue invariants differ", std::nullopt};
    }
    long m = lcm_long(lcm_long(r1.used_ramification, r1.residue_ram),
                      lcm_long(r2.used_ramification, r2.residue_ram));
    if (over_closure || m == 1)
        return with_witness({true, "canonical forms agree", std::nullopt});

    // base-field classification on a ramified cover: compare the descent
    // cocycles as Ad-conjugacy classes via the spectrum of conjugation
    TwistedCocycle t1, t2;
    try {
        t1 = extract_cocycle(r1, m);
        t2 = extract_cocycle(r2, m);
    } catch (const NotACocycle& e) {
        throw Undecidable(std::string("base-field comparison on a cover: ") + e.what());
    }
    auto basis = GroupContext::gl(ctx.size()).lie_basis(t1.phi.field());
    Mat inv1 = inverse(t1.phi), inv2 = inverse(t2.phi);
    Mat ad1 = operator_matrix([&](const Mat& x) { return t1.phi * x * inv1; }, basis);
    Mat ad2 = operator_matrix([&](const Mat& x) { return t2.phi * x * inv2; }, basis);
    if (!poly_sub(charpoly(ad1), charpoly(ad2)).is_zero())
        return {false, "descent cocycle classes differ", std::nullopt};
    return with_witness({true, "canonical forms and cocycle classes agree", std::nullopt});
}

CoxeterReport coxeter_check(const ReductionResult& rr, const GroupContext& ctx) {
    LatticeInvariants li = lattice_invariants(ctx);
    CoxeterReport rep;
    rep.b = rr.canonical.ram;
    for (long d : li.degrees)
        if (d % rep.b == 0) rep.divides_degree = true;
    rep.at_coxeter = rep.b > 1 && rep.b == li.coxeter;
    JordanPair jp = jordan_decompose(rr.canonical.residue);
    long off = 0;
    for (long sz : ctx.block_sizes()) {
        for (long i = 0; i < jp.s.rows() && rep.residue_central; ++i)
            for (long j = off; j < off + sz; ++j) {
                if (i == j) {
                    if (!(jp.s.at(i, j) == jp.s.at(off, off))) rep.residue_central = false;
                } else if (i >= off && i < off + sz) {
                    if (!jp.s.at(i, j).is_zero()) rep.residue_central = false;
                }
            }
        off += sz;
    }
    return rep;
}

} // namespace fconn
