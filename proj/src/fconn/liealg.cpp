#include "fconn/liealg.hpp"
#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

namespace fconn {

// ---- GroupContext ----

GroupContext GroupContext::gl(long n) { return {GroupKind::GL, n, {}, false}; }
GroupContext GroupContext::sl(long n) { return {GroupKind::SL, n, {}, false}; }
GroupContext GroupContext::diag_torus(long n) { return {GroupKind::DiagTorus, n, {}, false}; }
GroupContext GroupContext::upper_triangular(long n) {
    return {GroupKind::UpperTriangular, n, {}, false};
}
GroupContext GroupContext::strict_upper(long n) { return {GroupKind::StrictUpper, n, {}, false}; }

GroupContext GroupContext::levi(std::vector<GroupContext> fs, bool radical) {
    GroupContext c;
    c.kind = GroupKind::LeviProduct;
    c.factors = std::move(fs);
    c.radical = radical;
    c.n = 0;
    for (auto& f : c.factors) {
        if (f.kind == GroupKind::LeviProduct || f.kind == GroupKind::UpperTriangular ||
            f.kind == GroupKind::StrictUpper)
            throw ParseError("Levi factors must be GL, SL or DiagTorus");
        c.n += f.n;
    }
    return c;
}

std::vector<long> GroupContext::block_sizes() const {
    if (kind == GroupKind::LeviProduct) {
        std::vector<long> s;
        for (auto& f : factors) s.push_back(f.n);
        return s;
    }
    return {n};
}

long GroupContext::dim() const {
    switch (kind) {
        case GroupKind::GL: return n * n;
        case GroupKind::SL: return n * n - 1;
        case GroupKind::DiagTorus: return n;
        case GroupKind::UpperTriangular: return n * (n + 1) / 2;
        case GroupKind::StrictUpper: return n * (n - 1) / 2;
        case GroupKind::LeviProduct: {
            long d = 0;
            for (auto& f : factors) d += f.dim();
            if (radical) {
                long off = 0;
                for (size_t a = 0; a < factors.size(); ++a) {
                    long after = 0;
                    for (size_t b = a + 1; b < factors.size(); ++b) after += factors[b].n;
                    d += factors[a].n * after;
                    off += factors[a].n;
                }
            }
            return d;
        }
    }
    return 0;
}

std::vector<Mat> GroupContext::lie_basis(const FieldPtr& F) const {
    std::vector<Mat> b;
    auto unit = [&](long i, long j) {
        Mat m(F, n, n);
        m.at(i, j) = Scalar::one(F);
        return m;
    };
    switch (kind) {
        case GroupKind::GL:
            for (long i = 0; i < n; ++i)
                for (long j = 0; j < n; ++j) b.push_back(unit(i, j));
            break;
        case GroupKind::SL:
            for (long i = 0; i < n; ++i)
                for (long j = 0; j < n; ++j)
                    if (i != j) b.push_back(unit(i, j));
            for (long i = 0; i + 1 < n; ++i) b.push_back(unit(i, i) - unit(i + 1, i + 1));
            break;
        case GroupKind::DiagTorus:
            for (long i = 0; i < n; ++i) b.push_back(unit(i, i));
            break;
        case GroupKind::UpperTriangular:
            for (long i = 0; i < n; ++i)
                for (long j = i; j < n; ++j) b.push_back(unit(i, j));
            break;
        case GroupKind::StrictUpper:
            for (long i = 0; i < n; ++i)
                for (long j = i + 1; j < n; ++j) b.push_back(unit(i, j));
            break;
        case GroupKind::LeviProduct: {
            long off = 0;
            std::vector<long> offs;
            for (auto& f : factors) {
                offs.push_back(off);
                for (const Mat& fb : f.lie_basis(F)) {
                    Mat m(F, n, n);
                    for (long i = 0; i < f.n; ++i)
                        for (long j = 0; j < f.n; ++j) m.at(off + i, off + j) = fb.at(i, j);
                    b.push_back(m);
                }
                off += f.n;
            }
            if (radical) {
                for (size_t a = 0; a < factors.size(); ++a)
                    for (size_t c = a + 1; c < factors.size(); ++c)
                        for (long i = 0; i < factors[a].n; ++i)
                            for (long j = 0; j < factors[c].n; ++j)
                                b.push_back(unit(offs[a] + i, offs[c] + j));
            }
            break;
        }
    }
    return b;
}

bool GroupContext::lie_contains(const Mat& m) const {
    if (m.rows() != n || m.cols() != n) return false;
    switch (kind) {
        case GroupKind::GL: return true;
        case GroupKind::SL: return m.trace().is_zero();
        case GroupKind::DiagTorus:
            for (long i = 0; i < n; ++i)
                for (long j = 0; j < n; ++j)
                    if (i != j && !m.at(i, j).is_zero()) return false;
            return true;
        case GroupKind::UpperTriangular:
            for (long i = 0; i < n; ++i)
                for (long j = 0; j < i; ++j)
                    if (!m.at(i, j).is_zero()) return false;
            return true;
        case GroupKind::StrictUpper:
            for (long i = 0; i < n; ++i)
                for (long j = 0; j <= i; ++j)
                    if (!m.at(i, j).is_zero()) return false;
            return true;
        case GroupKind::LeviProduct: {
            long off = 0;
            for (auto& f : factors) {
                Mat blk(m.field(), f.n, f.n);
                for (long i = 0; i < f.n; ++i)
                    for (long j = 0; j < f.n; ++j) blk.at(i, j) = m.at(off + i, off + j);
                if (!f.lie_contains(blk)) return false;
                off += f.n;
            }
            // off-block entries
            long oa = 0;
            for (auto& fa : factors) {
                long ob = 0;
                for (auto& fb : factors) {
                    if (&fa != &fb) {
                        bool upper = ob > oa;
                        for (long i = 0; i < fa.n; ++i)
                            for (long j = 0; j < fb.n; ++j) {
                                if (oa + i >= ob && oa + i < ob + fb.n) continue; // same block impossible here
                                const Scalar& v = m.at(oa + i, ob + j);
                                if (!v.is_zero() && !(radical && upper)) return false;
                            }
                    }
                    ob += fb.n;
                }
                oa += fa.n;
            }
            return true;
        }
    }
    return false;
}

bool GroupContext::lie_contains_series(const MatSeries& s) const {
    for (auto& [k, m] : s.raw())
        if (!lie_contains(m)) return false;
    return true;
}

bool GroupContext::group_contains(const Mat& g) const {
    if (g.rows() != n || g.cols() != n) return false;
    switch (kind) {
        case GroupKind::GL: {
            try {
                (void)inverse(g);
            } catch (const NotInvertible&) {
                return false;
            }
            return true;
        }
        case GroupKind::SL: return det(g) == Scalar::one(g.field());
        case GroupKind::DiagTorus: {
            for (long i = 0; i < n; ++i)
                for (long j = 0; j < n; ++j) {
                    if (i != j && !g.at(i, j).is_zero()) return false;
                    if (i == j && g.at(i, j).is_zero()) return false;
                }
            return true;
        }
        case GroupKind::UpperTriangular: {
            for (long i = 0; i < n; ++i) {
                if (g.at(i, i).is_zero()) return false;
                for (long j = 0; j < i; ++j)
                    if (!g.at(i, j).is_zero()) return false;
            }
            return true;
        }
        case GroupKind::StrictUpper: {
            for (long i = 0; i < n; ++i) {
                if (g.at(i, i) != Scalar::one(g.field())) return false;
                for (long j = 0; j < i; ++j)
                    if (!g.at(i, j).is_zero()) return false;
            }
            return true;
        }
        case GroupKind::LeviProduct: {
            long off = 0;
            for (auto& f : factors) {
                Mat blk(g.field(), f.n, f.n);
                for (long i = 0; i < f.n; ++i)
                    for (long j = 0; j < f.n; ++j) blk.at(i, j) = g.at(off + i, off + j);
                if (!f.group_contains(blk)) return false;
                off += f.n;
            }
            long oa = 0;
            for (size_t a = 0; a < factors.size(); ++a) {
                long ob = 0;
                for (size_t b = 0; b < factors.size(); ++b) {
                    if (a != b && !(radical && b > a)) {
                        for (long i = 0; i < factors[a].n; ++i)
                            for (long j = 0; j < factors[b].n; ++j)
                                if (!g.at(oa + i, ob + j).is_zero()) return false;
                    }
                    ob += factors[b].n;
                }
                oa += factors[a].n;
            }
            return true;
        }
    }
    return false;
}

std::vector<std::pair<long, long>> GroupContext::roots() const {
    std::vector<std::pair<long, long>> r;
    switch (kind) {
        case GroupKind::GL:
        case GroupKind::SL:
            for (long i = 0; i < n; ++i)
                for (long j = 0; j < n; ++j)
                    if (i != j) r.emplace_back(i, j);
            break;
        case GroupKind::LeviProduct: {
            long off = 0;
            for (auto& f : factors) {
                for (auto [i, j] : f.roots()) r.emplace_back(off + i, off + j);
                off += f.n;
            }
            break;
        }
        default: break;
    }
    return r;
}

long GroupContext::height() const {
    switch (kind) {
        case GroupKind::GL:
        case GroupKind::SL: return n - 1;
        case GroupKind::LeviProduct: {
            long h = 0;
            for (auto& f : factors) h = std::max(h, f.height());
            return h;
        }
        default: return 0;
    }
}

bool GroupContext::is_reductive() const {
    switch (kind) {
        case GroupKind::GL:
        case GroupKind::SL:
        case GroupKind::DiagTorus: return true;
        case GroupKind::LeviProduct: return !radical;
        default: return false;
    }
}

long GroupContext::rank_ss() const {
    switch (kind) {
        case GroupKind::GL:
        case GroupKind::SL: return n - 1;
        case GroupKind::LeviProduct: {
            long r = 0;
            for (auto& f : factors) r += f.rank_ss();
            return r;
        }
        default: return 0;
    }
}

long GroupContext::dim_der() const {
    switch (kind) {
        case GroupKind::GL:
        case GroupKind::SL: return n * n - 1;
        case GroupKind::LeviProduct: {
            long d = 0;
            for (auto& f : factors) d += f.dim_der();
            return d;
        }
        default: return 0;
    }
}

std::string GroupContext::str() const {
    switch (kind) {
        case GroupKind::GL: return "GL(" + std::to_string(n) + ")";
        case GroupKind::SL: return "SL(" + std::to_string(n) + ")";
        case GroupKind::DiagTorus: return "T(" + std::to_string(n) + ")";
        case GroupKind::UpperTriangular: return "B(" + std::to_string(n) + ")";
        case GroupKind::StrictUpper: return "U(" + std::to_string(n) + ")";
        case GroupKind::LeviProduct: {
            std::string s = "L[";
            for (size_t i = 0; i < factors.size(); ++i)
                s += factors[i].str() + (i + 1 < factors.size() ? "x" : "");
            s += radical ? "]+U" : "]";
            return s;
        }
    }
    return "?";
}

long height(const GroupContext& ctx) { return ctx.height(); }

// ---- span helpers ----

namespace {
Mat vectorize_all(const std::vector<Mat>& basis) {
    if (basis.empty()) throw ZeroInput("empty basis");
    long n2 = basis[0].rows() * basis[0].cols();
    Mat B(basis[0].field(), n2, (long)basis.size());
    for (size_t k = 0; k < basis.size(); ++k)
        for (long i = 0; i < basis[k].rows(); ++i)
            for (long j = 0; j < basis[k].cols(); ++j)
                B.at(i * basis[k].cols() + j, (long)k) = basis[k].at(i, j);
    return B;
}

Mat vectorize_one(const Mat& m, const FieldPtr& F) {
    Mat v(F, m.rows() * m.cols(), 1);
    for (long i = 0; i < m.rows(); ++i)
        for (long j = 0; j < m.cols(); ++j) v.at(i * m.cols() + j, 0) = m.at(i, j).lifted(F);
    return v;
}
} // namespace

std::vector<Scalar> coords_in_span(const Mat& m, const std::vector<Mat>& basis) {
    Mat B = vectorize_all(basis);
    auto x = solve(B, vectorize_one(m, B.field()));
    if (!x) throw DimensionMismatch("matrix is not in the span of the basis");
    std::vector<Scalar> v;
    for (long i = 0; i < x->rows(); ++i) v.push_back(x->at(i, 0));
    return v;
}

Mat from_coords(const std::vector<Scalar>& v, const std::vector<Mat>& basis) {
    if (v.size() != basis.size()) throw DimensionMismatch("coords length");
    Mat m(basis[0].field(), basis[0].rows(), basis[0].cols());
    for (size_t k = 0; k < basis.size(); ++k) m = m + basis[k].scaled(v[k]);
    return m;
}

Mat operator_matrix(const std::function<Mat(const Mat&)>& op, const std::vector<Mat>& basis) {
    Mat B = vectorize_all(basis);
    Mat rhs(B.field(), B.rows(), (long)basis.size());
    for (size_t k = 0; k < basis.size(); ++k) {
        Mat img = vectorize_one(op(basis[k]), B.field());
        for (long i = 0; i < B.rows(); ++i) rhs.at(i, (long)k) = img.at(i, 0);
    }
    auto x = solve(B, rhs);
    if (!x) throw DimensionMismatch("operator does not preserve the span");
    return *x;
}

Mat ad_matrix(const Mat& A, const std::vector<Mat>& basis) {
    return operator_matrix([&](const Mat& b) { return bracket(A, b); }, basis);
}

// ---- Jordan decomposition ----

namespace {
SPoly poly_mod_reduce(const SPoly& a, const SPoly& mod) {
    SPoly q, r;
    poly_divmod(a, mod, q, r);
    return r;
}

SPoly poly_compose_mod(const SPoly& outer, const SPoly& inner, const SPoly& mod) {
    SPoly acc;
    acc.F = outer.F;
    for (auto it = outer.c.rbegin(); it != outer.c.rend(); ++it) {
        acc = poly_mod_reduce(poly_mul(acc, inner), mod);
        acc = poly_add(acc, SPoly::from(outer.F, {*it}));
    }
    return acc;
}

// extended gcd: returns (g, u) with u*a = g mod m, g = gcd(a, m)
std::pair<SPoly, SPoly> poly_inv_mod(const SPoly& a, const SPoly& m) {
    SPoly r0 = m, r1 = poly_mod_reduce(a, m);
    SPoly s0 = SPoly::from(a.F, {}), s1 = SPoly::from(a.F, {Scalar::one(a.F)});
    while (!r1.is_zero()) {
        SPoly q, r;
        poly_divmod(r0, r1, q, r);
        SPoly s2 = poly_sub(s0, poly_mul(q, s1));
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s2;
    }
    return {r0, s0};
}

Mat eval_poly_at(const SPoly& p, const Mat& M) {
    Mat acc(M.field(), M.rows(), M.cols());
    for (auto it = p.c.rbegin(); it != p.c.rend(); ++it) {
        acc = acc * M;
        for (long i = 0; i < M.rows(); ++i) acc.at(i, i) += it->lifted(M.field());
    }
    return acc;
}
} // namespace

JordanPair jordan_decompose(const Mat& m) {
    if (!m.is_square()) throw DimensionMismatch("jordan_decompose");
    SPoly p = charpoly(m);
    SPoly s = squarefree_part(p);
    if (s.deg() == p.deg()) return {m, Mat(m.field(), m.rows(), m.cols())}; // already semisimple
    // Newton iteration z -> z - s(z)/s'(z) in K[x]/(p), starting at z = x
    SPoly z = SPoly::from(p.F, {Scalar::zero(p.F), Scalar::one(p.F)});
    SPoly sd = s.derivative();
    for (long iter = 0; iter < 2 * m.rows() + 4; ++iter) {
        SPoly sz = poly_compose_mod(s, z, p);
        if (sz.is_zero()) break;
        SPoly sdz = poly_compose_mod(sd, z, p);
        auto [g, u] = poly_inv_mod(sdz, p);
        if (g.deg() != 0)
            throw Error("Jordan iteration hit a zero divisor; input may be inconsistent");
        Scalar gi = g.c[0].inv();
        SPoly upd = poly_mod_reduce(poly_mul(sz, poly_mul(u, SPoly::from(p.F, {gi}))), p);
        z = poly_sub(z, upd);
        z = poly_mod_reduce(z, p);
    }
    Mat S = eval_poly_at(z, m);
    Mat N = m - S;
    if (!is_nilpotent_mat(N) || !bracket(S, N).is_zero())
        throw Error("Jordan decomposition failed to converge");
    return {S, N};
}

// ---- sl2 triples ----

SL2Triple jm_triple(const Mat& Y, const std::vector<Mat>& basis) {
    if (Y.is_zero()) throw ZeroInput("jm_triple of zero");
    if (!is_nilpotent_mat(Y)) throw NotNilpotent("jm_triple input must be nilpotent");
    FieldPtr F = basis[0].field();
    Mat Yl = Y.lifted(F);
    // step 1: solve [[X0, Y], Y] = -2Y inside the span
    Mat L = operator_matrix(
        [&](const Mat& b) { return bracket(bracket(b, Yl), Yl); }, basis);
    std::vector<Scalar> yc = coords_in_span(Yl.scaled(Scalar(-2L)), basis);
    Mat rhs(F, (long)yc.size(), 1);
    for (size_t i = 0; i < yc.size(); ++i) rhs.at((long)i, 0) = yc[i];
    auto x0c = solve(L, rhs);
    if (!x0c) throw Error("sl2 triple: no solution for the double bracket equation");
    std::vector<Scalar> x0v;
    for (long i = 0; i < x0c->rows(); ++i) x0v.push_back(x0c->at(i, 0));
    Mat X0 = from_coords(x0v, basis);
    Mat H = bracket(X0, Yl);
    // step 2: correct X0 inside the centralizer of Y
    Mat W = X0.scaled(Scalar(2L)) - bracket(H, X0);
    if (!W.is_zero()) {
        auto cb = centralizer_basis({Yl}, basis);
        Mat adH2 = operator_matrix(
            [&](const Mat& b) { return bracket(H, b) - b.scaled(Scalar(2L)); }, cb);
        // [H, X0+z] - 2(X0+z) = -W + (ad(H)-2)z, so z solves (ad(H)-2)z = W
        std::vector<Scalar> wc = coords_in_span(W, cb);
        Mat wr(F, (long)wc.size(), 1);
        for (size_t i = 0; i < wc.size(); ++i) wr.at((long)i, 0) = wc[i];
        auto zc = solve(adH2, wr);
        if (!zc) throw Error("sl2 triple: centralizer correction failed");
        std::vector<Scalar> zv;
        for (long i = 0; i < zc->rows(); ++i) zv.push_back(zc->at(i, 0));
        X0 = X0 + from_coords(zv, cb);
    }
    SL2Triple t{H, X0, Yl};
    if (bracket(t.H, t.X) != t.X.scaled(Scalar(2L)) ||
        bracket(t.H, t.Y) != t.Y.scaled(Scalar(-2L)) || bracket(t.X, t.Y) != t.H)
        throw Error("sl2 triple verification failed");
    return t;
}

SL2Triple jm_triple(const Mat& Y) {
    return jm_triple(Y, GroupContext::gl(Y.rows()).lie_basis(Y.field()));
}

std::pair<Mat, std::vector<Rat>> diagonalize_rational_semisimple(const Mat& H) {
    RationalSpectrum sp = rational_spectrum(H);
    if (!sp.other_projection.is_zero())
        throw FieldTooSmall("matrix has non-rational eigenvalues");
    // collect (eigenvalue, eigenvectors) sorted descending
    std::vector<std::pair<Rat, Mat>> parts;
    for (size_t i = 0; i < sp.eigs.size(); ++i) {
        Mat shifted = H;
        for (long d = 0; d < H.rows(); ++d)
            shifted.at(d, d) -= Scalar::of(H.field(), sp.eigs[i]);
        parts.emplace_back(sp.eigs[i], nullspace(shifted));
    }
    std::sort(parts.begin(), parts.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    Mat P(H.field(), H.rows(), H.rows());
    std::vector<Rat> eigs;
    long col = 0;
    for (auto& [lam, vs] : parts)
        for (long j = 0; j < vs.cols(); ++j) {
            for (long i = 0; i < H.rows(); ++i) P.at(i, col) = vs.at(i, j);
            eigs.push_back(lam);
            ++col;
        }
    if (col != H.rows()) throw FieldTooSmall("matrix is not semisimple over K");
    Mat g = inverse(P); // g H g^{-1} = diag(eigs)
    return {g, eigs};
}

Rat lambda_of(const Mat& Y, const GroupContext& ctx) {
    auto basis = ctx.lie_basis(Y.field());
    SL2Triple t = jm_triple(Y, basis);
    RationalSpectrum sp = rational_spectrum(ad_matrix(t.H, basis));
    Rat top(0);
    for (const Rat& e : sp.eigs) top = std::max(top, e);
    return top / 2 + 1;
}

long orbit_dim(const Mat& Y, const GroupContext& ctx) {
    auto basis = ctx.lie_basis(Y.field());
    Mat adY = ad_matrix(Y.lifted(basis[0].field()), basis);
    return (long)basis.size() - (adY.cols() - rank(adY));
}

std::vector<Mat> centralizer_basis(const std::vector<Mat>& elems, const std::vector<Mat>& basis) {
    FieldPtr F = basis[0].field();
    long d = (long)basis.size();
    // stack the ad-matrices of all elements
    Mat stacked(F, 0, 0);
    std::vector<Mat> ads;
    for (auto& e : elems) ads.push_back(ad_matrix(e.lifted(F), basis));
    Mat big(F, (long)elems.size() * d, d);
    for (size_t k = 0; k < ads.size(); ++k)
        for (long i = 0; i < d; ++i)
            for (long j = 0; j < d; ++j) big.at((long)k * d + i, j) = ads[k].at(i, j);
    Mat ns = elems.empty() ? Mat::identity(F, d) : nullspace(big);
    std::vector<Mat> out;
    for (long j = 0; j < ns.cols(); ++j) {
        std::vector<Scalar> v;
        for (long i = 0; i < d; ++i) v.push_back(ns.at(i, j));
        out.push_back(from_coords(v, basis));
    }
    return out;
}

std::vector<Mat> centralizer_basis(const std::vector<Mat>& elems, const GroupContext& ctx) {
    FieldPtr F = elems.empty() ? Field::rationals() : elems[0].field();
    return centralizer_basis(elems, ctx.lie_basis(F));
}

// ---- spectra ----

RationalSpectrum rational_spectrum(const Mat& M) {
    RationalSpectrum out;
    long n = M.rows();
    FieldPtr F = M.field();
    SPoly p = charpoly(M);
    auto roots = rational_roots(p);
    // bases of the generalized eigenspaces
    std::vector<Mat> bases;
    long covered = 0;
    for (auto& [lam, mult] : roots) {
        Mat shifted = M;
        for (long i = 0; i < n; ++i) shifted.at(i, i) -= Scalar::of(F, lam);
        Mat power = Mat::identity(F, n);
        for (long k = 0; k < mult; ++k) power = power * shifted;
        Mat ker = nullspace(power);
        out.eigs.push_back(lam);
        bases.push_back(ker);
        covered += ker.cols();
    }
    // complement: remaining generalized eigenspaces via the cofactor polynomial
    Mat comp(F, n, 0);
    if (covered < n) {
        SPoly q = p;
        for (auto& [lam, mult] : roots) {
            SPoly lin = SPoly::from(F, {Scalar::of(F, -lam), Scalar::one(F)});
            for (long k = 0; k < mult; ++k) {
                SPoly qq, rr;
                poly_divmod(q, lin, qq, rr);
                q = qq;
            }
        }
        comp = nullspace(eval_poly_at(q, M));
    }
    // change of basis to block coordinates
    Mat S(F, n, n);
    long col = 0;
    std::vector<std::pair<long, long>> ranges;
    for (auto& b : bases) {
        ranges.emplace_back(col, b.cols());
        for (long j = 0; j < b.cols(); ++j, ++col)
            for (long i = 0; i < n; ++i) S.at(i, col) = b.at(i, j);
    }
    long comp_start = col;
    for (long j = 0; j < comp.cols(); ++j, ++col)
        for (long i = 0; i < n; ++i) S.at(i, col) = comp.at(i, j);
    if (col != n) throw Error("generalized eigenspaces do not fill the space");
    Mat Sinv = inverse(S);
    for (auto& [start, len] : ranges) {
        Mat E(F, n, n);
        for (long k = 0; k < len; ++k) E.at(start + k, start + k) = Scalar::one(F);
        out.projections.push_back(S * E * Sinv);
    }
    Mat Ec(F, n, n);
    for (long k = comp_start; k < n; ++k) Ec.at(k, k) = Scalar::one(F);
    out.other_projection = S * Ec * Sinv;
    return out;
}

RationalSpectrum integer_eigenspace_data(const Mat& A, const std::vector<Mat>& basis) {
    return rational_spectrum(ad_matrix(A, basis));
}

// roots of a squarefree polynomial that lie in K, searched among rational
// numbers and rational multiples of power-basis monomials
static std::vector<Scalar> k_roots_of_squarefree(const SPoly& s) {
    std::vector<Scalar> roots;
    FieldPtr F = s.F;
    for (auto& [r, mult] : rational_roots(s)) roots.push_back(Scalar::of(F, r));
    long ed = F->ext_deg(), cd = F->cyclo_deg();
    for (long j = 0; j < ed; ++j)
        for (long i = 0; i < cd; ++i) {
            if (i == 0 && j == 0) continue;
            std::vector<std::vector<Rat>> coords(ed, std::vector<Rat>(cd, Rat(0)));
            coords[j][i] = 1;
            Scalar beta = Scalar::from_coords(F, coords);
            // roots c*beta: substitute and find rational roots in c
            std::vector<Scalar> sub(s.c.size(), Scalar::zero(F));
            Scalar bp = Scalar::one(F);
            for (size_t k = 0; k < s.c.size(); ++k) {
                sub[k] = s.c[k] * bp;
                bp = bp * beta;
            }
            for (auto& [c, mult] : rational_roots(SPoly::from(F, sub))) {
                if (c == 0) continue;
                Scalar cand = Scalar::of(F, c) * beta;
                bool seen = false;
                for (auto& r : roots) seen = seen || r == cand;
                if (!seen) roots.push_back(cand);
            }
        }
    return roots;
}

std::vector<std::pair<Scalar, Mat>> k_eigen_decomposition(const Mat& M) {
    long n = M.rows();
    FieldPtr F = M.field();
    SPoly s = squarefree_part(charpoly(M));
    std::vector<Scalar> roots = k_roots_of_squarefree(s);
    std::vector<std::pair<Scalar, Mat>> out;
    long covered = 0;
    for (auto& lam : roots) {
        Mat shifted = M;
        for (long i = 0; i < n; ++i) shifted.at(i, i) -= lam;
        Mat ker = nullspace(shifted);
        if (ker.cols() == 0) continue;
        covered += ker.cols();
        out.emplace_back(lam, ker);
    }
    if (covered != n)
        throw FieldTooSmall("eigenvalues do not all lie in K (or are outside the root search)");
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.first.cmp(b.first) > 0; });
    return out;
}

std::vector<std::pair<std::vector<Scalar>, Mat>>
simultaneous_eigen_decomposition(const std::vector<Mat>& ms) {
    if (ms.empty()) throw ZeroInput("simultaneous_eigen_decomposition of empty family");
    long n = ms[0].rows();
    FieldPtr F = ms[0].field();
    std::vector<std::pair<std::vector<Scalar>, Mat>> blocks;
    blocks.emplace_back(std::vector<Scalar>{}, Mat::identity(F, n));
    for (const Mat& M0 : ms) {
        Mat M = M0.lifted(F);
        std::vector<std::pair<std::vector<Scalar>, Mat>> next;
        for (auto& [tuple, B] : blocks) {
            // restriction of M to span(B)
            auto rep = solve(B, M * B);
            if (!rep) throw Error("family member does not preserve a joint eigenspace");
            for (auto& [lam, sub] : k_eigen_decomposition(*rep)) {
                auto t = tuple;
                t.push_back(lam);
                next.emplace_back(std::move(t), B * sub);
            }
        }
        blocks = std::move(next);
    }
    return blocks;
}

std::vector<long> nilpotent_partition(const Mat& N) {
    if (!is_nilpotent_mat(N)) throw NotNilpotent("nilpotent_partition");
    long n = N.rows();
    std::vector<long> kd{0};
    Mat p = Mat::identity(N.field(), n);
    for (long k = 1; k <= n; ++k) {
        p = p * N;
        kd.push_back(n - rank(p));
        if (kd.back() == n) break;
    }
    std::vector<long> diffs; // number of blocks of size >= k
    for (size_t k = 1; k < kd.size(); ++k) diffs.push_back(kd[k] - kd[k - 1]);
    std::vector<long> part;
    for (long i = 1; i <= (diffs.empty() ? 0 : diffs[0]); ++i) {
        long sz = 0;
        for (long d : diffs)
            if (d >= i) ++sz;
        part.push_back(sz);
    }
    std::sort(part.rbegin(), part.rend());
    return part;
}

namespace {
// independent subset spanning the same space
std::vector<Mat> span_reduce(const std::vector<Mat>& gens) {
    std::vector<Mat> out;
    if (gens.empty()) return out;
    FieldPtr F = gens[0].field();
    long n2 = gens[0].rows() * gens[0].cols();
    Mat acc(F, n2, 0);
    for (const Mat& g : gens) {
        if (g.is_zero()) continue;
        Mat test(F, n2, acc.cols() + 1);
        for (long j = 0; j < acc.cols(); ++j)
            for (long i = 0; i < n2; ++i) test.at(i, j) = acc.at(i, j);
        Mat v = vectorize_one(g, F);
        for (long i = 0; i < n2; ++i) test.at(i, acc.cols()) = v.at(i, 0);
        if (rank(test) > acc.cols()) {
            acc = test;
            out.push_back(g);
        }
    }
    return out;
}
} // namespace

std::vector<std::vector<Mat>> lower_central_series(const std::vector<Mat>& basis) {
    std::vector<std::vector<Mat>> levels;
    std::vector<Mat> cur = span_reduce(basis);
    long guard = (long)basis.size() + 2;
    while (!cur.empty() && guard-- > 0) {
        levels.push_back(cur);
        std::vector<Mat> gens;
        for (const Mat& a : basis)
            for (const Mat& b : cur) gens.push_back(bracket(a, b));
        cur = span_reduce(gens);
    }
    if (!cur.empty()) throw NotNilpotent("algebra is not nilpotent");
    return levels;
}

// ---- lattice invariants ----

namespace {
struct FactorInv {
    Int I, J;
    std::vector<long> degrees;
};

FactorInv factor_invariants(const GroupContext& f) {
    if (f.kind == GroupKind::DiagTorus || f.n == 1) return {Int(1), Int(1), {1}};
    long m = f.n;
    // Cartan matrix of A_{m-1}: both Q/Z(Phi^v) and (for SL) Q/X_* are
    // presented by it
    std::vector<std::vector<Int>> cartan(m - 1, std::vector<Int>(m - 1, Int(0)));
    for (long i = 0; i < m - 1; ++i) {
        cartan[i][i] = 2;
        if (i) cartan[i][i - 1] = -1;
        if (i + 1 < m - 1) cartan[i][i + 1] = -1;
    }
    auto inv_c = smith_invariants(cartan);
    Int J = inv_c.empty() ? Int(1) : inv_c.back();
    Int I;
    if (f.kind == GroupKind::SL) {
        I = J;
    } else {
        // GL(m): X_* = Z^m inside Q = Z^m + (1/m)(1,...,1)Z, in the basis
        // (e_1, ..., e_{m-1}, (1/m)(1,...,1))
        std::vector<std::vector<Int>> gen(m, std::vector<Int>(m, Int(0)));
        for (long i = 0; i < m - 1; ++i) gen[i][i] = 1;          // e_i
        for (long i = 0; i < m - 1; ++i) gen[i][m - 1] = -1;     // e_m = m*f_m - sum e_i
        gen[m - 1][m - 1] = m;
        // columns are generators of X_* in the Q-basis; transpose irrelevant for SNF
        auto inv_g = smith_invariants(gen);
        I = inv_g.empty() ? Int(1) : inv_g.back();
    }
    std::vector<long> degs;
    if (f.kind == GroupKind::GL) degs.push_back(1); // central torus factor
    for (long d = 2; d <= m; ++d) degs.push_back(d);
    return {I, J, degs};
}
} // namespace

LatticeInvariants lattice_invariants(const GroupContext& ctx) {
    if (!ctx.is_reductive())
        throw ParseError("lattice invariants are defined for reductive contexts");
    std::vector<GroupContext> fs =
        ctx.kind == GroupKind::LeviProduct ? ctx.factors : std::vector<GroupContext>{ctx};
    LatticeInvariants out{Int(1), Int(1), {}, 1};
    std::set<long> degs;
    for (auto& f : fs) {
        FactorInv fi = factor_invariants(f);
        out.I = boost::multiprecision::lcm(out.I, fi.I);
        out.J = boost::multiprecision::lcm(out.J, fi.J);
        for (long d : fi.degrees) degs.insert(d);
    }
    if (degs.empty()) degs.insert(1);
    out.degrees.assign(degs.begin(), degs.end());
    out.coxeter = out.degrees.back();
    return out;
}

} // namespace fconn
