#include "fconn/verify.hpp"
#include "fconn/galois.hpp"
#include <algorithm>
#include <functional>
#include <sstream>

namespace fconn {

namespace {

// ---- dense Laurent scalar series on the integer grid ----
// deliberately separate from MatSeries: the oracle must not share code with
// the engine it checks

constexpr long kExact = 1L << 40; // precision marker for exact zero products

struct LS {
    FieldPtr F;
    std::map<long, Scalar> c;
    long prec = kExact; // coefficients known for exponents < prec

    void drop() {
        for (auto it = c.begin(); it != c.end();)
            it = (it->first >= prec || it->second.is_zero()) ? c.erase(it) : std::next(it);
    }
    bool zero() const { return c.empty(); }
    std::optional<long> val() const {
        if (c.empty()) return std::nullopt;
        return c.begin()->first;
    }
};

LS ls_zero(const FieldPtr& F, long prec = kExact) { return LS{F, {}, prec}; }

LS ls_add(const LS& a, const LS& b) {
    LS r{a.F, a.c, std::min(a.prec, b.prec)};
    for (auto& [k, v] : b.c) {
        auto it = r.c.find(k);
        if (it == r.c.end())
            r.c[k] = v;
        else
            it->second += v;
    }
    r.drop();
    return r;
}

LS ls_scale(const LS& a, const Scalar& s) {
    LS r = a;
    for (auto& [k, v] : r.c) v *= s;
    r.drop();
    return r;
}

LS ls_mul(const LS& a, const LS& b) {
    LS r{a.F, {}, kExact};
    long va = a.val().value_or(a.prec), vb = b.val().value_or(b.prec);
    r.prec = std::min(a.prec + vb, b.prec + va);
    for (auto& [ka, ca] : a.c)
        for (auto& [kb, cb] : b.c) {
            if (ka + kb >= r.prec) continue;
            auto it = r.c.find(ka + kb);
            if (it == r.c.end())
                r.c[ka + kb] = ca * cb;
            else
                it->second += ca * cb;
        }
    r.drop();
    return r;
}

LS ls_deriv(const LS& a) {
    LS r{a.F, {}, a.prec == kExact ? kExact : a.prec - 1};
    for (auto& [k, v] : a.c)
        if (k != 0) r.c[k - 1] = v * Scalar::of(a.F, Rat(k));
    r.drop();
    return r;
}

// f / g through a truncated geometric inverse of the unit part of g
LS ls_div(const LS& f, const LS& g) {
    auto vg = g.val();
    if (!vg) throw OracleOutOfRange("division by a series that vanishes on its window");
    long v = *vg;
    Scalar u0 = g.c.at(v);
    long len = 48; // enough low-order terms for desk-scale polygons
    // inv of the unit part u = g t^-v: w with u*w = 1, term by term
    std::map<long, Scalar> w;
    Scalar inv0 = u0.inv();
    w[0] = inv0;
    for (long k = 1; k < len; ++k) {
        Scalar acc = Scalar::zero(f.F);
        for (auto& [j, gj] : g.c) {
            long p = j - v;
            if (p <= 0 || p > k) continue;
            auto it = w.find(k - p);
            if (it != w.end()) acc += gj * it->second;
        }
        Scalar t = -(acc * inv0);
        if (!t.is_zero()) w[k] = t;
    }
    LS ginv{f.F, {}, std::min(g.prec - 2 * v, len - v)};
    for (auto& [k, s] : w)
        if (k - v < ginv.prec) ginv.c[k - v] = s;
    ginv.drop();
    return ls_mul(f, ginv);
}

using LVec = std::vector<LS>;

std::vector<Rat> polygon_slopes(const std::vector<LS>& coeffs, long n, const FieldPtr& F) {
    // points (i, val(c_i) - i) for nonzero c_i, plus the monic (n, -n)
    std::vector<std::pair<long, Rat>> pts;
    for (long i = 0; i < n; ++i) {
        auto v = coeffs[i].val();
        if (v) pts.push_back({i, Rat(*v) - i});
    }
    pts.push_back({n, Rat(-n)});
    // lower convex chain, left to right
    std::vector<std::pair<long, Rat>> hull;
    for (auto& p : pts) {
        while (hull.size() >= 2) {
            auto& a = hull[hull.size() - 2];
            auto& b = hull[hull.size() - 1];
            // keep b only if it turns left (strictly below chord a-p)
            if ((b.second - a.second) * (p.first - a.first)
                    >= (p.second - a.second) * (b.first - a.first))
                hull.pop_back();
            else
                break;
        }
        hull.push_back(p);
    }
    std::vector<Rat> slopes(hull.front().first, Rat(0)); // missing bottom coefficients
    for (size_t i = 1; i < hull.size(); ++i) {
        Rat sigma = (hull[i].second - hull[i - 1].second) / (hull[i].first - hull[i - 1].first);
        if (sigma < 0) sigma = 0;
        for (long k = 0; k < hull[i].first - hull[i - 1].first; ++k) slopes.push_back(sigma);
    }
    std::sort(slopes.begin(), slopes.end());
    (void)F;
    return slopes;
}

} // namespace

std::vector<Rat> oracle_newton_slopes(const MatSeries& A, const GroupContext& ctx) {
    long n = A.dim();
    if ((ctx.kind != GroupKind::GL && ctx.kind != GroupKind::SL) || ctx.size() != n || n > 3)
        throw OracleOutOfRange("oracle covers full matrix contexts with n <= 3");
    for (const Rat& q : A.support())
        if (!is_integer(q)) throw OracleOutOfRange("oracle works on the integer grid");
    auto v0 = A.val();
    if (v0 && *v0 < Rat(-6)) throw OracleOutOfRange("oracle covers pole order <= 6");
    if (!(Rat(0) < A.prec())) throw OracleOutOfRange("window too small for the oracle");
    const FieldPtr& F = A.field();

    long prec = rat_floor(A.prec()).convert_to<long>();
    // entries of A as Laurent scalars
    std::vector<std::vector<LS>> E(n, std::vector<LS>(n, ls_zero(F, prec)));
    for (const Rat& q : A.support()) {
        Mat m = A.coeff(q);
        long k = rat_num(q).convert_to<long>();
        for (long i = 0; i < n; ++i)
            for (long j = 0; j < n; ++j)
                if (!m.at(i, j).is_zero()) E[i][j].c[k] = m.at(i, j);
    }

    auto nabla = [&](const LVec& w) {
        LVec r(n, ls_zero(F, prec));
        for (long i = 0; i < n; ++i) {
            r[i] = ls_deriv(w[i]);
            for (long j = 0; j < n; ++j) r[i] = ls_add(r[i], ls_mul(E[i][j], w[j]));
        }
        return r;
    };

    // cyclic vector candidates: coordinate vectors, then t-mixed combinations
    std::vector<LVec> starts;
    for (long j = 0; j < n; ++j) {
        LVec w(n, ls_zero(F, prec));
        w[j].c[0] = Scalar::one(F);
        starts.push_back(w);
    }
    {
        LVec w(n, ls_zero(F, prec));
        for (long j = 0; j < n; ++j) w[j].c[j] = Scalar::one(F);
        starts.push_back(w);
        LVec u(n, ls_zero(F, prec));
        for (long j = 0; j < n; ++j) u[j].c[0] = Scalar::of(F, Rat(j + 1));
        starts.push_back(u);
    }

    for (auto& w0 : starts) {
        std::vector<LVec> ws{w0};
        for (long k = 0; k < n; ++k) ws.push_back(nabla(ws.back()));
        // solve sum_i c_i nabla^i w0 = nabla^n w0 by elimination over the
        // Laurent field; rows are coordinates, columns the iterates
        std::vector<std::vector<LS>> M(n, std::vector<LS>(n + 1, ls_zero(F, prec)));
        for (long i = 0; i < n; ++i) {
            for (long k = 0; k < n; ++k) M[i][k] = ws[k][i];
            M[i][n] = ws[n][i];
        }
        bool singular = false;
        try {
            for (long col = 0; col < n && !singular; ++col) {
                long piv = -1;
                long best = kExact;
                for (long r = col; r < n; ++r) {
                    auto v = M[r][col].val();
                    if (v && *v < best) {
                        best = *v;
                        piv = r;
                    }
                }
                if (piv < 0) {
                    singular = true;
                    break;
                }
                std::swap(M[col], M[piv]);
                for (long r = 0; r < n; ++r) {
                    if (r == col || M[r][col].zero()) continue;
                    LS f = ls_div(M[r][col], M[col][col]);
                    for (long k = col; k <= n; ++k)
                        M[r][k] = ls_add(M[r][k], ls_scale(ls_mul(f, M[col][k]),
                                                           -Scalar::one(F)));
                }
            }
        } catch (const OracleOutOfRange&) {
            singular = true;
        }
        if (singular) continue;
        std::vector<LS> coeffs;
        for (long i = 0; i < n; ++i) coeffs.push_back(ls_div(M[i][n], M[i][i]));
        return polygon_slopes(coeffs, n, F);
    }
    throw OracleOutOfRange("no cyclic vector among the candidate set");
}

// ---- randomized instance generators ----

namespace {

Rat small_rat(std::mt19937& rng) {
    long num = (long)(rng() % 7) - 3;
    long den = (rng() % 2) ? 2 : 1;
    return Rat(num, den);
}

Mat random_lie_elem(const FieldPtr& F, const GroupContext& ctx, std::mt19937& rng) {
    auto basis = ctx.lie_basis(F);
    Mat m(F, ctx.size(), ctx.size());
    for (auto& b : basis)
        if (rng() % 3 == 0) m = m + b.scaled(Scalar::of(F, small_rat(rng)));
    return m;
}

Mat random_strict_upper(const FieldPtr& F, const GroupContext& ctx, std::mt19937& rng) {
    auto basis = ctx.lie_basis(F);
    Mat m(F, ctx.size(), ctx.size());
    for (auto& b : basis) {
        bool upper = true;
        for (long i = 0; i < b.rows() && upper; ++i)
            for (long j = 0; j <= i && upper; ++j)
                if (!b.at(i, j).is_zero()) upper = false;
        if (upper && rng() % 2 == 0) m = m + b.scaled(Scalar::of(F, small_rat(rng)));
    }
    return m;
}

} // namespace

MatSeries random_connection(const FieldPtr& F, const GroupContext& ctx, std::mt19937& rng,
                            long max_pole, const Rat& prec) {
    MatSeries A = MatSeries::zero(F, ctx.size(), prec);
    for (long e = -max_pole; e <= 1 && Rat(e) < prec; ++e)
        if (rng() % 2 == 0) A.add_coeff(Rat(e), random_lie_elem(F, ctx, rng));
    return A;
}

GaugeCert random_gauge(const FieldPtr& F, const GroupContext& ctx, std::mt19937& rng) {
    GaugeCert g;
    long n = ctx.size();
    bool torus = ctx.kind == GroupKind::DiagTorus;
    bool nilgrp = ctx.kind == GroupKind::StrictUpper;
    long natoms = 1 + rng() % 2;
    for (long a = 0; a < natoms; ++a) {
        long pick = rng() % 4;
        if (torus) pick = (pick < 2) ? 1 : 3;
        if (nilgrp) pick = (pick % 2 == 0) ? 0 : 2;
        switch (pick) {
            case 0: { // exponential of a nilpotent at a nonpositive exponent
                Mat X = random_strict_upper(F, ctx, rng);
                if (X.is_zero()) {
                    --a;
                    continue;
                }
                g.atoms.push_back(ExpAtom{X, Rat(-(long)(rng() % 2))});
                break;
            }
            case 1: { // integer cocharacter
                ShearAtom sh;
                sh.den = 1;
                long sum = 0;
                for (long i = 0; i < n; ++i) {
                    long l = (long)(rng() % 5) - 2;
                    sh.lam.push_back(l);
                    sum += l;
                }
                if (ctx.kind == GroupKind::SL) sh.lam[n - 1] -= sum;
                g.atoms.push_back(sh);
                break;
            }
            case 2: { // constant unipotent
                Mat X = random_strict_upper(F, ctx, rng);
                if (X.is_zero()) {
                    --a;
                    continue;
                }
                g.atoms.push_back(ConstAtom{exp_nilpotent(X)});
                break;
            }
            default: { // exponential at a positive exponent
                Mat X = random_lie_elem(F, ctx, rng);
                if (X.is_zero()) {
                    --a;
                    continue;
                }
                g.atoms.push_back(ExpAtom{X, Rat(1 + rng() % 2)});
                break;
            }
        }
    }
    if (g.atoms.empty()) g.atoms.push_back(ShearAtom{std::vector<Int>(n, Int(0)), 1});
    return g;
}

// ---- property drivers ----

std::string invariant_key(const ReductionResult& rr) {
    std::ostringstream os;
    for (size_t j = 0; j < rr.canonical.levels.size(); ++j) {
        os << rat_str(rr.canonical.levels[j]) << ":";
        std::vector<std::string> d;
        for (long i = 0; i < rr.canonical.irr_coeffs[j].rows(); ++i)
            d.push_back(rr.canonical.irr_coeffs[j].at(i, i).str());
        std::sort(d.begin(), d.end());
        for (auto& s : d) os << s << ",";
        os << ";";
    }
    JordanPair jp = jordan_decompose(rr.canonical.residue);
    os << "|res:";
    try {
        // eigenvalue classes with the rational part folded mod Z (integer
        // cocharacter shears move the raw eigenvalues)
        std::vector<std::string> cls;
        for (auto& [lam, basis] : k_eigen_decomposition(jp.s)) {
            Scalar rep = lam - Scalar::of(lam.field(), Rat(rat_floor(rational_projection(lam))));
            for (long k = 0; k < basis.cols(); ++k) cls.push_back(rep.str());
        }
        std::sort(cls.begin(), cls.end());
        for (auto& s : cls) os << s << ",";
    } catch (const FieldTooSmall&) {
        // irrational eigenvalues: their positions move under ramified shears,
        // so only the multiplicity profile is invariant. Read it off the
        // gcd chain of the characteristic polynomial.
        SPoly p = charpoly(jp.s);
        while (p.deg() > 0) {
            SPoly g = poly_gcd(p, p.derivative());
            os << p.deg() - g.deg() << "^";
            p = g;
        }
    }
    os << "|orb:";
    for (long p : nilpotent_partition(jp.n)) os << p << ".";
    return os.str();
}

namespace {

struct Trial {
    GroupContext ctx;
    MatSeries A;
};

// drop coefficients one at a time while the failure persists
MatSeries shrink_instance(MatSeries A, const std::function<bool(const MatSeries&)>& fails) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (const Rat& q : A.support()) {
            MatSeries B = A;
            B.set_coeff(q, Mat(A.field(), A.dim(), A.dim()));
            bool still = false;
            try {
                still = fails(B);
            } catch (const Error&) {
            }
            if (still) {
                A = B;
                changed = true;
                break;
            }
        }
    }
    return A;
}

GroupContext pool_ctx(std::mt19937& rng, bool matrix_only) {
    switch (rng() % (matrix_only ? 3 : 5)) {
        case 0: return GroupContext::sl(2);
        case 1: return GroupContext::gl(2);
        case 2: return GroupContext::gl(3);
        case 3: return GroupContext::upper_triangular(2);
        default: return GroupContext::diag_torus(2);
    }
}

PropertyRun run_driver(const std::string& id, long trials, unsigned seed,
                       const std::function<bool(std::mt19937&, std::string&)>& one) {
    PropertyRun run{seed, id, trials, true, ""};
    std::mt19937 rng(seed);
    for (long t = 0; t < trials; ++t) {
        std::string detail;
        bool ok = true;
        try {
            ok = one(rng, detail);
        } catch (const InsufficientPrecision&) {
            continue; // instance outside its own window; not a property failure
        } catch (const FieldTooSmall&) {
            continue;
        } catch (const OracleOutOfRange&) {
            continue;
        }
        if (!ok) {
            run.passed = false;
            run.detail = "trial " + std::to_string(t) + ": " + detail;
            return run;
        }
    }
    return run;
}

} // namespace

PropertyRun drive_property(const std::string& id, long trials, unsigned seed) {
    auto F = Field::rationals();

    if (id == "invariance-under-gauge") {
        return run_driver(id, trials, seed, [&](std::mt19937& rng, std::string& detail) {
            GroupContext ctx = pool_ctx(rng, false);
            MatSeries A = random_connection(F, ctx, rng, 3, Rat(24));
            ReductionResult r1 = reduce(A, ctx);
            GaugeCert g = random_gauge(F, ctx, rng);
            MatSeries A2 = apply_gauge(g, A);
            ReductionResult r2 = reduce(A2, ctx);
            if (invariant_key(r1) == invariant_key(r2)) return true;
            auto fails = [&](const MatSeries& B) {
                return invariant_key(reduce(B, ctx)) != invariant_key(reduce(apply_gauge(g, B), ctx));
            };
            detail = ctx.str() + " instance " + shrink_instance(A, fails).str();
            return false;
        });
    }

    if (id == "principal-level") {
        return run_driver(id, trials, seed, [&](std::mt19937& rng, std::string& detail) {
            GroupContext ctx = (rng() % 2) ? GroupContext::gl(2) : GroupContext::gl(3);
            MatSeries A = random_connection(F, ctx, rng, 4, Rat(30));
            ReductionResult rr = reduce(A, ctx);
            auto slopes = oracle_newton_slopes(A, ctx);
            Rat top = slopes.empty() ? Rat(0) : slopes.back();
            Rat want = rr.canonical.levels.empty() ? Rat(0) : Rat(-1) - rr.canonical.levels.front();
            if (top == want) return true;
            detail = ctx.str() + " slope " + rat_str(top) + " vs level-derived " + rat_str(want)
                     + " on " + A.str();
            return false;
        });
    }

    if (id == "determinacy-window") {
        return run_driver(id, trials, seed, [&](std::mt19937& rng, std::string& detail) {
            GroupContext ctx = (rng() % 2) ? GroupContext::gl(2) : GroupContext::sl(2);
            MatSeries A = random_connection(F, ctx, rng, 4, Rat(30));
            auto v = A.val();
            if (!v || !(*v < Rat(-1))) return true;
            ReductionResult rr = reduce(A, ctx);
            if (rr.canonical.levels.empty()) return true;
            Rat W = determinacy_window(ctx, *v, WindowKind::Irregular);
            Rat e = *v + W + (long)(rng() % 3);
            if (!(e < A.prec())) return true;
            MatSeries B = A;
            Mat pert = random_lie_elem(F, ctx, rng);
            B.add_coeff(e, pert);
            ReductionResult r2 = reduce(B, ctx);
            bool same = rr.canonical.levels == r2.canonical.levels;
            for (size_t j = 0; same && j < rr.canonical.levels.size(); ++j)
                same = rr.canonical.irr_coeffs[j] == r2.canonical.irr_coeffs[j];
            if (same) return true;
            detail = ctx.str() + " perturbation at " + rat_str(e) + " changed the irregular part of "
                     + A.str();
            return false;
        });
    }

    if (id == "ramification-bound") {
        return run_driver(id, trials, seed, [&](std::mt19937& rng, std::string& detail) {
            GroupContext ctx = pool_ctx(rng, false);
            MatSeries A = random_connection(F, ctx, rng, 4, Rat(30));
            ReductionResult rr = reduce(A, ctx);
            if (Int(lcm_long(rr.used_ramification, rr.canonical.ram)) <= ramification_bound(ctx))
                return true;
            detail = ctx.str() + " used " + std::to_string(rr.used_ramification) + " on " + A.str();
            return false;
        });
    }

    if (id == "degree-divisibility") {
        return run_driver(id, trials, seed, [&](std::mt19937& rng, std::string& detail) {
            GroupContext ctx = pool_ctx(rng, true);
            MatSeries A = random_connection(F, ctx, rng, 4, Rat(30));
            ReductionResult rr = reduce(A, ctx);
            auto degs = lattice_invariants(ctx).degrees;
            for (const Rat& r : rr.canonical.levels) {
                long den = rat_den(r).convert_to<long>();
                bool ok = den == 1;
                for (long d : degs) ok = ok || d % den == 0;
                if (!ok) {
                    detail = ctx.str() + " level " + rat_str(r) + " on " + A.str();
                    return false;
                }
            }
            return true;
        });
    }

    if (id == "orbit-dim-increase") {
        return run_driver(id, trials, seed, [&](std::mt19937& rng, std::string& detail) {
            GroupContext ctx = (rng() % 2) ? GroupContext::sl(2) : GroupContext::gl(3);
            MatSeries A = random_connection(F, ctx, rng, 4, Rat(30));
            ReductionResult rr = reduce(A, ctx);
            const auto& dims = rr.trace.orbit_dims;
            for (size_t i = 1; i < dims.size(); ++i)
                if (dims[i] <= dims[i - 1]) {
                    detail = ctx.str() + " orbit dims not increasing on " + A.str();
                    return false;
                }
            if (rr.trace.c2_steps > ctx.dim_der() / 2) {
                detail = ctx.str() + " too many shearing steps on " + A.str();
                return false;
            }
            return true;
        });
    }

    throw Error("unknown property id: " + id);
}

} // namespace fconn
