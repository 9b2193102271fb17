#include "fconn/reduce.hpp"
#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace fconn {

namespace {

Rat rat_abs(const Rat& r) { return r < 0 ? Rat(-r) : r; }

// nearest element of (1/h)Z, ties rounded away from zero
Rat best_approx(const Rat& q, long h) {
    Rat scaled = q * h;
    Int num = rat_num(scaled), den = rat_den(scaled);
    Int twice = 2 * num, dd = 2 * den;
    // round(num/den) half away from zero
    Int r;
    if (num >= 0)
        r = (twice + den) / dd;
    else
        r = -((-twice + den) / dd);
    return Rat(r, Int(h));
}

ShearAtom shear_from_rats(const std::vector<Rat>& tau) {
    long den = 1;
    for (auto& t : tau) den = lcm_long(den, (long)rat_den(t).convert_to<long>());
    ShearAtom s;
    s.den = den;
    for (auto& t : tau) s.lam.push_back(rat_num(t) * (den / rat_den(t).convert_to<long>()));
    return s;
}

long atom_denominator(const GaugeAtom& a) {
    GaugeCert c{{a}};
    return cert_denominator(c);
}

Mat col_to_mat(const Mat& col, const std::vector<Mat>& basis) {
    std::vector<Scalar> v;
    for (long i = 0; i < col.rows(); ++i) v.push_back(col.at(i, 0));
    return from_coords(v, basis);
}

Mat coords_col(const Mat& m, const std::vector<Mat>& basis) {
    auto v = coords_in_span(m, basis);
    Mat col(basis[0].field(), (long)v.size(), 1);
    for (size_t i = 0; i < v.size(); ++i) col.at((long)i, 0) = v[i];
    return col;
}

// horizontal concatenation
Mat hcat(const Mat& a, const Mat& b) {
    Mat out(a.field(), a.rows(), a.cols() + b.cols());
    for (long i = 0; i < a.rows(); ++i) {
        for (long j = 0; j < a.cols(); ++j) out.at(i, j) = a.at(i, j);
        for (long j = 0; j < b.cols(); ++j) out.at(i, a.cols() + j) = b.at(i, j);
    }
    return out;
}

Mat basis_matrix(const std::vector<Mat>& cols_as_mats, const std::vector<Mat>& ambient) {
    Mat out(ambient[0].field(), (long)ambient.size(), (long)cols_as_mats.size());
    for (size_t k = 0; k < cols_as_mats.size(); ++k) {
        auto v = coords_in_span(cols_as_mats[k], ambient);
        for (size_t i = 0; i < v.size(); ++i) out.at((long)i, (long)k) = v[i];
    }
    return out;
}

struct Reducer {
    FieldPtr F;
    MatSeries A;
    GaugeCert cert;
    ReductionTrace trace;
    long used_ram = 1;
    long res_ram = 1;
    long n;
    std::vector<long> blocks;                  // diagonal block sizes, in order
    std::vector<std::pair<long, bool>> regions; // (size, det-1 constrained)
    bool torus_mode = false;
    bool radical = false;
    bool normalized = true;
    std::vector<Scalar> cdiag; // diagonal of C_s after normalization
    std::optional<Mat> pre_residue;

    Reducer(const MatSeries& a) : F(a.field()), A(a), n(a.dim()) {}

    void note(const std::string& s) { trace.steps.push_back(s); }

    void emit(const GaugeAtom& at, bool residue_shear = false) {
        A = apply_atom(at, A);
        cert.atoms.push_back(at);
        long d = atom_denominator(at);
        if (residue_shear)
            res_ram = lcm_long(res_ram, d);
        else
            used_ram = lcm_long(used_ram, d);
    }

    std::vector<long> offsets() const {
        std::vector<long> off;
        long o = 0;
        for (long b : blocks) {
            off.push_back(o);
            o += b;
        }
        return off;
    }

    long block_of(long idx) const {
        long o = 0;
        for (size_t k = 0; k < blocks.size(); ++k) {
            if (idx < o + blocks[k]) return (long)k;
            o += blocks[k];
        }
        return -1;
    }

    Mat levi_part(const Mat& m) const {
        Mat out(m.field(), n, n);
        auto off = offsets();
        for (size_t k = 0; k < blocks.size(); ++k)
            for (long i = 0; i < blocks[k]; ++i)
                for (long j = 0; j < blocks[k]; ++j)
                    out.at(off[k] + i, off[k] + j) = m.at(off[k] + i, off[k] + j);
        return out;
    }

    Mat central_part(const Mat& m) const {
        Mat out(m.field(), n, n);
        auto off = offsets();
        for (size_t k = 0; k < blocks.size(); ++k) {
            Scalar tr = Scalar::zero(m.field());
            for (long i = 0; i < blocks[k]; ++i) tr = tr + m.at(off[k] + i, off[k] + i);
            Scalar avg = tr * Scalar::of(m.field(), Rat(1, Int(blocks[k]))).lifted(m.field());
            for (long i = 0; i < blocks[k]; ++i) out.at(off[k] + i, off[k] + i) = avg;
        }
        return out;
    }

    Mat radical_part(const Mat& m) const { // cross-block entries
        Mat out(m.field(), n, n);
        for (long i = 0; i < n; ++i)
            for (long j = 0; j < n; ++j)
                if (block_of(i) != block_of(j)) out.at(i, j) = m.at(i, j);
        return out;
    }

    std::vector<Mat> levi_basis() const {
        std::vector<Mat> b;
        auto off = offsets();
        for (size_t k = 0; k < blocks.size(); ++k)
            for (long i = 0; i < blocks[k]; ++i)
                for (long j = 0; j < blocks[k]; ++j) {
                    Mat m(F, n, n);
                    m.at(off[k] + i, off[k] + j) = Scalar::one(F);
                    b.push_back(m);
                }
        return b;
    }

    std::vector<Mat> der_basis() const {
        std::vector<Mat> b;
        auto off = offsets();
        for (size_t k = 0; k < blocks.size(); ++k) {
            for (long i = 0; i < blocks[k]; ++i)
                for (long j = 0; j < blocks[k]; ++j)
                    if (i != j) {
                        Mat m(F, n, n);
                        m.at(off[k] + i, off[k] + j) = Scalar::one(F);
                        b.push_back(m);
                    }
            for (long i = 0; i + 1 < blocks[k]; ++i) {
                Mat m(F, n, n);
                m.at(off[k] + i, off[k] + i) = Scalar::one(F);
                m.at(off[k] + i + 1, off[k] + i + 1) = Scalar::of(F, -1);
                b.push_back(m);
            }
        }
        return b;
    }

    void fix_det(Mat& g) const {
        long o = 0;
        for (auto& [sz, sl] : regions) {
            if (sl && sz > 0) {
                Mat blk(g.field(), sz, sz);
                for (long i = 0; i < sz; ++i)
                    for (long j = 0; j < sz; ++j) blk.at(i, j) = g.at(o + i, o + j);
                Scalar d = det(blk);
                if (!(d == Scalar::one(g.field()))) {
                    // scale one row (a left diagonal factor): this keeps
                    // whatever g diagonalizes diagonal
                    Scalar s = d.inv();
                    for (long j = 0; j < g.cols(); ++j) g.at(o, j) = g.at(o, j) * s;
                }
            }
            o += sz;
        }
    }

    Mat series_levi_coeff(const Rat& e) const { return levi_part(A.coeff(e)); }

    std::vector<Rat> support_below(const Rat& bound) const {
        std::vector<Rat> out;
        for (auto& e : A.support())
            if (e < bound) out.push_back(e);
        return out;
    }

    // ---- phases ----

    // strictly diagonal / torus recurrence: kill everything at e != -1 on the
    // diagonal when the whole algebra is commutative
    void irregular_loop() {
        long guard = 64 * n * n + 64;
        while (guard-- > 0) {
            // lowest exponent < -1 whose Levi coefficient is not block-central
            std::optional<Rat> r;
            for (auto& e : A.support()) {
                if (e >= Rat(-1)) break;
                Mat L = series_levi_coeff(e);
                if (!(L - central_part(L)).is_zero()) {
                    r = e;
                    break;
                }
            }
            if (!r) return;
            Mat Ar = series_levi_coeff(*r);
            auto jp = jordan_decompose(Ar);
            Mat Vs = jp.s - central_part(jp.s);
            if (!Vs.is_zero())
                op_not_nilpotent(*r, Ar, jp.s);
            else
                op_nilpotent(*r, Ar - central_part(Ar));
        }
        throw Error("irregular reduction failed to terminate");
    }

    // operation (i): push the connection into the centralizer of the
    // semisimple part of the leading coefficient, then split blocks
    void op_not_nilpotent(const Rat& r, const Mat& Ar, const Mat& s) {
        note("(i) non-nilpotent leading term at r=" + rat_str(r));
        auto basisL = levi_basis();
        Mat adAr = ad_matrix(Ar, basisL);
        Mat adS = ad_matrix(s, basisL);
        Mat kerS = nullspace(adS); // coords columns
        long guard = 1024 + 8 * (long)basisL.size();
        while (guard-- > 0) {
            std::optional<Rat> target;
            Mat off(F, 0, 0);
            for (auto& e : A.support()) {
                if (!(e > r)) continue;
                Mat v = coords_col(series_levi_coeff(e), basisL);
                // component outside ker(ad s): solve [adAr | kerS][x;y] = v
                auto sol = solve(hcat(adAr, kerS), v);
                if (!sol) throw Error("centralizer alignment: inconsistent system");
                Mat x(F, adAr.cols(), 1);
                for (long i = 0; i < adAr.cols(); ++i) x.at(i, 0) = sol->at(i, 0);
                if ((adAr * x).is_zero()) continue;
                target = e;
                off = x;
                break;
            }
            if (!target) break;
            emit(ExpAtom{col_to_mat(off, basisL), *target - r});
        }
        if (guard <= 0) throw Error("operation (i) did not terminate");
        // refine blocks using the (diagonalizable) semisimple part
        Mat g = Mat::identity(F, n);
        auto offv = offsets();
        std::vector<long> newblocks;
        for (size_t k = 0; k < blocks.size(); ++k) {
            Mat sb(F, blocks[k], blocks[k]);
            for (long i = 0; i < blocks[k]; ++i)
                for (long j = 0; j < blocks[k]; ++j) sb.at(i, j) = s.at(offv[k] + i, offv[k] + j);
            auto dec = k_eigen_decomposition(sb); // sorted by eigenvalue, descending
            Mat P(F, blocks[k], blocks[k]);
            long col = 0;
            for (auto& [lam, vs] : dec) {
                newblocks.push_back(vs.cols());
                for (long j = 0; j < vs.cols(); ++j, ++col)
                    for (long i = 0; i < blocks[k]; ++i) P.at(i, col) = vs.at(i, j);
            }
            Mat gb = inverse(P);
            for (long i = 0; i < blocks[k]; ++i)
                for (long j = 0; j < blocks[k]; ++j) g.at(offv[k] + i, offv[k] + j) = gb.at(i, j);
        }
        fix_det(g);
        emit(ConstAtom{g});
        blocks = newblocks;
        note("(i) blocks refined to " + std::to_string(blocks.size()));
    }

    // operations (ii) + (iii)/(iv) for a nilpotent (non-central) leading term.
    // Returns true when a C1 shear produced a first-kind connection.
    bool op_nilpotent(const Rat& r, const Mat& Y0) {
        auto derB = der_basis();
        SL2Triple t = jm_triple(Y0, derB);
        // make H integral diagonal, block by block
        Mat g = Mat::identity(F, n);
        auto offv = offsets();
        for (size_t k = 0; k < blocks.size(); ++k) {
            Mat hb(F, blocks[k], blocks[k]);
            for (long i = 0; i < blocks[k]; ++i)
                for (long j = 0; j < blocks[k]; ++j)
                    hb.at(i, j) = t.H.at(offv[k] + i, offv[k] + j);
            auto [gb, eigs] = diagonalize_rational_semisimple(hb);
            for (long i = 0; i < blocks[k]; ++i)
                for (long j = 0; j < blocks[k]; ++j) g.at(offv[k] + i, offv[k] + j) = gb.at(i, j);
        }
        fix_det(g);
        emit(ConstAtom{g});
        Mat gi = inverse(g);
        Mat H = g * t.H * gi, X = g * t.X * gi;
        Mat Ar = series_levi_coeff(r);
        Mat Y = Ar - central_part(Ar);

        auto basisL = levi_basis();
        RationalSpectrum adHsp = rational_spectrum(ad_matrix(H, derB));
        Rat maxeig(0);
        for (auto& e : adHsp.eigs) maxeig = std::max(maxeig, e);
        Rat lambda = maxeig / 2 + 1;
        trace.lambdas.push_back(lambda);
        Rat W = lambda * (rat_abs(r) - 1);
        if (A.prec() < r + W)
            throw InsufficientPrecision("nilpotent leading term needs the full window",
                                        rat_str(r + W));
        // (ii): partial alignment into the centralizer of X over the window
        note("(ii) partial alignment, window " + rat_str(W));
        auto gX = centralizer_basis({X}, basisL);
        Mat gXm = basis_matrix(gX, basisL);
        Mat adAr = ad_matrix(Ar, basisL);
        long guard = 1024 + 8 * (long)basisL.size();
        while (guard-- > 0) {
            std::optional<Rat> target;
            Mat off(F, 0, 0);
            for (auto& e : A.support()) {
                if (!(e > r) || !(e < r + W)) continue;
                Mat v = coords_col(series_levi_coeff(e), basisL);
                auto sol = solve(hcat(adAr, gXm), v);
                if (!sol) throw Error("partial alignment: inconsistent system");
                Mat x(F, adAr.cols(), 1);
                for (long i = 0; i < adAr.cols(); ++i) x.at(i, 0) = sol->at(i, 0);
                if ((adAr * x).is_zero()) continue;
                target = e;
                off = x;
                break;
            }
            if (!target) break;
            emit(ExpAtom{col_to_mat(off, basisL), *target - r});
        }
        if (guard <= 0) throw Error("operation (ii) did not terminate");

        // delta from the ad(H)-eigenvalues of the derived g_X components
        auto gXd = centralizer_basis({X}, derB);
        Rat delta(-1); // -1 encodes infinity
        std::vector<std::pair<Rat, Rat>> contributions; // (m, eigenvalue)
        if (!gXd.empty()) {
            RationalSpectrum sp = integer_eigenspace_data(H, gXd);
            for (auto& e : A.support()) {
                if (!(e > r) || !(e < r + W)) continue;
                Mat v = series_levi_coeff(e) - central_part(A.coeff(e));
                if (v.is_zero()) continue;
                Mat vc = coords_col(v, gXd);
                Rat m = e - r;
                for (size_t i = 0; i < sp.eigs.size(); ++i) {
                    if ((sp.projections[i] * vc).is_zero()) continue;
                    Rat cand = m / (sp.eigs[i] / 2 + 1);
                    if (delta < 0 || cand < delta) delta = cand;
                }
            }
        }
        trace.deltas.push_back(delta);
        if (delta < 0 || delta >= rat_abs(r) - 1) {
            // C1: shear t^((r+1)/2 H), result is of the first kind
            note("(iii) C1 shear at r=" + rat_str(r) +
                 (delta < 0 ? std::string(", delta=inf") : ", delta=" + rat_str(delta)));
            std::vector<Rat> tau;
            for (long i = 0; i < n; ++i) tau.push_back(H.at(i, i).as_rat() * (r + 1) / 2);
            emit(shear_from_rats(tau));
            // everything non-central must now be of the first kind
            for (auto& e : A.support()) {
                if (e >= Rat(-1)) break;
                Mat L = series_levi_coeff(e);
                if (!(L - central_part(L)).is_zero())
                    throw Error("C1 shear did not produce a first-kind connection");
            }
            return true;
        }
        // C2: shear t^(-(delta/2) H)
        long od = rank(ad_matrix(Y, basisL));
        trace.orbit_dims.push_back(od);
        trace.c2_steps += 1;
        note("(iv) C2 shear, delta=" + rat_str(delta) + ", orbit dim " + std::to_string(od));
        std::vector<Rat> tau;
        for (long i = 0; i < n; ++i) tau.push_back(H.at(i, i).as_rat() * (-delta) / 2);
        emit(shear_from_rats(tau));
        Rat rp = r + delta;
        Mat lead = series_levi_coeff(rp);
        Mat leadd = lead - central_part(lead);
        if (leadd.is_zero()) throw Error("C2 shear lost the leading term");
        if (is_nilpotent_mat(leadd)) {
            long od2 = rank(ad_matrix(leadd, basisL));
            if (od2 <= od) throw Error("C2 orbit dimension did not increase");
        }
        return false;
    }

    // alignment of a first-kind connection with respect to the residue;
    // returns k(A_-1) in grid units (an integer over A.ram())
    long align() {
        auto basisL = levi_basis();
        Mat res = series_levi_coeff(Rat(-1));
        Mat adM = ad_matrix(res, basisL);
        RationalSpectrum sp = rational_spectrum(adM);
        long b = A.ram();
        long k = 0;
        for (auto& lam : sp.eigs) {
            Rat u = lam * b;
            if (is_integer(u) && u > 0) k = std::max(k, (long)rat_num(u).convert_to<long>());
        }
        if (A.prec() < Rat(k, b))
            throw InsufficientPrecision("first-kind reduction needs k(A_-1) coefficients",
                                        rat_str(Rat(k, b)));
        long guard = 4096 + 16 * (long)basisL.size();
        while (guard-- > 0) {
            std::optional<Rat> target;
            Mat off(F, 0, 0);
            for (auto& e : A.support()) {
                if (!(e > Rat(-1))) continue;
                Mat L = series_levi_coeff(e);
                if (L.is_zero()) continue;
                Mat v = coords_col(L, basisL);
                // keep the generalized eigencomponent with eigenvalue e+1
                Mat keep(F, v.rows(), 1);
                for (size_t i = 0; i < sp.eigs.size(); ++i)
                    if (sp.eigs[i] == e + 1) keep = sp.projections[i] * v;
                Mat rest = v - keep;
                if (rest.is_zero()) continue;
                target = e;
                off = rest;
                break;
            }
            if (!target) break;
            Mat M = adM;
            Scalar c = Scalar::of(F, *target + 1);
            for (long i = 0; i < M.rows(); ++i) M.at(i, i) = M.at(i, i) - c;
            auto x = solve(M, off);
            if (!x) throw Error("alignment system inconsistent");
            emit(ExpAtom{col_to_mat(*x, basisL), *target + 1});
        }
        if (guard <= 0) throw Error("alignment did not terminate");
        return k;
    }

    void regular_phase() {
        long k = align();
        (void)k;
        long b = A.ram();
        // does anything survive above the residue?
        bool kept = false;
        for (auto& e : A.support())
            if (e > Rat(-1) && !series_levi_coeff(e).is_zero()) kept = true;
        if (kept && !torus_mode) {
            // diagonalize the semisimple part of the residue and shear by the
            // best (1/hgt)Z-approximation of the rational parts of the simple
            // root values
            note("(vi) fold shear");
            Mat res = series_levi_coeff(Rat(-1));
            Mat s = jordan_decompose(res).s;
            diag_conj_sorted(s);
            res = series_levi_coeff(Rat(-1));
            s = jordan_decompose(res).s;
            long hstar = 1;
            for (long bs : blocks) hstar = std::max(hstar, bs - 1);
            std::vector<Rat> tau(n, Rat(0));
            auto offv = offsets();
            for (size_t kk = 0; kk < blocks.size(); ++kk) {
                for (long i = blocks[kk] - 2; i >= 0; --i) {
                    Rat diff = rational_projection(
                        (s.at(offv[kk] + i, offv[kk] + i) - s.at(offv[kk] + i + 1, offv[kk] + i + 1)) *
                        Scalar::of(F, Rat(b)));
                    tau[offv[kk] + i] = tau[offv[kk] + i + 1] + best_approx(diff, hstar);
                }
            }
            // trace-free correction inside det-1 regions
            long o = 0;
            for (auto& [sz, sl] : regions) {
                if (sl && sz > 0) {
                    Rat mean(0);
                    for (long i = 0; i < sz; ++i) mean += tau[o + i];
                    mean /= sz;
                    for (long i = 0; i < sz; ++i) tau[o + i] -= mean;
                }
                o += sz;
            }
            std::vector<Rat> sh;
            for (auto& tv : tau) sh.push_back(-tv / b);
            emit(shear_from_rats(sh));
            for (auto& e : A.support())
                if (e > Rat(-1) && e < A.prec() && !series_levi_coeff(e).is_zero())
                    throw Error("fold shear left terms above the residue");
        }
        if (!torus_mode) normalize_residue();
    }

    // conjugate so that the semisimple matrix s becomes diagonal with
    // eigenvalues sorted descending inside each block
    void diag_conj_sorted(const Mat& s) {
        Mat g = Mat::identity(F, n);
        auto offv = offsets();
        bool nontrivial = false;
        for (size_t k = 0; k < blocks.size(); ++k) {
            Mat sb(F, blocks[k], blocks[k]);
            for (long i = 0; i < blocks[k]; ++i)
                for (long j = 0; j < blocks[k]; ++j) sb.at(i, j) = s.at(offv[k] + i, offv[k] + j);
            auto dec = k_eigen_decomposition(sb);
            Mat P(F, blocks[k], blocks[k]);
            long col = 0;
            for (auto& [lam, vs] : dec)
                for (long j = 0; j < vs.cols(); ++j, ++col)
                    for (long i = 0; i < blocks[k]; ++i) P.at(i, col) = vs.at(i, j);
            Mat gb = inverse(P);
            if (!(gb == Mat::identity(F, blocks[k]))) nontrivial = true;
            for (long i = 0; i < blocks[k]; ++i)
                for (long j = 0; j < blocks[k]; ++j) g.at(offv[k] + i, offv[k] + j) = gb.at(i, j);
        }
        if (nontrivial) {
            fix_det(g);
            emit(ConstAtom{g});
        }
    }

    void normalize_residue() {
        long b = A.ram();
        if (Rat(-1) < A.prec()) pre_residue = A.coeff(Rat(-1));
        Mat res = series_levi_coeff(Rat(-1));
        Mat s;
        try {
            s = jordan_decompose(res).s;
            diag_conj_sorted(s);
        } catch (const FieldTooSmall&) {
            normalized = false;
            note("residue normalization skipped: eigenvalues not in K");
            return;
        }
        res = series_levi_coeff(Rat(-1));
        s = jordan_decompose(res).s;
        // rational-part shear (residue normalization; tracked separately)
        std::vector<Rat> mu;
        bool any = false;
        for (long i = 0; i < n; ++i) {
            Rat p = rational_projection(s.at(i, i) * Scalar::of(F, Rat(b)));
            mu.push_back(-p / b);
            if (p != 0) any = true;
        }
        if (any) {
            note("residue rational-part shear");
            emit(shear_from_rats(mu), true);
            res = series_levi_coeff(Rat(-1));
            s = jordan_decompose(res).s;
        }
        // joint descending sort of (irregular diagonals, residue eigenvalues)
        // inside each region
        std::vector<std::vector<Scalar>> keys(n);
        for (auto& e : A.support()) {
            if (!(e < Rat(-1))) break;
            Mat d = series_levi_coeff(e);
            for (long i = 0; i < n; ++i) keys[i].push_back(d.at(i, i));
        }
        for (long i = 0; i < n; ++i) keys[i].push_back(s.at(i, i));
        std::vector<long> perm(n);
        for (long i = 0; i < n; ++i) perm[i] = i;
        long o = 0;
        for (auto& [sz, sl] : regions) {
            std::stable_sort(perm.begin() + o, perm.begin() + o + sz, [&](long a, long c) {
                for (size_t q = 0; q < keys[a].size(); ++q) {
                    int cm = keys[a][q].cmp(keys[c][q]);
                    if (cm != 0) return cm > 0;
                }
                return false;
            });
            o += sz;
        }
        bool is_id = true;
        for (long i = 0; i < n; ++i) is_id = is_id && perm[i] == i;
        if (!is_id) {
            Mat P(F, n, n);
            for (long i = 0; i < n; ++i) P.at(i, perm[i]) = Scalar::one(F);
            fix_det(P);
            emit(ConstAtom{P});
            // block sizes follow the permutation only as joint eigenvalue
            // groups; recompute from the sorted keys
            std::vector<long> nb;
            long run = 1;
            auto same = [&](long a, long c) {
                for (size_t q = 0; q < keys[a].size(); ++q)
                    if (keys[a][q].cmp(keys[c][q]) != 0) return false;
                return true;
            };
            for (long i = 1; i < n; ++i) {
                if (same(perm[i], perm[i - 1]))
                    ++run;
                else {
                    nb.push_back(run);
                    run = 1;
                }
            }
            nb.push_back(run);
            blocks = nb;
        }
        res = series_levi_coeff(Rat(-1));
        Mat sd = jordan_decompose(res).s;
        cdiag.clear();
        for (long i = 0; i < n; ++i) cdiag.push_back(sd.at(i, i));
    }

    // kill the off-diagonal radical part outside the residue, level by level
    void radical_phase() {
        if (blocks.size() < 2) return;
        bool have = false;
        for (auto& [key, m] : A.raw()) have = have || !radical_part(m).is_zero();
        if (!have) return;
        if (!normalized)
            throw FieldTooSmall("radical reduction requires a normalized Levi residue");
        note("radical phase");
        auto offv = offsets();
        long L = (long)blocks.size() - 1;
        Mat Cres = levi_part(A.coeff(Rat(-1)));
        // diagonal irregular coefficients for the weight recurrences
        std::vector<std::pair<Rat, Mat>> dterms;
        for (auto& e : A.support())
            if (e < Rat(-1)) dterms.emplace_back(e, series_levi_coeff(e));
        for (long lev = 1; lev <= L; ++lev) {
            // basis of this level: entries with block distance == lev
            std::vector<Mat> lb;
            std::vector<std::pair<long, long>> lpos;
            for (long bi = 0; bi + lev < (long)blocks.size(); ++bi) {
                long bj = bi + lev;
                for (long i = 0; i < blocks[bi]; ++i)
                    for (long j = 0; j < blocks[bj]; ++j) {
                        Mat m(F, n, n);
                        m.at(offv[bi] + i, offv[bj] + j) = Scalar::one(F);
                        lb.push_back(m);
                        lpos.emplace_back(offv[bi] + i, offv[bj] + j);
                    }
            }
            if (lb.empty()) continue;
            auto level_component = [&](const Mat& m) {
                Mat out(F, n, n);
                for (auto& [i, j] : lpos) out.at(i, j) = m.at(i, j);
                return out;
            };
            // block pairs with a nonzero irregular weight use the lowest such
            // coefficient; the rest are handled with the residue operator
            auto weight_exponent = [&](long bi, long bj) -> std::optional<Rat> {
                for (auto& [q, d] : dterms) {
                    Scalar w = d.at(offv[bi], offv[bi]) - d.at(offv[bj], offv[bj]);
                    if (!w.is_zero()) return q;
                }
                return std::nullopt;
            };
            long guard = 4096 + 64 * (long)lb.size();
            while (guard-- > 0) {
                auto pair_component = [&](const Mat& v, long bi, long bj, bool& nz) {
                    Mat vp(F, n, n);
                    nz = false;
                    for (long i = 0; i < blocks[bi]; ++i)
                        for (long j = 0; j < blocks[bj]; ++j) {
                            vp.at(offv[bi] + i, offv[bj] + j) =
                                v.at(offv[bi] + i, offv[bj] + j);
                            nz = nz || !vp.at(offv[bi] + i, offv[bj] + j).is_zero();
                        }
                    return vp;
                };
                std::optional<Rat> target;
                for (auto& e : A.support()) {
                    Mat v = level_component(A.coeff(e));
                    if (v.is_zero()) continue;
                    if (e == Rat(-1)) {
                        // residue components survive on weight-zero pairs; a
                        // nonzero weight still forces them to zero
                        bool actionable = false;
                        for (long bi = 0; bi + lev < (long)blocks.size(); ++bi) {
                            bool nz = false;
                            pair_component(v, bi, bi + lev, nz);
                            if (nz && weight_exponent(bi, bi + lev)) actionable = true;
                        }
                        if (!actionable) continue;
                    }
                    target = e;
                    break;
                }
                if (!target) break;
                Mat v = level_component(A.coeff(*target));
                // split by block pair
                for (long bi = 0; bi + lev < (long)blocks.size(); ++bi) {
                    long bj = bi + lev;
                    bool nz = false;
                    Mat vp = pair_component(v, bi, bj, nz);
                    if (!nz) continue;
                    auto q0 = weight_exponent(bi, bj);
                    if (*target == Rat(-1) && !q0) continue;
                    if (q0) {
                        Scalar w(Scalar::zero(F));
                        for (auto& [q, d] : dterms)
                            if (q == *q0)
                                w = d.at(offv[bi], offv[bi]) - d.at(offv[bj], offv[bj]);
                        emit(ExpAtom{vp.scaled(w.inv()), *target - *q0});
                    } else {
                        // per-pair entry basis and the residue operator
                        std::vector<Mat> pb;
                        for (long i = 0; i < blocks[bi]; ++i)
                            for (long j = 0; j < blocks[bj]; ++j) {
                                Mat m(F, n, n);
                                m.at(offv[bi] + i, offv[bj] + j) = Scalar::one(F);
                                pb.push_back(m);
                            }
                        Mat adC = ad_matrix(Cres, pb);
                        Mat M = adC.scaled(Scalar::of(F, Rat(-1)));
                        Scalar c = Scalar::of(F, *target + 1);
                        for (long i = 0; i < M.rows(); ++i) M.at(i, i) = M.at(i, i) + c;
                        auto x = solve(M, coords_col(vp.scaled(Scalar::of(F, Rat(-1))), pb));
                        if (!x)
                            throw Error("radical recurrence is singular away from the residue");
                        emit(ExpAtom{col_to_mat(*x, pb), *target + 1});
                    }
                }
            }
            if (guard <= 0) throw Error("radical phase did not terminate");
            // residue: remove the component in the image of ad(C) for
            // weight-zero pairs (constant unipotent conjugation)
            if (Rat(-1) < A.prec()) {
                Mat v = level_component(A.coeff(Rat(-1)));
                if (!v.is_zero()) {
                    for (long bi = 0; bi + lev < (long)blocks.size(); ++bi) {
                        long bj = bi + lev;
                        if (weight_exponent(bi, bj)) continue; // already killed above
                        std::vector<Mat> pb;
                        for (long i = 0; i < blocks[bi]; ++i)
                            for (long j = 0; j < blocks[bj]; ++j) {
                                Mat m(F, n, n);
                                m.at(offv[bi] + i, offv[bj] + j) = Scalar::one(F);
                                pb.push_back(m);
                            }
                        Mat vp(F, n, n);
                        bool nz = false;
                        for (long i = 0; i < blocks[bi]; ++i)
                            for (long j = 0; j < blocks[bj]; ++j) {
                                vp.at(offv[bi] + i, offv[bj] + j) =
                                    v.at(offv[bi] + i, offv[bj] + j);
                                nz = nz || !vp.at(offv[bi] + i, offv[bj] + j).is_zero();
                            }
                        if (!nz) continue;
                        Mat adC = ad_matrix(Cres, pb);
                        Mat ker = nullspace(adC);
                        auto sol = solve(hcat(adC, ker), coords_col(vp, pb));
                        if (!sol) throw Error("residue commutator system inconsistent");
                        Mat x(F, adC.cols(), 1);
                        for (long i = 0; i < adC.cols(); ++i) x.at(i, 0) = sol->at(i, 0);
                        if (!(adC * x).is_zero()) emit(ExpAtom{col_to_mat(x, pb), Rat(0)});
                    }
                }
            }
        }
    }

    void unipotent_only(const GroupContext& ctx) {
        auto basis = ctx.lie_basis(F);
        auto levels = lower_central_series(basis);
        for (size_t stage = 0; stage <= levels.size(); ++stage) {
            long guard = 4096;
            while (guard-- > 0) {
                std::optional<Rat> target;
                for (auto& e : A.support())
                    if (e != Rat(-1)) {
                        target = e;
                        break;
                    }
                if (!target) break;
                Mat v = A.coeff(*target);
                emit(ExpAtom{v.scaled(Scalar::of(F, Rat(-1) / (*target + 1))), *target + 1});
            }
            if (guard <= 0) throw Error("unipotent reduction did not terminate");
        }
    }

    CanonicalForm extract() const {
        if (!(Rat(-1) < A.prec()))
            throw InsufficientPrecision("window too small to determine the residue", "-1");
        CanonicalForm cf;
        cf.normalized = normalized;
        cf.residue = A.coeff(Rat(-1));
        long lram = 1;
        for (auto& e : A.support()) {
            if (!(e < Rat(-1))) break;
            cf.levels.push_back(e);
            cf.irr_coeffs.push_back(A.coeff(e));
            lram = lcm_long(lram, (long)rat_den(e).convert_to<long>());
        }
        cf.ram = lram;
        return cf;
    }

    ReductionResult result() const {
        ReductionResult rr;
        rr.canonical = extract();
        rr.certificate = cert;
        rr.series = A;
        rr.trace = trace;
        rr.used_ramification = used_ram;
        rr.residue_ram = res_ram;
        rr.residue_unnormalized = pre_residue ? *pre_residue : rr.canonical.residue;
        return rr;
    }
};

Reducer make_reducer(const MatSeries& A, const GroupContext& ctx) {
    Reducer R(A);
    switch (ctx.kind) {
        case GroupKind::GL:
        case GroupKind::SL:
            if (ctx.n == 1) {
                R.torus_mode = true;
                R.blocks = {1};
                R.regions = {{1, ctx.kind == GroupKind::SL}};
            } else {
                R.blocks = {ctx.n};
                R.regions = {{ctx.n, ctx.kind == GroupKind::SL}};
            }
            break;
        case GroupKind::DiagTorus:
            R.torus_mode = true;
            for (long i = 0; i < ctx.n; ++i) {
                R.blocks.push_back(1);
                R.regions.emplace_back(1, false);
            }
            break;
        case GroupKind::UpperTriangular:
            R.radical = true;
            for (long i = 0; i < ctx.n; ++i) {
                R.blocks.push_back(1);
                R.regions.emplace_back(1, false);
            }
            break;
        case GroupKind::LeviProduct:
            R.radical = ctx.radical;
            for (auto& f : ctx.factors) {
                if (f.kind == GroupKind::DiagTorus) {
                    for (long i = 0; i < f.n; ++i) {
                        R.blocks.push_back(1);
                        R.regions.emplace_back(1, false);
                    }
                } else {
                    R.blocks.push_back(f.n);
                    R.regions.emplace_back(f.n, f.kind == GroupKind::SL);
                }
            }
            break;
        default:
            throw ParseError("unsupported context for this pipeline");
    }
    return R;
}

ReductionResult run_pipeline(const MatSeries& A, const GroupContext& ctx) {
    if (!ctx.lie_contains_series(A))
        throw ParseError("connection does not take values in Lie(" + ctx.str() + ")");
    if (ctx.kind == GroupKind::StrictUpper) {
        Reducer R(A);
        R.unipotent_only(ctx);
        return R.result();
    }
    Reducer R = make_reducer(A, ctx);
    R.irregular_loop();
    R.regular_phase();
    R.radical_phase();
    return R.result();
}

} // namespace

MatSeries CanonicalForm::as_series(const FieldPtr& F, long dim, const Rat& prec) const {
    MatSeries out = MatSeries::zero(F, dim, prec);
    for (size_t i = 0; i < levels.size(); ++i) out.add_coeff(levels[i], irr_coeffs[i].lifted(F));
    if (Rat(-1) < prec) out.add_coeff(Rat(-1), residue.lifted(F));
    return out;
}

ReductionResult reduce(const MatSeries& A, const GroupContext& ctx) {
    return run_pipeline(A, ctx);
}

ReductionResult reduce_torus(const MatSeries& A, const GroupContext& ctx) {
    if (ctx.kind != GroupKind::DiagTorus && ctx.n != 1)
        throw ParseError("reduce_torus expects a torus context");
    return run_pipeline(A, ctx);
}

ReductionResult reduce_unipotent(const MatSeries& A, const GroupContext& ctx) {
    if (ctx.kind != GroupKind::StrictUpper)
        throw ParseError("reduce_unipotent expects a strictly upper context");
    return run_pipeline(A, ctx);
}

ReductionResult reduce_solvable(const MatSeries& A, const GroupContext& ctx) {
    if (ctx.kind != GroupKind::UpperTriangular)
        throw ParseError("reduce_solvable expects an upper-triangular context");
    return run_pipeline(A, ctx);
}

ReductionResult reduce_regular_semisimple(const MatSeries& A, const GroupContext& ctx) {
    auto v = A.val();
    if (v && *v < Rat(-1)) throw NotRegular("input is not of the first kind");
    return run_pipeline(A, ctx);
}

ReductionResult reduce_reductive(const MatSeries& A, const GroupContext& ctx) {
    if (!ctx.is_reductive()) throw ParseError("reduce_reductive expects a reductive context");
    return run_pipeline(A, ctx);
}

ReductionResult reduce_general(const MatSeries& A, const GroupContext& ctx) {
    return run_pipeline(A, ctx);
}

ReductionResult align_first_kind(const MatSeries& A, const GroupContext& ctx) {
    auto v = A.val();
    if (v && *v < Rat(-1)) throw NotRegular("alignment needs a first-kind connection");
    Reducer R = make_reducer(A, ctx);
    R.align();
    return R.result();
}

std::optional<Rat> principal_level(const MatSeries& A, const GroupContext& ctx) {
    ReductionResult rr = reduce(A, ctx);
    if (rr.canonical.levels.empty()) return std::nullopt;
    return rr.canonical.levels.front();
}

Rat determinacy_window(const GroupContext& ctx, const Rat& r, WindowKind kind) {
    switch (kind) {
        case WindowKind::Regular:
            // r is read as k(A_-1); the aligned form needs that many
            // coefficients past the residue
            return r + 1;
        case WindowKind::Unipotent: {
            if (r >= Rat(-1)) return Rat(0);
            long cls = 0;
            try {
                cls = (long)lower_central_series(ctx.lie_basis(Field::rationals())).size() - 1;
            } catch (const NotNilpotent&) {
                throw ParseError("unipotent window needs a nilpotent context");
            }
            Rat m = r;
            return Rat(cls) * (rat_abs(m) - 1) - m;
        }
        case WindowKind::Solvable: {
            // weight heights of the radical against the coordinate characters
            long b = 0;
            auto bs = ctx.block_sizes();
            if (bs.size() >= 2 || ctx.kind == GroupKind::UpperTriangular) b = 2;
            if (r >= Rat(-1)) return Rat(b);
            return Rat(b) + rat_abs(r);
        }
        case WindowKind::Irregular: {
            if (r >= Rat(-1)) return Rat(0);
            return Rat(ctx.height() + 1) * (rat_abs(r) - 1);
        }
    }
    return Rat(0);
}

Int ramification_bound(const GroupContext& ctx) {
    if (!ctx.is_reductive()) {
        // solvable contexts: weights of the radical have height at most 2 in
        // the coordinate characters
        return Int(2);
    }
    long h = ctx.height();
    if (h == 0) return Int(1);
    long R = ctx.rank_ss();
    long dim = ctx.dim_der();
    Int J = lattice_invariants(ctx).J;
    Int out = 2;
    for (long i = 0; i < 2 * R - 1; ++i) out *= h;
    out *= J;
    Int base = 4 * h + 2;
    for (long j = 0; 3 * j <= dim; ++j) {
        long expn = (dim - 3 * j) / 2;
        for (long e = 0; e < expn; ++e) out *= base;
    }
    return out;
}

Int regular_ramification_bound(const GroupContext& ctx) {
    if (!ctx.is_reductive()) return Int(2);
    long h = ctx.height();
    if (h == 0) return Int(1);
    return Int(h) * lattice_invariants(ctx).I;
}

} // namespace fconn
