#include "fconn/gauge.hpp"
#include <algorithm>
#include <sstream>

namespace fconn {

namespace {

long nil_index(const Mat& X) {
    Mat p = X;
    for (long m = 1; m <= X.rows(); ++m) {
        if (p.is_zero()) return m;
        p = p * X;
    }
    if (p.is_zero()) return X.rows();
    throw DivergentExponential("exponential of a non-nilpotent matrix at non-positive exponent");
}

// smallest m with ad(X)^m = 0, checked on the elementary matrices
long ad_nil_index(const Mat& X) {
    std::vector<Mat> cur;
    long n = X.rows();
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j) {
            Mat e(X.field(), n, n);
            e.at(i, j) = Scalar::one(X.field());
            cur.push_back(e);
        }
    for (long m = 0; m <= 2 * n; ++m) {
        bool allzero = true;
        for (auto& c : cur) {
            if (c.is_zero()) continue;
            allzero = false;
            c = bracket(X, c);
        }
        if (allzero) return m;
    }
    throw DivergentExponential("exponential of a non-nilpotent matrix at non-positive exponent");
}

// exp(ad(t^q X)) applied to A; for q <= 0 the precision window shrinks by
// K*|q| where K is the largest power of ad(X) that survives
MatSeries exp_conjugate(const Mat& X, const Rat& q, const MatSeries& A) {
    FieldPtr F = A.field();
    Mat Xl = X.lifted(F);
    Rat prec = A.prec();
    long K = -1; // unlimited for q > 0
    if (q <= 0 && !Xl.is_zero()) {
        nil_index(Xl); // reject non-nilpotent X up front
        K = ad_nil_index(Xl) - 1;
        prec += Rat(K) * q;
    }
    MatSeries out(F, A.dim(), A.ram(), prec);
    for (auto& [key, C] : A.raw()) {
        Rat e(key, A.ram());
        if (e < prec) out.add_coeff(e, C);
    }
    MatSeries term = A;
    Rat factNum(1);
    for (long k = 1;; ++k) {
        if (K >= 0 && k > K) break;
        MatSeries next(F, A.dim(), A.ram(), A.prec());
        bool any = false;
        for (auto& [key, C] : term.raw()) {
            Rat e = Rat(key, term.ram()) + q;
            if (e < A.prec()) {
                next.add_coeff(e, bracket(Xl, C));
                any = true;
            }
        }
        if (!any) break;
        term = next;
        factNum *= k;
        Scalar invfact = Scalar::of(F, Rat(1) / factNum);
        bool wrote = false;
        for (auto& [key, C] : term.raw()) {
            Rat e(key, term.ram());
            if (e < prec) {
                out.add_coeff(e, C.scaled(invfact));
                wrote = true;
            }
        }
        if (!wrote && K < 0 && q > 0) break; // everything beyond the window now
        if (term.is_zero()) break;
    }
    return out;
}

MatSeries shear_conjugate(const ShearAtom& s, const MatSeries& A, bool with_derivative) {
    FieldPtr F = A.field();
    long n = A.dim();
    if ((long)s.lam.size() != n) throw DimensionMismatch("shear size");
    Int lo = s.lam[0], hi = s.lam[0];
    for (auto& l : s.lam) {
        lo = std::min(lo, l);
        hi = std::max(hi, l);
    }
    Rat spread = Rat(hi - lo, Int(s.den));
    Rat prec = A.prec() - spread;
    MatSeries out(F, n, lcm_long(A.ram(), s.den), prec);
    for (auto& [key, C] : A.raw()) {
        Rat e(key, A.ram());
        for (long i = 0; i < n; ++i)
            for (long j = 0; j < n; ++j) {
                if (C.at(i, j).is_zero()) continue;
                Rat e2 = e + Rat(s.lam[i] - s.lam[j], Int(s.den));
                if (e2 >= prec) continue;
                Mat one(F, n, n);
                one.at(i, j) = C.at(i, j);
                out.add_coeff(e2, one);
            }
    }
    if (with_derivative && Rat(-1) < prec) {
        Mat d(F, n, n);
        for (long i = 0; i < n; ++i) d.at(i, i) = Scalar::of(F, Rat(s.lam[i], Int(s.den)));
        out.add_coeff(Rat(-1), d);
    }
    return out;
}

} // namespace

Mat exp_nilpotent(const Mat& X) {
    long m = nil_index(X);
    Mat sum = Mat::identity(X.field(), X.rows());
    Mat p = Mat::identity(X.field(), X.rows());
    Rat fact(1);
    for (long k = 1; k < m; ++k) {
        p = p * X;
        fact *= k;
        sum = sum + p.scaled(Scalar::of(X.field(), Rat(1) / fact));
    }
    return sum;
}

MatSeries apply_atom(const GaugeAtom& atom, const MatSeries& A) {
    if (std::holds_alternative<ExpAtom>(atom)) {
        const auto& e = std::get<ExpAtom>(atom);
        MatSeries out = exp_conjugate(e.X, e.q, A);
        Rat ex = e.q - 1;
        if (ex < out.prec())
            out.add_coeff(ex, e.X.lifted(out.field()).scaled(Scalar::of(out.field(), e.q)));
        return out;
    }
    if (std::holds_alternative<ShearAtom>(atom))
        return shear_conjugate(std::get<ShearAtom>(atom), A, true);
    if (std::holds_alternative<ConstAtom>(atom)) {
        const Mat& g = std::get<ConstAtom>(atom).g;
        Mat gl = g.lifted(A.field());
        return A.conjugated(gl, inverse(gl));
    }
    return ramify(A, std::get<RamifyAtom>(atom).c);
}

MatSeries conj_atom(const GaugeAtom& atom, const MatSeries& m) {
    if (std::holds_alternative<ExpAtom>(atom)) {
        const auto& e = std::get<ExpAtom>(atom);
        return exp_conjugate(e.X, e.q, m);
    }
    if (std::holds_alternative<ShearAtom>(atom))
        return shear_conjugate(std::get<ShearAtom>(atom), m, false);
    if (std::holds_alternative<ConstAtom>(atom)) {
        const Mat& g = std::get<ConstAtom>(atom).g;
        Mat gl = g.lifted(m.field());
        return m.conjugated(gl, inverse(gl));
    }
    return ramify(m, std::get<RamifyAtom>(atom).c);
}

MatSeries apply_gauge(const GaugeCert& cert, const MatSeries& A) {
    MatSeries cur = A;
    for (auto& a : cert.atoms) cur = apply_atom(a, cur);
    return cur;
}

MatSeries conj_gauge(const GaugeCert& cert, const MatSeries& m) {
    MatSeries cur = m;
    for (auto& a : cert.atoms) cur = conj_atom(a, cur);
    return cur;
}

GaugeAtom invert_atom(const GaugeAtom& atom) {
    if (std::holds_alternative<ExpAtom>(atom)) {
        auto e = std::get<ExpAtom>(atom);
        return ExpAtom{e.X.scaled(Scalar::of(e.X.field(), Rat(-1))), e.q};
    }
    if (std::holds_alternative<ShearAtom>(atom)) {
        auto s = std::get<ShearAtom>(atom);
        for (auto& l : s.lam) l = -l;
        return s;
    }
    if (std::holds_alternative<ConstAtom>(atom))
        return ConstAtom{inverse(std::get<ConstAtom>(atom).g)};
    return atom;
}

GaugeCert invert(const GaugeCert& cert) {
    GaugeCert out;
    for (auto it = cert.atoms.rbegin(); it != cert.atoms.rend(); ++it)
        out.atoms.push_back(invert_atom(*it));
    return out;
}

GaugeCert compose(const GaugeCert& first, const GaugeCert& second) {
    GaugeCert out;
    out.atoms = second.atoms;
    out.atoms.insert(out.atoms.end(), first.atoms.begin(), first.atoms.end());
    return out;
}

MatSeries expand_atom(const GaugeAtom& atom, const FieldPtr& F, long dim, const Rat& prec) {
    if (std::holds_alternative<ExpAtom>(atom)) {
        const auto& e = std::get<ExpAtom>(atom);
        Mat X = e.X.lifted(F);
        long ram = (long)rat_den(e.q).convert_to<long>();
        MatSeries out(F, dim, ram, prec);
        if (Rat(0) < prec) out.add_coeff(Rat(0), Mat::identity(F, dim));
        long K = -1;
        if (e.q <= 0 && !X.is_zero()) K = nil_index(X) - 1;
        Mat p = Mat::identity(F, dim);
        Rat fact(1);
        for (long k = 1;; ++k) {
            if (K >= 0 && k > K) break;
            Rat ex = e.q * k;
            if (e.q > 0 && ex >= prec) break;
            p = p * X;
            if (p.is_zero()) break;
            fact *= k;
            if (ex < prec) out.add_coeff(ex, p.scaled(Scalar::of(F, Rat(1) / fact)));
        }
        return out;
    }
    if (std::holds_alternative<ShearAtom>(atom)) {
        const auto& s = std::get<ShearAtom>(atom);
        if ((long)s.lam.size() != dim) throw DimensionMismatch("shear size");
        MatSeries out(F, dim, s.den, prec);
        for (long i = 0; i < dim; ++i) {
            Rat ex = Rat(s.lam[i], Int(s.den));
            if (ex >= prec) throw InsufficientPrecision("expanding a shear", rat_str(ex));
            Mat one(F, dim, dim);
            one.at(i, i) = Scalar::one(F);
            out.add_coeff(ex, one);
        }
        return out;
    }
    if (std::holds_alternative<ConstAtom>(atom))
        return MatSeries::monomial(F, dim, Rat(0), std::get<ConstAtom>(atom).g.lifted(F), prec);
    return ramify(MatSeries::identity(F, dim, prec), std::get<RamifyAtom>(atom).c);
}

MatSeries expand(const GaugeCert& cert, const FieldPtr& F, long dim, const Rat& prec) {
    MatSeries g = MatSeries::identity(F, dim, prec);
    for (auto& a : cert.atoms) g = expand_atom(a, F, dim, prec) * g;
    return g;
}

long cert_denominator(const GaugeCert& cert) {
    long d = 1;
    for (auto& a : cert.atoms) {
        if (std::holds_alternative<ExpAtom>(a))
            d = lcm_long(d, (long)rat_den(std::get<ExpAtom>(a).q).convert_to<long>());
        else if (std::holds_alternative<ShearAtom>(a)) {
            const auto& s = std::get<ShearAtom>(a);
            for (auto& l : s.lam)
                d = lcm_long(d, (long)rat_den(Rat(l, Int(s.den))).convert_to<long>());
        }
    }
    return d;
}

bool verify_equivalence(const MatSeries& A, const MatSeries& B, const GaugeCert& cert) {
    return apply_gauge(cert, A) == B;
}

std::string atom_str(const GaugeAtom& atom) {
    std::ostringstream os;
    if (std::holds_alternative<ExpAtom>(atom)) {
        const auto& e = std::get<ExpAtom>(atom);
        os << "exp(t^" << rat_str(e.q) << " * " << e.X.str() << ")";
    } else if (std::holds_alternative<ShearAtom>(atom)) {
        const auto& s = std::get<ShearAtom>(atom);
        os << "t^diag(";
        for (size_t i = 0; i < s.lam.size(); ++i)
            os << (i ? "," : "") << s.lam[i] << "/" << s.den;
        os << ")";
    } else if (std::holds_alternative<ConstAtom>(atom)) {
        os << "const " << std::get<ConstAtom>(atom).g.str();
    } else {
        os << "ramify " << std::get<RamifyAtom>(atom).c;
    }
    return os.str();
}

std::string cert_str(const GaugeCert& cert) {
    std::string s = "[";
    for (size_t i = 0; i < cert.atoms.size(); ++i)
        s += (i ? "; " : "") + atom_str(cert.atoms[i]);
    return s + "]";
}

} // namespace fconn
