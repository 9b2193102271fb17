#include "fconn/puiseux.hpp"
#include <sstream>

namespace fconn {

namespace {
long key_of(const Rat& q, long ram, const char* what) {
    Rat k = q * ram;
    if (!is_integer(k))
        throw DimensionMismatch(std::string(what) + ": exponent " + rat_str(q) +
                                " is off the 1/" + std::to_string(ram) + " grid");
    return (long)rat_num(k);
}
} // namespace

void MatSeries::prune() {
    for (auto it = c_.begin(); it != c_.end();) {
        if (it->second.is_zero() || Rat(it->first, ram_) >= prec_) it = c_.erase(it);
        else ++it;
    }
}

void MatSeries::set_coeff(const Rat& q, const Mat& m) {
    if (m.rows() != dim_ || m.cols() != dim_) throw DimensionMismatch("set_coeff shape");
    long den = (long)rat_den(q);
    if (ram_ % den != 0) *this = with_ram(lcm_long(ram_, den));
    long k = key_of(q, ram_, "set_coeff");
    if (Rat(k, ram_) >= prec_) return;
    if (m.is_zero()) c_.erase(k);
    else c_[k] = m.lifted(F_);
}

void MatSeries::add_coeff(const Rat& q, const Mat& m) {
    long den = (long)rat_den(q);
    if (ram_ % den != 0) *this = with_ram(lcm_long(ram_, den));
    long k = key_of(q, ram_, "add_coeff");
    if (Rat(k, ram_) >= prec_) return;
    auto it = c_.find(k);
    if (it == c_.end()) set_coeff(q, m);
    else {
        it->second = it->second + m;
        if (it->second.is_zero()) c_.erase(it);
    }
}

Mat MatSeries::coeff(const Rat& q) const {
    if (q >= prec_)
        throw InsufficientPrecision("coefficient at t^" + rat_str(q) +
                                        " is beyond the known window (prec " +
                                        rat_str(prec_) + ")",
                                    rat_str(q));
    Rat k = q * ram_;
    if (!is_integer(k)) return Mat(F_, dim_, dim_);
    auto it = c_.find((long)rat_num(k));
    if (it == c_.end()) return Mat(F_, dim_, dim_);
    return it->second;
}

bool MatSeries::is_zero() const {
    for (auto& [k, m] : c_)
        if (Rat(k, ram_) < prec_ && !m.is_zero()) return false;
    return true;
}

std::optional<Rat> MatSeries::val() const {
    for (auto& [k, m] : c_)
        if (!m.is_zero() && Rat(k, ram_) < prec_) return Rat(k, ram_);
    return std::nullopt;
}

std::vector<Rat> MatSeries::support() const {
    std::vector<Rat> s;
    for (auto& [k, m] : c_)
        if (!m.is_zero() && Rat(k, ram_) < prec_) s.push_back(Rat(k, ram_));
    return s;
}

MatSeries MatSeries::with_ram(long new_ram) const {
    if (new_ram == ram_) return *this;
    if (new_ram % ram_ != 0)
        throw DimensionMismatch("with_ram: " + std::to_string(new_ram) +
                                " does not refine 1/" + std::to_string(ram_));
    MatSeries r(F_, dim_, new_ram, prec_);
    long f = new_ram / ram_;
    for (auto& [k, m] : c_) r.c_[k * f] = m;
    return r;
}

MatSeries MatSeries::lifted(const FieldPtr& G) const {
    MatSeries r(G, dim_, ram_, prec_);
    for (auto& [k, m] : c_) r.c_[k] = m.lifted(G);
    return r;
}

void MatSeries::unify(MatSeries& a, MatSeries& b) {
    if (a.dim_ != b.dim_) throw DimensionMismatch("series dimension mismatch");
    long r = lcm_long(a.ram_, b.ram_);
    if (a.ram_ != r) a = a.with_ram(r);
    if (b.ram_ != r) b = b.with_ram(r);
    if (!a.F_->same_as(*b.F_)) {
        if (a.F_->abs_deg() >= b.F_->abs_deg()) b = b.lifted(a.F_);
        else a = a.lifted(b.F_);
    }
}

MatSeries MatSeries::operator+(const MatSeries& o) const {
    MatSeries a = *this, b = o;
    unify(a, b);
    a.prec_ = std::min(a.prec_, b.prec_);
    for (auto& [k, m] : b.c_) {
        auto it = a.c_.find(k);
        if (it == a.c_.end()) a.c_[k] = m;
        else it->second = it->second + m;
    }
    a.prune();
    return a;
}

MatSeries MatSeries::operator-() const {
    MatSeries r = *this;
    for (auto& [k, m] : r.c_) m = -m;
    return r;
}

MatSeries MatSeries::operator-(const MatSeries& o) const { return *this + (-o); }

MatSeries MatSeries::operator*(const MatSeries& o) const {
    MatSeries a = *this, b = o;
    unify(a, b);
    // window of the product: min(val_a + prec_b, val_b + prec_a)
    Rat va = a.val().value_or(a.prec_), vb = b.val().value_or(b.prec_);
    Rat prec = std::min(va + b.prec_, vb + a.prec_);
    MatSeries r(a.F_, a.dim_, a.ram_, prec);
    long pk = (long)rat_floor(prec * a.ram_) + 1;
    for (auto& [i, mi] : a.c_) {
        if (mi.is_zero()) continue;
        for (auto& [j, mj] : b.c_) {
            if (i + j >= pk) break;
            if (mj.is_zero()) continue;
            Mat prod = mi * mj;
            auto it = r.c_.find(i + j);
            if (it == r.c_.end()) r.c_[i + j] = prod;
            else it->second = it->second + prod;
        }
    }
    r.prune();
    return r;
}

MatSeries MatSeries::scaled(const Scalar& s) const {
    MatSeries r = *this;
    if (!s.field()->same_as(*F_) && s.field()->abs_deg() > F_->abs_deg()) r = r.lifted(s.field());
    for (auto& [k, m] : r.c_) m = m.scaled(s.lifted(r.F_));
    r.prune();
    return r;
}

MatSeries MatSeries::conjugated(const Mat& g, const Mat& ginv) const {
    MatSeries r = *this;
    for (auto& [k, m] : r.c_) m = g * m * ginv;
    r.prune();
    return r;
}

bool MatSeries::operator==(const MatSeries& o) const {
    MatSeries a = *this, b = o;
    unify(a, b);
    Rat w = std::min(a.prec_, b.prec_);
    for (auto& [k, m] : a.c_) {
        if (Rat(k, a.ram_) >= w) continue;
        auto it = b.c_.find(k);
        if (it == b.c_.end()) {
            if (!m.is_zero()) return false;
        } else if (m != it->second) return false;
    }
    for (auto& [k, m] : b.c_) {
        if (Rat(k, b.ram_) >= w) continue;
        if (a.c_.find(k) == a.c_.end() && !m.is_zero()) return false;
    }
    return true;
}

MatSeries MatSeries::derivative() const {
    MatSeries r(F_, dim_, ram_, prec_ - 1);
    for (auto& [k, m] : c_) {
        if (k == 0) continue;
        r.c_[k - ram_] = m.scaled(Scalar::of(F_, Rat(k, ram_)));
    }
    r.prune();
    return r;
}

MatSeries MatSeries::truncated(const Rat& new_prec) const {
    MatSeries r = *this;
    r.prec_ = std::min(prec_, new_prec);
    r.prune();
    return r;
}

MatSeries MatSeries::drop_below(const Rat& cut) const {
    MatSeries r = *this;
    for (auto it = r.c_.begin(); it != r.c_.end();) {
        if (Rat(it->first, r.ram_) < cut) it = r.c_.erase(it);
        else ++it;
    }
    return r;
}

MatSeries MatSeries::principal_part() const {
    MatSeries r = *this;
    for (auto it = r.c_.begin(); it != r.c_.end();) {
        if (Rat(it->first, r.ram_) >= Rat(-1)) it = r.c_.erase(it);
        else ++it;
    }
    return r;
}

MatSeries MatSeries::monomial(const FieldPtr& F, long dim, const Rat& q, const Mat& m,
                              const Rat& prec) {
    MatSeries r(F, dim, (long)rat_den(q), prec);
    r.set_coeff(q, m);
    return r;
}

MatSeries MatSeries::zero(const FieldPtr& F, long dim, const Rat& prec) {
    return MatSeries(F, dim, 1, prec);
}

MatSeries MatSeries::identity(const FieldPtr& F, long dim, const Rat& prec) {
    return monomial(F, dim, Rat(0), Mat::identity(F, dim), prec);
}

std::string MatSeries::str() const {
    std::ostringstream os;
    bool first = true;
    for (auto& [k, m] : c_) {
        if (!first) os << " + ";
        first = false;
        os << m.str() << " t^(" << rat_str(Rat(k, ram_)) << ")";
    }
    if (first) os << "0";
    os << "  [prec " << rat_str(prec_) << ", ram " << ram_ << "]";
    return os.str();
}

MatSeries b_lift(const MatSeries& a, long b) {
    if (b < 1) throw ParseError("lift degree must be positive");
    MatSeries r(a.F_, a.dim_, a.ram_, a.prec_ * b + (b - 1));
    for (auto& [k, m] : a.c_)
        r.c_[k * b + (b - 1) * a.ram_] = m.scaled(Scalar::of(a.F_, Rat(b)));
    r.prune();
    return r;
}

MatSeries ramify(const MatSeries& a, long c) {
    if (c < 1) throw ParseError("ramification factor must be positive");
    return a.with_ram(a.ram() * c);
}

MatSeries ad_action(const MatSeries& a, const MatSeries& b) { return a * b - b * a; }

MatSeries series_inverse(const MatSeries& a) {
    auto v = a.val();
    if (!v) throw NotInvertible("series inverse of zero");
    Mat lead = a.coeff(*v);
    Mat lead_inv = inverse(lead); // throws NotInvertible if singular
    // a = L t^v (1 + B) with val(B) > 0; invert by geometric series
    MatSeries shifted(a.field(), a.dim(), a.ram(), a.prec() - *v);
    for (auto& [k, m] : a.raw()) {
        Rat q = Rat(k, a.ram()) - *v;
        shifted.set_coeff(q, lead_inv * m);
    }
    MatSeries one = MatSeries::identity(a.field(), a.dim(), a.prec() - *v);
    MatSeries B = shifted - one;
    MatSeries acc = one, term = one;
    if (auto bv = B.val()) {
        long steps = (long)rat_num(rat_floor((a.prec() - *v) / *bv)) + 1;
        for (long i = 0; i < steps; ++i) {
            term = -(term * B);
            if (term.is_zero()) break;
            acc = acc + term;
        }
    }
    // (1+B)^{-1} L^{-1} t^{-v}
    MatSeries r(a.field(), a.dim(), 1, acc.prec() - *v);
    r = r.with_ram(acc.ram());
    for (auto& [k, m] : acc.raw()) r.set_coeff(Rat(k, acc.ram()) - *v, m * lead_inv);
    return r;
}

} // namespace fconn
