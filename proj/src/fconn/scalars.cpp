#include "fconn/scalars.hpp"
#include <algorithm>
#include <map>
#include <mutex>
#include <sstream>

namespace fconn {

long euler_phi(long n) {
    long r = n;
    for (long p = 2; p * p <= n; ++p) {
        if (n % p == 0) {
            r -= r / p;
            while (n % p == 0) n /= p;
        }
    }
    if (n > 1) r -= r / n;
    return r;
}

namespace {

using RP = std::vector<Rat>; // rational poly, low to high

void rp_trim(RP& p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
}

RP rp_mul(const RP& a, const RP& b) {
    if (a.empty() || b.empty()) return {};
    RP r(a.size() + b.size() - 1, Rat(0));
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j)
            r[i + j] += a[i] * b[j];
    rp_trim(r);
    return r;
}

RP rp_sub(RP a, const RP& b) {
    if (a.size() < b.size()) a.resize(b.size(), Rat(0));
    for (size_t i = 0; i < b.size(); ++i) a[i] -= b[i];
    rp_trim(a);
    return a;
}

// a = q*b + r
void rp_divmod(RP a, const RP& b, RP& q, RP& r) {
    q.clear();
    rp_trim(a);
    RP bb = b;
    rp_trim(bb);
    if (bb.empty()) throw NotInvertible("polynomial division by zero");
    if (a.size() >= bb.size()) q.assign(a.size() - bb.size() + 1, Rat(0));
    while (a.size() >= bb.size() && !a.empty()) {
        Rat c = a.back() / bb.back();
        size_t k = a.size() - bb.size();
        q[k] = c;
        for (size_t i = 0; i < bb.size(); ++i) a[k + i] -= c * bb[i];
        rp_trim(a);
    }
    r = a;
}

RP rp_mod(const RP& a, const RP& b) {
    RP q, r;
    rp_divmod(a, b, q, r);
    return r;
}

} // namespace

std::vector<Rat> cyclotomic_poly(long n) {
    // Phi_n = (x^n - 1) / prod_{d | n, d < n} Phi_d
    static std::map<long, RP> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lk(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    RP num(n + 1, Rat(0));
    num[0] = -1;
    num[n] = 1;
    for (long d = 1; d < n; ++d) {
        if (n % d) continue;
        RP phi_d;
        auto jt = cache.find(d);
        if (jt != cache.end()) phi_d = jt->second;
        else {
            // recursion depth is the divisor chain; release/reacquire not needed
            // because cyclotomic_poly(d) with d < n fills the cache bottom-up
            RP nd(d + 1, Rat(0));
            nd[0] = -1;
            nd[d] = 1;
            for (long e = 1; e < d; ++e)
                if (d % e == 0) {
                    RP q, r;
                    rp_divmod(nd, cache.at(e), q, r);
                    nd = q;
                }
            cache[d] = nd;
            phi_d = nd;
        }
        RP q, r;
        rp_divmod(num, phi_d, q, r);
        num = q;
    }
    cache[n] = num;
    return num;
}

bool Field::same_as(const Field& o) const {
    return n == o.n && ext == o.ext && degree_cap == o.degree_cap;
}

FieldPtr Field::rationals() {
    static FieldPtr q = make(1);
    return q;
}

FieldPtr Field::make(long n, long degree_cap) {
    if (n < 1) throw ParseError("cyclotomic order must be positive");
    auto f = std::make_shared<Field>();
    f->n = n;
    f->cyclo = cyclotomic_poly(n);
    f->degree_cap = degree_cap;
    if (f->abs_deg() > degree_cap)
        throw FieldTooSmall("cyclotomic degree " + std::to_string(f->abs_deg()) +
                            " exceeds cap " + std::to_string(degree_cap));
    return f;
}

FieldPtr Field::make_ext(long n, const std::vector<Rat>& minpoly, long degree_cap) {
    auto base = make(n, degree_cap);
    auto f = std::make_shared<Field>(*base);
    if (minpoly.size() < 3 || minpoly.back() != 1)
        throw ParseError("extension minpoly must be monic of degree >= 2");
    // sanity: squarefree and without rational roots (a cheap reducibility screen)
    RP p(minpoly), dp;
    for (size_t i = 1; i < p.size(); ++i) dp.push_back(Rat((long)i) * p[i]);
    RP a = p, b = dp;
    while (!b.empty()) {
        RP r = rp_mod(a, b);
        a = b;
        b = r;
    }
    if (a.size() > 1) throw ParseError("extension minpoly is not squarefree");
    for (const Rat& cand : {Rat(0), Rat(1), Rat(-1)}) {
        Rat v(0), t(1);
        for (const Rat& c : p) {
            v += c * t;
            t *= cand;
        }
        if (v == 0) throw ParseError("extension minpoly has a rational root");
    }
    f->ext.clear();
    for (const Rat& c : minpoly) f->ext.push_back({c});
    if (f->abs_deg() > degree_cap)
        throw FieldTooSmall("field degree " + std::to_string(f->abs_deg()) +
                            " exceeds cap " + std::to_string(degree_cap));
    return f;
}

FieldPtr Field::with_root_of_unity(long b) const {
    if (b < 1) throw ParseError("root of unity order must be positive");
    long m = std::lcm(n, b);
    if (m == n) return std::make_shared<Field>(*this);
    long deg = euler_phi(m) * ext_deg();
    if (deg > degree_cap)
        throw FieldTooSmall("adjoining a " + std::to_string(b) +
                            "-th root of unity needs degree " + std::to_string(deg) +
                            " > cap " + std::to_string(degree_cap));
    auto f = std::make_shared<Field>();
    f->n = m;
    f->cyclo = cyclotomic_poly(m);
    f->degree_cap = degree_cap;
    long stretch = m / n;
    for (const auto& coef : ext) {
        RP lifted(coef.size() * stretch, Rat(0));
        for (size_t i = 0; i < coef.size(); ++i) lifted[i * stretch] = coef[i];
        RP red = rp_mod(lifted, f->cyclo);
        red.resize(f->cyclo_deg(), Rat(0));
        f->ext.push_back(red);
    }
    return f;
}

// ---- Scalar ----

Scalar::Scalar(const Rat& q) : F_(Field::rationals()) {
    c_.assign(1, std::vector<Rat>(1, q));
    normalize_shape();
}

void Scalar::normalize_shape() {
    c_.resize(F_->ext_deg());
    for (auto& row : c_) row.resize(F_->cyclo_deg(), Rat(0));
}

Scalar Scalar::of(const FieldPtr& F, const Rat& q) {
    Scalar s;
    s.F_ = F;
    s.c_.assign(F->ext_deg(), std::vector<Rat>(F->cyclo_deg(), Rat(0)));
    s.c_[0][0] = q;
    return s;
}

Scalar Scalar::zeta(const FieldPtr& F) { return zeta_pow(F, 1); }

Scalar Scalar::zeta_pow(const FieldPtr& F, long k) {
    long n = F->n;
    k %= n;
    if (k < 0) k += n;
    RP x(k + 1, Rat(0));
    x[k] = 1;
    RP red = rp_mod(x, F->cyclo);
    Scalar s = zero(F);
    for (size_t i = 0; i < red.size(); ++i) s.c_[0][i] = red[i];
    return s;
}

Scalar Scalar::theta(const FieldPtr& F) {
    if (!F->has_ext()) throw FieldTooSmall("field has no primitive extension element");
    Scalar s = zero(F);
    s.c_[1][0] = 1;
    return s;
}

Scalar Scalar::from_coords(const FieldPtr& F, std::vector<std::vector<Rat>> coords) {
    Scalar s;
    s.F_ = F;
    s.c_ = std::move(coords);
    s.normalize_shape();
    return s;
}

bool Scalar::is_zero() const {
    for (auto& row : c_)
        for (auto& q : row)
            if (q != 0) return false;
    return true;
}

bool Scalar::is_rational() const {
    for (size_t j = 0; j < c_.size(); ++j)
        for (size_t i = 0; i < c_[j].size(); ++i)
            if ((i || j) && c_[j][i] != 0) return false;
    return true;
}

Rat Scalar::as_rat() const {
    if (!is_rational()) throw FieldTooSmall("scalar is not rational: " + str());
    return c_[0][0];
}

Rat Scalar::pi() const { return c_[0][0]; }

Rat rational_projection(const Scalar& s) { return s.pi(); }

void Scalar::unify(Scalar& a, Scalar& b) {
    if (a.F_->same_as(*b.F_)) return;
    if (a.F_->n == 1 && !a.F_->has_ext()) {
        a = Scalar::of(b.F_, a.c_[0][0]);
        return;
    }
    if (b.F_->n == 1 && !b.F_->has_ext()) {
        b = Scalar::of(a.F_, b.c_[0][0]);
        return;
    }
    if (a.F_->n % b.F_->n == 0 && a.F_->ext == b.F_->ext) {
        b = b.lifted(a.F_);
        return;
    }
    if (b.F_->n % a.F_->n == 0 && a.F_->ext == b.F_->ext) {
        a = a.lifted(b.F_);
        return;
    }
    throw DimensionMismatch("scalars live in incompatible fields");
}

Scalar Scalar::operator-() const {
    Scalar r = *this;
    for (auto& row : r.c_)
        for (auto& q : row) q = -q;
    return r;
}

Scalar Scalar::operator+(const Scalar& o) const {
    Scalar a = *this, b = o;
    unify(a, b);
    for (size_t j = 0; j < a.c_.size(); ++j)
        for (size_t i = 0; i < a.c_[j].size(); ++i) a.c_[j][i] += b.c_[j][i];
    return a;
}

Scalar Scalar::operator-(const Scalar& o) const { return *this + (-o); }

namespace {

// cyclotomic-layer helpers; elements are RP of length cyclo_deg
RP ce_mul(const Field& F, const RP& a, const RP& b) {
    RP r = rp_mod(rp_mul(a, b), F.cyclo);
    r.resize(F.cyclo_deg(), Rat(0));
    return r;
}

bool ce_zero(const RP& a) {
    for (auto& q : a)
        if (q != 0) return false;
    return true;
}

RP ce_inv(const Field& F, const RP& a) {
    // extended Euclid of a against the cyclotomic polynomial
    RP r0 = F.cyclo, r1 = a, s0 = {}, s1 = {Rat(1)};
    rp_trim(r1);
    if (r1.empty()) throw NotInvertible("division by zero in cyclotomic field");
    while (true) {
        RP q, r;
        rp_divmod(r0, r1, q, r);
        rp_trim(r);
        RP s2 = rp_sub(s0, rp_mul(q, s1));
        if (r.empty()) break;
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s2;
    }
    if (r1.size() != 1)
        throw NotInvertible("zero divisor in cyclotomic field (reducible modulus?)");
    Rat lead = r1[0];
    RP inv = s1;
    for (auto& q : inv) q /= lead;
    inv = rp_mod(inv, F.cyclo);
    inv.resize(F.cyclo_deg(), Rat(0));
    return inv;
}

// extension-layer polynomial: coefficients are cyclotomic elements
using CP = std::vector<RP>;

void cp_trim(const Field& F, CP& p) {
    (void)F;
    while (!p.empty() && ce_zero(p.back())) p.pop_back();
}

CP cp_mul(const Field& F, const CP& a, const CP& b) {
    if (a.empty() || b.empty()) return {};
    CP r(a.size() + b.size() - 1, RP(F.cyclo_deg(), Rat(0)));
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) {
            RP prod = ce_mul(F, a[i], b[j]);
            for (long k = 0; k < F.cyclo_deg(); ++k) r[i + j][k] += prod[k];
        }
    cp_trim(F, r);
    return r;
}

CP cp_sub(const Field& F, CP a, const CP& b) {
    if (a.size() < b.size()) a.resize(b.size(), RP(F.cyclo_deg(), Rat(0)));
    for (size_t i = 0; i < b.size(); ++i)
        for (long k = 0; k < F.cyclo_deg(); ++k) a[i][k] -= b[i][k];
    cp_trim(F, a);
    return a;
}

void cp_divmod(const Field& F, CP a, const CP& b, CP& q, CP& r) {
    cp_trim(F, a);
    CP bb = b;
    cp_trim(F, bb);
    if (bb.empty()) throw NotInvertible("polynomial division by zero");
    RP lead_inv = ce_inv(F, bb.back());
    q.clear();
    if (a.size() >= bb.size()) q.assign(a.size() - bb.size() + 1, RP(F.cyclo_deg(), Rat(0)));
    while (a.size() >= bb.size() && !a.empty()) {
        RP c = ce_mul(F, a.back(), lead_inv);
        size_t k = a.size() - bb.size();
        q[k] = c;
        for (size_t i = 0; i < bb.size(); ++i) {
            RP prod = ce_mul(F, c, bb[i]);
            for (long t = 0; t < F.cyclo_deg(); ++t) a[k + i][t] -= prod[t];
        }
        cp_trim(F, a);
    }
    r = a;
}

CP ext_modulus(const Field& F) {
    CP m;
    for (const auto& coef : F.ext) {
        RP c = coef;
        c.resize(F.cyclo_deg(), Rat(0));
        m.push_back(c);
    }
    return m;
}

} // namespace

Scalar Scalar::operator*(const Scalar& o) const {
    Scalar a = *this, b = o;
    unify(a, b);
    const Field& F = *a.F_;
    CP pa(a.c_.begin(), a.c_.end()), pb(b.c_.begin(), b.c_.end());
    CP prod = cp_mul(F, pa, pb);
    if (F.has_ext() && prod.size() >= (size_t)F.ext_deg() + 1) {
        CP q, r;
        cp_divmod(F, prod, ext_modulus(F), q, r);
        prod = r;
    }
    Scalar res = zero(a.F_);
    for (size_t j = 0; j < prod.size(); ++j) res.c_[j] = prod[j];
    return res;
}

Scalar Scalar::inv() const {
    if (is_zero()) throw NotInvertible("division by zero");
    const Field& F = *F_;
    if (!F.has_ext()) {
        RP a = c_[0];
        RP i = ce_inv(F, a);
        Scalar r = zero(F_);
        r.c_[0] = i;
        return r;
    }
    // extended Euclid in K0[theta] against the extension minpoly
    CP r0 = ext_modulus(F), r1(c_.begin(), c_.end());
    cp_trim(F, r1);
    CP s0 = {}, s1 = {RP(F.cyclo_deg(), Rat(0))};
    s1[0][0] = 1;
    while (true) {
        CP q, r;
        cp_divmod(F, r0, r1, q, r);
        cp_trim(F, r);
        CP s2 = cp_sub(F, s0, cp_mul(F, q, s1));
        if (r.empty()) break;
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s2;
    }
    if (r1.size() != 1)
        throw NotInvertible("zero divisor over the extension (reducible minpoly?)");
    RP lead_inv = ce_inv(F, r1[0]);
    Scalar res = zero(F_);
    for (size_t j = 0; j < s1.size() && j < res.c_.size(); ++j)
        res.c_[j] = ce_mul(F, s1[j], lead_inv);
    return res;
}

Scalar Scalar::operator/(const Scalar& o) const { return *this * o.inv(); }

Scalar Scalar::pow(long k) const {
    if (k < 0) return inv().pow(-k);
    Scalar r = one(F_), b = *this;
    while (k) {
        if (k & 1) r = r * b;
        b = b * b;
        k >>= 1;
    }
    return r;
}

bool Scalar::operator==(const Scalar& o) const {
    Scalar a = *this, b = o;
    unify(a, b);
    return a.c_ == b.c_;
}

int Scalar::cmp(const Scalar& o) const {
    Scalar a = *this, b = o;
    unify(a, b);
    for (size_t j = 0; j < a.c_.size(); ++j)
        for (size_t i = 0; i < a.c_[j].size(); ++i) {
            if (a.c_[j][i] < b.c_[j][i]) return -1;
            if (a.c_[j][i] > b.c_[j][i]) return 1;
        }
    return 0;
}

Scalar Scalar::lifted(const FieldPtr& G) const {
    if (F_->same_as(*G)) return *this;
    if (F_->n == 1 && !F_->has_ext()) return Scalar::of(G, c_[0][0]);
    if (G->n % F_->n != 0)
        throw DimensionMismatch("target field does not contain the source field");
    long stretch = G->n / F_->n;
    Scalar r = zero(G);
    for (size_t j = 0; j < c_.size(); ++j) {
        RP lifted(c_[j].size() * stretch, Rat(0));
        for (size_t i = 0; i < c_[j].size(); ++i) lifted[i * stretch] = c_[j][i];
        RP red = rp_mod(lifted, G->cyclo);
        red.resize(G->cyclo_deg(), Rat(0));
        r.c_[j] = red;
    }
    return r;
}

std::string Scalar::str() const {
    std::ostringstream os;
    bool first = true;
    for (size_t j = 0; j < c_.size(); ++j)
        for (size_t i = 0; i < c_[j].size(); ++i) {
            if (c_[j][i] == 0) continue;
            if (!first) os << " + ";
            first = false;
            os << rat_str(c_[j][i]);
            if (i) os << "*z^" << i;
            if (j) os << "*w^" << j;
        }
    if (first) os << "0";
    return os.str();
}

Scalar root_of_unity(const FieldPtr& F, long b) {
    if (b < 1) throw ParseError("root of unity order must be positive");
    if (F->n % b != 0)
        throw FieldTooSmall("field lacks a primitive " + std::to_string(b) +
                            "-th root of unity (cyclotomic order " + std::to_string(F->n) + ")");
    return Scalar::zeta_pow(F, F->n / b);
}

} // namespace fconn
