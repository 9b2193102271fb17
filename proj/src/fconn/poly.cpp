#include "fconn/poly.hpp"
#include <algorithm>

namespace fconn {

void SPoly::trim() {
    while (!c.empty() && c.back().is_zero()) c.pop_back();
}

SPoly SPoly::from(const FieldPtr& F, std::vector<Scalar> coeffs) {
    SPoly p;
    p.F = F;
    p.c = std::move(coeffs);
    for (auto& x : p.c) x = x.lifted(F);
    p.trim();
    return p;
}

Scalar SPoly::eval(const Scalar& x) const {
    Scalar v = Scalar::zero(F);
    for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
    return v;
}

SPoly SPoly::derivative() const {
    SPoly d;
    d.F = F;
    for (size_t i = 1; i < c.size(); ++i) d.c.push_back(Scalar((long)i) * c[i]);
    d.trim();
    return d;
}

SPoly poly_add(const SPoly& a, const SPoly& b) {
    SPoly r = a;
    if (r.c.size() < b.c.size()) r.c.resize(b.c.size(), Scalar::zero(a.F));
    for (size_t i = 0; i < b.c.size(); ++i) r.c[i] += b.c[i];
    r.trim();
    return r;
}

SPoly poly_sub(const SPoly& a, const SPoly& b) {
    SPoly nb = b;
    for (auto& x : nb.c) x = -x;
    return poly_add(a, nb);
}

SPoly poly_mul(const SPoly& a, const SPoly& b) {
    SPoly r;
    r.F = a.F;
    if (a.c.empty() || b.c.empty()) return r;
    r.c.assign(a.c.size() + b.c.size() - 1, Scalar::zero(a.F));
    for (size_t i = 0; i < a.c.size(); ++i)
        for (size_t j = 0; j < b.c.size(); ++j) r.c[i + j] += a.c[i] * b.c[j];
    r.trim();
    return r;
}

void poly_divmod(const SPoly& a, const SPoly& b, SPoly& q, SPoly& r) {
    SPoly bb = b;
    bb.trim();
    if (bb.is_zero()) throw NotInvertible("polynomial division by zero");
    r = a;
    r.trim();
    q.F = a.F;
    q.c.clear();
    if (r.c.size() >= bb.c.size()) q.c.assign(r.c.size() - bb.c.size() + 1, Scalar::zero(a.F));
    Scalar lead_inv = bb.c.back().inv();
    while (!r.c.empty() && r.c.size() >= bb.c.size()) {
        Scalar f = r.c.back() * lead_inv;
        size_t k = r.c.size() - bb.c.size();
        q.c[k] = f;
        for (size_t i = 0; i < bb.c.size(); ++i) r.c[k + i] -= f * bb.c[i];
        r.trim();
    }
    q.trim();
}

SPoly poly_gcd(SPoly a, SPoly b) {
    a.trim();
    b.trim();
    while (!b.is_zero()) {
        SPoly q, r;
        poly_divmod(a, b, q, r);
        a = b;
        b = r;
    }
    if (!a.is_zero()) {
        Scalar li = a.c.back().inv();
        for (auto& x : a.c) x *= li;
    }
    return a;
}

SPoly squarefree_part(const SPoly& p) {
    SPoly g = poly_gcd(p, p.derivative());
    if (g.deg() <= 0) {
        SPoly r = p;
        if (!r.is_zero()) {
            Scalar li = r.c.back().inv();
            for (auto& x : r.c) x *= li;
        }
        return r;
    }
    SPoly q, r;
    poly_divmod(p, g, q, r);
    if (!q.is_zero()) {
        Scalar li = q.c.back().inv();
        for (auto& x : q.c) x *= li;
    }
    return q;
}

namespace {

std::vector<Int> divisors_of(Int n) {
    if (n < 0) n = -n;
    std::vector<Int> small, large;
    for (Int d = 1; d * d <= n; ++d) {
        if (n % d == 0) {
            small.push_back(d);
            if (d * d != n) large.push_back(n / d);
        }
        if (d > 2000000) break; // desk scale guard; constants stay small here
    }
    for (auto it = large.rbegin(); it != large.rend(); ++it) small.push_back(*it);
    return small;
}

} // namespace

std::vector<std::pair<Rat, long>> rational_roots(const SPoly& p) {
    std::vector<std::pair<Rat, long>> out;
    SPoly q = p;
    q.trim();
    if (q.is_zero()) throw ZeroInput("rational_roots of the zero polynomial");

    // a rational root annihilates every Q-coordinate of the coefficient vector;
    // collect candidates from the gcd of the coordinate polynomials
    long ed = q.F->ext_deg(), cd = q.F->cyclo_deg();
    std::vector<Rat> comp; // one nonzero rational coordinate poly is enough to bound candidates
    std::vector<std::vector<Rat>> comps;
    for (long j = 0; j < ed; ++j)
        for (long i = 0; i < cd; ++i) {
            std::vector<Rat> cp(q.c.size(), Rat(0));
            bool nz = false;
            for (size_t k = 0; k < q.c.size(); ++k) {
                cp[k] = q.c[k].coords()[j][i];
                if (cp[k] != 0) nz = true;
            }
            if (nz) comps.push_back(cp);
        }
    if (comps.empty()) return out;

    // gcd over Q of the coordinate polynomials
    auto rgcd = [](std::vector<Rat> a, std::vector<Rat> b) {
        auto trim = [](std::vector<Rat>& v) { while (!v.empty() && v.back() == 0) v.pop_back(); };
        trim(a);
        trim(b);
        while (!b.empty()) {
            // remainder of a by b
            while (a.size() >= b.size() && !a.empty()) {
                Rat f = a.back() / b.back();
                size_t k = a.size() - b.size();
                for (size_t i = 0; i < b.size(); ++i) a[k + i] -= f * b[i];
                trim(a);
            }
            std::swap(a, b);
        }
        return a;
    };
    std::vector<Rat> g = comps[0];
    for (size_t i = 1; i + 0 < comps.size() && g.size() > 1; ++i) g = rgcd(g, comps[i]);
    while (!g.empty() && g.back() == 0) g.pop_back();
    if (g.size() <= 1) return out;

    // clear denominators, strip powers of x, enumerate p/q candidates
    Int den(1);
    for (auto& r : g) den = boost::multiprecision::lcm(den, rat_den(r));
    std::vector<Int> ig;
    for (auto& r : g) ig.push_back(rat_num(r) * (den / rat_den(r)));
    size_t low = 0;
    while (low < ig.size() && ig[low] == 0) ++low;
    bool zero_root = low > 0;
    ig.erase(ig.begin(), ig.begin() + low);
    std::vector<Rat> cands;
    if (zero_root) cands.push_back(Rat(0));
    if (ig.size() > 1) {
        Int a0 = ig.front(), al = ig.back();
        for (const Int& pn : divisors_of(a0))
            for (const Int& qn : divisors_of(al)) {
                Rat r(pn, qn);
                cands.push_back(r);
                cands.push_back(-r);
            }
    }
    std::sort(cands.begin(), cands.end());
    cands.erase(std::unique(cands.begin(), cands.end()), cands.end());

    for (const Rat& r : cands) {
        Scalar v = q.eval(Scalar(r));
        if (!v.is_zero()) continue;
        // multiplicity by synthetic division over K
        long mult = 0;
        SPoly cur = q;
        SPoly lin = SPoly::from(q.F, {Scalar(-r).lifted(q.F), Scalar::one(q.F)});
        while (true) {
            SPoly qq, rr;
            poly_divmod(cur, lin, qq, rr);
            if (!rr.is_zero()) break;
            ++mult;
            cur = qq;
            if (cur.is_zero()) break;
        }
        if (mult > 0) out.emplace_back(r, mult);
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace fconn
