#pragma once
#include "fconn/scalars.hpp"
#include <vector>

namespace fconn {

// Dense univariate polynomial over the scalar field, coefficients low to high.
struct SPoly {
    FieldPtr F = Field::rationals();
    std::vector<Scalar> c;

    long deg() const { return (long)c.size() - 1; }
    bool is_zero() const { return c.empty(); }
    void trim();
    Scalar eval(const Scalar& x) const;
    SPoly derivative() const;

    static SPoly from(const FieldPtr& F, std::vector<Scalar> coeffs);
};

SPoly poly_add(const SPoly& a, const SPoly& b);
SPoly poly_sub(const SPoly& a, const SPoly& b);
SPoly poly_mul(const SPoly& a, const SPoly& b);
void poly_divmod(const SPoly& a, const SPoly& b, SPoly& q, SPoly& r);
SPoly poly_gcd(SPoly a, SPoly b);          // monic gcd
SPoly squarefree_part(const SPoly& p);     // p / gcd(p, p'), monic

// all rational roots of p, with multiplicities
std::vector<std::pair<Rat, long>> rational_roots(const SPoly& p);

} // namespace fconn
