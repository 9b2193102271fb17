#pragma once
#include "fconn/rat.hpp"
#include "fconn/errors.hpp"
#include <memory>
#include <vector>
#include <string>

namespace fconn {

// Coefficient field K = Q(zeta_n)(theta): a cyclotomic field with at most one
// further primitive extension, held in the power basis
//   { zeta^i * theta^j : 0 <= i < phi(n), 0 <= j < deg(theta) }.
// Elements are dense coordinate vectors over Q; zeta is the class of x modulo
// the n-th cyclotomic polynomial.
struct Field {
    long n = 1;                            // cyclotomic order
    std::vector<Rat> cyclo;                // n-th cyclotomic polynomial, monic
    std::vector<std::vector<Rat>> ext;     // minpoly of theta over Q(zeta_n), monic; empty if none
    long degree_cap = 64;

    long cyclo_deg() const { return (long)cyclo.size() - 1; }
    long ext_deg() const { return ext.empty() ? 1 : (long)ext.size() - 1; }
    long abs_deg() const { return cyclo_deg() * ext_deg(); }
    bool has_ext() const { return !ext.empty(); }

    bool same_as(const Field& o) const;

    static std::shared_ptr<const Field> rationals();
    static std::shared_ptr<const Field> make(long n, long degree_cap = 64);
    // theta with monic minpoly given by rational coefficients (low to high)
    static std::shared_ptr<const Field> make_ext(long n, const std::vector<Rat>& minpoly,
                                                 long degree_cap = 64);
    // smallest enlargement of this field containing a primitive b-th root of unity
    std::shared_ptr<const Field> with_root_of_unity(long b) const;
};

using FieldPtr = std::shared_ptr<const Field>;

class Scalar {
public:
    Scalar() : Scalar(Rat(0)) {}
    explicit Scalar(const Rat& q);
    Scalar(long q) : Scalar(Rat(q)) {}
    static Scalar of(const FieldPtr& F, const Rat& q);
    static Scalar zero(const FieldPtr& F) { return of(F, Rat(0)); }
    static Scalar one(const FieldPtr& F) { return of(F, Rat(1)); }
    static Scalar zeta(const FieldPtr& F);          // class of x mod Phi_n
    static Scalar zeta_pow(const FieldPtr& F, long k);
    static Scalar theta(const FieldPtr& F);
    // coordinate (i, j) |-> coefficient of zeta^i theta^j
    static Scalar from_coords(const FieldPtr& F, std::vector<std::vector<Rat>> coords);

    const FieldPtr& field() const { return F_; }
    const std::vector<std::vector<Rat>>& coords() const { return c_; }

    bool is_zero() const;
    bool is_rational() const;
    Rat as_rat() const;          // throws unless rational
    Rat pi() const;              // Q-linear projection: coefficient of basis element 1

    Scalar operator-() const;
    Scalar operator+(const Scalar& o) const;
    Scalar operator-(const Scalar& o) const;
    Scalar operator*(const Scalar& o) const;
    Scalar operator/(const Scalar& o) const;
    Scalar& operator+=(const Scalar& o) { return *this = *this + o; }
    Scalar& operator-=(const Scalar& o) { return *this = *this - o; }
    Scalar& operator*=(const Scalar& o) { return *this = *this * o; }
    bool operator==(const Scalar& o) const;
    bool operator!=(const Scalar& o) const { return !(*this == o); }

    Scalar inv() const;
    Scalar pow(long k) const;

    // deterministic total order on coordinate vectors (used for sorting
    // canonical eigenvalue lists); not compatible with field arithmetic
    int cmp(const Scalar& o) const;

    // embed into a larger field (cyclotomic order must be a multiple)
    Scalar lifted(const FieldPtr& G) const;

    std::string str() const;

private:
    FieldPtr F_;
    std::vector<std::vector<Rat>> c_;   // [theta power][zeta power]
    void normalize_shape();
    static void unify(Scalar& a, Scalar& b);
};

inline Scalar operator*(const Rat& q, const Scalar& s) { return Scalar::of(s.field(), q) * s; }

Rat rational_projection(const Scalar& s);
// primitive b-th root of unity in F; requires b | n (use with_root_of_unity to enlarge)
Scalar root_of_unity(const FieldPtr& F, long b);

// integer cyclotomic polynomial Phi_n as rational coefficient vector, low to high
std::vector<Rat> cyclotomic_poly(long n);
long euler_phi(long n);

} // namespace fconn
