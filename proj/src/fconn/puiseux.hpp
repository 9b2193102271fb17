#pragma once
#include "fconn/matrix.hpp"
#include <map>
#include <optional>

namespace fconn {

// Matrix-valued truncated Puiseux series: sum over q of C_q t^q with q in
// (1/ram)Z. Coefficients are known exactly for all exponents q < prec; the
// series carries no information at or above prec.
class MatSeries {
public:
    MatSeries() : dim_(0), ram_(1), F_(Field::rationals()), prec_(0) {}
    MatSeries(FieldPtr F, long dim, long ram, Rat prec)
        : dim_(dim), ram_(ram), F_(std::move(F)), prec_(std::move(prec)) {
        if (ram < 1) throw ParseError("ramification index must be positive");
    }

    long dim() const { return dim_; }
    long ram() const { return ram_; }
    const Rat& prec() const { return prec_; }
    const FieldPtr& field() const { return F_; }
    const std::map<long, Mat>& raw() const { return c_; } // keys are exponents * ram

    void set_coeff(const Rat& q, const Mat& m);
    void add_coeff(const Rat& q, const Mat& m);
    Mat coeff(const Rat& q) const;     // zero matrix if absent; throws beyond prec
    bool is_zero() const;              // no nonzero coefficient below prec
    std::optional<Rat> val() const;    // lowest exponent with nonzero coefficient
    std::vector<Rat> support() const;

    MatSeries operator+(const MatSeries& o) const;
    MatSeries operator-(const MatSeries& o) const;
    MatSeries operator*(const MatSeries& o) const;
    MatSeries operator-() const;
    MatSeries scaled(const Scalar& s) const;
    MatSeries conjugated(const Mat& g, const Mat& ginv) const; // g * this * g^-1
    bool operator==(const MatSeries& o) const;                 // on the common window

    MatSeries derivative() const;      // d/dt
    MatSeries truncated(const Rat& new_prec) const;
    MatSeries drop_below(const Rat& cut) const;    // zero out exponents < cut
    MatSeries principal_part() const;              // exponents < -1... strictly below -1
    MatSeries with_ram(long new_ram) const;        // finer grid, same series
    MatSeries lifted(const FieldPtr& G) const;

    std::string str() const;

    static MatSeries monomial(const FieldPtr& F, long dim, const Rat& q, const Mat& m,
                              const Rat& prec);
    static MatSeries zero(const FieldPtr& F, long dim, const Rat& prec);
    static MatSeries identity(const FieldPtr& F, long dim, const Rat& prec);

private:
    long dim_, ram_;
    FieldPtr F_;
    std::map<long, Mat> c_;
    Rat prec_;
    void prune();
    static void unify(MatSeries& a, MatSeries& b);
    friend MatSeries b_lift(const MatSeries&, long);
    friend MatSeries ramify(const MatSeries&, long);
};

// Change of coordinate t = u^b expressed in the derivative-with-respect-to-u
// convention: sum A_q t^q becomes b u^(b-1) sum A_q u^(bq), reading u as the
// new series variable.
MatSeries b_lift(const MatSeries& a, long b);
// Re-express the same series on a grid refined by factor c (bookkeeping only).
MatSeries ramify(const MatSeries& a, long c);
// ad(a) applied to b: the commutator series [a, b]
MatSeries ad_action(const MatSeries& a, const MatSeries& b);
// multiplicative inverse when the lowest coefficient is an invertible matrix
MatSeries series_inverse(const MatSeries& a);

} // namespace fconn
