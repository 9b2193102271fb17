#pragma once
#include "fconn/poly.hpp"
#include <optional>
#include <vector>

namespace fconn {

// Dense matrix over the scalar field.
class Mat {
public:
    Mat() : r_(0), c_(0), F_(Field::rationals()) {}
    Mat(FieldPtr F, long rows, long cols)
        : r_(rows), c_(cols), F_(std::move(F)), a_(rows * cols, Scalar::zero(F_)) {}

    static Mat identity(const FieldPtr& F, long n);
    static Mat from_rows(const FieldPtr& F, const std::vector<std::vector<Scalar>>& rows);
    static Mat from_rat_rows(const FieldPtr& F, const std::vector<std::vector<Rat>>& rows);

    long rows() const { return r_; }
    long cols() const { return c_; }
    const FieldPtr& field() const { return F_; }

    Scalar& at(long i, long j) { return a_[i * c_ + j]; }
    const Scalar& at(long i, long j) const { return a_[i * c_ + j]; }

    bool is_zero() const;
    bool is_square() const { return r_ == c_; }
    Scalar trace() const;
    Mat transpose() const;
    Mat lifted(const FieldPtr& G) const;

    Mat operator+(const Mat& o) const;
    Mat operator-(const Mat& o) const;
    Mat operator*(const Mat& o) const;
    Mat operator-() const;
    Mat scaled(const Scalar& s) const;
    bool operator==(const Mat& o) const;
    bool operator!=(const Mat& o) const { return !(*this == o); }

    std::string str() const;

private:
    long r_, c_;
    FieldPtr F_;
    std::vector<Scalar> a_;
};

Mat bracket(const Mat& a, const Mat& b); // ab - ba

// reduced row echelon form in place; returns pivot columns
std::vector<long> rref_inplace(Mat& m);
long rank(Mat m);
// particular solution of A x = b with free variables set to zero
std::optional<Mat> solve(const Mat& A, const Mat& b);
// columns form a basis of ker(A)
Mat nullspace(const Mat& A);
Mat inverse(const Mat& A); // throws NotInvertible
Scalar det(const Mat& A);

// characteristic polynomial det(xI - A), monic
SPoly charpoly(const Mat& A);
// minimal polynomial's squarefree support: squarefree part of charpoly
bool is_nilpotent_mat(const Mat& A);

// Smith normal form invariants d_1 | d_2 | ... of an integer matrix
std::vector<Int> smith_invariants(std::vector<std::vector<Int>> m);

} // namespace fconn
