#include "fconn/matrix.hpp"
#include <sstream>

namespace fconn {

Mat Mat::identity(const FieldPtr& F, long n) {
    Mat m(F, n, n);
    for (long i = 0; i < n; ++i) m.at(i, i) = Scalar::one(F);
    return m;
}

Mat Mat::from_rows(const FieldPtr& F, const std::vector<std::vector<Scalar>>& rows) {
    long r = (long)rows.size();
    long c = r ? (long)rows[0].size() : 0;
    Mat m(F, r, c);
    for (long i = 0; i < r; ++i) {
        if ((long)rows[i].size() != c) throw DimensionMismatch("ragged matrix rows");
        for (long j = 0; j < c; ++j) m.at(i, j) = rows[i][j].lifted(F);
    }
    return m;
}

Mat Mat::from_rat_rows(const FieldPtr& F, const std::vector<std::vector<Rat>>& rows) {
    long r = (long)rows.size();
    long c = r ? (long)rows[0].size() : 0;
    Mat m(F, r, c);
    for (long i = 0; i < r; ++i)
        for (long j = 0; j < c; ++j) m.at(i, j) = Scalar::of(F, rows[i][j]);
    return m;
}

bool Mat::is_zero() const {
    for (auto& x : a_)
        if (!x.is_zero()) return false;
    return true;
}

Scalar Mat::trace() const {
    Scalar t = Scalar::zero(F_);
    for (long i = 0; i < std::min(r_, c_); ++i) t += at(i, i);
    return t;
}

Mat Mat::transpose() const {
    Mat m(F_, c_, r_);
    for (long i = 0; i < r_; ++i)
        for (long j = 0; j < c_; ++j) m.at(j, i) = at(i, j);
    return m;
}

Mat Mat::lifted(const FieldPtr& G) const {
    Mat m(G, r_, c_);
    for (long i = 0; i < r_; ++i)
        for (long j = 0; j < c_; ++j) m.at(i, j) = at(i, j).lifted(G);
    return m;
}

namespace {
FieldPtr common_field(const Mat& a, const Mat& b) {
    if (a.field()->same_as(*b.field())) return a.field();
    if (a.field()->abs_deg() >= b.field()->abs_deg()) return a.field();
    return b.field();
}
} // namespace

Mat Mat::operator+(const Mat& o) const {
    if (r_ != o.r_ || c_ != o.c_) throw DimensionMismatch("matrix add");
    FieldPtr F = common_field(*this, o);
    Mat m = lifted(F);
    for (long i = 0; i < r_; ++i)
        for (long j = 0; j < c_; ++j) m.at(i, j) += o.at(i, j);
    return m;
}

Mat Mat::operator-(const Mat& o) const { return *this + (-o); }

Mat Mat::operator-() const {
    Mat m = *this;
    for (auto& x : m.a_) x = -x;
    return m;
}

Mat Mat::scaled(const Scalar& s) const {
    Mat m = *this;
    for (auto& x : m.a_) x = x * s;
    return m;
}

Mat Mat::operator*(const Mat& o) const {
    if (c_ != o.r_) throw DimensionMismatch("matrix multiply");
    FieldPtr F = common_field(*this, o);
    Mat m(F, r_, o.c_);
    for (long i = 0; i < r_; ++i)
        for (long k = 0; k < c_; ++k) {
            const Scalar& aik = at(i, k);
            if (aik.is_zero()) continue;
            for (long j = 0; j < o.c_; ++j) {
                if (o.at(k, j).is_zero()) continue;
                m.at(i, j) += aik * o.at(k, j);
            }
        }
    return m;
}

bool Mat::operator==(const Mat& o) const {
    if (r_ != o.r_ || c_ != o.c_) return false;
    for (long i = 0; i < r_; ++i)
        for (long j = 0; j < c_; ++j)
            if (at(i, j) != o.at(i, j)) return false;
    return true;
}

std::string Mat::str() const {
    std::ostringstream os;
    os << "[";
    for (long i = 0; i < r_; ++i) {
        os << "[";
        for (long j = 0; j < c_; ++j) os << at(i, j).str() << (j + 1 < c_ ? ", " : "");
        os << "]" << (i + 1 < r_ ? ", " : "");
    }
    os << "]";
    return os.str();
}

Mat bracket(const Mat& a, const Mat& b) { return a * b - b * a; }

std::vector<long> rref_inplace(Mat& m) {
    std::vector<long> pivots;
    long row = 0;
    for (long col = 0; col < m.cols() && row < m.rows(); ++col) {
        long p = -1;
        for (long i = row; i < m.rows(); ++i)
            if (!m.at(i, col).is_zero()) {
                p = i;
                break;
            }
        if (p < 0) continue;
        if (p != row)
            for (long j = 0; j < m.cols(); ++j) std::swap(m.at(p, j), m.at(row, j));
        Scalar inv = m.at(row, col).inv();
        for (long j = col; j < m.cols(); ++j) m.at(row, j) *= inv;
        for (long i = 0; i < m.rows(); ++i) {
            if (i == row || m.at(i, col).is_zero()) continue;
            Scalar f = m.at(i, col);
            for (long j = col; j < m.cols(); ++j) m.at(i, j) -= f * m.at(row, j);
        }
        pivots.push_back(col);
        ++row;
    }
    return pivots;
}

long rank(Mat m) { return (long)rref_inplace(m).size(); }

std::optional<Mat> solve(const Mat& A, const Mat& b) {
    if (A.rows() != b.rows()) throw DimensionMismatch("solve: shape");
    FieldPtr F = A.field();
    Mat aug(F, A.rows(), A.cols() + b.cols());
    for (long i = 0; i < A.rows(); ++i) {
        for (long j = 0; j < A.cols(); ++j) aug.at(i, j) = A.at(i, j);
        for (long j = 0; j < b.cols(); ++j) aug.at(i, A.cols() + j) = b.at(i, j).lifted(F);
    }
    auto piv = rref_inplace(aug);
    // inconsistent if a pivot lands in the augmented block
    for (long c : piv)
        if (c >= A.cols()) return std::nullopt;
    Mat x(F, A.cols(), b.cols());
    for (size_t k = 0; k < piv.size(); ++k)
        for (long j = 0; j < b.cols(); ++j) x.at(piv[k], j) = aug.at((long)k, A.cols() + j);
    return x;
}

Mat nullspace(const Mat& A) {
    Mat m = A;
    auto piv = rref_inplace(m);
    std::vector<long> free_cols;
    {
        size_t pi = 0;
        for (long c = 0; c < A.cols(); ++c) {
            if (pi < piv.size() && piv[pi] == c) ++pi;
            else free_cols.push_back(c);
        }
    }
    Mat ns(A.field(), A.cols(), (long)free_cols.size());
    for (size_t k = 0; k < free_cols.size(); ++k) {
        long fc = free_cols[k];
        ns.at(fc, (long)k) = Scalar::one(A.field());
        for (size_t r = 0; r < piv.size(); ++r) ns.at(piv[r], (long)k) = -m.at((long)r, fc);
    }
    return ns;
}

Mat inverse(const Mat& A) {
    if (!A.is_square()) throw DimensionMismatch("inverse of non-square matrix");
    Mat aug(A.field(), A.rows(), 2 * A.cols());
    for (long i = 0; i < A.rows(); ++i) {
        for (long j = 0; j < A.cols(); ++j) aug.at(i, j) = A.at(i, j);
        aug.at(i, A.cols() + i) = Scalar::one(A.field());
    }
    auto piv = rref_inplace(aug);
    bool ok = (long)piv.size() >= A.rows();
    for (long i = 0; ok && i < A.rows(); ++i) ok = piv[i] == i;
    if (!ok) throw NotInvertible("singular matrix");
    Mat inv(A.field(), A.rows(), A.cols());
    for (long i = 0; i < A.rows(); ++i)
        for (long j = 0; j < A.cols(); ++j) inv.at(i, j) = aug.at(i, A.cols() + j);
    return inv;
}

SPoly charpoly(const Mat& A) {
    if (!A.is_square()) throw DimensionMismatch("charpoly of non-square matrix");
    long n = A.rows();
    FieldPtr F = A.field();
    // Faddeev-LeVerrier
    std::vector<Scalar> coef(n + 1, Scalar::zero(F));
    coef[n] = Scalar::one(F);
    Mat M = Mat::identity(F, n);
    for (long k = 1; k <= n; ++k) {
        M = A * M;
        Scalar ck = -(M.trace() / Scalar((long)k));
        coef[n - k] = ck;
        for (long i = 0; i < n; ++i) M.at(i, i) += ck;
    }
    return SPoly::from(F, coef);
}

Scalar det(const Mat& A) {
    SPoly p = charpoly(A);
    Scalar c0 = p.c.empty() ? Scalar::zero(A.field()) : p.c[0];
    return (A.rows() % 2) ? -c0 : c0;
}

bool is_nilpotent_mat(const Mat& A) {
    Mat p = A;
    long n = A.rows();
    long k = 1;
    while (k < n) {
        p = p * p;
        k *= 2;
    }
    return p.is_zero();
}

std::vector<Int> smith_invariants(std::vector<std::vector<Int>> m) {
    long r = (long)m.size();
    long c = r ? (long)m[0].size() : 0;
    std::vector<Int> out;
    long top = 0;
    while (top < r && top < c) {
        // find a nonzero pivot with minimal absolute value
        long pi = -1, pj = -1;
        Int best = 0;
        for (long i = top; i < r; ++i)
            for (long j = top; j < c; ++j) {
                Int v = abs(m[i][j]);
                if (v != 0 && (pi < 0 || v < best)) {
                    best = v;
                    pi = i;
                    pj = j;
                }
            }
        if (pi < 0) break;
        std::swap(m[top], m[pi]);
        for (long i = 0; i < r; ++i) std::swap(m[i][top], m[i][pj]);
        bool again = true;
        while (again) {
            again = false;
            for (long i = top + 1; i < r; ++i) {
                if (m[i][top] == 0) continue;
                Int q = m[i][top] / m[top][top];
                for (long j = top; j < c; ++j) m[i][j] -= q * m[top][j];
                if (m[i][top] != 0) {
                    std::swap(m[top], m[i]);
                    again = true;
                }
            }
            for (long j = top + 1; j < c; ++j) {
                if (m[top][j] == 0) continue;
                Int q = m[top][j] / m[top][top];
                for (long i = top; i < r; ++i) m[i][j] -= q * m[i][top];
                if (m[top][j] != 0) {
                    for (long i = 0; i < r; ++i) std::swap(m[i][top], m[i][j]);
                    again = true;
                }
            }
        }
        // enforce divisibility against the rest of the block
        for (long i = top + 1; i < r; ++i)
            for (long j = top + 1; j < c; ++j)
                if (m[i][j] % m[top][top] != 0) {
                    for (long t = top; t < c; ++t) m[top][t] += m[i][t];
                    again = true;
                }
        if (again) continue; // redo elimination at the same corner
        out.push_back(abs(m[top][top]));
        ++top;
    }
    return out;
}

} // namespace fconn
