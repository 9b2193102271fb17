#pragma once
#include "fconn/matrix.hpp"
#include "fconn/puiseux.hpp"

namespace fconn {

enum class GroupKind { GL, SL, DiagTorus, UpperTriangular, StrictUpper, LeviProduct };

// Matrix realizations of the groups the reducer works with. LeviProduct is a
// block-diagonal product of reductive factors, optionally extended by the
// strictly-upper-block unipotent radical (block upper-triangular parabolic).
struct GroupContext {
    GroupKind kind = GroupKind::GL;
    long n = 1;
    std::vector<GroupContext> factors; // LeviProduct only
    bool radical = false;              // LeviProduct: include strictly-upper blocks

    static GroupContext gl(long n);
    static GroupContext sl(long n);
    static GroupContext diag_torus(long n);
    static GroupContext upper_triangular(long n);
    static GroupContext strict_upper(long n);
    static GroupContext levi(std::vector<GroupContext> fs, bool radical);

    long size() const { return n; } // ambient matrix size
    std::vector<long> block_sizes() const;
    long dim() const;
    std::vector<Mat> lie_basis(const FieldPtr& F) const;
    bool lie_contains(const Mat& m) const;
    bool lie_contains_series(const MatSeries& s) const;
    bool group_contains(const Mat& g) const; // constant points
    // roots as index pairs (i, j) standing for e_i - e_j on the diagonal torus
    std::vector<std::pair<long, long>> roots() const;
    long height() const; // max height over type-A factors; 0 for tori
    bool is_reductive() const;
    long rank_ss() const; // rank of the derived group
    long dim_der() const; // dimension of the derived group
    std::string str() const;
};

struct JordanPair {
    Mat s, n; // commuting semisimple + nilpotent parts
};

struct SL2Triple {
    Mat H, X, Y; // [H,X] = 2X, [H,Y] = -2Y, [X,Y] = H
};

struct LatticeInvariants {
    Int I, J;
    std::vector<long> degrees; // fundamental degrees, union over factors
    long coxeter;              // largest degree
};

// additive Jordan decomposition via the Newton iteration against the
// squarefree part of the characteristic polynomial (no factoring needed)
JordanPair jordan_decompose(const Mat& m);

// sl2-triple through a nonzero nilpotent Y inside span(basis);
// solutions of the intermediate linear systems are picked deterministically
SL2Triple jm_triple(const Mat& Y, const std::vector<Mat>& basis);
SL2Triple jm_triple(const Mat& Y); // ambient gl_n

// g with g H g^{-1} diagonal, eigenvalues sorted descending; H must be
// semisimple with rational eigenvalues
std::pair<Mat, std::vector<Rat>> diagonalize_rational_semisimple(const Mat& H);

long height(const GroupContext& ctx);
// Lambda(Y) = max_alpha alpha(H)/2 + 1 = (top ad(H) eigenvalue)/2 + 1
Rat lambda_of(const Mat& Y, const GroupContext& ctx);
long orbit_dim(const Mat& Y, const GroupContext& ctx);

LatticeInvariants lattice_invariants(const GroupContext& ctx);

// basis of the joint centralizer of `elems` inside span(basis)
std::vector<Mat> centralizer_basis(const std::vector<Mat>& elems, const std::vector<Mat>& basis);
std::vector<Mat> centralizer_basis(const std::vector<Mat>& elems, const GroupContext& ctx);

// ---- spectral helpers ----

// matrix of x |-> A x restricted to span(basis) (A must preserve the span)
Mat operator_matrix(const std::function<Mat(const Mat&)>& op, const std::vector<Mat>& basis);
Mat ad_matrix(const Mat& A, const std::vector<Mat>& basis);
// coordinates of m in span(basis); throws if m is outside the span
std::vector<Scalar> coords_in_span(const Mat& m, const std::vector<Mat>& basis);
Mat from_coords(const std::vector<Scalar>& v, const std::vector<Mat>& basis);

// rational generalized eigen-structure of a square matrix over K
struct RationalSpectrum {
    std::vector<Rat> eigs;
    std::vector<Mat> projections; // commuting projections onto generalized eigenspaces
    Mat other_projection;         // onto the sum of non-rational generalized eigenspaces
};
RationalSpectrum rational_spectrum(const Mat& M);
// rational eigenvalues of ad(A) on span(basis), with projections in coordinates
RationalSpectrum integer_eigenspace_data(const Mat& A, const std::vector<Mat>& basis);

// all eigenvalues in K of a semisimple matrix, with eigenspace bases
// (columns); throws FieldTooSmall when the spectrum does not fully split
// within the reachable root search (rational roots and rational multiples of
// power-basis monomials)
std::vector<std::pair<Scalar, Mat>> k_eigen_decomposition(const Mat& M);
// joint refinement for a commuting family of semisimple matrices
std::vector<std::pair<std::vector<Scalar>, Mat>>
simultaneous_eigen_decomposition(const std::vector<Mat>& ms);

// Jordan partition of a nilpotent matrix (sizes descending)
std::vector<long> nilpotent_partition(const Mat& N);

// lower central series levels of a nilpotent matrix Lie algebra:
// levels[0] = h, levels[k] = [h, levels[k-1]], until zero
std::vector<std::vector<Mat>> lower_central_series(const std::vector<Mat>& basis);

} // namespace fconn
