#pragma once
#include "fconn/gauge.hpp"
#include "fconn/liealg.hpp"
#include <optional>

namespace fconn {

// Result of a full reduction: B = sum_j D_j t^(r_j) + t^-1 C, with the
// r_j < -1 strictly increasing, the D_j diagonal and semisimple, and
// (when `normalized`) the eigenvalues of C_s scaled by ram having rational
// projection 0 and sorted into a fixed fundamental-domain order.
struct CanonicalForm {
    long ram = 1;                // least common denominator of the levels
    std::vector<Rat> levels;     // r_1 < ... < r_l < -1
    std::vector<Mat> irr_coeffs; // D_j, same order as levels
    Mat residue;                 // C
    bool normalized = false;

    MatSeries as_series(const FieldPtr& F, long dim, const Rat& prec) const;
};

struct ReductionTrace {
    std::vector<std::string> steps;
    std::vector<Rat> deltas;
    std::vector<Rat> lambdas;
    std::vector<long> orbit_dims; // orbit dimension of the nilpotent leading
                                  // term before each shearing (C2) step
    long c2_steps = 0;
};

struct ReductionResult {
    CanonicalForm canonical;
    GaugeCert certificate;  // maps the input to `series`
    MatSeries series;       // the reduced connection on the working window
    ReductionTrace trace;
    long used_ramification = 1; // denominators of all certificate atoms except
                                // residue-normalization shears
    long residue_ram = 1;       // denominators of residue-normalization shears
    Mat residue_unnormalized;   // residue coefficient before the rational-part
                                // shear; its spectrum carries the eigenvalue
                                // classes the normalization removes
};

// full pipeline, dispatching on the group kind
ReductionResult reduce(const MatSeries& A, const GroupContext& ctx);

// individual pipelines (exposed for testing; `reduce` picks the right one)
ReductionResult reduce_torus(const MatSeries& A, const GroupContext& ctx);
ReductionResult reduce_unipotent(const MatSeries& A, const GroupContext& ctx);
ReductionResult reduce_solvable(const MatSeries& A, const GroupContext& ctx);
ReductionResult reduce_regular_semisimple(const MatSeries& A, const GroupContext& ctx);
ReductionResult reduce_reductive(const MatSeries& A, const GroupContext& ctx);
ReductionResult reduce_general(const MatSeries& A, const GroupContext& ctx);

// put a first-kind connection into aligned form (coefficient at t^e lies in
// the generalized ad(A_-1)-eigenspace with eigenvalue e+1); no shearing
ReductionResult align_first_kind(const MatSeries& A, const GroupContext& ctx);

// r_1 of the canonical form; nullopt means the connection is regular
std::optional<Rat> principal_level(const MatSeries& A, const GroupContext& ctx);

enum class WindowKind { Regular, Unipotent, Solvable, Irregular };

// number of leading coefficients (grid steps past the order r) that determine
// the invariant in question. For Regular, `r` is read as k(A_-1); for
// Unipotent, `r` is the order of the connection.
Rat determinacy_window(const GroupContext& ctx, const Rat& r, WindowKind kind);

// uniform ramification bounds depending only on the group
Int ramification_bound(const GroupContext& ctx);
Int regular_ramification_bound(const GroupContext& ctx);

} // namespace fconn
