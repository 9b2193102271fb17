#pragma once
#include "fconn/reduce.hpp"
#include <optional>

namespace fconn {

// Descent data for a canonical form living on a b-fold cover: a constant
// matrix phi with Ad(phi)^b = 1 that intertwines the canonical coefficients
// with the cyclic cover action. phi itself may have order 2b when its b-th
// power is a central scalar; comparisons always go through Ad.
struct TwistedCocycle {
    long b = 1;
    Mat phi;
};

// Invariants of a regular connection: residue eigenvalue classes (one
// representative per eigenvalue, rational part folded into [0,1)) with
// multiplicities, and the Jordan partition of the nilpotent part of the
// residue inside the centralizer of each class.
struct MonodromyInvariant {
    std::vector<std::pair<Scalar, long>> v;       // class rep -> multiplicity
    std::vector<std::vector<long>> orbit;         // partition per class, same order
    bool operator==(const MonodromyInvariant& o) const;
    std::string str() const;
};

struct EquivalenceReport {
    bool equivalent = false;
    std::string reason;
    std::optional<GaugeCert> witness; // maps A1 to A2 when available
    // Exponent below which apply(witness, A1) provably equals A2. Witnesses
    // are built from truncated reduction words, so exact agreement can stop
    // past the determinacy window; the window always reaches far enough that
    // the remaining tail cannot change the class.
    std::optional<Rat> witness_window;
};

struct CoxeterReport {
    long b = 1;
    bool divides_degree = false; // b divides some fundamental degree
    bool at_coxeter = false;     // b equals the Coxeter number
    bool residue_central = true; // semisimple residue central (checked when at_coxeter)
};

// the generator of the cover action on a canonical form: D_j picks up
// w_b^(-b r_j k), the residue is fixed; b is the form's grid
CanonicalForm galois_act(long k, const CanonicalForm& B, const FieldPtr& F);

// the same action on a raw series over its own grid: the coefficient at
// exponent j/ram is scaled by w_ram^(-j)
MatSeries galois_act_series(const MatSeries& s);

bool is_twisted_cocycle(const TwistedCocycle& tc, const CanonicalForm& B,
                        const GroupContext& ctx);

// connection over the base with reduce(descend(B, phi)) = B: builds the
// multivalued gauge y from the eigenspaces of phi and applies it to B.
// Throws NotACocycle if phi's spectrum is not made of roots of unity
// compatible with b, or if the result fails to live on the integer grid;
// FieldTooSmall if the needed roots of unity are unavailable.
MatSeries descend(const CanonicalForm& B, const TwistedCocycle& tc,
                  const GroupContext& ctx, const FieldPtr& F, const Rat& prec);

// recover the cocycle carried by a reduction certificate: with y the inverse
// certificate word, phi = y^-1 * (cover action applied to y), a constant.
// `cover`, when nonzero, forces the cover order (must be a multiple of the
// certificate denominator) so cocycles of two reductions can be compared.
TwistedCocycle extract_cocycle(const ReductionResult& rr, long cover = 0);

MonodromyInvariant regular_invariants(const MatSeries& A, const GroupContext& ctx);

// gauge equivalence over the base field (over_closure = false) or over the
// algebraic closure (over_closure = true)
EquivalenceReport equivalent(const MatSeries& A1, const MatSeries& A2,
                             const GroupContext& ctx, bool over_closure);

CoxeterReport coxeter_check(const ReductionResult& rr, const GroupContext& ctx);

} // namespace fconn
