#pragma once
#include "fconn/reduce.hpp"
#include <random>
#include <string>

namespace fconn {

// Independent slope oracle: convert the system to a scalar operator through a
// cyclic vector and read the slopes off the Newton polygon of its
// coefficients. Shares no code with the reducer (dense Laurent arithmetic,
// no shearing). Slope s corresponds to principal level -1-s; a regular
// connection has all slopes 0. Restricted to full matrix contexts with
// n <= 3 and pole order <= 6 on the integer grid.
std::vector<Rat> oracle_newton_slopes(const MatSeries& A, const GroupContext& ctx);

struct PropertyRun {
    unsigned seed = 0;
    std::string property;
    long trials = 0;
    bool passed = false;
    std::string detail; // shrunken counterexample description on failure
};

// Randomized checks for the uniqueness / determinacy / bound statements the
// reducer relies on. Registered ids:
//   invariance-under-gauge   canonical invariants stable under random words
//   principal-level          oracle slopes match -1-r1 on gl2/gl3
//   determinacy-window       perturbations at/beyond the window are inert
//   ramification-bound       used ramification within the uniform bound
//   degree-divisibility      level denominators divide a fundamental degree
//   orbit-dim-increase       C2 steps strictly grow the nilpotent orbit
// Runs are reproducible from the seed.
PropertyRun drive_property(const std::string& id, long trials, unsigned seed);

// textual fingerprint of the gauge-invariant data of a reduction: levels,
// sorted irregular eigenvalues, residue eigenvalue classes folded mod Z, and
// the nilpotent partition of the residue
std::string invariant_key(const ReductionResult& rr);

// seeded instance generators (shared with the acceptance corpus)
MatSeries random_connection(const FieldPtr& F, const GroupContext& ctx, std::mt19937& rng,
                            long max_pole, const Rat& prec);
GaugeCert random_gauge(const FieldPtr& F, const GroupContext& ctx, std::mt19937& rng);

} // namespace fconn
