#pragma once
#include "fconn/puiseux.hpp"
#include <variant>

namespace fconn {

// Gauge transformations are finite words in four kinds of atoms. A word acts
// on a connection matrix A by A -> g A g^-1 + (dg/dt) g^-1, atom by atom in
// list order. Each atom has an exact derivative term, so the action never
// loses precision beyond what conjugation itself costs.

// g = exp(t^q X). The logarithmic derivative is q t^(q-1) X exactly.
// Conjugation is exp(ad(t^q X)); for q <= 0 this only converges when X is
// nilpotent.
struct ExpAtom {
    Mat X;
    Rat q;
};

// g = diag(t^(lam_i/den)). Entry (i,j) picks up t^((lam_i-lam_j)/den) and the
// derivative term is diag(lam_i/den) t^-1.
struct ShearAtom {
    std::vector<Int> lam;
    long den = 1;
};

// constant invertible matrix
struct ConstAtom {
    Mat g;
};

// marker that the working grid was refined by a factor c; acts as the
// identity on the series and is its own inverse
struct RamifyAtom {
    long c = 1;
};

using GaugeAtom = std::variant<ExpAtom, ShearAtom, ConstAtom, RamifyAtom>;

struct GaugeCert {
    std::vector<GaugeAtom> atoms; // applied front to back
};

// action of a single atom / a whole word on a connection matrix
MatSeries apply_atom(const GaugeAtom& atom, const MatSeries& A);
MatSeries apply_gauge(const GaugeCert& cert, const MatSeries& A);

// conjugation only (no derivative term), used on non-connection series
MatSeries conj_atom(const GaugeAtom& atom, const MatSeries& m);
MatSeries conj_gauge(const GaugeCert& cert, const MatSeries& m);

GaugeAtom invert_atom(const GaugeAtom& atom);
GaugeCert invert(const GaugeCert& cert);
// word for "apply second, then first"
GaugeCert compose(const GaugeCert& first, const GaugeCert& second);

// the group element carried by an atom / word, as a series with the given
// precision window
MatSeries expand_atom(const GaugeAtom& atom, const FieldPtr& F, long dim, const Rat& prec);
MatSeries expand(const GaugeCert& cert, const FieldPtr& F, long dim, const Rat& prec);

// lcm of the exponent denominators appearing in the word (Ramify markers do
// not count)
long cert_denominator(const GaugeCert& cert);

// exp of a constant nilpotent matrix (finite sum)
Mat exp_nilpotent(const Mat& X);

bool verify_equivalence(const MatSeries& A, const MatSeries& B, const GaugeCert& cert);

std::string atom_str(const GaugeAtom& atom);
std::string cert_str(const GaugeCert& cert);

} // namespace fconn
