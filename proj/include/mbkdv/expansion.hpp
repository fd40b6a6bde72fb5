#pragma once

#include <array>

#include "mbkdv/multilinear.hpp"

namespace mbkdv::expansion {

/// Argument slots of the vector-valued term lists. DU and DV stand for the
/// time derivatives ∂t u, ∂t v given by the gauged right-hand side.
enum Slot : int { kU = 0, kV = 1, kDU = 2, kDV = 3 };

/// One term list per component (u, v).
using VectorTerms = std::array<TermList, 2>;

/// ∂t u = B1(u,v) − B1(u,u), ∂t v = B1(u,v) − B1(v,v), with B1 a degree-2 term
/// of coefficient i/2 and numerator k.
VectorTerms gauged_rhs();

enum class Substitution {
  Expand,      // replace ∂t of a factor by the right-hand side (degree grows by one)
  Derivative,  // replace the factor by its DU/DV slot (degree unchanged)
};

struct DbpResult {
  TermList boundary;   // the term under ∂t
  TermList remainder;  // what the product rule leaves behind
};

/// Differentiation by parts of one oscillating term: with Φ its phase,
///   c e^{iΦt} Π f = ∂t[c e^{iΦt} Π f / (iΦ)] − c e^{iΦt} ∂t(Π f) / (iΦ).
/// Degree-2 terms have Φ = 3k k1 k2; degree-3 terms must be non-resonant and
/// have Φ = 3(k1+k2)(k2+k3)(k1+k3). In Expand mode the differentiated index
/// is constrained to the band of its factor's projection intersected with the
/// Galerkin range, since ∂t of a projected Galerkin mode is the projected
/// right-hand side.
DbpResult differentiate_by_parts(const Term& term, Substitution mode);

/// Reorders the positions of a trilinear term so that the position carrying
/// a single-index denominator comes first (the k1 of the R3 and B3 sums).
Term canonical(Term term);

/// Reindexes positions: new position i takes old position perm[i].
Term permuted(const Term& term, std::span<const int> perm);

/// All reformulated systems, generated once.
struct Forms {
  VectorTerms rhs;  // B1 vector

  // ∂t[w − b2] = r3 (first form).
  VectorTerms b2;
  VectorTerms r3;
  VectorTerms r3_dform;

  // ∂t[w − b2 − b3] = r3_res + b4 (second form).
  VectorTerms r3_res;
  VectorTerms r3_nres;
  VectorTerms b3;
  VectorTerms b4;
  VectorTerms b4_dform;

  // ∂t[w − b2q] = b1p + r3q (modified first form).
  VectorTerms b1p;
  VectorTerms b1q;
  VectorTerms b2q;
  VectorTerms r3q;
  VectorTerms r3q_dform;

  // r3q = r3q_res + r3q_nres0 + r3q_nres1.
  VectorTerms r3q_res;
  VectorTerms r3q_nres0;
  VectorTerms r3q_nres1;

  // ∂t[w − b2q − b30] = b1p + r3q_res + r3q_nres1 + b40 (modified second form).
  VectorTerms b30;
  VectorTerms b40;
  VectorTerms b40_dform;
};

const Forms& forms();

}  // namespace mbkdv::expansion
