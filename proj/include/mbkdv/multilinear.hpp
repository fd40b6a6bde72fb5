#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mbkdv/spectral_field.hpp"

namespace mbkdv {

/// Projection applied to one argument: identity, P (|k| ≤ n_cut) or Q (|k| > n_cut).
enum class Proj : std::uint8_t { All, Low, High };

/// Admissible range of a partial index sum s.
///  NonZero: s ≠ 0. Galerkin: 1 ≤ |s| ≤ n_max. Low: 1 ≤ |s| ≤ n_cut.
///  High: |s| > n_cut. HighGalerkin: n_cut < |s| ≤ n_max.
enum class Band : std::uint8_t { NonZero, Galerkin, Low, High, HighGalerkin };

/// Restriction of a trilinear sum by (k1+k2)(k2+k3)(k1+k3) = 0.
enum class Resonance : std::uint8_t { Any, Resonant, NonResonant };

/// Subset of argument positions; bit j selects k_{j+1}.
using Mask = std::uint8_t;

/// Exact coefficient (num/den)·i^ipow with den > 0, lowest terms, ipow ∈ {0, 1}.
struct Coefficient {
  std::int64_t num = 1;
  std::int64_t den = 1;
  int ipow = 0;

  static Coefficient make(std::int64_t num, std::int64_t den = 1, int ipow = 0);
  Coefficient operator*(const Coefficient& o) const;
  Coefficient operator-() const { return make(-num, den, ipow); }
  Complex value() const;
  std::string str() const;
  friend bool operator==(const Coefficient&, const Coefficient&) = default;
};

struct Factor {
  int slot;  // index into the argument list supplied at evaluation
  Proj proj = Proj::All;
  friend bool operator==(const Factor&, const Factor&) = default;
};

struct SumConstraint {
  Mask mask;
  Band band;
  friend bool operator==(const SumConstraint&, const SumConstraint&) = default;
};

/// One multilinear sum
///   out_k = c Σ_{k1+…+kd=k} e^{iΦt} Π_j f_{slot_j}(k_j) · Π num(S) / Π den(S)
/// where num(S), den(S) are partial index sums over position subsets and
/// Φ = k³ − Σ k_j³. The factors carry projections, the constraints restrict
/// partial sums, and for d = 3 the resonance tag restricts the triple.
struct Term {
  Coefficient coeff;
  std::vector<Factor> factors;
  std::vector<Mask> num;
  std::vector<Mask> den;
  std::vector<SumConstraint> constraints;
  Resonance resonance = Resonance::Any;

  int degree() const { return static_cast<int>(factors.size()); }
  std::string str() const;
  friend bool operator==(const Term&, const Term&) = default;
};

using TermList = std::vector<Term>;

struct EvalStats {
  std::int64_t terms = 0;
  std::int64_t groups = 0;
  std::int64_t skipped_denominators = 0;
};

/// Term lists for one or more outputs, grouped by index structure so that
/// terms differing only in their argument slots share one pass over the
/// index tuples.
///
/// Summation runs in ascending k1, then k2 (then k3) for every output mode,
/// so results are bit-identical for any thread count. Tuples with a
/// vanishing denominator are skipped and counted.
class CompiledTerms {
 public:
  CompiledTerms() = default;
  explicit CompiledTerms(std::span<const TermList> outputs);
  explicit CompiledTerms(const TermList& single) : CompiledTerms(std::span<const TermList>(&single, 1)) {}

  int outputs() const { return outputs_; }
  std::size_t term_count() const { return term_count_; }
  std::size_t group_count() const { return groups_.size(); }

  /// slots[j] is the field bound to slot j; unused slots may be null. Output
  /// modes are restricted to the slots' common mode set.
  std::vector<SpectralField> evaluate(std::span<const SpectralField* const> slots, double t, int n_cut,
                                      EvalStats* stats = nullptr) const;

  struct Monomial {
    int output;
    Complex coeff;
    std::vector<int> slots;
  };
  struct Group {
    int degree;
    std::vector<Proj> projs;
    std::vector<Mask> num;
    std::vector<Mask> den;
    std::vector<SumConstraint> constraints;
    Resonance resonance;
    std::vector<Monomial> monomials;
  };

 private:
  int outputs_ = 0;
  std::size_t term_count_ = 0;
  std::vector<Group> groups_;
};

/// Evaluates a single term list into one field.
SpectralField evaluate_terms(const TermList& terms, std::span<const SpectralField* const> slots, double t,
                             int n_cut, EvalStats* stats = nullptr);

bool in_band(std::int64_t s, Band band, int n_max, int n_cut);
bool in_proj(int k, Proj p, int n_cut);

}  // namespace mbkdv
