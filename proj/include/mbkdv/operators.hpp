#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "mbkdv/multilinear.hpp"
#include "mbkdv/spectral_field.hpp"

namespace mbkdv {

enum class OperatorId { B1, B2, B3, B4, R3, R3res, R3nres, R3nres0, R3nres1, B30, B1P, B1Q, B2Q, R3Q };

std::string to_string(OperatorId op);
/// Throws std::invalid_argument for unknown names.
OperatorId operator_from_string(const std::string& name);

/// Projections on the arguments of a scalar operator, plus an optional
/// projection on the sum of a designated pair of argument indices.
/// A Low pair keeps 1 ≤ |k_i + k_j| ≤ n_cut, a High pair keeps |k_i + k_j| > n_cut.
struct ArgumentFilter {
  struct PairTag {
    int i;
    int j;
    Proj band;
  };
  std::array<Proj, 4> args{Proj::All, Proj::All, Proj::All, Proj::All};
  std::optional<PairTag> pair;
  int n_cut = 1;

  static ArgumentFilter all() { return {}; }
  /// Q on the second and third arguments: B3 with this filter is B30.
  static ArgumentFilter high_high(int n_cut);
};

/// (k1+k2)(k2+k3)(k1+k3) == 0, in exact arithmetic.
bool resonance_indicator(std::int64_t k1, std::int64_t k2, std::int64_t k3);

// Scalar operators. All arguments share one mode set and the output lives on it.

/// (ik/2) Σ_{k1+k2=k} e^{3ik k1 k2 t} φ_{k1} ψ_{k2}, via dealiased FFT products.
SpectralField b1(const SpectralField& phi, const SpectralField& psi, double t);
/// Same sum by direct summation.
SpectralField b1_direct(const SpectralField& phi, const SpectralField& psi, double t);
/// (1/6) Σ e^{3ik k1 k2 t} φ_{k1} ψ_{k2} / (k1 k2).
SpectralField b2(const SpectralField& phi, const SpectralField& psi, double t);
/// Σ_{k1+k2+k3=k} e^{3i(k1+k2)(k2+k3)(k1+k3)t} φ_{k1} ψ_{k2} ξ_{k3} / k1.
SpectralField r3(const SpectralField& phi, const SpectralField& psi, const SpectralField& xi, double t,
                 const ArgumentFilter& filter = ArgumentFilter::all());
/// r3 over resonant triples only (time independent), by enumeration.
SpectralField r3res(const SpectralField& phi, const SpectralField& psi, const SpectralField& xi,
                    const ArgumentFilter& filter = ArgumentFilter::all());
/// Resonant sum in closed form: three diagonal terms and three j-sums.
SpectralField r3res_closed(const SpectralField& phi, const SpectralField& psi, const SpectralField& xi);
SpectralField r3nres(const SpectralField& phi, const SpectralField& psi, const SpectralField& xi, double t,
                     const ArgumentFilter& filter = ArgumentFilter::all());
/// r3nres with Q on ψ and ξ.
SpectralField r3nres0(const SpectralField& phi, const SpectralField& psi, const SpectralField& xi, double t, int n_cut);
/// r3nres(φ, Pψ, ξ) + r3nres(φ, Qψ, Pξ).
SpectralField r3nres1(const SpectralField& phi, const SpectralField& psi, const SpectralField& xi, double t, int n_cut);
/// Non-resonant Σ e^{3i(k1+k2)(k2+k3)(k1+k3)t} φψξ / (k1(k1+k2)(k2+k3)(k1+k3)).
SpectralField b3(const SpectralField& phi, const SpectralField& psi, const SpectralField& xi, double t,
                 const ArgumentFilter& filter = ArgumentFilter::all());
/// B4¹ + B4² over quadruples; tuples with (k1+k2)(k1+k3+k4)(k2+k3+k4) = 0 are
/// skipped and counted in `stats`.
SpectralField b4(const SpectralField& phi, const SpectralField& psi, const SpectralField& xi, const SpectralField& eta,
                 double t, EvalStats* stats = nullptr);

// Vector operators of the coupled system. Pairs must be in the Interaction gauge.

/// (B1(u,v) − B1(u,u), B1(u,v) − B1(v,v)).
SpectralPair b1_vec(const SpectralPair& p, double t);
/// b1_vec of (Pu, Pv).
SpectralPair b1_low_vec(const SpectralPair& p, double t, int n_cut);
/// The remaining B1(Pa,Qb) + B1(Qa,b) products, assembled term by term.
SpectralPair b1_high_vec(const SpectralPair& p, double t, int n_cut);

/// First form: ∂t[w − b2_vec(w)] = r3_vec(w).
SpectralPair b2_vec(const SpectralPair& p, double t);
SpectralPair r3_vec(const SpectralPair& p, double t);
/// r3_vec written with the time derivative of one factor (bilinear in (w, ∂t w)).
SpectralPair r3_vec_dform(const SpectralPair& p, double t);

/// Second form: ∂t[w − b2_vec − b3_vec] = r3res_vec + b4_vec.
SpectralPair b3_vec(const SpectralPair& p, double t);
SpectralPair r3res_vec(const SpectralPair& p);
SpectralPair b4_vec(const SpectralPair& p, double t);
/// b4_vec fully expanded into quadrilinear sums (slow; for cross-checks).
SpectralPair b4_vec_expanded(const SpectralPair& p, double t);

/// Modified first form: ∂t[w − b2_high_vec] = b1_low_vec + r3_high_vec.
SpectralPair b2_high_vec(const SpectralPair& p, double t, int n_cut);
SpectralPair r3_high_vec(const SpectralPair& p, double t, int n_cut);
SpectralPair r3_high_vec_dform(const SpectralPair& p, double t, int n_cut);

struct R3QSplit {
  SpectralPair resonant;
  SpectralPair nres0;
  SpectralPair nres1;
};
SpectralPair r3_high_res_vec(const SpectralPair& p, int n_cut);
SpectralPair r3_high_nres0_vec(const SpectralPair& p, double t, int n_cut);
SpectralPair r3_high_nres1_vec(const SpectralPair& p, double t, int n_cut);
R3QSplit split_r3q(const SpectralPair& p, double t, int n_cut);

/// Modified second form: ∂t[w − b2_high_vec − b30_vec] = b1_low_vec + resonant + nres1 + b40_vec.
SpectralPair b30_vec(const SpectralPair& p, double t, int n_cut);
SpectralPair b40_vec(const SpectralPair& p, double t, int n_cut);
SpectralPair b40_vec_expanded(const SpectralPair& p, double t, int n_cut);

/// Sends one JSON line per operator evaluation to `sink`; nullptr disables tracing.
void set_operator_trace(std::ostream* sink);

namespace detail {
/// r3res_closed with a sign per closed-form piece S1..S6. Used by the
/// verification harness to build a deliberately corrupted operator.
SpectralField r3res_closed_signed(const SpectralField& phi, const SpectralField& psi, const SpectralField& xi,
                                  const std::array<int, 6>& signs);
}  // namespace detail

}  // namespace mbkdv
