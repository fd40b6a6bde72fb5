#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mbkdv/dynamics.hpp"
#include "mbkdv/operators.hpp"

namespace mbkdv {

// ---- brute-force oracles ----

/// Most literal evaluation of a scalar operator: nested loops over every index
/// tuple, phases recomputed per tuple in long double, no caching. n_max ≤ 16.
/// `n_cut` is used by R3nres0, R3nres1 and B30.
SpectralField brute_force_oracle(OperatorId op, std::span<const SpectralField> args, double t,
                                 const std::optional<ArgumentFilter>& filter = std::nullopt, int n_cut = 1);

/// Vector operators B1P, B1Q, B2Q and R3Q transcribed from their definitions
/// on top of the scalar oracles. R3Q is built from the derivative route:
/// each σ B2(Xa, Yb) in B2Q contributes −σ [B2(X∂a, Yb) + B2(Xa, Y∂b)].
SpectralPair brute_force_vector_oracle(OperatorId op, const SpectralPair& p, double t, int n_cut);

// ---- identities ----

struct IdentityCheck {
  std::string name;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct SplitOptions {
  double tol = 1e-12;
  /// Flip the sign of one closed-form resonant piece (negative control).
  bool corrupt_r3res = false;
};

struct SplitReport {
  std::vector<IdentityCheck> checks;
  std::uint64_t seed = 0;
  bool all_passed = false;
};

/// r3 = r3res_closed + r3nres; R3Q = resonant + nres0 + nres1;
/// b1_vec = b1_low_vec + b1_high_vec; P + Q = I. Failures are reported, not thrown.
SplitReport split_identities(int n_max, int n_cut, const std::vector<double>& t_values, int samples,
                             std::uint64_t seed, const SplitOptions& options = {});

struct DbpReport {
  std::vector<std::pair<Form, double>> residuals;
};

/// Centered-difference residuals of all four forms along a trajectory.
DbpReport dbp_identity(const Trajectory& traj, int n_cut);

struct DbpOrderEntry {
  Form form;
  double residual_coarse;
  double residual_fine;
  double ratio;
  bool passed;
};

struct DbpOrderReport {
  double dt = 0.0;
  std::vector<DbpOrderEntry> entries;
  bool all_passed = false;
};

/// Integrates `base` with steps dt and dt/2, sampling every step, and checks
/// that each form's residual drops by a factor in [ratio_lo, ratio_hi].
DbpOrderReport dbp_order_study(const SimulationConfig& base, double dt, int n_cut, const std::vector<Form>& forms,
                               double ratio_lo = 3.5, double ratio_hi = 4.5);

// ---- empirical operator bounds ----

struct BoundEstimate {
  OperatorId op = OperatorId::B2;
  double s = 0.0;
  std::map<std::string, double> extra;
  std::vector<int> n_values;
  std::vector<double> sup_ratio;
  double fitted_exponent = 0.0;
  double fit_residual = 0.0;
  /// Exponent of n in the lemma's bound.
  double bound_exponent = 0.0;
  int samples = 0;
  std::uint64_t seed = 0;
  /// "pass" (fitted ≤ bound + 0.25), "fail", or "inconclusive" (fit residual > 0.5).
  std::string verdict;
};

/// For each n draws `samples` argument tuples (75% borderline-decay fields,
/// 25% uniform amplitudes), records the sup of the lemma's left norm over its
/// right-hand norm product, and fits log sup_ratio against log n.
///
/// Supported: B1 (extra theta > 3/2), B2 (into Ḣ^{s+1}, or Ḣ^{s+alpha} with extra
/// alpha), B3, B30, R3,
/// R3nres1 (extra alpha ≥ 0), B4 (extra epsilon), B2Q, B1P. For B30, B2Q,
/// R3nres1 and B1P, n is the cutoff and fields live on ambient_factor·n modes
/// (extra "ambient_factor", default 2). Out-of-regime parameters throw.
BoundEstimate lemma_bound(OperatorId op, double s, const std::map<std::string, double>& extra,
                          const std::vector<int>& n_values, int samples, std::uint64_t seed);

struct LogFit {
  double slope;
  double intercept;
  double rms_residual;
};
LogFit fit_loglog(const std::vector<int>& n, const std::vector<double>& y);

nlohmann::json to_json(const BoundEstimate& b);
nlohmann::json to_json(const SplitReport& r);
/// Rows "op,s,extra,n,sup_ratio,fitted_exponent,fit_residual,verdict".
std::string bounds_csv(const std::vector<BoundEstimate>& bounds);

}  // namespace mbkdv
