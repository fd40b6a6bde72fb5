#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "mbkdv/spectral_field.hpp"

namespace mbkdv {

enum class FormKind { FirstForm, SecondForm };
std::string to_string(FormKind which);
FormKind form_kind_from_string(const std::string& name);

struct ContractionConfig {
  int n_max = 32;
  int n_cut = 16;
  double t_star = 0.05;
  int m_grid = 65;
  double radius_a = 0.5;
  double s = 1.0;
  double tol = 1e-12;
  int max_iter = 50;
  FormKind which = FormKind::FirstForm;
};

/// Throws std::invalid_argument when the invariants are violated.
void validate(const ContractionConfig& cfg);

/// Whether the analysis backs the chosen form at cfg.s: FirstForm for s > 1/2,
/// SecondForm for 0 ≤ s ≤ 1/2 (both are offered for any s).
bool in_theory_regime(const ContractionConfig& cfg);

/// Shifted unknowns (y, z)(t_i) = (u, v)(t_i) − (u, v)(0) on a uniform grid of [0, t_star].
struct GridFunction {
  std::vector<double> times;
  std::vector<SpectralPair> values;

  static GridFunction zero(const ContractionConfig& cfg);
  /// (u, v)(t_i), rebuilt on demand.
  SpectralPair reconstruct(std::size_t i, const SpectralPair& initial) const;
  /// sup_i ‖values_i‖ in (Ḣ^s)².
  double sup_norm(double s) const;
};

double sup_distance(const GridFunction& a, const GridFunction& b, double s);

/// One application of the fixed-point map: instantaneous boundary terms at
/// each grid time minus their value at t = 0, plus the trapezoid integral of
/// the form's right-hand side. The output vanishes at t = 0.
GridFunction apply_map(const GridFunction& g, const SpectralPair& initial, const ContractionConfig& cfg);

enum class ContractionStatus { Converged, MaxIterations, EscapedBall, NonFinite };
std::string to_string(ContractionStatus s);

struct ContractionResult {
  GridFunction solution;
  int iterations = 0;
  double final_delta = 0.0;
  std::vector<double> deltas;
  ContractionStatus status = ContractionStatus::MaxIterations;
  bool escaped_ball() const { return status == ContractionStatus::EscapedBall; }
  bool converged() const { return status == ContractionStatus::Converged; }
};

/// Picard iteration from g = 0 until the sup (Ḣ^s)² change drops below tol.
/// Iterates are monitored, not projected: leaving the ball of radius_a stops
/// the iteration with EscapedBall.
ContractionResult solve_by_contraction(const SpectralPair& initial, const ContractionConfig& cfg);

/// Empirical lower bound on the Lipschitz constant of the map on the ball:
/// max over random pairs g, g̃ of ‖F g − F g̃‖ / ‖g − g̃‖ in the sup (Ḣ^s)² norm.
double estimate_lipschitz(const SpectralPair& initial, const ContractionConfig& cfg, int n_samples,
                          std::uint64_t seed);

/// Thrown when a solve required by a derived quantity does not converge.
class ContractionFailure : public std::runtime_error {
 public:
  ContractionFailure(ContractionStatus status, double last_delta);
  ContractionStatus status() const { return status_; }

 private:
  ContractionStatus status_;
};

/// sup_t ‖w_a(t) − w_b(t)‖ / ‖a − b‖ in (Ḣ^s)²; 0 when a = b.
double continuous_dependence_check(const SpectralPair& initial_a, const SpectralPair& initial_b,
                                   const ContractionConfig& cfg);

nlohmann::json solver_report(const ContractionConfig& cfg, const ContractionResult& res,
                             std::optional<double> lipschitz_estimate);

}  // namespace mbkdv
