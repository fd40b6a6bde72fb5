#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mbkdv/spectral_field.hpp"

namespace mbkdv {

/// Invalid configuration (bad sizes, dt above the stability bound, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Nonfinite state during time stepping.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(long step, double t);
  long step() const { return step_; }
  double time() const { return t_; }

 private:
  long step_;
  double t_;
};

/// Random initial data: u and v drawn by random_field with the given seeds.
struct RandomInitialData {
  std::uint64_t seed_u = 1;
  std::uint64_t seed_v = 2;
  double s = 1.0;
  double amplitude = 0.1;
  bool zero_v = false;
};

SpectralPair make_initial(const RandomInitialData& spec, int n_max);

/// Both are fourth order. Gauss4 (two-stage Gauss–Legendre, stages solved by
/// fixed-point iteration to rounding) conserves 𝓔 up to rounding; RK4 is the
/// classical explicit scheme, whose drift at the default step is about 1e-6.
enum class Integrator { Gauss4, RK4 };
std::string to_string(Integrator i);
/// "gauss4" or "rk4"; throws ConfigError otherwise.
Integrator integrator_from_string(const std::string& name);

struct SimulationConfig {
  int n_max = 32;
  /// Galerkin cutoff; defaults to n_max.
  std::optional<int> n_cut;
  /// Time step; defaults to the stability bound.
  std::optional<double> dt;
  double t_end = 1.0;
  /// Interaction gauge at t = 0 (the two gauges agree there).
  SpectralPair initial = SpectralPair::zero(1);
  int diagnostic_every = 1;
  int record_every = 1;
  Integrator integrator = Integrator::Gauss4;
};

/// dt ≤ 0.5 / (n_max² · max_k |u_k, v_k|); +∞ for zero data.
double stability_bound(const SpectralPair& p);

/// Checks a config and returns the step size that will be used.
double validate(const SimulationConfig& config);

struct DiagnosticsRecord {
  double t;
  double energy_cal;
  double hamiltonian;
  double norm_s0;
  double norm_s05;
  double norm_s1;
  double max_mode_amp;
};

DiagnosticsRecord diagnose(const SpectralPair& interaction_state, double t);

struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralPair> states;  // Interaction gauge
  SimulationConfig config;
};

struct SimulationResult {
  Trajectory trajectory;
  std::vector<DiagnosticsRecord> diagnostics;
  double dt = 0.0;
  long steps = 0;
  /// max_t |𝓔(t) − 𝓔(0)| / 𝓔(0) over diagnostic records (0 for zero data).
  double energy_drift = 0.0;
};

/// P applied to the inputs and to the output of b1_vec.
SpectralPair galerkin_rhs(const SpectralPair& p, double t, int n_cut);

/// One classical fourth-order Runge–Kutta step of the Galerkin system.
SpectralPair rk4_step(const SpectralPair& p, double t, double dt, int n_cut);

/// One two-stage Gauss–Legendre step. Throws DivergenceError when the stage
/// iteration does not settle.
SpectralPair gauss4_step(const SpectralPair& p, double t, double dt, int n_cut);

SpectralPair step(const SpectralPair& p, double t, double dt, int n_cut, Integrator method);

/// `steps` steps of size dt (negative dt integrates backwards).
SpectralPair advance(SpectralPair p, double t0, double dt, long steps, int n_cut,
                     Integrator method = Integrator::Gauss4);

SimulationResult integrate(const SimulationConfig& config);

enum class Form { First, Second, ModifiedFirst, ModifiedSecond };
std::string to_string(Form f);

struct FormResidual {
  double max_residual = 0.0;  // (Ḣ⁰)² norm
  double max_rhs = 0.0;       // scale of the right-hand side, for context
};

/// Centered-difference residual of ∂t[bracket] − rhs at interior samples.
/// Samples must be uniformly spaced. n_cut is required for the modified forms.
FormResidual form_residual_report(const Trajectory& traj, Form form, std::optional<int> n_cut);
double form_residual(const Trajectory& traj, Form form, std::optional<int> n_cut);

/// Bracketed quantity and right-hand side of a form at one state.
SpectralPair form_bracket(const SpectralPair& p, double t, Form form, int n_cut);
SpectralPair form_rhs(const SpectralPair& p, double t, Form form, int n_cut);

struct ConvergenceReport {
  std::vector<int> n_list;
  std::vector<double> errors;
  int n_ref = 0;
  double t_end = 0.0;
  double dt = 0.0;
  bool strictly_decreasing = false;
};

/// Integrates the data truncated to each cutoff (same dt) and compares with
/// the run at base.n_max at t_end in (Ḣ⁰)².
ConvergenceReport convergence_study(const SimulationConfig& base, const std::vector<int>& n_list);

}  // namespace mbkdv
