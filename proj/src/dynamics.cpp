#include "mbkdv/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mbkdv/operators.hpp"
#include "mbkdv/rng.hpp"

namespace mbkdv {

DivergenceError::DivergenceError(long step, double t)
    : std::runtime_error("nonfinite state at step " + std::to_string(step) + " (t = " + std::to_string(t) + ")"),
      step_(step),
      t_(t) {}

SpectralPair make_initial(const RandomInitialData& spec, int n_max) {
  SpectralField u = random_field(spec.seed_u, n_max, SobolevIndex(spec.s), spec.amplitude);
  SpectralField v = spec.zero_v ? SpectralField(n_max) : random_field(spec.seed_v, n_max, SobolevIndex(spec.s), spec.amplitude);
  return SpectralPair(std::move(u), std::move(v), Gauge::Interaction, 0.0);
}

double stability_bound(const SpectralPair& p) {
  const double amp = std::max(p.u.max_abs(), p.v.max_abs());
  if (amp == 0.0) return std::numeric_limits<double>::infinity();
  const double n = p.n_max();
  return 0.5 / (n * n * amp);
}

double validate(const SimulationConfig& c) {
  if (c.n_max < 1) throw ConfigError("n_max must be >= 1");
  if (c.initial.n_max() != c.n_max) throw ConfigError("initial data does not match n_max");
  if (!c.initial.is_finite()) throw ConfigError("initial data is not finite");
  if (!c.initial.u.is_hermitian(0.0) || !c.initial.v.is_hermitian(0.0))
    throw ConfigError("initial data is not Hermitian");
  const int n_cut = c.n_cut.value_or(c.n_max);
  if (n_cut < 1 || n_cut > c.n_max) throw ConfigError("n_cut must lie in [1, n_max]");
  if (!(c.t_end > 0.0) || !std::isfinite(c.t_end)) throw ConfigError("t_end must be positive");
  if (c.diagnostic_every < 1 || c.record_every < 1) throw ConfigError("cadences must be >= 1");
  const double bound = stability_bound(c.initial);
  double dt = c.dt.value_or(std::min(bound, c.t_end));
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
  if (dt > bound * (1.0 + 1e-12)) {
    std::ostringstream os;
    os.precision(17);
    os << "dt = " << dt << " exceeds the stability bound " << bound;
    throw ConfigError(os.str());
  }
  if (c.t_end < dt * (1.0 - 1e-12)) throw ConfigError("t_end must be >= dt");
  return dt;
}

DiagnosticsRecord diagnose(const SpectralPair& state, double t) {
  const SpectralPair phys = gauge(state, t, Gauge::Physical);
  return DiagnosticsRecord{t,
                           energy_functional(state),
                           hamiltonian(phys),
                           sobolev_norm(state, SobolevIndex(0.0)),
                           sobolev_norm(state, SobolevIndex(0.5)),
                           sobolev_norm(state, SobolevIndex(1.0)),
                           std::max(state.u.max_abs(), state.v.max_abs())};
}

SpectralPair galerkin_rhs(const SpectralPair& p, double t, int n_cut) {
  if (n_cut >= p.n_max()) return b1_vec(p, t);
  return project_low(b1_vec(project_low(p, n_cut), t), n_cut);
}

SpectralPair rk4_step(const SpectralPair& p, double t, double dt, int n_cut) {
  const SpectralPair k1 = galerkin_rhs(p, t, n_cut);
  SpectralPair y = p;
  y.axpy(0.5 * dt, k1);
  const SpectralPair k2 = galerkin_rhs(y, t + 0.5 * dt, n_cut);
  y = p;
  y.axpy(0.5 * dt, k2);
  const SpectralPair k3 = galerkin_rhs(y, t + 0.5 * dt, n_cut);
  y = p;
  y.axpy(dt, k3);
  const SpectralPair k4 = galerkin_rhs(y, t + dt, n_cut);
  SpectralPair out = p;
  out.axpy(dt / 6.0, k1);
  out.axpy(dt / 3.0, k2);
  out.axpy(dt / 3.0, k3);
  out.axpy(dt / 6.0, k4);
  out.t_ref = t + dt;
  return out;
}

SpectralPair gauss4_step(const SpectralPair& p, double t, double dt, int n_cut) {
  static const double r = std::sqrt(3.0) / 6.0;
  const double a11 = 0.25, a12 = 0.25 - r, a21 = 0.25 + r, a22 = 0.25;
  const double c1 = 0.5 - r, c2 = 0.5 + r;
  SpectralPair k1 = galerkin_rhs(p, t + c1 * dt, n_cut);
  SpectralPair k2 = galerkin_rhs(p, t + c2 * dt, n_cut);
  const double scale = std::max(sobolev_norm(p, SobolevIndex(0)), std::numeric_limits<double>::min());
  double last = std::numeric_limits<double>::infinity();
  int stalled = 0;
  for (int it = 0; it < 200; ++it) {
    SpectralPair y1 = p;
    y1.axpy(a11 * dt, k1).axpy(a12 * dt, k2);
    SpectralPair y2 = p;
    y2.axpy(a21 * dt, k1).axpy(a22 * dt, k2);
    SpectralPair n1 = galerkin_rhs(y1, t + c1 * dt, n_cut);
    SpectralPair n2 = galerkin_rhs(y2, t + c2 * dt, n_cut);
    const double change = std::abs(dt) * std::hypot(sobolev_norm(n1 - k1, SobolevIndex(0)),
                                                    sobolev_norm(n2 - k2, SobolevIndex(0)));
    k1 = std::move(n1);
    k2 = std::move(n2);
    if (!std::isfinite(change)) break;
    // Settled once the update is at rounding level or stops shrinking there.
    if (change <= 1e-16 * scale) break;
    if (change <= 1e-13 * scale && change >= 0.5 * last && ++stalled >= 2) break;
    last = change;
    if (it == 199) throw DivergenceError(0, t);
  }
  SpectralPair out = p;
  out.axpy(0.5 * dt, k1).axpy(0.5 * dt, k2);
  out.t_ref = t + dt;
  return out;
}

SpectralPair step(const SpectralPair& p, double t, double dt, int n_cut, Integrator method) {
  return method == Integrator::RK4 ? rk4_step(p, t, dt, n_cut) : gauss4_step(p, t, dt, n_cut);
}

std::string to_string(Integrator i) { return i == Integrator::RK4 ? "rk4" : "gauss4"; }

Integrator integrator_from_string(const std::string& name) {
  if (name == "rk4") return Integrator::RK4;
  if (name == "gauss4") return Integrator::Gauss4;
  throw ConfigError("unknown integrator: " + name + " (expected gauss4 or rk4)");
}

SpectralPair advance(SpectralPair p, double t0, double dt, long steps, int n_cut, Integrator method) {
  for (long i = 0; i < steps; ++i) {
    p = step(p, t0 + static_cast<double>(i) * dt, dt, n_cut, method);
    if (!p.is_finite()) throw DivergenceError(i + 1, t0 + static_cast<double>(i + 1) * dt);
  }
  return p;
}

SimulationResult integrate(const SimulationConfig& config) {
  const double dt_max = validate(config);
  const int n_cut = config.n_cut.value_or(config.n_max);
  const long steps = std::max(1L, static_cast<long>(std::ceil(config.t_end / dt_max - 1e-9)));
  const double dt = config.t_end / static_cast<double>(steps);

  SimulationResult res;
  res.dt = dt;
  res.steps = steps;
  res.trajectory.config = config;
  SpectralPair state = config.initial;
  state.gauge = Gauge::Interaction;
  state.t_ref = 0.0;

  auto record = [&](long i, double t) {
    if (i % config.record_every == 0 || i == steps) {
      res.trajectory.times.push_back(t);
      res.trajectory.states.push_back(state);
    }
    if (i % config.diagnostic_every == 0 || i == steps) res.diagnostics.push_back(diagnose(state, t));
  };
  record(0, 0.0);
  for (long i = 1; i <= steps; ++i) {
    const double t0 = static_cast<double>(i - 1) * dt;
    state = step(state, t0, dt, n_cut, config.integrator);
    if (!state.is_finite()) throw DivergenceError(i, static_cast<double>(i) * dt);
    record(i, static_cast<double>(i) * dt);
  }
  const double e0 = res.diagnostics.front().energy_cal;
  for (const auto& d : res.diagnostics)
    if (e0 > 0.0) res.energy_drift = std::max(res.energy_drift, std::abs(d.energy_cal - e0) / e0);
  return res;
}

std::string to_string(Form f) {
  switch (f) {
    case Form::First: return "first";
    case Form::Second: return "second";
    case Form::ModifiedFirst: return "modified_first";
    case Form::ModifiedSecond: return "modified_second";
  }
  return "?";
}

SpectralPair form_bracket(const SpectralPair& p, double t, Form form, int n_cut) {
  switch (form) {
    case Form::First: return p - b2_vec(p, t);
    case Form::Second: return p - b2_vec(p, t) - b3_vec(p, t);
    case Form::ModifiedFirst: return p - b2_high_vec(p, t, n_cut);
    case Form::ModifiedSecond: return p - b2_high_vec(p, t, n_cut) - b30_vec(p, t, n_cut);
  }
  throw std::invalid_argument("unknown form");
}

SpectralPair form_rhs(const SpectralPair& p, double t, Form form, int n_cut) {
  switch (form) {
    case Form::First: return r3_vec(p, t);
    case Form::Second: return r3res_vec(p) + b4_vec(p, t);
    case Form::ModifiedFirst: return b1_low_vec(p, t, n_cut) + r3_high_vec(p, t, n_cut);
    case Form::ModifiedSecond:
      return b1_low_vec(p, t, n_cut) + r3_high_res_vec(p, n_cut) + r3_high_nres1_vec(p, t, n_cut) +
             b40_vec(p, t, n_cut);
  }
  throw std::invalid_argument("unknown form");
}

FormResidual form_residual_report(const Trajectory& traj, Form form, std::optional<int> n_cut) {
  const auto& ts = traj.times;
  if (ts.size() < 3 || traj.states.size() != ts.size())
    throw std::invalid_argument("form_residual: trajectory needs at least 3 samples");
  const bool modified = form == Form::ModifiedFirst || form == Form::ModifiedSecond;
  if (modified && !n_cut) throw std::invalid_argument("form_residual: modified forms need n_cut");
  const int n_max = traj.states.front().n_max();
  if (traj.config.n_cut && *traj.config.n_cut < n_max)
    throw std::invalid_argument("form_residual: trajectory must be the untruncated Galerkin system");
  const int nc = n_cut.value_or(n_max);
  const double h = ts[1] - ts[0];
  for (std::size_t i = 1; i + 1 < ts.size(); ++i)
    if (std::abs((ts[i + 1] - ts[i]) - h) > 1e-9 * h) throw std::invalid_argument("form_residual: nonuniform samples");

  FormResidual out;
  SpectralPair prev = form_bracket(traj.states[0], ts[0], form, nc);
  SpectralPair cur = form_bracket(traj.states[1], ts[1], form, nc);
  for (std::size_t i = 1; i + 1 < ts.size(); ++i) {
    SpectralPair next = form_bracket(traj.states[i + 1], ts[i + 1], form, nc);
    SpectralPair d = next - prev;
    d *= 1.0 / (ts[i + 1] - ts[i - 1]);
    const SpectralPair rhs = form_rhs(traj.states[i], ts[i], form, nc);
    out.max_rhs = std::max(out.max_rhs, sobolev_norm(rhs, SobolevIndex(0)));
    out.max_residual = std::max(out.max_residual, sobolev_norm(d - rhs, SobolevIndex(0)));
    prev = std::move(cur);
    cur = std::move(next);
  }
  return out;
}

double form_residual(const Trajectory& traj, Form form, std::optional<int> n_cut) {
  return form_residual_report(traj, form, n_cut).max_residual;
}

ConvergenceReport convergence_study(const SimulationConfig& base, const std::vector<int>& n_list) {
  if (n_list.empty()) throw ConfigError("convergence_study: empty cutoff list");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 1 || n_list[i] > base.n_max) throw ConfigError("convergence_study: cutoffs must lie in [1, n_max]");
    if (i > 0 && n_list[i] <= n_list[i - 1]) throw ConfigError("convergence_study: cutoffs must increase");
  }
  SimulationConfig ref_cfg = base;
  ref_cfg.n_cut.reset();
  ref_cfg.record_every = std::numeric_limits<int>::max();
  ref_cfg.diagnostic_every = std::numeric_limits<int>::max();
  const double dt = validate(ref_cfg);
  ref_cfg.dt = dt;
  const auto ref = integrate(ref_cfg);
  const SpectralPair& ref_end = ref.trajectory.states.back();

  ConvergenceReport rep;
  rep.n_list = n_list;
  rep.n_ref = base.n_max;
  rep.t_end = base.t_end;
  rep.dt = ref.dt;
  for (int n : n_list) {
    SimulationConfig c = ref_cfg;
    c.n_max = n;
    c.initial = resized(project_low(base.initial, n), n);
    const auto run = n == base.n_max ? ref : integrate(c);
    const SpectralPair end = resized(run.trajectory.states.back(), base.n_max);
    rep.errors.push_back(sobolev_norm(end - ref_end, SobolevIndex(0)));
  }
  rep.strictly_decreasing = true;
  for (std::size_t i = 1; i < rep.errors.size(); ++i)
    if (!(rep.errors[i] < rep.errors[i - 1])) rep.strictly_decreasing = false;
  return rep;
}

}  // namespace mbkdv
