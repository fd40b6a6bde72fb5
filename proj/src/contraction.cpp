#include "mbkdv/contraction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mbkdv/operators.hpp"
#include "mbkdv/parallel.hpp"
#include "mbkdv/rng.hpp"

namespace mbkdv {

std::string to_string(FormKind which) { return which == FormKind::FirstForm ? "FirstForm" : "SecondForm"; }

FormKind form_kind_from_string(const std::string& name) {
  if (name == "FirstForm") return FormKind::FirstForm;
  if (name == "SecondForm") return FormKind::SecondForm;
  throw std::invalid_argument("unknown form: " + name + " (expected FirstForm or SecondForm)");
}

std::string to_string(ContractionStatus s) {
  switch (s) {
    case ContractionStatus::Converged: return "converged";
    case ContractionStatus::MaxIterations: return "max_iterations";
    case ContractionStatus::EscapedBall: return "escaped_ball";
    case ContractionStatus::NonFinite: return "nonfinite";
  }
  return "?";
}

void validate(const ContractionConfig& c) {
  if (c.n_max < 1) throw std::invalid_argument("contraction: n_max must be >= 1");
  if (c.n_cut < 1 || c.n_cut > c.n_max) throw std::invalid_argument("contraction: n_cut must lie in [1, n_max]");
  if (!(c.t_star > 0.0) || !std::isfinite(c.t_star)) throw std::invalid_argument("contraction: t_star must be positive");
  if (c.m_grid < 2) throw std::invalid_argument("contraction: m_grid must be >= 2");
  if (!(c.radius_a > 0.0)) throw std::invalid_argument("contraction: radius_a must be positive");
  if (!(c.tol > 0.0)) throw std::invalid_argument("contraction: tol must be positive");
  if (c.max_iter < 1) throw std::invalid_argument("contraction: max_iter must be >= 1");
  if (!std::isfinite(c.s)) throw std::invalid_argument("contraction: s must be finite");
}

bool in_theory_regime(const ContractionConfig& c) {
  return c.which == FormKind::FirstForm ? c.s > 0.5 : (c.s >= 0.0 && c.s <= 0.5);
}

GridFunction GridFunction::zero(const ContractionConfig& cfg) {
  GridFunction g;
  for (int i = 0; i < cfg.m_grid; ++i) {
    g.times.push_back(cfg.t_star * static_cast<double>(i) / static_cast<double>(cfg.m_grid - 1));
    g.values.push_back(SpectralPair::zero(cfg.n_max));
  }
  return g;
}

SpectralPair GridFunction::reconstruct(std::size_t i, const SpectralPair& initial) const {
  SpectralPair w = initial + values.at(i);
  w.t_ref = times.at(i);
  return w;
}

double GridFunction::sup_norm(double s) const {
  double m = 0.0;
  for (const auto& v : values) m = std::max(m, sobolev_norm(v, SobolevIndex(s)));
  return m;
}

double sup_distance(const GridFunction& a, const GridFunction& b, double s) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    m = std::max(m, sobolev_norm(a.values[i] - b.values.at(i), SobolevIndex(s)));
  return m;
}

namespace {

SpectralPair boundary_terms(const SpectralPair& w, double t, const ContractionConfig& cfg) {
  SpectralPair b = b2_high_vec(w, t, cfg.n_cut);
  if (cfg.which == FormKind::SecondForm) b += b30_vec(w, t, cfg.n_cut);
  return b;
}

SpectralPair integrand(const SpectralPair& w, double t, const ContractionConfig& cfg) {
  SpectralPair f = b1_low_vec(w, t, cfg.n_cut);
  if (cfg.which == FormKind::FirstForm) {
    f += r3_high_vec_dform(w, t, cfg.n_cut);
  } else {
    f += r3_high_res_vec(w, cfg.n_cut);
    f += r3_high_nres1_vec(w, t, cfg.n_cut);
    f += b40_vec(w, t, cfg.n_cut);
  }
  return f;
}

}  // namespace

GridFunction apply_map(const GridFunction& g, const SpectralPair& initial, const ContractionConfig& cfg) {
  validate(cfg);
  if (initial.gauge != Gauge::Interaction) throw std::invalid_argument("apply_map: initial data must be Interaction gauge");
  if (initial.n_max() != cfg.n_max) throw std::invalid_argument("apply_map: initial data does not match n_max");
  const std::size_t m = g.values.size();
  if (m != static_cast<std::size_t>(cfg.m_grid)) throw std::invalid_argument("apply_map: grid size mismatch");

  std::vector<SpectralPair> bnd(m, SpectralPair::zero(cfg.n_max));
  std::vector<SpectralPair> rhs(m, SpectralPair::zero(cfg.n_max));
  parallel_for(0, static_cast<int>(m), [&](int i) {
    const auto idx = static_cast<std::size_t>(i);
    const SpectralPair w = g.reconstruct(idx, initial);
    bnd[idx] = boundary_terms(w, g.times[idx], cfg);
    rhs[idx] = integrand(w, g.times[idx], cfg);
  });
  // Boundary term at t = 0 uses the initial data itself: g(0) = 0 by construction.
  const SpectralPair bnd0 = boundary_terms(initial, 0.0, cfg);

  GridFunction out;
  out.times = g.times;
  out.values.push_back(SpectralPair::zero(cfg.n_max));
  SpectralPair integral = SpectralPair::zero(cfg.n_max);
  for (std::size_t i = 1; i < m; ++i) {
    const double h = g.times[i] - g.times[i - 1];
    integral.axpy(0.5 * h, rhs[i - 1]);
    integral.axpy(0.5 * h, rhs[i]);
    SpectralPair v = bnd[i] - bnd0;
    v += integral;
    v.t_ref = g.times[i];
    out.values.push_back(std::move(v));
  }
  return out;
}

ContractionResult solve_by_contraction(const SpectralPair& initial, const ContractionConfig& cfg) {
  validate(cfg);
  ContractionResult res;
  res.solution = GridFunction::zero(cfg);
  for (int it = 1; it <= cfg.max_iter; ++it) {
    GridFunction next = apply_map(res.solution, initial, cfg);
    res.iterations = it;
    bool finite = true;
    for (const auto& v : next.values) finite = finite && v.is_finite();
    if (!finite) {
      res.status = ContractionStatus::NonFinite;
      res.final_delta = std::numeric_limits<double>::infinity();
      return res;
    }
    const double delta = sup_distance(next, res.solution, cfg.s);
    res.deltas.push_back(delta);
    res.final_delta = delta;
    res.solution = std::move(next);
    if (!std::isfinite(delta)) {
      res.status = ContractionStatus::NonFinite;
      return res;
    }
    if (res.solution.sup_norm(cfg.s) > cfg.radius_a) {
      res.status = ContractionStatus::EscapedBall;
      return res;
    }
    if (delta < cfg.tol) {
      res.status = ContractionStatus::Converged;
      return res;
    }
  }
  res.status = ContractionStatus::MaxIterations;
  return res;
}

double estimate_lipschitz(const SpectralPair& initial, const ContractionConfig& cfg, int n_samples,
                          std::uint64_t seed) {
  validate(cfg);
  if (n_samples < 1) throw std::invalid_argument("estimate_lipschitz: n_samples must be >= 1");
  // g(t) = (t / t_star) X with ‖X‖ drawn in [0.25, 1]·radius_a: continuous, zero at t = 0, inside the ball.
  auto draw = [&](std::uint64_t stream) {
    Rng rng(sub_seed(seed, stream));
    const std::uint64_t su = rng();
    const std::uint64_t sv = rng();
    SpectralPair x(random_field(su, cfg.n_max, SobolevIndex(cfg.s), 1.0),
                   random_field(sv, cfg.n_max, SobolevIndex(cfg.s), 1.0));
    const double radius = cfg.radius_a * (0.25 + 0.75 * uniform01(rng));
    x *= radius / sobolev_norm(x, SobolevIndex(cfg.s));
    GridFunction g = GridFunction::zero(cfg);
    for (std::size_t i = 0; i < g.values.size(); ++i) {
      g.values[i] = x;
      g.values[i] *= g.times[i] / cfg.t_star;
    }
    return g;
  };
  double best = 0.0;
  for (int k = 0; k < n_samples; ++k) {
    const GridFunction a = draw(2 * static_cast<std::uint64_t>(k));
    const GridFunction b = draw(2 * static_cast<std::uint64_t>(k) + 1);
    const double den = sup_distance(a, b, cfg.s);
    if (den == 0.0) continue;
    const double num = sup_distance(apply_map(a, initial, cfg), apply_map(b, initial, cfg), cfg.s);
    best = std::max(best, num / den);
  }
  return best;
}

ContractionFailure::ContractionFailure(ContractionStatus status, double last_delta)
    : std::runtime_error("contraction did not converge: " + to_string(status) +
                         " (last delta " + std::to_string(last_delta) + ")"),
      status_(status) {}

double continuous_dependence_check(const SpectralPair& a, const SpectralPair& b, const ContractionConfig& cfg) {
  const double d0 = sobolev_norm(a - b, SobolevIndex(cfg.s));
  if (d0 == 0.0) return 0.0;
  const auto ra = solve_by_contraction(a, cfg);
  if (!ra.converged()) throw ContractionFailure(ra.status, ra.final_delta);
  const auto rb = solve_by_contraction(b, cfg);
  if (!rb.converged()) throw ContractionFailure(rb.status, rb.final_delta);
  double m = 0.0;
  for (std::size_t i = 0; i < ra.solution.values.size(); ++i) {
    const SpectralPair diff = ra.solution.reconstruct(i, a) - rb.solution.reconstruct(i, b);
    m = std::max(m, sobolev_norm(diff, SobolevIndex(cfg.s)));
  }
  return m / d0;
}

nlohmann::json solver_report(const ContractionConfig& cfg, const ContractionResult& res,
                             std::optional<double> lipschitz_estimate) {
  return {{"which", to_string(cfg.which)},
          {"n_cut", cfg.n_cut},
          {"t_star", cfg.t_star},
          {"iterations", res.iterations},
          {"final_delta", std::isfinite(res.final_delta) ? nlohmann::json(res.final_delta) : nlohmann::json(nullptr)},
          {"lipschitz_estimate", lipschitz_estimate ? nlohmann::json(*lipschitz_estimate) : nlohmann::json(nullptr)},
          {"escaped_ball", res.escaped_ball()},
          {"status", to_string(res.status)},
          {"theory_regime", in_theory_regime(cfg)}};
}

}  // namespace mbkdv
