#include "mbkdv/operators.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <ostream>
#include <stdexcept>

#include "json.hpp"
#include "mbkdv/expansion.hpp"
#include "mbkdv/phase.hpp"

namespace mbkdv {

namespace {

constexpr std::array<std::pair<OperatorId, const char*>, 14> kNames{{
    {OperatorId::B1, "B1"},
    {OperatorId::B2, "B2"},
    {OperatorId::B3, "B3"},
    {OperatorId::B4, "B4"},
    {OperatorId::R3, "R3"},
    {OperatorId::R3res, "R3res"},
    {OperatorId::R3nres, "R3nres"},
    {OperatorId::R3nres0, "R3nres0"},
    {OperatorId::R3nres1, "R3nres1"},
    {OperatorId::B30, "B30"},
    {OperatorId::B1P, "B1P"},
    {OperatorId::B1Q, "B1Q"},
    {OperatorId::B2Q, "B2Q"},
    {OperatorId::R3Q, "R3Q"},
}};

// ---- tracing ----

std::mutex g_trace_mutex;
std::ostream* g_trace = nullptr;

void trace(const char* op, int n_max, std::optional<int> n_cut, double t, const EvalStats& stats) {
  std::lock_guard lock(g_trace_mutex);
  if (!g_trace) return;
  nlohmann::json j{{"op", op},
                   {"n_max", n_max},
                   {"n_cut", n_cut ? nlohmann::json(*n_cut) : nlohmann::json(nullptr)},
                   {"t", t},
                   {"terms", stats.terms},
                   {"skipped_denominators", stats.skipped_denominators}};
  *g_trace << j.dump() << '\n';
}

bool tracing() {
  std::lock_guard lock(g_trace_mutex);
  return g_trace != nullptr;
}

// ---- FFT products ----

struct FftPlans {
  fftw_plan forward;
  fftw_plan backward;
};

// Plans are created once per size under a lock; execution with new-array
// execute calls is thread safe.
const FftPlans& plans_for(int m) {
  static std::mutex mutex;
  static std::map<int, FftPlans> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(m);
  if (it != cache.end()) return it->second;
  auto* a = fftw_alloc_complex(static_cast<std::size_t>(m));
  auto* b = fftw_alloc_complex(static_cast<std::size_t>(m));
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  FftPlans p{fftw_plan_dft_1d(m, a, b, FFTW_FORWARD, flags), fftw_plan_dft_1d(m, a, b, FFTW_BACKWARD, flags)};
  fftw_free(a);
  fftw_free(b);
  return cache.emplace(m, p).first->second;
}

int fft_size(int n) {
  int m = 8;
  while (m < 3 * n + 1) m *= 2;
  return m;
}

fftw_complex* as_fftw(std::vector<Complex>& v) { return reinterpret_cast<fftw_complex*>(v.data()); }

// Grid values of Σ_k f_k e^{-ik³t} e^{ikx} on M points.
std::vector<Complex> to_grid(const SpectralField& f, const PhaseCache& cache, int m) {
  const int n = f.n_max();
  std::vector<Complex> spec(static_cast<std::size_t>(m)), grid(static_cast<std::size_t>(m));
  for (int k = -n; k <= n; ++k) {
    if (k == 0) continue;
    spec[static_cast<std::size_t>((k + m) % m)] = f[k] * std::conj(cache.cube_phase(k));
  }
  fftw_execute_dft(plans_for(m).backward, as_fftw(spec), as_fftw(grid));
  return grid;
}

// Adds sign·(ik/2)·e^{ik³t}·(a·b)_k to out for |k| ≤ n.
void add_b1_from_grid(const std::vector<Complex>& a, const std::vector<Complex>& b, double sign,
                      const PhaseCache& cache, int m, SpectralField& out) {
  std::vector<Complex> prod(static_cast<std::size_t>(m)), spec(static_cast<std::size_t>(m));
  for (std::size_t j = 0; j < prod.size(); ++j) prod[j] = a[j] * b[j];
  fftw_execute_dft(plans_for(m).forward, as_fftw(prod), as_fftw(spec));
  const int n = out.n_max();
  const double scale = sign / static_cast<double>(m);
  for (int k = -n; k <= n; ++k) {
    if (k == 0) continue;
    const Complex d(0.0, 0.5 * k);
    out[k] += scale * d * cache.cube_phase(k) * spec[static_cast<std::size_t>((k + m) % m)];
  }
}

void require_same(const SpectralField& a, const SpectralField& b) {
  if (a.modes() != b.modes()) throw std::invalid_argument("operator arguments have mismatched mode sets");
}

void require_interaction(const SpectralPair& p) {
  if (p.gauge != Gauge::Interaction) throw std::invalid_argument("vector operators require the Interaction gauge");
}

// ---- scalar operators as single-term sums ----

Term scalar_term(int degree, const ArgumentFilter& filter) {
  Term t;
  for (int j = 0; j < degree; ++j) t.factors.push_back(Factor{j, filter.args[static_cast<std::size_t>(j)]});
  if (filter.pair && filter.pair->band != Proj::All) {
    const auto& pt = *filter.pair;
    if (pt.i < 0 || pt.j < 0 || pt.i >= degree || pt.j >= degree || pt.i == pt.j)
      throw std::invalid_argument("ArgumentFilter: invalid pair");
    const Mask m = static_cast<Mask>((1u << pt.i) | (1u << pt.j));
    t.constraints.push_back({m, pt.band == Proj::Low ? Band::Low : Band::High});
  }
  return t;
}

SpectralField run_scalar(const char* name, const Term& term, std::initializer_list<const SpectralField*> args,
                         double t, int n_cut) {
  const SpectralField* first = *args.begin();
  for (const auto* a : args) require_same(*first, *a);
  std::vector<const SpectralField*> slots(args);
  EvalStats stats;
  auto out = evaluate_terms(TermList{term}, slots, t, n_cut, &stats);
  if (tracing()) trace(name, first->n_max(), n_cut, t, stats);
  return out;
}

constexpr Mask b(int j) { return static_cast<Mask>(1u << j); }

// ---- vector operators from the generated term lists ----

struct CompiledForms {
  CompiledTerms rhs, b1q, b2, r3, r3_dform, r3_res, b3, b4, b4_dform;
  CompiledTerms b2q, r3q, r3q_dform, r3q_res, r3q_nres0, r3q_nres1, b30, b40, b40_dform;
};

const CompiledForms& compiled() {
  static const CompiledForms c = [] {
    const auto& f = expansion::forms();
    auto mk = [](const expansion::VectorTerms& v) { return CompiledTerms(std::span<const TermList>(v)); };
    return CompiledForms{mk(f.rhs),       mk(f.b1q),      mk(f.b2),        mk(f.r3),        mk(f.r3_dform),
                         mk(f.r3_res),    mk(f.b3),       mk(f.b4),        mk(f.b4_dform),  mk(f.b2q),
                         mk(f.r3q),       mk(f.r3q_dform), mk(f.r3q_res),  mk(f.r3q_nres0), mk(f.r3q_nres1),
                         mk(f.b30),       mk(f.b40),      mk(f.b40_dform)};
  }();
  return c;
}

SpectralPair run_vector(const char* name, const CompiledTerms& terms, const SpectralPair& p, double t, int n_cut,
                        const SpectralPair* deriv = nullptr, std::optional<int> traced_cut = std::nullopt) {
  require_interaction(p);
  std::array<const SpectralField*, 4> slots{&p.u, &p.v, deriv ? &deriv->u : nullptr, deriv ? &deriv->v : nullptr};
  EvalStats stats;
  auto out = terms.evaluate(slots, t, n_cut, &stats);
  if (tracing()) trace(name, p.n_max(), traced_cut, t, stats);
  return SpectralPair(std::move(out[0]), std::move(out[1]), Gauge::Interaction, t);
}

}  // namespace

std::string to_string(OperatorId op) {
  for (const auto& [id, name] : kNames)
    if (id == op) return name;
  return "?";
}

OperatorId operator_from_string(const std::string& name) {
  for (const auto& [id, n] : kNames)
    if (name == n) return id;
  throw std::invalid_argument("unknown operator: " + name);
}

ArgumentFilter ArgumentFilter::high_high(int n_cut) {
  ArgumentFilter f;
  f.args[1] = Proj::High;
  f.args[2] = Proj::High;
  f.n_cut = n_cut;
  return f;
}

bool resonance_indicator(std::int64_t k1, std::int64_t k2, std::int64_t k3) {
  return (k1 + k2) == 0 || (k2 + k3) == 0 || (k1 + k3) == 0;
}

void set_operator_trace(std::ostream* sink) {
  std::lock_guard lock(g_trace_mutex);
  g_trace = sink;
}

SpectralField b1(const SpectralField& phi, const SpectralField& psi, double t) {
  require_same(phi, psi);
  const int n = phi.n_max();
  const int m = fft_size(n);
  const PhaseCache cache(t, n);
  SpectralField out{phi.modes()};
  const auto a = to_grid(phi, cache, m);
  if (&phi == &psi) {
    add_b1_from_grid(a, a, 1.0, cache, m, out);
  } else {
    add_b1_from_grid(a, to_grid(psi, cache, m), 1.0, cache, m, out);
  }
  if (tracing()) trace("B1", n, std::nullopt, t, EvalStats{1, 0, 0});
  return out;
}

SpectralField b1_direct(const SpectralField& phi, const SpectralField& psi, double t) {
  Term term = scalar_term(2, ArgumentFilter::all());
  term.coeff = Coefficient::make(1, 2, 1);
  term.num = {b(0) | b(1)};
  return run_scalar("B1", term, {&phi, &psi}, t, 1);
}

SpectralField b2(const SpectralField& phi, const SpectralField& psi, double t) {
  Term term = scalar_term(2, ArgumentFilter::all());
  term.coeff = Coefficient::make(1, 6);
  term.den = {b(0), b(1)};
  return run_scalar("B2", term, {&phi, &psi}, t, 1);
}

SpectralField r3(const SpectralField& phi, const SpectralField& psi, const SpectralField& xi, double t,
                 const ArgumentFilter& filter) {
  Term term = scalar_term(3, filter);
  term.den = {b(0)};
  return run_scalar("R3", term, {&phi, &psi, &xi}, t, filter.n_cut);
}

SpectralField r3res(const SpectralField& phi, const SpectralField& psi, const SpectralField& xi,
                    const ArgumentFilter& filter) {
  Term term = scalar_term(3, filter);
  term.den = {b(0)};
  term.resonance = Resonance::Resonant;
  return run_scalar("R3res", term, {&phi, &psi, &xi}, 0.0, filter.n_cut);
}

SpectralField detail::r3res_closed_signed(const SpectralField& phi, const SpectralField& psi, const SpectralField& xi,
                                          const std::array<int, 6>& s) {
  require_same(phi, psi);
  require_same(phi, xi);
  const int n = phi.n_max();
  SpectralField out{phi.modes()};
  for (int k = -n; k <= n; ++k) {
    if (k == 0) continue;
    const double kd = k;
    Complex s4{}, s5{}, s6{};
    for (int j = -n; j <= n; ++j) {
      if (j == 0 || j == k || j == -k) continue;
      s4 += phi[j] * psi[-j] / static_cast<double>(j);
      s5 += psi[j] * xi[-j];
      s6 += phi[j] * xi[-j] / static_cast<double>(j);
    }
    Complex acc = static_cast<double>(s[0]) * phi[k] * psi[-k] * xi[k] / kd;
    acc += static_cast<double>(s[1]) * phi[-k] * psi[k] * xi[k] / (-kd);
    acc += static_cast<double>(s[2]) * phi[k] * psi[k] * xi[-k] / kd;
    acc += static_cast<double>(s[3]) * xi[k] * s4;
    acc += static_cast<double>(s[4]) * (phi[k] / kd) * s5;
    acc += static_cast<double>(s[5]) * psi[k] * s6;
    out[k] = acc;
  }
  return out;
}

SpectralField r3res_closed(const SpectralField& phi, const SpectralField& psi, const SpectralField& xi) {
  return detail::r3res_closed_signed(phi, psi, xi, {1, 1, 1, 1, 1, 1});
}

SpectralField r3nres(const SpectralField& phi, const SpectralField& psi, const SpectralField& xi, double t,
                     const ArgumentFilter& filter) {
  Term term = scalar_term(3, filter);
  term.den = {b(0)};
  term.resonance = Resonance::NonResonant;
  return run_scalar("R3nres", term, {&phi, &psi, &xi}, t, filter.n_cut);
}

SpectralField r3nres0(const SpectralField& phi, const SpectralField& psi, const SpectralField& xi, double t,
                      int n_cut) {
  return r3nres(phi, psi, xi, t, ArgumentFilter::high_high(n_cut));
}

SpectralField r3nres1(const SpectralField& phi, const SpectralField& psi, const SpectralField& xi, double t,
                      int n_cut) {
  ArgumentFilter low_mid;
  low_mid.args[1] = Proj::Low;
  low_mid.n_cut = n_cut;
  ArgumentFilter high_low;
  high_low.args[1] = Proj::High;
  high_low.args[2] = Proj::Low;
  high_low.n_cut = n_cut;
  return r3nres(phi, psi, xi, t, low_mid) + r3nres(phi, psi, xi, t, high_low);
}

SpectralField b3(const SpectralField& phi, const SpectralField& psi, const SpectralField& xi, double t,
                 const ArgumentFilter& filter) {
  Term term = scalar_term(3, filter);
  term.den = {b(0), b(0) | b(1), b(1) | b(2), b(0) | b(2)};
  term.resonance = Resonance::NonResonant;
  return run_scalar("B3", term, {&phi, &psi, &xi}, t, filter.n_cut);
}

SpectralField b4(const SpectralField& phi, const SpectralField& psi, const SpectralField& xi, const SpectralField& eta,
                 double t, EvalStats* stats) {
  for (const auto* a : {&psi, &xi, &eta}) require_same(phi, *a);
  const Mask m01 = b(0) | b(1);
  const Mask m023 = b(0) | b(2) | b(3);
  const Mask m123 = b(1) | b(2) | b(3);
  Term t1 = scalar_term(4, ArgumentFilter::all());
  t1.den = {m01, m023, m123};
  Term t2 = t1;
  t2.num = {static_cast<Mask>(b(2) | b(3))};
  t2.den = {b(0), m01, m023, m123};
  std::array<const SpectralField*, 4> slots{&phi, &psi, &xi, &eta};
  EvalStats local;
  // One pass per piece: the two pieces skip the same tuples, counted once.
  auto out = evaluate_terms(TermList{t1}, slots, t, 1, &local);
  EvalStats second;
  out += evaluate_terms(TermList{t2}, slots, t, 1, &second);
  local.terms += second.terms;
  if (stats) {
    stats->terms += local.terms;
    stats->groups += local.groups + second.groups;
    stats->skipped_denominators += local.skipped_denominators;
  }
  if (tracing()) trace("B4", phi.n_max(), std::nullopt, t, local);
  return out;
}

SpectralPair b1_vec(const SpectralPair& p, double t) {
  require_interaction(p);
  const int n = p.n_max();
  const int m = fft_size(n);
  const PhaseCache cache(t, n);
  const auto gu = to_grid(p.u, cache, m);
  const auto gv = to_grid(p.v, cache, m);
  SpectralField du{p.u.modes()};
  add_b1_from_grid(gu, gv, 1.0, cache, m, du);
  SpectralField dv = du;
  add_b1_from_grid(gu, gu, -1.0, cache, m, du);
  add_b1_from_grid(gv, gv, -1.0, cache, m, dv);
  if (tracing()) trace("B1vec", n, std::nullopt, t, EvalStats{4, 0, 0});
  return SpectralPair(std::move(du), std::move(dv), Gauge::Interaction, t);
}

SpectralPair b1_low_vec(const SpectralPair& p, double t, int n_cut) {
  return b1_vec(project_low(p, n_cut), t);
}

SpectralPair b1_high_vec(const SpectralPair& p, double t, int n_cut) {
  return run_vector("B1Q", compiled().b1q, p, t, n_cut, nullptr, n_cut);
}

SpectralPair b2_vec(const SpectralPair& p, double t) { return run_vector("B2vec", compiled().b2, p, t, 1); }

SpectralPair r3_vec(const SpectralPair& p, double t) { return run_vector("R3vec", compiled().r3, p, t, 1); }

SpectralPair r3_vec_dform(const SpectralPair& p, double t) {
  const auto d = b1_vec(p, t);
  return run_vector("R3vec", compiled().r3_dform, p, t, 1, &d);
}

SpectralPair b3_vec(const SpectralPair& p, double t) { return run_vector("B3vec", compiled().b3, p, t, 1); }

SpectralPair r3res_vec(const SpectralPair& p) { return run_vector("R3resvec", compiled().r3_res, p, 0.0, 1); }

SpectralPair b4_vec(const SpectralPair& p, double t) {
  const auto d = b1_vec(p, t);
  return run_vector("B4vec", compiled().b4_dform, p, t, 1, &d);
}

SpectralPair b4_vec_expanded(const SpectralPair& p, double t) {
  return run_vector("B4vec", compiled().b4, p, t, 1);
}

SpectralPair b2_high_vec(const SpectralPair& p, double t, int n_cut) {
  return run_vector("B2Q", compiled().b2q, p, t, n_cut, nullptr, n_cut);
}

SpectralPair r3_high_vec(const SpectralPair& p, double t, int n_cut) {
  return run_vector("R3Q", compiled().r3q, p, t, n_cut, nullptr, n_cut);
}

SpectralPair r3_high_vec_dform(const SpectralPair& p, double t, int n_cut) {
  const auto d = b1_vec(p, t);
  return run_vector("R3Q", compiled().r3q_dform, p, t, n_cut, &d, n_cut);
}

SpectralPair r3_high_res_vec(const SpectralPair& p, int n_cut) {
  return run_vector("R3Qres", compiled().r3q_res, p, 0.0, n_cut, nullptr, n_cut);
}

SpectralPair r3_high_nres0_vec(const SpectralPair& p, double t, int n_cut) {
  return run_vector("R3Qnres0", compiled().r3q_nres0, p, t, n_cut, nullptr, n_cut);
}

SpectralPair r3_high_nres1_vec(const SpectralPair& p, double t, int n_cut) {
  return run_vector("R3Qnres1", compiled().r3q_nres1, p, t, n_cut, nullptr, n_cut);
}

R3QSplit split_r3q(const SpectralPair& p, double t, int n_cut) {
  return R3QSplit{r3_high_res_vec(p, n_cut), r3_high_nres0_vec(p, t, n_cut), r3_high_nres1_vec(p, t, n_cut)};
}

SpectralPair b30_vec(const SpectralPair& p, double t, int n_cut) {
  return run_vector("B30", compiled().b30, p, t, n_cut, nullptr, n_cut);
}

SpectralPair b40_vec(const SpectralPair& p, double t, int n_cut) {
  const auto d = b1_vec(p, t);
  return run_vector("B40", compiled().b40_dform, p, t, n_cut, &d, n_cut);
}

SpectralPair b40_vec_expanded(const SpectralPair& p, double t, int n_cut) {
  return run_vector("B40", compiled().b40, p, t, n_cut, nullptr, n_cut);
}

}  // namespace mbkdv
