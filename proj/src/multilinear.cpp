#include "mbkdv/multilinear.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "mbkdv/parallel.hpp"
#include "mbkdv/phase.hpp"

namespace mbkdv {

Coefficient Coefficient::make(std::int64_t num, std::int64_t den, int ipow) {
  if (den == 0) throw std::invalid_argument("Coefficient: zero denominator");
  int ip = ((ipow % 4) + 4) % 4;
  if (ip >= 2) {
    num = -num;
    ip -= 2;
  }
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  if (num == 0) {
    den = 1;
    ip = 0;
  }
  return Coefficient{num, den, ip};
}

Coefficient Coefficient::operator*(const Coefficient& o) const {
  return make(num * o.num, den * o.den, ipow + o.ipow);
}

Complex Coefficient::value() const {
  const double r = static_cast<double>(num) / static_cast<double>(den);
  return ipow == 0 ? Complex(r, 0.0) : Complex(0.0, r);
}

std::string Coefficient::str() const {
  std::ostringstream os;
  os << num;
  if (den != 1) os << '/' << den;
  if (ipow == 1) os << "·i";
  return os.str();
}

namespace {

const char* proj_name(Proj p) {
  switch (p) {
    case Proj::All: return "";
    case Proj::Low: return "P";
    case Proj::High: return "Q";
  }
  return "?";
}

const char* band_name(Band b) {
  switch (b) {
    case Band::NonZero: return "≠0";
    case Band::Galerkin: return "G";
    case Band::Low: return "P";
    case Band::High: return "Q";
    case Band::HighGalerkin: return "QG";
  }
  return "?";
}

std::string mask_str(Mask m) {
  std::string s = "(";
  bool first = true;
  for (int j = 0; j < 8; ++j) {
    if (m & (1u << j)) {
      if (!first) s += '+';
      s += 'k' + std::to_string(j + 1);
      first = false;
    }
  }
  return s + ")";
}

}  // namespace

std::string Term::str() const {
  std::ostringstream os;
  os << coeff.str() << " ";
  for (const auto& f : factors) os << proj_name(f.proj) << "f" << f.slot << ' ';
  if (!num.empty()) {
    os << "num";
    for (auto m : num) os << mask_str(m);
    os << ' ';
  }
  if (!den.empty()) {
    os << "den";
    for (auto m : den) os << mask_str(m);
    os << ' ';
  }
  for (const auto& c : constraints) os << band_name(c.band) << mask_str(c.mask) << ' ';
  if (resonance == Resonance::Resonant) os << "res";
  if (resonance == Resonance::NonResonant) os << "nres";
  return os.str();
}

bool in_band(std::int64_t s, Band band, int n_max, int n_cut) {
  const std::int64_t a = s < 0 ? -s : s;
  switch (band) {
    case Band::NonZero: return a != 0;
    case Band::Galerkin: return a >= 1 && a <= n_max;
    case Band::Low: return a >= 1 && a <= n_cut;
    case Band::High: return a > n_cut;
    case Band::HighGalerkin: return a > n_cut && a <= n_max;
  }
  return false;
}

bool in_proj(int k, Proj p, int n_cut) {
  switch (p) {
    case Proj::All: return true;
    case Proj::Low: return std::abs(k) <= n_cut;
    case Proj::High: return std::abs(k) > n_cut;
  }
  return false;
}

namespace {

// Per group, monomials are split into a head (coefficient and slot of position 0)
// and a shared tail (output and slots of the remaining positions), so the
// position-0 contraction is done once per k1.
struct Tail {
  int output;
  std::array<int, 4> slots;
};
struct Head {
  int tail;
  int slot0;
  Complex coeff;
};
struct Plan {
  const CompiledTerms::Group* group;
  std::vector<Tail> tails;
  std::vector<Head> heads;
};

Plan make_plan(const CompiledTerms::Group& g) {
  Plan plan{&g, {}, {}};
  for (const auto& m : g.monomials) {
    Tail t{m.output, {0, 0, 0, 0}};
    for (int p = 1; p < g.degree; ++p) t.slots[static_cast<std::size_t>(p)] = m.slots[static_cast<std::size_t>(p)];
    auto it = std::find_if(plan.tails.begin(), plan.tails.end(),
                           [&](const Tail& o) { return o.output == t.output && o.slots == t.slots; });
    int idx = static_cast<int>(it - plan.tails.begin());
    if (it == plan.tails.end()) plan.tails.push_back(t);
    plan.heads.push_back(Head{idx, m.slots[0], m.coeff});
  }
  return plan;
}

struct Workspace {
  int n = 0;
  int n_cut = 0;
  // Index k + n of every slot array.
  std::vector<std::vector<Complex>> ungauged;  // f_k · e^{-ik³t}
  std::vector<std::vector<Complex>> raw;
  const Complex* arr(bool gauged, int slot) const {
    return (gauged ? ungauged : raw)[static_cast<std::size_t>(slot)].data() + n;
  }
};

template <int D>
struct TupleCheck {
  static bool admissible(const CompiledTerms::Group& g, const std::array<int, 4>& ks, int n, int n_cut,
                         double& weight, bool& vanishing) {
    vanishing = false;
    auto sum = [&](Mask m) {
      std::int64_t s = 0;
      for (int j = 0; j < D; ++j)
        if (m & (1u << j)) s += ks[static_cast<std::size_t>(j)];
      return s;
    };
    for (const auto& c : g.constraints)
      if (!in_band(sum(c.mask), c.band, n, n_cut)) return false;
    if constexpr (D == 3) {
      if (g.resonance != Resonance::Any) {
        const std::int64_t r = static_cast<std::int64_t>(ks[0] + ks[1]) * (ks[1] + ks[2]) * (ks[0] + ks[2]);
        if ((r == 0) != (g.resonance == Resonance::Resonant)) return false;
      }
    }
    std::int64_t num = 1;
    std::int64_t den = 1;
    for (auto m : g.num) num *= sum(m);
    for (auto m : g.den) den *= sum(m);
    if (den == 0) {
      vanishing = true;
      return false;
    }
    weight = static_cast<double>(num) / static_cast<double>(den);
    return true;
  }
};

// Accumulates one group into acc[output] for output mode k.
template <int D>
void accumulate_group(const Plan& plan, const Workspace& ws, int k, bool gauged, std::vector<Complex>& acc,
                      std::int64_t& skipped, std::vector<Complex>& pre, std::vector<Complex>& val) {
  const auto& g = *plan.group;
  const int n = ws.n;
  const int nc = ws.n_cut;
  pre.assign(plan.tails.size(), Complex{});
  val.assign(acc.size(), Complex{});

  auto range = [&](Proj p, int& lo, int& hi) {
    // magnitudes [lo, hi]
    switch (p) {
      case Proj::All: lo = 1; hi = n; break;
      case Proj::Low: lo = 1; hi = std::min(nc, n); break;
      case Proj::High: lo = nc + 1; hi = n; break;
    }
  };
  std::array<int, 4> lo{}, hi{};
  for (int p = 0; p < D; ++p) range(g.projs[static_cast<std::size_t>(p)], lo[static_cast<std::size_t>(p)], hi[static_cast<std::size_t>(p)]);
  for (int p = 0; p < D; ++p)
    if (lo[static_cast<std::size_t>(p)] > hi[static_cast<std::size_t>(p)]) return;

  auto visit_tuple = [&](const std::array<int, 4>& ks) {
    double w = 0.0;
    bool vanishing = false;
    if (!TupleCheck<D>::admissible(g, ks, n, nc, w, vanishing)) {
      if (vanishing) ++skipped;
      return;
    }
    std::fill(val.begin(), val.end(), Complex{});
    for (std::size_t ti = 0; ti < plan.tails.size(); ++ti) {
      const auto& t = plan.tails[ti];
      Complex prod = pre[ti];
      for (int p = 1; p < D; ++p)
        prod *= ws.arr(gauged, t.slots[static_cast<std::size_t>(p)])[ks[static_cast<std::size_t>(p)]];
      val[static_cast<std::size_t>(t.output)] += prod;
    }
    for (std::size_t o = 0; o < acc.size(); ++o) acc[o] += w * val[o];
  };

  auto last_ok = [&](int kl) {
    const int a = std::abs(kl);
    return a >= lo[D - 1] && a <= hi[D - 1];
  };

  auto contract_head = [&](int k1) {
    std::fill(pre.begin(), pre.end(), Complex{});
    for (const auto& h : plan.heads) pre[static_cast<std::size_t>(h.tail)] += h.coeff * ws.arr(gauged, h.slot0)[k1];
  };

  // Ascending signed range of position p.
  auto for_each_k = [&](int p, auto&& f) {
    const int l = lo[static_cast<std::size_t>(p)];
    const int h = hi[static_cast<std::size_t>(p)];
    for (int kk = -h; kk <= -l; ++kk) f(kk);
    for (int kk = l; kk <= h; ++kk) f(kk);
  };

  for_each_k(0, [&](int k1) {
    contract_head(k1);
    if constexpr (D == 2) {
      const int k2 = k - k1;
      if (last_ok(k2)) visit_tuple({k1, k2, 0, 0});
    } else if constexpr (D == 3) {
      for_each_k(1, [&](int k2) {
        const int k3 = k - k1 - k2;
        if (last_ok(k3)) visit_tuple({k1, k2, k3, 0});
      });
    } else {
      for_each_k(1, [&](int k2) {
        for_each_k(2, [&](int k3) {
          const int k4 = k - k1 - k2 - k3;
          if (last_ok(k4)) visit_tuple({k1, k2, k3, k4});
        });
      });
    }
  });
}

// Resonant triples with sum k, each exactly once: (j,−j,k), then (k,j,−j) for
// j ≠ −k, then (j,k,−j) for j ≠ ±k; ascending j within each family.
void accumulate_resonant(const Plan& plan, const Workspace& ws, int k, std::vector<Complex>& acc,
                         std::int64_t& skipped) {
  const auto& g = *plan.group;
  const int n = ws.n;
  auto visit = [&](int k1, int k2, int k3) {
    const std::array<int, 4> ks{k1, k2, k3, 0};
    for (int p = 0; p < 3; ++p) {
      const int kp = ks[static_cast<std::size_t>(p)];
      if (kp == 0 || std::abs(kp) > n || !in_proj(kp, g.projs[static_cast<std::size_t>(p)], ws.n_cut)) return;
    }
    double w = 0.0;
    bool vanishing = false;
    if (!TupleCheck<3>::admissible(g, ks, n, ws.n_cut, w, vanishing)) {
      if (vanishing) ++skipped;
      return;
    }
    for (const auto& h : plan.heads) {
      const auto& t = plan.tails[static_cast<std::size_t>(h.tail)];
      acc[static_cast<std::size_t>(t.output)] +=
          w * h.coeff * ws.arr(false, h.slot0)[k1] * ws.arr(false, t.slots[1])[k2] * ws.arr(false, t.slots[2])[k3];
    }
  };
  for (int j = -n; j <= n; ++j) visit(j, -j, k);
  for (int j = -n; j <= n; ++j)
    if (j != -k) visit(k, j, -j);
  for (int j = -n; j <= n; ++j)
    if (j != k && j != -k) visit(j, k, -j);
}

void validate(const Term& t) {
  const int d = t.degree();
  if (d < 2 || d > 4) throw std::invalid_argument("term degree must be 2, 3 or 4: " + t.str());
  const Mask full = static_cast<Mask>((1u << d) - 1);
  for (const auto& f : t.factors)
    if (f.slot < 0) throw std::invalid_argument("negative slot in term " + t.str());
  auto check = [&](Mask m) {
    if (m == 0 || (m & ~full)) throw std::invalid_argument("mask outside term degree: " + t.str());
  };
  for (auto m : t.num) check(m);
  for (auto m : t.den) check(m);
  for (const auto& c : t.constraints) check(c.mask);
  if (t.resonance != Resonance::Any && d != 3) throw std::invalid_argument("resonance tag needs degree 3");
}

}  // namespace

CompiledTerms::CompiledTerms(std::span<const TermList> outputs) : outputs_(static_cast<int>(outputs.size())) {
  for (int o = 0; o < outputs_; ++o) {
    for (const Term& term : outputs[static_cast<std::size_t>(o)]) {
      validate(term);
      ++term_count_;
      Group key;
      key.degree = term.degree();
      for (const auto& f : term.factors) key.projs.push_back(f.proj);
      key.num = term.num;
      key.den = term.den;
      key.constraints = term.constraints;
      std::sort(key.num.begin(), key.num.end());
      std::sort(key.den.begin(), key.den.end());
      std::sort(key.constraints.begin(), key.constraints.end(), [](const SumConstraint& a, const SumConstraint& b) {
        return std::pair(a.mask, a.band) < std::pair(b.mask, b.band);
      });
      key.resonance = term.resonance;
      auto it = std::find_if(groups_.begin(), groups_.end(), [&](const Group& g) {
        return g.degree == key.degree && g.projs == key.projs && g.num == key.num && g.den == key.den &&
               g.constraints == key.constraints && g.resonance == key.resonance;
      });
      if (it == groups_.end()) {
        groups_.push_back(std::move(key));
        it = groups_.end() - 1;
      }
      std::vector<int> slots;
      for (const auto& f : term.factors) slots.push_back(f.slot);
      auto m = std::find_if(it->monomials.begin(), it->monomials.end(),
                            [&](const Monomial& x) { return x.output == o && x.slots == slots; });
      if (m == it->monomials.end()) {
        it->monomials.push_back(Monomial{o, term.coeff.value(), std::move(slots)});
      } else {
        m->coeff += term.coeff.value();
      }
    }
  }
  for (auto& g : groups_) {
    std::erase_if(g.monomials, [](const Monomial& m) { return m.coeff == Complex{}; });
  }
  std::erase_if(groups_, [](const Group& g) { return g.monomials.empty(); });
}

std::vector<SpectralField> CompiledTerms::evaluate(std::span<const SpectralField* const> slots, double t, int n_cut,
                                                   EvalStats* stats) const {
  if (n_cut < 1) throw std::invalid_argument("evaluate: n_cut must be >= 1");
  const SpectralField* ref = nullptr;
  for (const auto* f : slots) {
    if (!f) continue;
    if (ref && f->modes() != ref->modes()) throw std::invalid_argument("evaluate: mismatched mode sets");
    if (!ref) ref = f;
  }
  if (!ref) throw std::invalid_argument("evaluate: no argument fields bound");
  const int n = ref->n_max();

  Workspace ws;
  ws.n = n;
  ws.n_cut = n_cut;
  ws.ungauged.resize(slots.size());
  ws.raw.resize(slots.size());
  const PhaseCache cache(t, n);
  std::vector<char> used(slots.size(), 0);
  for (const auto& g : groups_)
    for (const auto& m : g.monomials)
      for (int s : m.slots) {
        if (s >= static_cast<int>(slots.size()) || !slots[static_cast<std::size_t>(s)])
          throw std::invalid_argument("evaluate: term uses an unbound slot");
        used[static_cast<std::size_t>(s)] = 1;
      }
  for (std::size_t s = 0; s < slots.size(); ++s) {
    if (!used[s]) continue;
    const auto data = slots[s]->data();
    ws.raw[s].assign(data.begin(), data.end());
    ws.ungauged[s].resize(data.size());
    for (int k = -n; k <= n; ++k)
      ws.ungauged[s][static_cast<std::size_t>(k + n)] = data[static_cast<std::size_t>(k + n)] * std::conj(cache.cube_phase(k));
  }

  std::vector<Plan> plans;
  for (const auto& g : groups_) plans.push_back(make_plan(g));

  std::vector<SpectralField> out(static_cast<std::size_t>(outputs_), SpectralField(ref->modes()));
  std::vector<std::int64_t> skipped(2 * static_cast<std::size_t>(n) + 1, 0);
  parallel_for(-n, n + 1, [&](int k) {
    if (k == 0) return;
    std::vector<Complex> osc(static_cast<std::size_t>(outputs_)), flat(static_cast<std::size_t>(outputs_));
    std::vector<Complex> pre, val;
    std::int64_t sk = 0;
    for (const auto& plan : plans) {
      const auto& g = *plan.group;
      if (g.resonance == Resonance::Resonant) {
        accumulate_resonant(plan, ws, k, flat, sk);
        continue;
      }
      switch (g.degree) {
        case 2: accumulate_group<2>(plan, ws, k, true, osc, sk, pre, val); break;
        case 3: accumulate_group<3>(plan, ws, k, true, osc, sk, pre, val); break;
        default: accumulate_group<4>(plan, ws, k, true, osc, sk, pre, val); break;
      }
    }
    const Complex gk = cache.cube_phase(k);
    for (int o = 0; o < outputs_; ++o)
      out[static_cast<std::size_t>(o)][k] = gk * osc[static_cast<std::size_t>(o)] + flat[static_cast<std::size_t>(o)];
    skipped[static_cast<std::size_t>(k + n)] = sk;
  });

  if (stats) {
    stats->terms += static_cast<std::int64_t>(term_count_);
    stats->groups += static_cast<std::int64_t>(groups_.size());
    stats->skipped_denominators += std::accumulate(skipped.begin(), skipped.end(), std::int64_t{0});
  }
  return out;
}

SpectralField evaluate_terms(const TermList& terms, std::span<const SpectralField* const> slots, double t, int n_cut,
                             EvalStats* stats) {
  CompiledTerms compiled(terms);
  if (compiled.group_count() == 0) {
    for (const auto* f : slots)
      if (f) return SpectralField(f->modes());
    throw std::invalid_argument("evaluate_terms: no argument fields bound");
  }
  return compiled.evaluate(slots, t, n_cut, stats).front();
}

}  // namespace mbkdv
