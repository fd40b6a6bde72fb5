#include "mbkdv/expansion.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>

namespace mbkdv::expansion {

namespace {

constexpr Mask bit(int j) { return static_cast<Mask>(1u << j); }

Term b1_term(int sign, int x, int y) {
  Term t;
  t.coeff = Coefficient::make(sign, 2, 1);
  t.factors = {Factor{x, Proj::All}, Factor{y, Proj::All}};
  t.num = {static_cast<Mask>(bit(0) | bit(1))};
  return t;
}

// Splits position j into two adjacent positions j, j+1.
Mask split_mask(Mask m, int j) {
  const Mask low = static_cast<Mask>(m & (bit(j) - 1));
  const bool hit = (m >> j) & 1u;
  const Mask high = static_cast<Mask>(m >> (j + 1));
  return static_cast<Mask>(low | (hit ? (bit(j) | bit(j + 1)) : 0) | (high << (j + 2)));
}

void cancel(Term& t) {
  for (auto it = t.num.begin(); it != t.num.end();) {
    auto d = std::find(t.den.begin(), t.den.end(), *it);
    if (d != t.den.end()) {
      t.den.erase(d);
      it = t.num.erase(it);
    } else {
      ++it;
    }
  }
}

Band band_of(Proj p) {
  switch (p) {
    case Proj::All: return Band::Galerkin;
    case Proj::Low: return Band::Low;
    case Proj::High: return Band::HighGalerkin;
  }
  return Band::Galerkin;
}

std::optional<Proj> intersect(Proj a, Proj b) {
  if (a == Proj::All) return b;
  if (b == Proj::All || a == b) return a;
  return std::nullopt;
}

std::vector<Mask> phase_masks(int degree) {
  if (degree == 2) return {bit(0) | bit(1), bit(0), bit(1)};
  return {static_cast<Mask>(bit(0) | bit(1)), static_cast<Mask>(bit(1) | bit(2)), static_cast<Mask>(bit(0) | bit(2))};
}

int component_of(int slot) {
  if (slot == kU) return 0;
  if (slot == kV) return 1;
  throw std::invalid_argument("differentiate_by_parts: factor is already a derivative");
}

VectorTerms map_terms(const VectorTerms& in, auto&& f) {
  VectorTerms out;
  for (int c = 0; c < 2; ++c)
    for (const auto& t : in[static_cast<std::size_t>(c)]) f(t, out[static_cast<std::size_t>(c)]);
  return out;
}

}  // namespace

VectorTerms gauged_rhs() {
  return {TermList{b1_term(+1, kU, kV), b1_term(-1, kU, kU)}, TermList{b1_term(+1, kU, kV), b1_term(-1, kV, kV)}};
}

Term permuted(const Term& term, std::span<const int> perm) {
  const int d = term.degree();
  if (static_cast<int>(perm.size()) != d) throw std::invalid_argument("permuted: size mismatch");
  auto remap = [&](Mask m) {
    Mask r = 0;
    for (int i = 0; i < d; ++i)
      if (m & bit(perm[static_cast<std::size_t>(i)])) r |= bit(i);
    return r;
  };
  Term out = term;
  for (int i = 0; i < d; ++i) out.factors[static_cast<std::size_t>(i)] = term.factors[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
  for (auto& m : out.num) m = remap(m);
  for (auto& m : out.den) m = remap(m);
  for (auto& c : out.constraints) c.mask = remap(c.mask);
  return out;
}

Term canonical(Term term) {
  if (term.degree() != 3) return term;
  int single = -1;
  for (auto m : term.den)
    for (int j = 0; j < 3; ++j)
      if (m == bit(j)) single = j;
  if (single <= 0) return term;
  std::vector<int> perm{single};
  for (int j = 0; j < 3; ++j)
    if (j != single) perm.push_back(j);
  return permuted(term, perm);
}

DbpResult differentiate_by_parts(const Term& term, Substitution mode) {
  const int d = term.degree();
  if (d != 2 && d != 3) throw std::invalid_argument("differentiate_by_parts: degree must be 2 or 3");
  if (d == 3 && term.resonance != Resonance::NonResonant)
    throw std::invalid_argument("differentiate_by_parts: trilinear terms must be non-resonant");

  // Φ = 3·Π(phase masks); 1/(iΦ) = (1/(3i)) / Π.
  Term base = term;
  for (auto m : phase_masks(d)) base.den.push_back(m);
  cancel(base);

  DbpResult out;
  Term boundary = base;
  boundary.coeff = term.coeff * Coefficient::make(1, 3, -1);
  out.boundary.push_back(canonical(boundary));

  const Coefficient rem_coeff = term.coeff * Coefficient::make(-1, 3, -1);
  const VectorTerms rhs = gauged_rhs();
  for (int j = 0; j < d; ++j) {
    const Factor fj = base.factors[static_cast<std::size_t>(j)];
    const int comp = component_of(fj.slot);
    if (mode == Substitution::Derivative) {
      Term r = base;
      r.coeff = rem_coeff;
      r.factors[static_cast<std::size_t>(j)].slot = comp == 0 ? kDU : kDV;
      out.remainder.push_back(canonical(r));
      continue;
    }
    for (const Term& s : rhs[static_cast<std::size_t>(comp)]) {
      Term r;
      r.coeff = rem_coeff * s.coeff;
      for (int p = 0; p < d; ++p) {
        if (p == j) {
          r.factors.push_back(s.factors[0]);
          r.factors.push_back(s.factors[1]);
        } else {
          r.factors.push_back(base.factors[static_cast<std::size_t>(p)]);
        }
      }
      const Mask pair = static_cast<Mask>(bit(j) | bit(j + 1));
      for (auto m : base.num) r.num.push_back(split_mask(m, j));
      r.num.push_back(pair);  // the k of the substituted B1
      for (auto m : base.den) r.den.push_back(split_mask(m, j));
      for (auto c : base.constraints) r.constraints.push_back({split_mask(c.mask, j), c.band});
      r.constraints.push_back({pair, band_of(fj.proj)});
      if (d == 3) {
        for (auto m : phase_masks(3)) r.constraints.push_back({split_mask(m, j), Band::NonZero});
        r.resonance = Resonance::Any;
      }
      cancel(r);
      out.remainder.push_back(std::move(r));
    }
  }
  return out;
}

namespace {

Forms build() {
  Forms f;
  f.rhs = gauged_rhs();

  for (int c = 0; c < 2; ++c) {
    for (const auto& t : f.rhs[static_cast<std::size_t>(c)]) {
      auto ex = differentiate_by_parts(t, Substitution::Expand);
      auto df = differentiate_by_parts(t, Substitution::Derivative);
      f.b2[static_cast<std::size_t>(c)].push_back(ex.boundary.front());
      for (auto& r : ex.remainder) f.r3[static_cast<std::size_t>(c)].push_back(canonical(r));
      for (auto& r : df.remainder) f.r3_dform[static_cast<std::size_t>(c)].push_back(r);
    }
  }

  f.r3_res = map_terms(f.r3, [](const Term& t, TermList& out) {
    Term r = t;
    r.resonance = Resonance::Resonant;
    out.push_back(r);
  });
  f.r3_nres = map_terms(f.r3, [](const Term& t, TermList& out) {
    Term r = t;
    r.resonance = Resonance::NonResonant;
    out.push_back(r);
  });
  for (int c = 0; c < 2; ++c) {
    for (const auto& t : f.r3_nres[static_cast<std::size_t>(c)]) {
      auto ex = differentiate_by_parts(t, Substitution::Expand);
      auto df = differentiate_by_parts(t, Substitution::Derivative);
      for (auto& b : ex.boundary) f.b3[static_cast<std::size_t>(c)].push_back(b);
      for (auto& r : ex.remainder) f.b4[static_cast<std::size_t>(c)].push_back(r);
      for (auto& r : df.remainder) f.b4_dform[static_cast<std::size_t>(c)].push_back(r);
    }
  }

  // High/low split of each B1 product: B1(a,b) = B1(Pa,Pb) + B1(Pa,Qb) + B1(Qa,b).
  f.b1p = map_terms(f.rhs, [](const Term& t, TermList& out) {
    Term r = t;
    r.factors[0].proj = Proj::Low;
    r.factors[1].proj = Proj::Low;
    out.push_back(r);
  });
  f.b1q = map_terms(f.rhs, [](const Term& t, TermList& out) {
    Term a = t;
    a.factors[0].proj = Proj::Low;
    a.factors[1].proj = Proj::High;
    Term b = t;
    b.factors[0].proj = Proj::High;
    out.push_back(a);
    out.push_back(b);
  });
  for (int c = 0; c < 2; ++c) {
    for (const auto& t : f.b1q[static_cast<std::size_t>(c)]) {
      auto ex = differentiate_by_parts(t, Substitution::Expand);
      auto df = differentiate_by_parts(t, Substitution::Derivative);
      f.b2q[static_cast<std::size_t>(c)].push_back(ex.boundary.front());
      for (auto& r : ex.remainder) f.r3q[static_cast<std::size_t>(c)].push_back(canonical(r));
      for (auto& r : df.remainder) f.r3q_dform[static_cast<std::size_t>(c)].push_back(r);
    }
  }

  auto with_projs = [](const Term& t, Proj p1, Proj p2, TermList& out) {
    auto a = intersect(t.factors[1].proj, p1);
    auto b = intersect(t.factors[2].proj, p2);
    if (!a || !b) return;
    Term r = t;
    r.resonance = Resonance::NonResonant;
    r.factors[1].proj = *a;
    r.factors[2].proj = *b;
    out.push_back(r);
  };
  f.r3q_res = map_terms(f.r3q, [](const Term& t, TermList& out) {
    Term r = t;
    r.resonance = Resonance::Resonant;
    out.push_back(r);
  });
  f.r3q_nres0 = map_terms(f.r3q, [&](const Term& t, TermList& out) { with_projs(t, Proj::High, Proj::High, out); });
  f.r3q_nres1 = map_terms(f.r3q, [&](const Term& t, TermList& out) {
    with_projs(t, Proj::Low, Proj::All, out);
    with_projs(t, Proj::High, Proj::Low, out);
  });

  for (int c = 0; c < 2; ++c) {
    for (const auto& t : f.r3q_nres0[static_cast<std::size_t>(c)]) {
      auto ex = differentiate_by_parts(t, Substitution::Expand);
      auto df = differentiate_by_parts(t, Substitution::Derivative);
      for (auto& b : ex.boundary) f.b30[static_cast<std::size_t>(c)].push_back(b);
      for (auto& r : ex.remainder) f.b40[static_cast<std::size_t>(c)].push_back(r);
      for (auto& r : df.remainder) f.b40_dform[static_cast<std::size_t>(c)].push_back(r);
    }
  }
  return f;
}

}  // namespace

const Forms& forms() {
  static const Forms f = build();
  return f;
}

}  // namespace mbkdv::expansion
