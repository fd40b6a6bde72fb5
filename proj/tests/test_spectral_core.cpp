#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "mbkdv/field_io.hpp"
#include "mbkdv/phase.hpp"
#include "mbkdv/rng.hpp"
#include "mbkdv/spectral_field.hpp"

using namespace mbkdv;

namespace {

using Entries = std::vector<std::pair<int, Complex>>;

SpectralField field(int n, const Entries& e) { return make_field(n, e); }

// Physical-space samples of a field on a uniform grid, for quadrature checks.
std::vector<double> samples(const SpectralField& f, int m) {
  std::vector<double> x(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    const double xj = 2.0 * M_PI * j / m;
    Complex acc{};
    for (int k = -f.n_max(); k <= f.n_max(); ++k)
      if (k != 0) acc += f[k] * std::exp(Complex(0.0, k * xj));
    x[static_cast<std::size_t>(j)] = acc.real();
  }
  return x;
}

}  // namespace

TEST(ModeSet, ExcludesZeroAndBounds) {
  const ModeSet m(4);
  EXPECT_FALSE(m.contains(0));
  EXPECT_TRUE(m.contains(-4));
  EXPECT_FALSE(m.contains(5));
  EXPECT_EQ(m.size(), 8u);
  EXPECT_THROW(ModeSet(0), std::invalid_argument);
}

TEST(MakeField, FillsConjugatesAndValidates) {
  const auto f = field(3, {{2, {1.0, 2.0}}});
  EXPECT_EQ(f[2], Complex(1.0, 2.0));
  EXPECT_EQ(f[-2], Complex(1.0, -2.0));
  EXPECT_EQ(f[0], Complex(0.0, 0.0));
  EXPECT_TRUE(f.is_hermitian());

  const auto both = field(3, {{1, {1.0, 1.0}}, {-1, {1.0, -1.0}}});
  EXPECT_EQ(both[-1], Complex(1.0, -1.0));

  EXPECT_THROW(field(3, {{0, {1.0, 0.0}}}), std::invalid_argument);
  EXPECT_THROW(field(3, {{4, {1.0, 0.0}}}), std::invalid_argument);
  EXPECT_THROW(field(3, {{1, {1.0, 1.0}}, {-1, {1.0, 1.0}}}), std::invalid_argument);
  EXPECT_THROW(field(3, {{1, {1.0, 0.0}}, {1, {1.0, 0.0}}}), std::invalid_argument);
  EXPECT_THROW(field(3, {{1, {NAN, 0.0}}}), std::invalid_argument);
}

TEST(SetMode, RejectsOutsideModes) {
  SpectralField f(3);
  f.set_mode(-2, {0.0, 1.0});
  EXPECT_EQ(f[2], Complex(0.0, -1.0));
  EXPECT_THROW(f.set_mode(0, {1.0, 0.0}), std::out_of_range);
  EXPECT_THROW(f.set_mode(4, {1.0, 0.0}), std::out_of_range);
}

TEST(Arithmetic, RejectsMismatchedModeSets) {
  SpectralField a(3), b(4);
  EXPECT_THROW(a += b, std::invalid_argument);
  EXPECT_THROW(inner_product(a, b), std::invalid_argument);
}

TEST(Norms, SobolevWeights) {
  const auto f = field(4, {{1, {1.0, 0.0}}, {3, {0.0, 2.0}}});
  // 2·(1 + 4) for s = 0; 2·(1 + 9·4) for s = 1.
  EXPECT_NEAR(sobolev_norm(f, SobolevIndex(0.0)), std::sqrt(10.0), 1e-15);
  EXPECT_NEAR(sobolev_norm(f, SobolevIndex(1.0)), std::sqrt(74.0), 1e-14);
  EXPECT_NEAR(sobolev_norm(f, SobolevIndex(-1.0)), std::sqrt(2.0 + 8.0 / 9.0), 1e-15);
  const SpectralPair p(f, 2.0 * f);
  EXPECT_NEAR(sobolev_norm(p, SobolevIndex(0.0)), std::sqrt(50.0), 1e-14);
}

TEST(Norms, L2NormalizationFactor) {
  // ‖f‖_{Ḣ⁰} = ‖f‖_{L²}/√(2π); the trapezoid rule is exact for trigonometric polynomials.
  const auto f = random_field(3, 6, SobolevIndex(0.0), 1.0);
  const int m = 64;
  const auto x = samples(f, m);
  double l2 = 0.0;
  for (double v : x) l2 += v * v;
  l2 = std::sqrt(l2 * 2.0 * M_PI / m);
  EXPECT_NEAR(sobolev_norm(f, SobolevIndex(0.0)), l2 / std::sqrt(2.0 * M_PI), 1e-13);
}

TEST(Projections, SplitIsExact) {
  const auto f = random_field(1, 10, SobolevIndex(0.5), 1.0);
  const auto lo = project_low(f, 4), hi = project_high(f, 4);
  EXPECT_EQ(lo + hi, f);
  EXPECT_EQ(lo[5], Complex(0.0, 0.0));
  EXPECT_EQ(hi[4], Complex(0.0, 0.0));
  EXPECT_EQ(project_low(f, 10), f);
  EXPECT_THROW(project_low(f, 0), std::invalid_argument);
}

TEST(Resize, PadsAndTruncates) {
  const auto f = random_field(2, 5, SobolevIndex(0.0), 1.0);
  const auto big = resized(f, 9);
  EXPECT_EQ(big[5], f[5]);
  EXPECT_EQ(big[7], Complex(0.0, 0.0));
  EXPECT_EQ(resized(big, 5), f);
  EXPECT_EQ(resized(f, 3), resized(project_low(f, 3), 3));
}

TEST(Gauge, RoundTripAndModulus) {
  const SpectralPair p(random_field(4, 8, SobolevIndex(0.0), 1.0), random_field(5, 8, SobolevIndex(0.0), 1.0));
  const double t = 0.73;
  const auto phys = gauge(p, t, Gauge::Physical);
  EXPECT_EQ(phys.gauge, Gauge::Physical);
  EXPECT_NEAR(std::abs(phys.u[3]), std::abs(p.u[3]), 1e-15);
  EXPECT_NEAR(std::abs(phys.u[3] - std::exp(Complex(0.0, -27.0 * t)) * p.u[3]), 0.0, 1e-14);
  const auto back = gauge(phys, t, Gauge::Interaction);
  EXPECT_LT(sobolev_norm(back - p, SobolevIndex(0.0)), 1e-14);
  EXPECT_TRUE(phys.u.is_hermitian(1e-15));
  const auto same = gauge(p, t, Gauge::Interaction);
  EXPECT_EQ(same.u, p.u);
}

TEST(Energy, MatchesDefinition) {
  const auto u = field(3, {{1, {1.0, 0.0}}});
  const auto v = field(3, {{2, {0.0, 1.0}}});
  // 2·2 + 2·2 + (2 + 2).
  EXPECT_NEAR(energy_functional(SpectralPair(u, v)), 12.0, 1e-14);
  EXPECT_NEAR(energy_functional(SpectralPair(u, u)), 8.0, 1e-14);
}

TEST(Hamiltonian, MatchesQuadrature) {
  const auto u = random_field(7, 4, SobolevIndex(0.0), 1.0);
  const auto v = random_field(8, 4, SobolevIndex(0.0), 1.0);
  const SpectralPair p(u, v, Gauge::Physical);
  const int m = 64;
  const auto U = samples(u, m), V = samples(v, m);
  SpectralField ux(4), vx(4);
  for (int k = -4; k <= 4; ++k) {
    ux[k] = Complex(0.0, k) * u[k];
    vx[k] = Complex(0.0, k) * v[k];
  }
  const auto Ux = samples(ux, m), Vx = samples(vx, m);
  double h = 0.0;
  for (std::size_t j = 0; j < U.size(); ++j) {
    const double a = (U[j] - V[j]) / std::sqrt(2.0), b = (U[j] + V[j]) / 2.0;
    const double ax = (Ux[j] - Vx[j]) / std::sqrt(2.0), bx = (Ux[j] + Vx[j]) / 2.0;
    h += 0.5 * (ax * ax + bx * bx + a * a * b);
  }
  h *= 2.0 * M_PI / m;
  EXPECT_NEAR(hamiltonian(p), h, 1e-12 * std::abs(h));
  EXPECT_THROW(hamiltonian(SpectralPair(u, v, Gauge::Interaction)), std::invalid_argument);
}

TEST(Random, DeterministicAndShaped) {
  const auto a = random_field(42, 16, SobolevIndex(1.0), 0.5);
  EXPECT_EQ(a, random_field(42, 16, SobolevIndex(1.0), 0.5));
  EXPECT_NE(a, random_field(43, 16, SobolevIndex(1.0), 0.5));
  EXPECT_TRUE(a.is_hermitian());
  for (int k = 1; k <= 16; ++k) EXPECT_NEAR(std::abs(a[k]), 0.5 * std::pow(k, -1.6), 1e-15);
  const auto b = uniform_random_field(42, 16, 2.0);
  EXPECT_TRUE(b.is_hermitian());
  EXPECT_LE(b.max_abs(), 2.0);
  EXPECT_NE(sub_seed(1, 0), sub_seed(1, 1));
  EXPECT_EQ(sub_seed(1, 5), sub_seed(1, 5));
}

TEST(FieldIo, JsonRoundTripIsBitExact) {
  const SpectralPair p(random_field(9, 12, SobolevIndex(0.3), 0.7), uniform_random_field(10, 12, 1.3));
  const auto q = pair_from_json(nlohmann::json::parse(pair_to_json(p).dump()));
  EXPECT_EQ(q.u, p.u);
  EXPECT_EQ(q.v, p.v);
  EXPECT_EQ(q.gauge, p.gauge);
  const auto phys = gauge(p, 0.1, Gauge::Physical);
  const auto r = pair_from_json(nlohmann::json::parse(pair_to_json(phys).dump()));
  EXPECT_EQ(r.gauge, Gauge::Physical);
  EXPECT_EQ(r.u, phys.u);
  EXPECT_EQ(std::stod(format_double(0.1)), 0.1);
}

TEST(FieldIo, RejectsMalformedJson) {
  EXPECT_THROW(field_from_json(nlohmann::json::object()), std::invalid_argument);
  EXPECT_THROW(field_from_json(nlohmann::json{{"n_max", 3}, {"modes", {{0, 1.0, 0.0}}}}), std::invalid_argument);
  EXPECT_THROW(field_from_json(nlohmann::json{{"n_max", 3}, {"modes", {{1, 1.0}}}}), std::invalid_argument);
}

TEST(Phase, ExactIntegerPhases) {
  EXPECT_EQ(cube(-3), -27);
  EXPECT_EQ(phase4(1, 1, 1, 1), 64 - 4);
  EXPECT_EQ(phase4(5, -5, 3, -3), 0);
  // Large modes stay exact in 64-bit arithmetic.
  const std::int64_t k = 1 << 16;
  EXPECT_EQ(phase4(k, k, k, k), 60 * k * k * k);
}

TEST(Phase, ReductionKeepsAccuracyForLargeProducts) {
  // Reference m·t mod 2π from 50-digit arithmetic; t = 0.375 is exact in binary.
  const std::int64_t m = 123456789012LL;
  EXPECT_NEAR(reduce_phase(m, 0.375), 0.42330462311398407566, 2e-16);
  EXPECT_NEAR(std::abs(unit_phase(m, 0.375)), 1.0, 1e-15);
}
