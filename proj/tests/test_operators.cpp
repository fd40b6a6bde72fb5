#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "mbkdv/expansion.hpp"
#include "mbkdv/operators.hpp"
#include "mbkdv/phase.hpp"
#include "mbkdv/verify.hpp"

using namespace mbkdv;
using mbkdv::expansion::Forms;
using mbkdv::expansion::VectorTerms;
using mbkdv::expansion::forms;

namespace {

double rel(const SpectralField& a, const SpectralField& b) {
  const double scale = sobolev_norm(b, SobolevIndex(0));
  return sobolev_norm(a - b, SobolevIndex(0)) / (scale > 0 ? scale : 1.0);
}

double rel(const SpectralPair& a, const SpectralPair& b) {
  const double scale = sobolev_norm(b, SobolevIndex(0));
  return sobolev_norm(a - b, SobolevIndex(0)) / (scale > 0 ? scale : 1.0);
}

SpectralField rf(std::uint64_t seed, int n) { return random_field(seed, n, SobolevIndex(0.0), 1.0); }

SpectralPair rp(std::uint64_t seed, int n) {
  return SpectralPair(rf(seed, n), uniform_random_field(seed + 77, n, 1.0));
}

const std::vector<double> kTimes{0.0, 0.37, 2.0};

}  // namespace

TEST(Phase, CubicIdentityMatchesTable) {
  const PhaseCache pc(0.37, 12);
  for (int k1 = -6; k1 <= 6; ++k1)
    for (int k2 = -6; k2 <= 6; ++k2) {
      const auto direct = unit_phase(3LL * (k1 + k2) * k1 * k2, 0.37);
      EXPECT_NEAR(std::abs(pc.bilinear(k1, k2) - direct), 0.0, 1e-14);
    }
  EXPECT_EQ(phase4(1, 2, 3, 4), 1000 - 1 - 8 - 27 - 64);
}

TEST(Phase, ReductionRejectsHugeProducts) {
  EXPECT_THROW(reduce_phase(std::int64_t{1} << 53, 1.0), std::out_of_range);
  EXPECT_NEAR(reduce_phase(1, 2.0 * M_PI + 0.25), 0.25, 1e-15);
}

TEST(Forms, TermCounts) {
  const Forms& f = forms();
  auto count = [](const VectorTerms& v) { return v[0].size(); };
  EXPECT_EQ(count(f.rhs), 2u);
  EXPECT_EQ(count(f.b2), 2u);
  EXPECT_EQ(count(f.r3), 8u);
  EXPECT_EQ(count(f.b3), 8u);
  EXPECT_EQ(count(f.b4), 48u);
  EXPECT_EQ(count(f.b4_dform), 24u);
  EXPECT_EQ(count(f.b1p), 2u);
  EXPECT_EQ(count(f.b1q), 4u);
  EXPECT_EQ(count(f.b2q), 4u);
  EXPECT_EQ(count(f.r3q), 16u);
  EXPECT_EQ(count(f.r3q_nres0), 16u);
  EXPECT_EQ(count(f.r3q_nres1), 32u);
  EXPECT_EQ(count(f.r3q_res), 16u);
  EXPECT_EQ(count(f.b30), 16u);
  EXPECT_EQ(count(f.b40), 96u);
  EXPECT_EQ(count(f.b40_dform), 48u);
}

TEST(Forms, CoefficientMagnitudes) {
  const Forms& f = forms();
  for (const auto& t : f.r3[0]) EXPECT_NEAR(std::abs(t.coeff.value()), 1.0 / 12.0, 1e-15);
  for (const auto& t : f.b3[0]) EXPECT_NEAR(std::abs(t.coeff.value()), 1.0 / 36.0, 1e-15);
  for (const auto& t : f.b4[0]) EXPECT_NEAR(std::abs(t.coeff.value()), 1.0 / 72.0, 1e-15);
}

TEST(Scalar, B1FftMatchesDirect) {
  for (int n : {1, 5, 16, 33}) {
    const auto a = rf(1, n), b = rf(2, n);
    for (double t : kTimes) EXPECT_LT(rel(b1(a, b, t), b1_direct(a, b, t)), 1e-13) << n;
  }
}

TEST(Scalar, BilinearMatchesOracle) {
  const int n = 12;
  for (int i = 0; i < 5; ++i) {
    const auto a = rf(10 + i, n), b = uniform_random_field(20 + i, n, 1.0);
    const std::vector<SpectralField> args{a, b};
    for (double t : kTimes) {
      EXPECT_LT(rel(b1(a, b, t), brute_force_oracle(OperatorId::B1, args, t)), 1e-12);
      EXPECT_LT(rel(b2(a, b, t), brute_force_oracle(OperatorId::B2, args, t)), 1e-12);
    }
  }
}

TEST(Scalar, TrilinearMatchesOracle) {
  const int n = 10, nc = 4;
  for (int i = 0; i < 3; ++i) {
    const auto a = rf(30 + i, n), b = rf(40 + i, n), c = uniform_random_field(50 + i, n, 1.0);
    const std::vector<SpectralField> args{a, b, c};
    for (double t : kTimes) {
      EXPECT_LT(rel(r3(a, b, c, t), brute_force_oracle(OperatorId::R3, args, t)), 1e-12);
      EXPECT_LT(rel(r3nres(a, b, c, t), brute_force_oracle(OperatorId::R3nres, args, t)), 1e-12);
      EXPECT_LT(rel(r3res(a, b, c), brute_force_oracle(OperatorId::R3res, args, t)), 1e-12);
      EXPECT_LT(rel(r3nres0(a, b, c, t, nc), brute_force_oracle(OperatorId::R3nres0, args, t, std::nullopt, nc)),
                1e-12);
      EXPECT_LT(rel(r3nres1(a, b, c, t, nc), brute_force_oracle(OperatorId::R3nres1, args, t, std::nullopt, nc)),
                1e-12);
      EXPECT_LT(rel(b3(a, b, c, t), brute_force_oracle(OperatorId::B3, args, t)), 1e-12);
      EXPECT_LT(rel(b3(a, b, c, t, ArgumentFilter::high_high(nc)),
                    brute_force_oracle(OperatorId::B30, args, t, std::nullopt, nc)),
                1e-12);
    }
  }
}

TEST(Scalar, FiltersMatchOracle) {
  const int n = 10;
  ArgumentFilter f;
  f.n_cut = 4;
  f.args = {Proj::Low, Proj::High, Proj::All, Proj::All};
  f.pair = ArgumentFilter::PairTag{0, 2, Proj::High};
  const auto a = rf(1, n), b = rf(2, n), c = rf(3, n);
  const std::vector<SpectralField> args{a, b, c};
  EXPECT_LT(rel(r3(a, b, c, 0.37, f), brute_force_oracle(OperatorId::R3, args, 0.37, f)), 1e-12);
  f.pair->band = Proj::Low;
  EXPECT_LT(rel(b3(a, b, c, 0.37, f), brute_force_oracle(OperatorId::B3, args, 0.37, f)), 1e-12);
}

TEST(Scalar, ResonantClosedFormMatchesEnumeration) {
  const int n = 16;
  const auto a = rf(5, n), b = uniform_random_field(6, n, 1.0), c = rf(7, n);
  const std::vector<SpectralField> args{a, b, c};
  EXPECT_LT(rel(r3res_closed(a, b, c), brute_force_oracle(OperatorId::R3res, args, 0.0)), 1e-13);
  EXPECT_LT(rel(r3res_closed(a, b, c), r3res(a, b, c)), 1e-13);
}

TEST(Scalar, ResonantClosedFormOnCosines) {
  // φ = ψ = ξ = cos x: every resonant triple lies in S1 ∪ S2 ∪ S3, with
  // out_1 = φ1ψ−1ξ1 − φ−1ψ1ξ1 + φ1ψ1ξ−1 = 1/8 and the cross sums empty.
  const std::vector<std::pair<int, Complex>> e{{1, {0.5, 0.0}}};
  const auto c = make_field(3, e);
  const auto out = r3res_closed(c, c, c);
  EXPECT_EQ(out[1], Complex(0.125, 0.0));
  EXPECT_EQ(out[-1], Complex(-0.125, 0.0));
  EXPECT_EQ(out[2], Complex(0.0, 0.0));
}

TEST(Scalar, CorruptedClosedFormIsDetected) {
  const int n = 8;
  const auto a = rf(5, n), b = rf(6, n), c = rf(7, n);
  const auto bad = detail::r3res_closed_signed(a, b, c, {1, -1, 1, 1, 1, 1});
  EXPECT_GT(rel(bad, r3res_closed(a, b, c)), 1e-3);
}

TEST(Scalar, B4MatchesOracle) {
  const int n = 6;
  const auto a = rf(1, n), b = rf(2, n), c = rf(3, n), d = uniform_random_field(4, n, 1.0);
  const std::vector<SpectralField> args{a, b, c, d};
  for (double t : kTimes) EXPECT_LT(rel(b4(a, b, c, d, t), brute_force_oracle(OperatorId::B4, args, t)), 1e-12);
}

TEST(Scalar, ArityAndSizeChecks) {
  const auto a = rf(1, 17);
  const std::vector<SpectralField> big{a, a};
  EXPECT_THROW(brute_force_oracle(OperatorId::B1, big, 0.0), std::invalid_argument);
  const std::vector<SpectralField> one{rf(1, 4)};
  EXPECT_THROW(brute_force_oracle(OperatorId::B1, one, 0.0), std::invalid_argument);
  EXPECT_THROW(b1(rf(1, 4), rf(1, 5), 0.0), std::invalid_argument);
}

TEST(Vector, ModifiedOperatorsMatchOracle) {
  const int n = 12, nc = 5;
  for (int i = 0; i < 3; ++i) {
    const auto p = rp(100 + i, n);
    for (double t : kTimes) {
      EXPECT_LT(rel(b1_low_vec(p, t, nc), brute_force_vector_oracle(OperatorId::B1P, p, t, nc)), 1e-12);
      EXPECT_LT(rel(b1_high_vec(p, t, nc), brute_force_vector_oracle(OperatorId::B1Q, p, t, nc)), 1e-12);
      EXPECT_LT(rel(b2_high_vec(p, t, nc), brute_force_vector_oracle(OperatorId::B2Q, p, t, nc)), 1e-12);
      EXPECT_LT(rel(r3_high_vec(p, t, nc), brute_force_vector_oracle(OperatorId::R3Q, p, t, nc)), 1e-12);
    }
  }
}

TEST(Vector, ExpandedAndDerivativeFormsAgree) {
  const int n = 10, nc = 4;
  const auto p = rp(7, n);
  for (double t : {0.0, 0.37}) {
    EXPECT_LT(rel(r3_vec(p, t), r3_vec_dform(p, t)), 1e-12);
    EXPECT_LT(rel(b4_vec(p, t), b4_vec_expanded(p, t)), 1e-12);
    EXPECT_LT(rel(r3_high_vec(p, t, nc), r3_high_vec_dform(p, t, nc)), 1e-12);
    EXPECT_LT(rel(b40_vec(p, t, nc), b40_vec_expanded(p, t, nc)), 1e-12);
  }
}

TEST(Vector, FullCutoffReducesToUnmodified) {
  const int n = 8;
  const auto p = rp(9, n);
  EXPECT_LT(rel(b1_low_vec(p, 0.37, n), b1_vec(p, 0.37)), 1e-13);
  EXPECT_EQ(sobolev_norm(b2_high_vec(p, 0.37, n), SobolevIndex(0)), 0.0);
}

TEST(Vector, RequiresInteractionGauge) {
  auto p = rp(1, 4);
  p.gauge = Gauge::Physical;
  EXPECT_THROW(b1_vec(p, 0.0), std::invalid_argument);
}

TEST(Vector, OutputsAreHermitian) {
  const auto p = rp(3, 8);
  const auto q = b4_vec(p, 0.37);
  EXPECT_TRUE(q.u.is_hermitian(1e-14));
  EXPECT_TRUE(q.v.is_hermitian(1e-14));
}
