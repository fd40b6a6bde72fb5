#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "mbkdv/verify.hpp"

using namespace mbkdv;

namespace {

const std::vector<int> kNs{4, 6, 8, 12};

}  // namespace

TEST(Oracle, RejectsLargeOrMismatchedInputs) {
  const auto big = random_field(1, 17, SobolevIndex(0), 1.0);
  const std::vector<SpectralField> args{big, big};
  EXPECT_THROW(brute_force_oracle(OperatorId::B2, args, 0.0), std::invalid_argument);
  const std::vector<SpectralField> mixed{random_field(1, 4, SobolevIndex(0), 1.0), random_field(1, 5, SobolevIndex(0), 1.0)};
  EXPECT_THROW(brute_force_oracle(OperatorId::B2, mixed, 0.0), std::invalid_argument);
  const SpectralPair p(big, big);
  EXPECT_THROW(brute_force_vector_oracle(OperatorId::B1P, p, 0.0, 4), std::invalid_argument);
  const SpectralPair q(random_field(1, 4, SobolevIndex(0), 1.0), random_field(2, 4, SobolevIndex(0), 1.0));
  EXPECT_THROW(brute_force_vector_oracle(OperatorId::B2, q, 0.0, 2), std::invalid_argument);
}

TEST(Identities, SplitsHold) {
  const auto rep = split_identities(10, 4, {0.0, 0.37}, 5, 2024);
  EXPECT_TRUE(rep.all_passed);
  ASSERT_EQ(rep.checks.size(), 4u);
  for (const auto& c : rep.checks) {
    EXPECT_TRUE(c.passed) << c.name;
    EXPECT_LE(c.max_rel_error, c.tolerance) << c.name;
  }
  const auto j = to_json(rep);
  EXPECT_EQ(j["all_passed"], true);
  EXPECT_EQ(j["seed"], 2024u);
}

TEST(Identities, CorruptionIsCaught) {
  SplitOptions o;
  o.corrupt_r3res = true;
  const auto rep = split_identities(10, 4, {0.37}, 3, 7, o);
  EXPECT_FALSE(rep.all_passed);
  int failed = 0;
  for (const auto& c : rep.checks) failed += c.passed ? 0 : 1;
  EXPECT_GE(failed, 1);
}

TEST(Identities, RejectsBadArguments) {
  EXPECT_THROW(split_identities(8, 9, {0.0}, 1, 1), std::invalid_argument);
  EXPECT_THROW(split_identities(8, 4, {}, 1, 1), std::invalid_argument);
  EXPECT_THROW(split_identities(8, 4, {0.0}, 0, 1), std::invalid_argument);
}

TEST(Dbp, OrderStudyPasses) {
  SimulationConfig c;
  c.n_max = 6;
  c.t_end = 0.004;
  RandomInitialData r;
  r.seed_u = 11;
  r.seed_v = 12;
  c.initial = make_initial(r, c.n_max);
  const auto rep = dbp_order_study(c, 1e-4, 3, {Form::First, Form::ModifiedSecond});
  EXPECT_TRUE(rep.all_passed);
  ASSERT_EQ(rep.entries.size(), 2u);
  for (const auto& e : rep.entries) EXPECT_NEAR(e.ratio, 4.0, 0.5);
}

TEST(Fit, RecoversPowerLaw) {
  const std::vector<int> n{4, 8, 16, 32};
  std::vector<double> y;
  for (int k : n) y.push_back(3.0 * std::pow(k, -1.5));
  const auto f = fit_loglog(n, y);
  EXPECT_NEAR(f.slope, -1.5, 1e-12);
  EXPECT_NEAR(std::exp(f.intercept), 3.0, 1e-12);
  EXPECT_NEAR(f.rms_residual, 0.0, 1e-12);
  EXPECT_THROW(fit_loglog({4}, {1.0}), std::invalid_argument);
}

TEST(Bounds, NeedFourIncreasingCutoffs) {
  EXPECT_THROW(lemma_bound(OperatorId::B2, 0.0, {}, {4, 8, 16}, 2, 1), std::invalid_argument);
  EXPECT_THROW(lemma_bound(OperatorId::B2, 0.0, {}, {4, 8, 8, 16}, 2, 1), std::invalid_argument);
  EXPECT_THROW(lemma_bound(OperatorId::B2, 0.0, {}, {1, 4, 8, 16}, 2, 1), std::invalid_argument);
  EXPECT_THROW(lemma_bound(OperatorId::B2, 0.0, {}, kNs, 0, 1), std::invalid_argument);
}

TEST(Bounds, RejectsOutOfRegimeParameters) {
  EXPECT_THROW(lemma_bound(OperatorId::B1, 0.0, {{"theta", 1.2}}, kNs, 2, 1), std::invalid_argument);
  EXPECT_THROW(lemma_bound(OperatorId::B1, 0.0, {}, kNs, 2, 1), std::invalid_argument);
  EXPECT_THROW(lemma_bound(OperatorId::R3, 0.3, {}, kNs, 2, 1), std::invalid_argument);
  EXPECT_THROW(lemma_bound(OperatorId::B4, 0.0, {{"epsilon", 0.6}}, kNs, 2, 1), std::invalid_argument);
  EXPECT_THROW(lemma_bound(OperatorId::B4, 0.0, {{"epsilon", 0.0}}, kNs, 2, 1), std::invalid_argument);
  EXPECT_THROW(lemma_bound(OperatorId::R3res, 0.0, {}, kNs, 2, 1), std::invalid_argument);
}

TEST(Bounds, B2IsBounded) {
  const auto b = lemma_bound(OperatorId::B2, 0.0, {}, {4, 8, 16, 32}, 20, 3);
  EXPECT_EQ(b.sup_ratio.size(), 4u);
  EXPECT_EQ(b.bound_exponent, 0.0);
  EXPECT_NE(b.verdict, "fail");
  EXPECT_LT(b.fitted_exponent, 0.25);
  const auto again = lemma_bound(OperatorId::B2, 0.0, {}, {4, 8, 16, 32}, 20, 3);
  EXPECT_EQ(again.sup_ratio, b.sup_ratio);
}

TEST(Bounds, B4EpsilonGrid) {
  for (double eps : {0.1, 0.25, 0.4}) {
    const auto b = lemma_bound(OperatorId::B4, 0.0, {{"epsilon", eps}}, {2, 3, 4, 5}, 4, 5);
    EXPECT_NE(b.verdict, "fail") << eps << " fitted " << b.fitted_exponent;
    for (double r : b.sup_ratio) EXPECT_TRUE(std::isfinite(r));
  }
}

TEST(Bounds, ModifiedOperatorsDecay) {
  const auto q = lemma_bound(OperatorId::B2Q, 1.0, {}, {4, 8, 16, 32}, 10, 77);
  EXPECT_EQ(q.bound_exponent, -1.0);
  EXPECT_LT(q.fitted_exponent, -0.5);
  const auto h = lemma_bound(OperatorId::B30, 1.0, {}, {4, 8, 16, 32}, 10, 77);
  EXPECT_LT(h.fitted_exponent, -0.5);
  EXPECT_NE(h.verdict, "fail");
}

TEST(Bounds, JsonAndCsv) {
  const auto b = lemma_bound(OperatorId::B3, 0.5, {}, kNs, 3, 8);
  const auto j = to_json(b);
  EXPECT_EQ(j["op"], "B3");
  EXPECT_EQ(j["sup_ratio"].size(), 4u);
  EXPECT_TRUE(j["sup_ratio"].contains("12"));
  const std::string csv = bounds_csv({b});
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "op,s,extra,n,sup_ratio,fitted_exponent,fit_residual,verdict");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 4);
}
