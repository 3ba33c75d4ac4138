#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mdiew/errors.hpp"
#include "mdiew/witness.hpp"
#include "support.hpp"

using namespace mdiew;

namespace {

QuantificationResult werner_witness(double lambda, MeasureTag tag = MeasureTag::Negativity) {
  QuantificationProblem p;
  p.scenario = fixtures::pauli_bell_scenario();
  p.data = fixtures::werner_table(lambda);
  p.measure = {tag, SepApprox::ExactPpt};
  return quantify(p);
}

}  // namespace

TEST(Evaluate, ZeroWitness) {
  Witness w;
  const ProbabilityTable t = fixtures::werner_table(0.5);
  for (const auto& [key, p] : t.values) w.beta[key] = 0.0;
  EXPECT_EQ(witness_evaluate(w, t), 0.0);
}

TEST(Evaluate, GeneratingDataGiveTheBound) {
  const QuantificationResult r = werner_witness(0.94);
  EXPECT_NEAR(witness_evaluate(r.witness, fixtures::werner_table(0.94)), r.nu, 1e-8 * (1 + r.nu));
}

TEST(Evaluate, MissingSettingThrows) {
  const QuantificationResult r = werner_witness(0.7);
  ProbabilityTable t = fixtures::werner_table(0.7);
  t.index_set.erase({2, 3});
  EXPECT_THROW(witness_evaluate(r.witness, t), MissingEntries);
}

TEST(Evaluate, LinearInTheBehavior) {
  const QuantificationResult r = werner_witness(0.8);
  std::mt19937_64 rng(51);
  const Scenario sc = fixtures::pauli_bell_scenario();
  const ProbabilityTable p1 = simulate_quantum(sc, fixtures::random_quantum_strategy(sc, rng));
  const ProbabilityTable p2 = simulate_quantum(sc, fixtures::random_quantum_strategy(sc, rng));
  const double alpha = 0.37;
  ProbabilityTable mix = p1;
  for (auto& [key, v] : mix.values) v = alpha * p1.at(key) + (1 - alpha) * p2.at(key);
  const double lhs = witness_evaluate(r.witness, mix);
  const double rhs = alpha * witness_evaluate(r.witness, p1) + (1 - alpha) * witness_evaluate(r.witness, p2);
  EXPECT_NEAR(lhs, rhs, 1e-13);
}

TEST(Evaluate, RecordsAreBitReproducible) {
  const QuantificationResult r = werner_witness(0.9);
  const ProbabilityTable t = fixtures::werner_table(0.6);
  const EvaluationRecord a = evaluation_record(r.witness, t), b = evaluation_record(r.witness, t);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.witness_digest, b.witness_digest);
  EXPECT_EQ(a.data_digest, b.data_digest);
  EXPECT_EQ(a.witness_digest.size(), 64u);
  EXPECT_FALSE(a.subnormalized);
  EXPECT_NE(a.data_digest, evaluation_record(r.witness, fixtures::werner_table(0.61)).data_digest);
}

TEST(Curves, IdealNegativityMatchesClosedForm) {
  const std::vector<double> grid = linear_grid(0.0, 1.0, 30);
  for (const CurvePoint& pt : ideal_curve({}, grid))
    EXPECT_NEAR(pt.reported, std::max(0.0, (3 * pt.lambda - 1) / 4), 1e-7) << pt.lambda;
}

TEST(Curves, SeparableRegionIsZero) {
  for (MeasureTag tag : kAllMeasures) {
    const CurvePoint pt = ideal_curve({tag, SepApprox::ExactPpt}, {0.2}).front();
    EXPECT_NEAR(pt.reported, 0.0, 1e-7) << to_string(tag);
  }
  EXPECT_NEAR(ideal_curve({MeasureTag::Dub, SepApprox::ExactPpt}, {1.0}).front().reported, 1.0, 1e-7);
}

TEST(Curves, WitnessCurveIsAffineAndBelowIdeal) {
  const QuantificationResult r = werner_witness(0.94);
  const std::vector<double> grid = linear_grid(0.29, 0.94, 8);
  std::vector<ProbabilityTable> behaviors;
  for (double l : grid) behaviors.push_back(fixtures::werner_table(l));
  const std::vector<double> values = witness_curve(r.witness, behaviors);
  const std::vector<CurvePoint> ideal = ideal_curve({}, grid);
  const double slope = (values.back() - values.front()) / (grid.back() - grid.front());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    EXPECT_NEAR(values[k], values.front() + slope * (grid[k] - grid.front()), 1e-9);
    EXPECT_LE(values[k], ideal[k].omega + 1e-6);
  }
  EXPECT_NEAR(values.back(), 0.455, 1e-6);
}

TEST(Curves, ConstantBehaviorsGiveConstantValues) {
  const QuantificationResult r = werner_witness(0.7);
  const std::vector<ProbabilityTable> same(3, fixtures::werner_table(0.5));
  const std::vector<double> v = witness_curve(r.witness, same);
  EXPECT_EQ(v[0], v[1]);
  EXPECT_EQ(v[1], v[2]);
}

TEST(Curves, SharedRandomnessNeverViolates) {
  std::mt19937_64 rng(52);
  const Scenario sc = fixtures::pauli_bell_scenario();
  for (MeasureTag tag : {MeasureTag::Negativity, MeasureTag::GeneralizedRobustness}) {
    const QuantificationResult r = werner_witness(0.94, tag);
    for (int k = 0; k < 20; ++k) {
      const ProbabilityTable p = simulate_shared_randomness(sc, fixtures::random_local_strategy(sc, 1 + k % 4, rng));
      EXPECT_LE(witness_evaluate(r.witness, p), 1e-7) << to_string(tag);
    }
  }
}

TEST(Grid, Endpoints) {
  const std::vector<double> g = linear_grid(0.29, 0.94, 14);
  ASSERT_EQ(g.size(), 14u);
  EXPECT_EQ(g.front(), 0.29);
  EXPECT_EQ(g.back(), 0.94);
  EXPECT_NEAR(g[1] - g[0], 0.05, 1e-15);
  EXPECT_THROW(linear_grid(0, 1, 0), InvalidArgument);
}
