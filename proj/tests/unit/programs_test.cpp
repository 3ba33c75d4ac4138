#include <gtest/gtest.h>

#include <random>

#include "mdiew/errors.hpp"
#include "mdiew/programs.hpp"
#include "mdiew/witness.hpp"
#include "support.hpp"

using namespace mdiew;

namespace {

QuantificationProblem werner_problem(double lambda, MeasureTag tag = MeasureTag::Negativity) {
  QuantificationProblem p;
  p.scenario = fixtures::pauli_bell_scenario();
  p.data = fixtures::werner_table(lambda);
  p.measure = {tag, SepApprox::ExactPpt};
  return p;
}

}  // namespace

TEST(Quantify, WernerNegativityIsTight) {
  const QuantificationResult r = quantify(werner_problem(0.7));
  EXPECT_NEAR(r.nu, 0.275, 1e-6);
  EXPECT_NEAR(r.witness.bound, r.nu, 1e-12);
  EXPECT_TRUE(check_duality(r.solve).ok());
}

TEST(Quantify, WitnessReproducesTheDualObjective) {
  const QuantificationProblem p = werner_problem(0.94, MeasureTag::GeneralizedRobustness);
  const QuantificationResult r = quantify(p);
  EXPECT_NEAR(r.nu, 0.91, 1e-6);
  EXPECT_NEAR(witness_evaluate(r.witness, p.data), r.solve.d_star, 1e-9);
  EXPECT_EQ(r.witness.beta.size(), 16u * 36u);
}

TEST(Quantify, FittedElementsReproduceTheData) {
  const QuantificationProblem p = werner_problem(0.5, MeasureTag::AbsoluteRobustness);
  const QuantificationResult r = quantify(p);
  for (const auto& [key, value] : p.data.values)
    EXPECT_NEAR((r.elements.at(key.outcome()) * p.scenario.joint_input(key.setting())).trace().real(), value, 1e-7);
  for (const auto& [o, pi] : r.elements) EXPECT_GT(min_eigenvalue(pi), -1e-7);
}

TEST(Quantify, ProgramRowsCarryDataTags) {
  const QuantificationProgram built = build_quantification(werner_problem(0.9));
  ASSERT_EQ(built.data_rows.size(), 16u * 36u);
  for (const auto& [row, key] : built.data_rows) EXPECT_EQ(built.program.row_tags[row], data_row_tag(key));
  EXPECT_EQ(data_row_tag({1, 2, 3, 4}), "P(1,2|3,4)");
  EXPECT_DOUBLE_EQ(built.scale, 0.25);
}

TEST(Quantify, VanishingOutcomesAreDropped) {
  QuantificationProblem p = werner_problem(0.9);
  for (auto& [key, value] : p.data.values)
    if (key.a == 3) value = 0.0;
  // mass of a = 3 moved to a = 0 keeps the table a valid behavior of some model
  const ProbabilityTable original = fixtures::werner_table(0.9);
  for (auto& [key, value] : p.data.values)
    if (key.a == 0) value = original.at(key) + original.at({3, key.b, key.x, key.y});
  const QuantificationProgram built = build_quantification(p);
  EXPECT_EQ(built.dropped.size(), 4u);
  const SolveResult r = solve(built.program);
  ASSERT_TRUE(r.optimal());
  const Witness w = extract_witness(p, built, r);
  for (const auto& [key, beta] : w.beta)
    if (key.a == 3) EXPECT_EQ(beta, 0.0);
}

TEST(Quantify, RestrictedIndexSet) {
  QuantificationProblem p = werner_problem(0.94);
  for (int x = 0; x < 6; ++x)
    for (int y = 0; y < 6; y += 2) p.index_set.insert({x, y});
  const QuantificationResult r = quantify(p);
  // fewer constraints can only lower the bound
  EXPECT_LE(r.nu, 0.455 + 1e-6);
  for (const auto& [key, beta] : r.witness.beta) EXPECT_TRUE(p.index_set.contains(key.setting()));
}

TEST(Quantify, InputErrors) {
  QuantificationProblem p = werner_problem(0.5);
  p.index_set = {{0, 7}};
  EXPECT_THROW(build_quantification(p), InvalidArgument);
  p = werner_problem(0.5);
  p.data.values.erase({1, 1, 2, 2});
  EXPECT_THROW(build_quantification(p), MissingEntries);
  p = werner_problem(0.5);
  p.scenario.nA = 2;
  EXPECT_THROW(build_quantification(p), InvalidArgument);
}

TEST(Quantify, InconsistentDataIsInfeasible) {
  QuantificationProblem p = werner_problem(0.9);
  p.data.values[{0, 0, 4, 4}] += 0.2;
  const QuantificationProgram built = build_quantification(p);
  EXPECT_EQ(solve(built.program).status, SolveStatus::PrimalInfeasible);
  EXPECT_THROW(quantify(p), SolverFailed);
}

TEST(Expanded, MatchesGenericNegativityProgram) {
  std::mt19937_64 rng(41);
  QuantificationProblem p;
  p.scenario = fixtures::pauli_bell_scenario();
  p.measure = {};
  for (int trial = 0; trial < 2; ++trial) {
    p.data = simulate_quantum(p.scenario, fixtures::random_quantum_strategy(p.scenario, rng));
    const SolveResult generic = solve(build_quantification(p).program);
    const SolveResult expanded = solve(build_negativity_sdp_expanded(p).program);
    ASSERT_TRUE(generic.optimal());
    ASSERT_TRUE(expanded.optimal());
    EXPECT_NEAR(generic.p_star, expanded.p_star, 1e-7);
  }
  p.measure = {MeasureTag::Dub, SepApprox::ExactPpt};
  EXPECT_THROW(build_negativity_sdp_expanded(p), InvalidArgument);
}

TEST(Regularize, ExactDataHasZeroObjective) {
  const Scenario sc = fixtures::pauli_bell_scenario();
  const ProbabilityTable t = fixtures::werner_table(0.6);
  const RegularizationResult r = regularize(sc, t);
  EXPECT_LT(r.objective, 1e-7);
  for (const auto& [key, value] : t.values) EXPECT_NEAR(r.p_reg.at(key), value, 1e-7);
}

TEST(Regularize, ProjectsNoisyData) {
  const Scenario sc = fixtures::pauli_bell_scenario();
  const ProbabilityTable t = frequencies_known_total(sample_counts(fixtures::werner_table(0.94), 2000, 3));
  const RegularizationResult r = regularize(sc, t);
  EXPECT_GT(r.objective, 1e-4);
  double sq = 0.0;
  for (const auto& [key, value] : t.values) sq += (r.p_reg.at(key) - value) * (r.p_reg.at(key) - value);
  EXPECT_NEAR(std::sqrt(sq), r.objective, 1e-6);
  for (const auto& [o, pi] : r.elements) EXPECT_GT(min_eigenvalue(pi), -1e-8);
  // the fitted data are consistent, so quantification is feasible
  QuantificationProblem p;
  p.scenario = sc;
  p.data = r.p_reg;
  p.measure = {};
  EXPECT_NO_THROW(quantify(p));
}

TEST(PovmBound, MatchesProgramOnWerner) {
  const Scenario sc = fixtures::pauli_bell_scenario();
  const EffectivePOVM povm = effective_povm(sc, fixtures::werner_bell_strategy(0.8));
  EXPECT_NEAR(nu_from_povm(povm, {}), 0.35, 1e-6);
}

TEST(Slocc, SubnormalizedBoundBelowBestState) {
  Scenario sc = fixtures::pauli_bell_scenario();
  const ProbabilityTable ideal = relabel_conclusive(fixtures::werner_table(0.94));
  const ProbabilityTable lossy = apply_isotropic_loss(ideal, default_loss_model(0.8, ideal.index_set));
  sc.nA = sc.nB = 5;
  QuantificationProblem p;
  p.scenario = sc;
  p.data = conclusive_block(lossy);
  p.measure = {};
  const QuantificationResult r = quantify(p);
  EXPECT_NEAR(r.nu, 0.8 * 0.455, 1e-6);
  const RecoveredEnsemble ens = recover_ensemble(invert_tomography(sc, p.data), 2, 2);
  const SloccBound bound = slocc_lower_bound(ens, {2, 2}, {});
  EXPECT_NEAR(bound.max_single, 0.455, 1e-6);
  EXPECT_LE(r.nu, bound.max_single + 1e-6);
  EXPECT_NEAR(bound.average_subnormalized, r.nu, 1e-6);
}
