#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "mdiew/scenario.hpp"

namespace mdiew {

// Shared state rho_AB plus the joint POVMs {A_a} on X (x) A and {B_b} on
// B (x) Y. Subsystem order of the full space is X, A, B, Y.
struct QuantumStrategy {
  ComplexMatrix shared_state;
  DimPair shared_dims;
  std::vector<ComplexMatrix> povm_a;
  std::vector<ComplexMatrix> povm_b;
};

// Raw event counts N(abxy). Absent keys are zero. The dimensions fix the
// outcome and setting ranges.
struct CountTable {
  std::map<EventKey, std::int64_t> counts;
  int nA = 0;
  int nB = 0;
  int nX = 0;
  int nY = 0;

  std::int64_t count(const EventKey& key) const;
  std::int64_t setting_total(Setting s, bool conclusive_only) const;
};

// P_gamma = gamma P_ideal + (1 - gamma) P_empty; P_empty only uses outcomes
// with a = 0 or b = 0.
struct LossModel {
  double gamma = 1.0;
  ProbabilityTable empty_behavior;

  void validate() const;
};

// Effective POVM of a quantum strategy: Pi_ab = tr_AB[(1 (x) rho (x) 1)(A_a (x) B_b)].
EffectivePOVM effective_povm(const Scenario& scenario, const QuantumStrategy& strategy);

// P(ab|xy) = tr[(A_a (x) B_b)(xi_x (x) rho_AB (x) psi_y)] on every setting.
ProbabilityTable simulate_quantum(const Scenario& scenario, const QuantumStrategy& strategy);

// P(ab|xy) = sum_lambda p_lambda tr[A_{a|lambda} xi_x] tr[B_{b|lambda} psi_y].
ProbabilityTable simulate_shared_randomness(const Scenario& scenario, const LocalStrategy& strategy);

// Shift every outcome label by one so that 0 is free for "no detection".
ProbabilityTable relabel_conclusive(const ProbabilityTable& table);

// Entries with a, b >= 1 only; marked subnormalized.
ProbabilityTable conclusive_block(const ProbabilityTable& table);

// All lost mass on outcome (0,0), independent of the setting.
LossModel default_loss_model(double gamma, const std::set<Setting>& settings);

// Throws InvalidArgument when P_ideal uses the reserved label 0.
ProbabilityTable apply_isotropic_loss(const ProbabilityTable& ideal, const LossModel& model);

// Multinomial sample of `shots` events per setting; see sample_binomial for
// the exact algorithm. Deterministic given the seed.
CountTable sample_counts(const ProbabilityTable& table, std::int64_t shots, std::uint64_t seed);

// Binomial(n, p) drawn as n Bernoulli comparisons u < p, where each u is the
// top 53 bits of one std::mt19937_64 output scaled by 2^-53.
std::int64_t sample_binomial(std::mt19937_64& engine, std::int64_t n, double p);

// N* = max_xy sum_{a,b>=1} N(abxy); P~(ab|xy) = N(abxy) / N* for a, b >= 1.
// Throws InvalidArgument when there are no conclusive events.
ProbabilityTable frequencies_unknown_total(const CountTable& counts);

// N(abxy) / sum_ab N(abxy), valid when every event of a setting is recorded.
ProbabilityTable frequencies_known_total(const CountTable& counts);

}  // namespace mdiew
