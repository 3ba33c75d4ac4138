#pragma once

#include <compare>
#include <map>
#include <set>
#include <vector>

#include "mdiew/linalg.hpp"

namespace mdiew {

// Input pair (x, y).
struct Setting {
  int x = 0;
  int y = 0;
  friend auto operator<=>(const Setting&, const Setting&) = default;
};

// Outcome pair (a, b).
struct Outcome {
  int a = 0;
  int b = 0;
  friend auto operator<=>(const Outcome&, const Outcome&) = default;
};

// (a, b, x, y), ordered lexicographically. This order is the summation order
// of every witness evaluation.
struct EventKey {
  int a = 0;
  int b = 0;
  int x = 0;
  int y = 0;
  friend auto operator<=>(const EventKey&, const EventKey&) = default;

  Outcome outcome() const { return {a, b}; }
  Setting setting() const { return {x, y}; }
};

// Trusted side of a semiquantum experiment: quantum inputs on each side and
// the number of classical outcomes of each device.
struct Scenario {
  std::vector<ComplexMatrix> inputs_x;
  std::vector<ComplexMatrix> inputs_y;
  int nA = 1;
  int nB = 1;

  int dX() const { return inputs_x.empty() ? 0 : static_cast<int>(inputs_x.front().rows()); }
  int dY() const { return inputs_y.empty() ? 0 : static_cast<int>(inputs_y.front().rows()); }
  int nX() const { return static_cast<int>(inputs_x.size()); }
  int nY() const { return static_cast<int>(inputs_y.size()); }
  DimPair input_dims() const { return {dX(), dY()}; }

  // xi_x (x) psi_y.
  ComplexMatrix joint_input(Setting s) const;
  std::set<Setting> all_settings() const;

  // Throws InvalidArgument when an input is not a density matrix or the
  // outcome counts are not positive.
  void validate() const;
};

enum class Normalization { Normalized, Subnormalized };

// Observed behavior P(ab|xy), available on the settings of `index_set`.
struct ProbabilityTable {
  std::map<EventKey, double> values;
  std::set<Setting> index_set;
  Normalization normalization = Normalization::Normalized;

  // Throws MissingEntries when the entry is absent.
  double at(const EventKey& key) const;
  double value_or_zero(const EventKey& key) const;
  std::set<Outcome> outcomes() const;
  double setting_mass(Setting s) const;

  // Range and normalization checks at 1e-9.
  void validate() const;
};

// Effective distributed POVM {Pi_ab} on H_X (x) H_Y.
struct EffectivePOVM {
  std::map<Outcome, ComplexMatrix> elements;
  int dX = 0;
  int dY = 0;

  ComplexMatrix sum() const;
  bool is_complete(double tolerance = 1e-7) const;
};

// States mu_ab recoverable from the measurement, with their probabilities.
struct RecoveredEnsemble {
  std::map<Outcome, ComplexMatrix> states;
  std::map<Outcome, double> probs;
};

// Shared-randomness strategy: weights p_lambda and local POVMs per lambda.
struct LocalStrategy {
  std::vector<double> weights;
  std::vector<std::vector<ComplexMatrix>> povms_a;
  std::vector<std::vector<ComplexMatrix>> povms_b;

  void validate() const;
};

// |+x>, |-x>, |+y>, |-y>, |+z>, |-z> projectors, in that order.
std::vector<ComplexMatrix> pauli_input_set();

// True iff the inputs span the d^2-dimensional real space of Hermitian
// matrices (Gram-matrix rank, relative threshold 1e-8).
bool is_tomographically_complete(const std::vector<ComplexMatrix>& inputs, int d);

// lambda |phi_2><phi_2| + (1 - lambda) 1/4.
ComplexMatrix werner_state(double lambda);

// {1, sigma_x, sigma_y, sigma_z}.
std::vector<ComplexMatrix> pauli_unitaries();

// Shift/clock family X^k Z^l, k,l = 0..d-1.
std::vector<ComplexMatrix> weyl_unitaries(int d);

// Projectors onto (U_a (x) 1)|phi_d>, a = 0..d^2-1. Throws InvalidArgument
// unless the family is unitary and pairwise trace-orthogonal.
std::vector<ComplexMatrix> bell_measurement(int d, const std::vector<ComplexMatrix>& unitaries);
std::vector<ComplexMatrix> bell_measurement(int d);

// Least-squares solution of tr[Pi_ab (xi_x (x) psi_y)] = P(ab|xy) for every
// outcome present in the table.
EffectivePOVM invert_tomography(const Scenario& scenario, const ProbabilityTable& table,
                                double residual_tolerance = 1e-7);

// mu_ab = Pi_ab^T / tr Pi_ab, p_ab = tr Pi_ab / (dX dY). Elements with trace
// below 1e-12 get p_ab = 0 and no state.
RecoveredEnsemble recover_ensemble(const EffectivePOVM& povm, int dX, int dY);

}  // namespace mdiew
