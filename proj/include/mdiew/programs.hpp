#pragma once

// Entanglement quantification from semiquantum data: the primal program over
// effective POVM elements, witness extraction from its dual, the Euclidean
// regularization of noisy data, and single-state bounds.

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mdiew/cones.hpp"
#include "mdiew/conic.hpp"
#include "mdiew/model.hpp"
#include "mdiew/scenario.hpp"

namespace mdiew {

struct QuantificationProblem {
  Scenario scenario;
  ProbabilityTable data;
  MeasureKind measure;
  // Constrained settings; empty means every setting of the data table.
  std::set<Setting> index_set;

  std::set<Setting> effective_index_set() const;
  // Throws MissingEntries when a constrained setting lacks an outcome, and
  // InvalidArgument on settings or outcomes outside the scenario.
  void validate() const;
};

// I(P) = sum beta(abxy) P(ab|xy).
struct Witness {
  std::map<EventKey, double> beta;
  MeasureKind measure;
  std::string scenario_digest;
  double bound = 0.0;
};

// A compiled quantification program plus the bookkeeping needed to read its
// solution back.
struct QuantificationProgram {
  StandardConicProgram program;
  std::map<int, EventKey> data_rows;
  std::set<Outcome> outcomes;
  std::set<Setting> index_set;
  // Outcome pairs whose data vanish on the whole index set carry no block;
  // their POVM element is zero and their witness coefficients are zero.
  std::set<Outcome> dropped;
  std::map<Outcome, HermExpr> elements;
  DimPair dims;
  double scale = 1.0;  // objective = scale * sum_ab nu_ab
};

QuantificationProgram build_quantification(const QuantificationProblem& problem);

// Negativity program written out entry by entry over realified variables:
// each Hermitian d x d matrix is a real 2d x 2d PSD block constrained to the
// form [[Re, -Im], [Im, Re]].
QuantificationProgram build_negativity_sdp_expanded(const QuantificationProblem& problem);

// Dual multipliers of the data rows, normalized so that sum beta P = d*.
// Throws SolverFailed unless the solve is optimal and GapTooLarge when the
// relative gap exceeds eps_gap.
Witness extract_witness(const QuantificationProblem& problem, const QuantificationProgram& built,
                        const SolveResult& result, double eps_gap = 1e-8);

struct QuantificationResult {
  double nu = 0.0;  // omega scale for every measure
  SolveResult solve;
  Witness witness;
  std::map<Outcome, ComplexMatrix> elements;

  // log2(nu) for DUB, nu otherwise.
  double reported(MeasureTag tag) const;
};

// Build, solve, and extract the witness. Throws SolverFailed on a solver
// status other than Optimal.
QuantificationResult quantify(const QuantificationProblem& problem, const SolverSettings& settings = {});

struct RegularizationProgram {
  StandardConicProgram program;
  std::map<Outcome, HermExpr> elements;
  std::vector<EventKey> entries;  // order of the residual vector u
  ScalarExpr objective;
};

// minimize ||P_reg - P_test||_2 over PSD {Pi_ab} with
// P_reg(abxy) = tr[Pi_ab (xi_x (x) psi_y)] >= 0; the residual u = P_reg - P_test
// and the norm bound t form one second-order cone (t, u).
RegularizationProgram build_regularization(const Scenario& scenario, const ProbabilityTable& p_test);

struct RegularizationResult {
  double objective = 0.0;
  // Recomputed from the fitted elements, hence exactly consistent.
  ProbabilityTable p_reg;
  std::map<Outcome, ComplexMatrix> elements;
  SolveResult solve;
};

RegularizationResult regularize(const Scenario& scenario, const ProbabilityTable& p_test,
                                const SolverSettings& settings = {});

// sum_ab E(Pi_ab) / (dX dY), omega scale.
double nu_from_povm(const EffectivePOVM& povm, MeasureKind measure, const SolverSettings& settings = {});

struct SloccBound {
  double max_single = 0.0;            // max_ab E(mu_ab)
  double average_subnormalized = 0.0; // sum_ab p_ab E(mu_ab)
};

SloccBound slocc_lower_bound(const RecoveredEnsemble& ensemble, DimPair dims, MeasureKind measure,
                             const SolverSettings& settings = {});

std::string data_row_tag(const EventKey& key);

}  // namespace mdiew
