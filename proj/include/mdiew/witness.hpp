#pragma once

// Linear witness evaluation on raw data and ideal reference curves.

#include <string>
#include <vector>

#include "mdiew/cones.hpp"
#include "mdiew/programs.hpp"
#include "mdiew/scenario.hpp"

namespace mdiew {

struct EvaluationRecord {
  std::string witness_digest;
  std::string data_digest;
  double value = 0.0;
  bool subnormalized = false;
};

// sum beta(abxy) P(abxy), accumulated in ascending (a,b,x,y) order. Every
// setting carrying a coefficient must be in the table's index set; absent
// outcomes of a covered setting count as zero. Throws MissingEntries.
double witness_evaluate(const Witness& witness, const ProbabilityTable& table);

EvaluationRecord evaluation_record(const Witness& witness, const ProbabilityTable& table);

std::string witness_digest(const Witness& witness);
std::string table_digest(const ProbabilityTable& table);

struct CurvePoint {
  double lambda = 0.0;
  double omega = 0.0;
  double reported = 0.0;  // log2(omega) for DUB
};

// Measure of the Werner state at each lambda. Throws InvalidArgument outside [0, 1].
std::vector<CurvePoint> ideal_curve(MeasureKind measure, const std::vector<double>& lambdas,
                                    const SolverSettings& settings = {});

std::vector<double> witness_curve(const Witness& witness, const std::vector<ProbabilityTable>& behaviors);

// n evenly spaced points from lo to hi inclusive.
std::vector<double> linear_grid(double lo, double hi, int n);

}  // namespace mdiew
