#include "mdiew/witness.hpp"

#include "mdiew/errors.hpp"
#include "mdiew/serialization.hpp"

namespace mdiew {

double witness_evaluate(const Witness& witness, const ProbabilityTable& table) {
  double sum = 0.0;
  for (const auto& [key, beta] : witness.beta) {
    if (!table.index_set.contains(key.setting()))
      throw MissingEntries("witness_evaluate: data lack setting (" + std::to_string(key.x) + "," +
                           std::to_string(key.y) + ")");
    sum += beta * table.value_or_zero(key);
  }
  return sum;
}

std::string witness_digest(const Witness& witness) { return json_digest(to_json(witness)); }

std::string table_digest(const ProbabilityTable& table) { return json_digest(to_json(table)); }

EvaluationRecord evaluation_record(const Witness& witness, const ProbabilityTable& table) {
  EvaluationRecord r;
  r.witness_digest = witness_digest(witness);
  r.data_digest = table_digest(table);
  r.value = witness_evaluate(witness, table);
  r.subnormalized = table.normalization == Normalization::Subnormalized;
  return r;
}

std::vector<CurvePoint> ideal_curve(MeasureKind measure, const std::vector<double>& lambdas,
                                    const SolverSettings& settings) {
  std::vector<CurvePoint> out;
  out.reserve(lambdas.size());
  for (double lambda : lambdas) {
    const MeasureValue v = evaluate_measure(werner_state(lambda), {2, 2}, measure, settings);
    out.push_back({lambda, v.omega, v.reported()});
  }
  return out;
}

std::vector<double> witness_curve(const Witness& witness, const std::vector<ProbabilityTable>& behaviors) {
  std::vector<double> out;
  out.reserve(behaviors.size());
  for (const ProbabilityTable& p : behaviors) out.push_back(witness_evaluate(witness, p));
  return out;
}

std::vector<double> linear_grid(double lo, double hi, int n) {
  if (n < 1) throw InvalidArgument("linear_grid: need at least one point");
  if (n == 1) return {lo};
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / (n - 1);
  out.back() = hi;
  return out;
}

}  // namespace mdiew
