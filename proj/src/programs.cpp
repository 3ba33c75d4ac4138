#include "mdiew/programs.hpp"

#include <algorithm>
#include <cmath>

#include "mdiew/errors.hpp"
#include "mdiew/serialization.hpp"

namespace mdiew {

namespace {

constexpr double kVanishingData = 1e-12;

}  // namespace

std::string data_row_tag(const EventKey& key) {
  return "P(" + std::to_string(key.a) + "," + std::to_string(key.b) + "|" + std::to_string(key.x) + "," +
         std::to_string(key.y) + ")";
}

std::set<Setting> QuantificationProblem::effective_index_set() const {
  return index_set.empty() ? data.index_set : index_set;
}

void QuantificationProblem::validate() const {
  scenario.validate();
  const std::set<Setting> settings = effective_index_set();
  if (settings.empty()) throw InvalidArgument("quantification: empty index set");
  for (const Setting& s : settings) {
    if (s.x < 0 || s.x >= scenario.nX() || s.y < 0 || s.y >= scenario.nY())
      throw InvalidArgument("quantification: setting outside the scenario");
    if (!data.index_set.contains(s)) throw MissingEntries("quantification: no data for a constrained setting");
  }
  const std::set<Outcome> outcomes = data.outcomes();
  if (outcomes.empty()) throw MissingEntries("quantification: empty data table");
  for (const Outcome& o : outcomes) {
    if (o.a < 0 || o.a >= scenario.nA || o.b < 0 || o.b >= scenario.nB)
      throw InvalidArgument("quantification: outcome (" + std::to_string(o.a) + "," + std::to_string(o.b) +
                            ") outside the scenario");
    for (const Setting& s : settings)
      if (!data.values.contains({o.a, o.b, s.x, s.y}))
        throw MissingEntries("quantification: missing entry " + data_row_tag({o.a, o.b, s.x, s.y}));
  }
}

namespace {

QuantificationProgram skeleton(const QuantificationProblem& problem) {
  problem.validate();
  QuantificationProgram out;
  out.outcomes = problem.data.outcomes();
  out.index_set = problem.effective_index_set();
  out.dims = problem.scenario.input_dims();
  out.scale = 1.0 / static_cast<double>(out.dims.total());
  for (const Outcome& o : out.outcomes) {
    bool vanishing = true;
    for (const Setting& s : out.index_set)
      if (std::abs(problem.data.at({o.a, o.b, s.x, s.y})) > kVanishingData) vanishing = false;
    if (vanishing) out.dropped.insert(o);
  }
  return out;
}

}  // namespace

QuantificationProgram build_quantification(const QuantificationProblem& problem) {
  QuantificationProgram out = skeleton(problem);
  const Scenario& sc = problem.scenario;
  Model model;
  ScalarExpr objective;
  std::vector<std::pair<int, EventKey>> rows;
  for (const Outcome& o : out.outcomes) {
    if (out.dropped.contains(o)) continue;
    const std::string tag = "(" + std::to_string(o.a) + "," + std::to_string(o.b) + ")";
    const ScalarExpr nu = model.add_nonneg();
    const HermExpr pi = model.add_psd(out.dims.total());
    for (const Setting& s : out.index_set) {
      const EventKey key{o.a, o.b, s.x, s.y};
      const int row =
          model.add_equality(pi.inner(sc.joint_input(s)) - ScalarExpr(problem.data.at(key)), data_row_tag(key));
      rows.emplace_back(row, key);
    }
    measure_block(model, out.dims, problem.measure, nu, pi, "E" + tag);
    objective += nu * out.scale;
    out.elements.emplace(o, pi);
  }
  model.minimize(objective);
  out.program = model.compile();
  out.data_rows.insert(rows.begin(), rows.end());
  return out;
}

QuantificationProgram build_negativity_sdp_expanded(const QuantificationProblem& problem) {
  if (problem.measure.tag != MeasureTag::Negativity)
    throw InvalidArgument("build_negativity_sdp_expanded: measure must be negativity");
  QuantificationProgram out = skeleton(problem);
  const Scenario& sc = problem.scenario;
  const int d = out.dims.total();
  const int dY = out.dims.dB;
  Model model;
  ScalarExpr objective;
  std::vector<std::pair<int, EventKey>> rows;

  // Z = [[R, -I], [I, R]] for a Hermitian R + iI; entries of Z as expressions.
  struct Realified {
    HermExpr z;
    int d;
    const ScalarExpr& re(int i, int j) const { return z.re(i, j); }
    const ScalarExpr& im(int i, int j) const { return z.re(d + i, j); }
  };
  auto realified = [&](const std::string& tag) {
    Realified r{model.add_psd_real(2 * d), d};
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        const std::string at = tag + ".struct[" + std::to_string(i) + "," + std::to_string(j) + "]";
        model.add_equality(r.z.re(i, j) - r.z.re(d + i, d + j), at + "diag");
        model.add_equality(r.z.re(i, d + j) + r.z.re(j, d + i), at + "off");
      }
    return r;
  };
  auto inner = [&](const Realified& m, const ComplexMatrix& c) {
    ScalarExpr e;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        // Re tr(MC) = sum_ij Re M_ij Re C_ji - Im M_ij Im C_ji
        e += m.re(i, j) * c(j, i).real();
        e -= m.im(i, j) * c(j, i).imag();
      }
    return e;
  };
  auto half_trace = [&](const Realified& m) {
    ScalarExpr e;
    for (int i = 0; i < 2 * d; ++i) e += m.z.re(i, i) * 0.5;
    return e;
  };
  // Index of (i, j) after transposing the X factor.
  auto pt_x = [&](int i, int j) {
    const int ix = i / dY, iy = i % dY, jx = j / dY, jy = j % dY;
    return std::pair(jx * dY + iy, ix * dY + jy);
  };

  for (const Outcome& o : out.outcomes) {
    if (out.dropped.contains(o)) continue;
    const std::string tag = "(" + std::to_string(o.a) + "," + std::to_string(o.b) + ")";
    const ScalarExpr nu = model.add_nonneg();
    const Realified pi = realified("Pi" + tag);
    const Realified plus = realified("S+" + tag);
    const Realified minus = realified("S-" + tag);
    for (const Setting& s : out.index_set) {
      const EventKey key{o.a, o.b, s.x, s.y};
      const int row =
          model.add_equality(inner(pi, sc.joint_input(s)) - ScalarExpr(problem.data.at(key)), data_row_tag(key));
      rows.emplace_back(row, key);
    }
    model.add_equality(nu - half_trace(minus), "nu" + tag);
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        const auto [pi_i, pi_j] = pt_x(i, j);
        const std::string at = "pt" + tag + "[" + std::to_string(i) + "," + std::to_string(j) + "]";
        model.add_equality(pi.re(pi_i, pi_j) - plus.re(i, j) + minus.re(i, j), at + "re");
        if (i != j) model.add_equality(pi.im(pi_i, pi_j) - plus.im(i, j) + minus.im(i, j), at + "im");
      }
    objective += nu * out.scale;
    HermExpr element(d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        element.re(i, j) = pi.re(i, j);
        element.im(i, j) = pi.im(i, j);
      }
    out.elements.emplace(o, std::move(element));
  }
  model.minimize(objective);
  out.program = model.compile();
  out.data_rows.insert(rows.begin(), rows.end());
  return out;
}

Witness extract_witness(const QuantificationProblem& problem, const QuantificationProgram& built,
                        const SolveResult& result, double eps_gap) {
  if (!result.optimal()) throw SolverFailed("extract_witness: solver status " + to_string(result.status));
  const DualityReport report = check_duality(result, eps_gap);
  if (!report.ok()) {
    std::string why;
    for (const auto& v : report.violations) why += (why.empty() ? "" : "; ") + v;
    throw GapTooLarge("extract_witness: " + why);
  }
  Witness w;
  w.measure = problem.measure;
  w.scenario_digest = scenario_digest(problem.scenario);
  w.bound = result.p_star;
  for (const Outcome& o : built.outcomes)
    for (const Setting& s : built.index_set) w.beta[{o.a, o.b, s.x, s.y}] = 0.0;
  // Every row outside the data block has a zero right-hand side, so
  // b^T y = sum beta P with beta the data-row multipliers.
  double dual = 0.0;
  for (const auto& [row, key] : built.data_rows) {
    w.beta[key] = result.y(row);
    dual += result.y(row) * problem.data.at(key);
  }
  for (int r = 0; r < built.program.num_rows(); ++r)
    if (!built.data_rows.contains(r) && built.program.b(r) != 0.0)
      throw SolverFailed("extract_witness: non-data row with nonzero right-hand side");
  if (std::abs(dual - result.d_star) > 1e-9 * (1.0 + std::abs(result.d_star)))
    throw SolverFailed("extract_witness: data multipliers do not reproduce the dual objective");
  return w;
}

double QuantificationResult::reported(MeasureTag tag) const { return tag == MeasureTag::Dub ? dub_log2(nu) : nu; }

QuantificationResult quantify(const QuantificationProblem& problem, const SolverSettings& settings) {
  const QuantificationProgram built = build_quantification(problem);
  QuantificationResult out;
  out.solve = solve(built.program, settings);
  if (!out.solve.optimal())
    throw SolverFailed("quantify(" + to_string(problem.measure.tag) + "): " + to_string(out.solve.status) +
                       (out.solve.message.empty() ? "" : " (" + out.solve.message + ")"));
  out.nu = out.solve.p_star;
  out.witness = extract_witness(problem, built, out.solve, settings.eps_gap);
  for (const auto& [o, expr] : built.elements) out.elements[o] = expr.value(out.solve.x);
  for (const Outcome& o : built.dropped)
    out.elements[o] = ComplexMatrix::Zero(built.dims.total(), built.dims.total());
  return out;
}

RegularizationProgram build_regularization(const Scenario& scenario, const ProbabilityTable& p_test) {
  scenario.validate();
  if (p_test.index_set.empty()) throw InvalidArgument("build_regularization: empty index set");
  RegularizationProgram out;
  const int d = scenario.dX() * scenario.dY();
  const std::set<Outcome> outcomes = p_test.outcomes();
  for (const Outcome& o : outcomes)
    for (const Setting& s : p_test.index_set) out.entries.push_back({o.a, o.b, s.x, s.y});

  Model model;
  const std::vector<ScalarExpr> cone = model.add_soc(static_cast<int>(out.entries.size()) + 1);
  std::size_t k = 0;
  for (const Outcome& o : outcomes) {
    const HermExpr pi = model.add_psd(d);
    for (const Setting& s : p_test.index_set) {
      const EventKey key{o.a, o.b, s.x, s.y};
      // u = tr[Pi (xi (x) psi)] - P_test
      model.add_equality(pi.inner(scenario.joint_input(s)) - cone[k + 1] - ScalarExpr(p_test.value_or_zero(key)),
                         data_row_tag(key));
      ++k;
    }
    out.elements.emplace(o, pi);
  }
  out.objective = cone[0];
  model.minimize(cone[0]);
  out.program = model.compile();
  return out;
}

RegularizationResult regularize(const Scenario& scenario, const ProbabilityTable& p_test,
                                const SolverSettings& settings) {
  const RegularizationProgram built = build_regularization(scenario, p_test);
  RegularizationResult out;
  out.solve = solve(built.program, settings);
  if (!out.solve.optimal()) throw SolverFailed("regularize: " + to_string(out.solve.status));
  out.objective = out.solve.p_star;
  out.p_reg.index_set = p_test.index_set;
  out.p_reg.normalization = p_test.normalization;
  for (const auto& [o, expr] : built.elements) out.elements[o] = expr.value(out.solve.x);
  for (const EventKey& key : built.entries) {
    const ComplexMatrix& pi = out.elements.at(key.outcome());
    out.p_reg.values[key] = (pi * scenario.joint_input(key.setting())).trace().real();
  }
  return out;
}

double nu_from_povm(const EffectivePOVM& povm, MeasureKind measure, const SolverSettings& settings) {
  const DimPair dims{povm.dX, povm.dY};
  double sum = 0.0;
  for (const auto& [o, pi] : povm.elements) sum += evaluate_measure(pi, dims, measure, settings).omega;
  return sum / static_cast<double>(dims.total());
}

SloccBound slocc_lower_bound(const RecoveredEnsemble& ensemble, DimPair dims, MeasureKind measure,
                             const SolverSettings& settings) {
  SloccBound out;
  for (const auto& [o, mu] : ensemble.states) {
    const double p = ensemble.probs.at(o);
    if (p <= 0.0) continue;
    const double e = evaluate_measure(mu, dims, measure, settings).omega;
    out.max_single = std::max(out.max_single, e);
    out.average_subnormalized += p * e;
  }
  return out;
}

}  // namespace mdiew
