#include "mdiew/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>

#include "mdiew/errors.hpp"

namespace mdiew {

namespace fs = std::filesystem;

fs::path default_out_dir() {
  if (const char* env = std::getenv("MDIEW_OUT_DIR"); env && *env) return fs::path(env);
  return fs::current_path();
}

namespace {

void resolve_path(fs::path& p, const fs::path& dir, const char* fallback) {
  if (p.empty() && fallback) p = dir / fallback;
  if (!p.empty()) p = fs::absolute(p).lexically_normal();
}

Json path_json(const fs::path& p) { return p.empty() ? Json(nullptr) : Json(p.string()); }

Json settings_json(const std::vector<Setting>& settings) {
  Json j = Json::array();
  for (const Setting& s : settings) j.push_back({s.x, s.y});
  return j;
}

}  // namespace

void RunConfig::resolve() {
  if (out_dir.empty()) out_dir = default_out_dir();
  out_dir = fs::absolute(out_dir).lexically_normal();
  for (fs::path* p : {&state_path, &measurement_path, &scenario_path, &table_path, &counts_path, &witness_path})
    resolve_path(*p, out_dir, nullptr);
  for (fs::path& p : data_paths) resolve_path(p, out_dir, nullptr);
  if (command == "simulate") {
    resolve_path(table_out, out_dir, "table.json");
    resolve_path(scenario_out, out_dir, "scenario.json");
    resolve_path(counts_out, out_dir, shots > 0 ? "counts.json" : nullptr);
  } else if (command == "quantify") {
    resolve_path(report_out, out_dir, "report.json");
    resolve_path(witness_out, out_dir, "witness.json");
  } else if (command == "witness-eval") {
    resolve_path(csv_out, out_dir, "evaluations.csv");
  } else if (command == "reproduce-figure") {
    resolve_path(csv_out, out_dir, "figure.csv");
    resolve_path(report_out, out_dir, "figure_report.json");
  }
  for (fs::path* p : {&table_out, &counts_out, &scenario_out, &report_out, &witness_out, &csv_out})
    resolve_path(*p, out_dir, nullptr);
}

Json RunConfig::to_json() const {
  Json j;
  j["command"] = command;
  j["werner"] = werner ? Json(*werner) : Json(nullptr);
  j["state"] = path_json(state_path);
  j["measurement"] = measurement_path.empty() ? Json("bell") : Json(measurement_path.string());
  j["inputs"] = inputs;
  j["gamma"] = gamma ? Json(*gamma) : Json(nullptr);
  j["shots"] = shots;
  j["seed"] = seed;
  j["scenario"] = path_json(scenario_path);
  j["table"] = path_json(table_path);
  j["counts"] = path_json(counts_path);
  j["witness"] = path_json(witness_path);
  j["data"] = Json::array();
  for (const fs::path& p : data_paths) j["data"].push_back(p.string());
  j["measure"] = to_string(measure.tag);
  j["sepApprox"] = to_string(measure.sep);
  j["regularize"] = regularize;
  j["restrict"] = settings_json(restrict_to);
  j["exact"] = exact;
  j["gridPoints"] = grid_points;
  j["lambdaMin"] = lambda_min;
  j["lambdaMax"] = lambda_max;
  j["outDir"] = path_json(out_dir);
  return j;
}

std::vector<Setting> parse_settings(const std::string& text) {
  std::vector<Setting> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find(',', pos);
    if (end == std::string::npos) end = text.size();
    const std::string item = text.substr(pos, end - pos);
    const std::size_t colon = item.find(':');
    if (colon == std::string::npos) throw InvalidArgument("setting '" + item + "' is not of the form x:y");
    try {
      out.push_back({std::stoi(item.substr(0, colon)), std::stoi(item.substr(colon + 1))});
    } catch (const std::logic_error&) {
      throw InvalidArgument("setting '" + item + "' is not of the form x:y");
    }
    pos = end + 1;
  }
  return out;
}

Scenario pauli_scenario(int nA, int nB) {
  Scenario s;
  s.inputs_x = pauli_input_set();
  s.inputs_y = pauli_input_set();
  s.nA = nA;
  s.nB = nB;
  return s;
}

namespace {

QuantumStrategy load_strategy(const RunConfig& config) {
  QuantumStrategy st;
  if (config.werner) {
    st.shared_state = werner_state(*config.werner);
    st.shared_dims = {2, 2};
  } else if (!config.state_path.empty()) {
    const Json j = read_json_file(config.state_path);
    st.shared_state = complex_matrix_from_json(j.contains("rho") ? j.at("rho") : j);
    const int n = static_cast<int>(st.shared_state.rows());
    if (j.contains("dA") && j.contains("dB")) {
      st.shared_dims = {j.at("dA").get<int>(), j.at("dB").get<int>()};
    } else {
      const int d = static_cast<int>(std::lround(std::sqrt(n)));
      st.shared_dims = {d, d};
    }
    if (st.shared_dims.total() != n) throw SchemaError("state file: dA dB disagrees with the matrix size");
  } else {
    throw InvalidArgument("simulate: give --werner or --state");
  }
  if (config.measurement_path.empty()) {
    if (st.shared_dims.dA != 2 || st.shared_dims.dB != 2)
      throw InvalidArgument("simulate: Bell measurements need a two-qubit state");
    st.povm_a = bell_measurement(2);
    st.povm_b = bell_measurement(2);
  } else {
    const Json j = read_json_file(config.measurement_path);
    if (!j.contains("povmA") || !j.contains("povmB")) throw SchemaError("measurement file: need povmA and povmB");
    for (const Json& m : j.at("povmA")) st.povm_a.push_back(complex_matrix_from_json(m));
    for (const Json& m : j.at("povmB")) st.povm_b.push_back(complex_matrix_from_json(m));
  }
  return st;
}

Json tagged(Json body, const RunConfig& config) {
  body["config"] = config.to_json();
  return body;
}

ProbabilityTable load_table_or_counts(const fs::path& path, std::string* digest_out = nullptr) {
  const Json j = read_json_file(path);
  if (digest_out && j.contains("scenarioDigest")) *digest_out = j.at("scenarioDigest").get<std::string>();
  if (j.contains("normalization")) return probability_table_from_json(j);
  return frequencies_unknown_total(count_table_from_json(j));
}

Json solver_json(const SolveResult& r) {
  Json j;
  j["status"] = to_string(r.status);
  j["iterations"] = r.iterations;
  j["pStar"] = r.p_star;
  j["dStar"] = r.d_star;
  j["relativeGap"] = r.residuals.relative_gap;
  j["primalResidual"] = r.residuals.primal;
  j["dualResidual"] = r.residuals.dual;
  j["dualConeViolation"] = r.residuals.dual_cone_violation;
  return j;
}

double reported_value(MeasureTag tag, double omega) { return tag == MeasureTag::Dub ? dub_log2(omega) : omega; }

// Runs fn(0..n-1) on a small pool; the first exception is rethrown.
void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, n);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int k = next++; k < n; k = next++) {
      try {
        fn(k);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::string format_number(double v) {
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

SimulateOutput cmd_simulate(const RunConfig& config) {
  if (config.inputs != "pauli") throw InvalidArgument("simulate: only --inputs pauli is supported");
  const QuantumStrategy strategy = load_strategy(config);
  const int nA = static_cast<int>(strategy.povm_a.size());
  const int nB = static_cast<int>(strategy.povm_b.size());
  const bool lossy = config.gamma.has_value() || config.shots > 0;

  SimulateOutput out;
  out.scenario = pauli_scenario(nA, nB);
  out.table = simulate_quantum(out.scenario, strategy);
  if (lossy) {
    out.scenario.nA = nA + 1;
    out.scenario.nB = nB + 1;
    const ProbabilityTable relabeled = relabel_conclusive(out.table);
    out.table = apply_isotropic_loss(relabeled, default_loss_model(config.gamma.value_or(1.0), relabeled.index_set));
  }
  if (config.shots > 0) out.counts = sample_counts(out.table, config.shots, config.seed);

  const std::string digest = scenario_digest(out.scenario);
  if (!config.scenario_out.empty()) write_json_file(config.scenario_out, tagged(to_json(out.scenario), config));
  if (!config.table_out.empty()) {
    Json j = tagged(to_json(out.table), config);
    j["scenarioDigest"] = digest;
    write_json_file(config.table_out, j);
  }
  if (out.counts && !config.counts_out.empty()) {
    Json j = tagged(to_json(*out.counts), config);
    j["scenarioDigest"] = digest;
    write_json_file(config.counts_out, j);
  }
  return out;
}

QuantifyOutput quantify_table(const Scenario& scenario, const ProbabilityTable& table, const RunConfig& config,
                              const SolverSettings& settings) {
  QuantifyOutput out;
  out.data = table;
  if (config.regularize) {
    const RegularizationResult reg = regularize(scenario, table, settings);
    out.regularization_objective = reg.objective;
    out.data = reg.p_reg;
  }
  QuantificationProblem problem;
  problem.scenario = scenario;
  problem.data = out.data;
  problem.measure = config.measure;
  problem.index_set.insert(config.restrict_to.begin(), config.restrict_to.end());
  const QuantificationProgram built = build_quantification(problem);
  out.solve = solve(built.program, settings);
  if (out.solve.status == SolveStatus::PrimalInfeasible)
    throw InconsistentData("quantify: the data admit no quantum model; enable regularization");
  if (!out.solve.optimal())
    throw SolverFailed("quantify(" + to_string(config.measure.tag) + "): " + to_string(out.solve.status));
  out.nu = out.solve.p_star;
  out.reported = reported_value(config.measure.tag, out.nu);
  out.subnormalized = out.data.normalization == Normalization::Subnormalized;
  out.witness = extract_witness(problem, built, out.solve, settings.eps_gap);

  Json& r = out.report;
  r["measure"] = to_string(config.measure.tag);
  r["sepApprox"] = to_string(config.measure.sep);
  r["nu"] = out.nu;
  r["reported"] = out.reported;
  r["scale"] = config.measure.tag == MeasureTag::Dub ? "log2" : "linear";
  r["interpretation"] = out.subnormalized ? "lower bound on the SLOCC entanglement measure (subnormalized data)"
                                          : "lower bound on the entanglement measure";
  r["gap"] = std::abs(out.solve.p_star - out.solve.d_star);
  r["solver"] = solver_json(out.solve);
  r["regularization"] = out.regularization_objective ? Json{{"objective", *out.regularization_objective}}
                                                     : Json(nullptr);
  r["scenarioDigest"] = scenario_digest(scenario);
  r["dataDigest"] = table_digest(table);
  r["witnessDigest"] = witness_digest(out.witness);
  return out;
}

QuantifyOutput cmd_quantify(const RunConfig& config) {
  if (config.table_path.empty() == config.counts_path.empty())
    throw InvalidArgument("quantify: give exactly one of --table or --counts");
  const fs::path& input = config.table_path.empty() ? config.counts_path : config.table_path;
  std::string data_scenario;
  ProbabilityTable table = load_table_or_counts(input, &data_scenario);

  Scenario scenario;
  if (!config.scenario_path.empty()) {
    scenario = scenario_from_json(read_json_file(config.scenario_path));
  } else {
    int nA = 1, nB = 1;
    for (const Outcome& o : table.outcomes()) {
      nA = std::max(nA, o.a + 1);
      nB = std::max(nB, o.b + 1);
    }
    scenario = pauli_scenario(nA, nB);
  }
  if (!data_scenario.empty() && data_scenario != scenario_digest(scenario))
    throw DigestMismatch("quantify: data were generated for a different scenario");

  QuantifyOutput out = quantify_table(scenario, table, config);
  out.report["input"] = input.string();
  out.report = tagged(out.report, config);
  if (!config.report_out.empty()) write_json_file(config.report_out, out.report);
  if (!config.witness_out.empty()) write_json_file(config.witness_out, tagged(to_json(out.witness), config));
  return out;
}

std::vector<EvaluationRecord> cmd_witness_eval(const RunConfig& config) {
  if (config.witness_path.empty()) throw InvalidArgument("witness-eval: --witness is required");
  const Witness witness = witness_from_json(read_json_file(config.witness_path));
  if (!config.scenario_path.empty()) {
    const Scenario scenario = scenario_from_json(read_json_file(config.scenario_path));
    if (scenario_digest(scenario) != witness.scenario_digest)
      throw DigestMismatch("witness-eval: witness was built for a different scenario");
  }
  std::vector<EvaluationRecord> records;
  for (const fs::path& path : config.data_paths) {
    std::string data_scenario;
    const ProbabilityTable table = load_table_or_counts(path, &data_scenario);
    if (!data_scenario.empty() && data_scenario != witness.scenario_digest)
      throw DigestMismatch("witness-eval: " + path.string() + " belongs to a different scenario");
    records.push_back(evaluation_record(witness, table));
  }
  if (!config.csv_out.empty()) {
    if (config.csv_out.has_parent_path()) fs::create_directories(config.csv_out.parent_path());
    std::ofstream csv(config.csv_out);
    if (!csv) throw Error("cannot write " + config.csv_out.string());
    csv << "# config " << canonical_json(config.to_json()) << '\n';
    csv << "file,witness_digest,data_digest,value,subnormalized\n";
    for (std::size_t k = 0; k < records.size(); ++k)
      csv << config.data_paths[k].string() << ',' << records[k].witness_digest << ',' << records[k].data_digest
          << ',' << format_number(records[k].value) << ',' << (records[k].subnormalized ? 1 : 0) << '\n';
  }
  return records;
}

void write_curve_csv(const fs::path& path, const std::vector<FigureRow>& rows, const Json& config) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream csv(path);
  if (!csv) throw Error("cannot write " + path.string());
  csv << "# config " << canonical_json(config) << '\n';
  csv << "lambda,measure,witness_value,ideal_value,shots,seed\n";
  for (const FigureRow& r : rows)
    csv << format_number(r.lambda) << ',' << to_string(r.measure) << ',' << format_number(r.witness_value) << ','
        << format_number(r.ideal_value) << ',' << r.shots << ',' << r.seed << '\n';
}

FigureOutput cmd_reproduce_figure(const RunConfig& config, const SolverSettings& settings) {
  const std::vector<double> grid = linear_grid(config.lambda_min, config.lambda_max, config.grid_points);
  const std::int64_t shots = config.exact ? 0 : (config.shots > 0 ? config.shots : 100000);
  const Scenario scenario = pauli_scenario(5, 5);
  const QuantumStrategy bell{ComplexMatrix(), {2, 2}, bell_measurement(2), bell_measurement(2)};

  auto behavior = [&](double lambda) {
    QuantumStrategy st = bell;
    st.shared_state = werner_state(lambda);
    const ProbabilityTable ideal = relabel_conclusive(simulate_quantum(pauli_scenario(4, 4), st));
    return apply_isotropic_loss(ideal, default_loss_model(1.0, ideal.index_set));
  };
  auto data_at = [&](double lambda, std::uint64_t seed) {
    const ProbabilityTable exact = behavior(lambda);
    if (shots == 0) return conclusive_block(exact);
    return frequencies_unknown_total(sample_counts(exact, shots, seed));
  };

  std::vector<MeasureTag> tags(std::begin(kAllMeasures), std::end(kAllMeasures));
  const int nm = static_cast<int>(tags.size());
  const int ng = static_cast<int>(grid.size());

  FigureOutput out;
  out.measures.resize(static_cast<std::size_t>(nm));
  std::vector<ProbabilityTable> fresh(static_cast<std::size_t>(ng));
  std::vector<double> ideal(static_cast<std::size_t>(nm * ng));
  ProbabilityTable training;

  // Training data first, so the per-measure tasks can share it.
  training = data_at(config.lambda_max, config.seed);
  parallel_for(nm + ng + nm * ng, config.threads, [&](int k) {
    if (k < nm) {
      RunConfig rc = config;
      rc.measure = {tags[static_cast<std::size_t>(k)], SepApprox::ExactPpt};
      rc.regularize = !config.exact && config.regularize;
      rc.restrict_to.clear();
      const QuantifyOutput q = quantify_table(scenario, training, rc, settings);
      out.measures[static_cast<std::size_t>(k)] = {rc.measure.tag, q.witness, q.nu, q.regularization_objective};
    } else if (k < nm + ng) {
      const int g = k - nm;
      fresh[static_cast<std::size_t>(g)] = data_at(grid[static_cast<std::size_t>(g)], config.seed + 1 + g);
    } else {
      const int m = (k - nm - ng) / ng, g = (k - nm - ng) % ng;
      ideal[static_cast<std::size_t>(k - nm - ng)] =
          evaluate_measure(werner_state(grid[static_cast<std::size_t>(g)]), {2, 2},
                           {tags[static_cast<std::size_t>(m)], SepApprox::ExactPpt}, settings)
              .omega;
    }
  });

  for (int m = 0; m < nm; ++m)
    for (int g = 0; g < ng; ++g) {
      FigureRow row;
      row.lambda = grid[static_cast<std::size_t>(g)];
      row.measure = tags[static_cast<std::size_t>(m)];
      row.witness_omega = witness_evaluate(out.measures[static_cast<std::size_t>(m)].witness,
                                           fresh[static_cast<std::size_t>(g)]);
      row.ideal_omega = ideal[static_cast<std::size_t>(m * ng + g)];
      row.witness_value = reported_value(row.measure, row.witness_omega);
      row.ideal_value = reported_value(row.measure, row.ideal_omega);
      row.shots = shots;
      row.seed = config.seed + 1 + static_cast<std::uint64_t>(g);
      out.rows.push_back(row);
    }

  Json& r = out.report;
  r["scenarioDigest"] = scenario_digest(scenario);
  r["trainingDigest"] = table_digest(training);
  r["trainingSeed"] = config.seed;
  r["shots"] = shots;
  r["lambdas"] = grid;
  r["measures"] = Json::array();
  for (const FigureMeasure& fm : out.measures) {
    Json j;
    j["measure"] = to_string(fm.measure);
    j["nu"] = fm.nu;
    j["reported"] = reported_value(fm.measure, fm.nu);
    j["regularization"] = fm.regularization_objective ? Json{{"objective", *fm.regularization_objective}}
                                                      : Json(nullptr);
    j["witnessDigest"] = witness_digest(fm.witness);
    j["witness"] = to_json(fm.witness);
    r["measures"].push_back(j);
  }
  r = tagged(r, config);
  if (!config.csv_out.empty()) write_curve_csv(config.csv_out, out.rows, config.to_json());
  if (!config.report_out.empty()) write_json_file(config.report_out, out.report);
  return out;
}

}  // namespace mdiew
