#pragma once

// End-to-end commands: simulate, quantify, witness evaluation and figure
// reproduction. Each command writes JSON/CSV files that embed the run
// configuration and the digests of their inputs.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mdiew/cones.hpp"
#include "mdiew/programs.hpp"
#include "mdiew/serialization.hpp"
#include "mdiew/simulate.hpp"
#include "mdiew/witness.hpp"

namespace mdiew {

struct RunConfig {
  std::string command;

  // simulate / figure
  std::optional<double> werner;
  std::filesystem::path state_path;        // {"dA", "dB", "rho"}
  std::filesystem::path measurement_path;  // {"povmA", "povmB"}; empty means Bell measurements
  std::string inputs = "pauli";
  std::optional<double> gamma;
  std::int64_t shots = 0;
  std::uint64_t seed = 42;

  // quantify / witness-eval
  std::filesystem::path scenario_path;
  std::filesystem::path table_path;
  std::filesystem::path counts_path;
  std::filesystem::path witness_path;
  std::vector<std::filesystem::path> data_paths;
  MeasureKind measure;
  bool regularize = true;
  std::vector<Setting> restrict_to;

  // figure
  bool exact = false;
  int grid_points = 14;
  double lambda_min = 0.29;
  double lambda_max = 0.94;
  int threads = 0;  // 0: hardware concurrency

  // outputs; empty entries get defaults under out_dir
  std::filesystem::path out_dir;
  std::filesystem::path table_out;
  std::filesystem::path counts_out;
  std::filesystem::path scenario_out;
  std::filesystem::path report_out;
  std::filesystem::path witness_out;
  std::filesystem::path csv_out;

  // out_dir falls back to $MDIEW_OUT_DIR, then the working directory. All
  // paths become absolute.
  void resolve();
  Json to_json() const;
};

std::filesystem::path default_out_dir();

// "x:y,x:y"
std::vector<Setting> parse_settings(const std::string& text);

// Pauli inputs on both sides, nA/nB outcomes.
Scenario pauli_scenario(int nA, int nB);

struct SimulateOutput {
  Scenario scenario;
  ProbabilityTable table;
  std::optional<CountTable> counts;
};

// Exact table, relabeled and mixed with no-detection events when gamma is
// set. Counts are always drawn from the relabeled (lossy) table.
SimulateOutput cmd_simulate(const RunConfig& config);

struct QuantifyOutput {
  double nu = 0.0;
  double reported = 0.0;
  bool subnormalized = false;  // nu is then a lower bound on the SLOCC measure
  std::optional<double> regularization_objective;
  ProbabilityTable data;       // the table actually quantified
  Witness witness;
  SolveResult solve;
  Json report;
};

// Regularizes unless disabled; with regularization off, data admitting no
// quantum model raise InconsistentData.
QuantifyOutput quantify_table(const Scenario& scenario, const ProbabilityTable& table, const RunConfig& config,
                              const SolverSettings& settings = {});

QuantifyOutput cmd_quantify(const RunConfig& config);

// Throws DigestMismatch when the scenario or a data file disagrees with the
// witness.
std::vector<EvaluationRecord> cmd_witness_eval(const RunConfig& config);

struct FigureRow {
  double lambda = 0.0;
  MeasureTag measure = MeasureTag::Negativity;
  double witness_omega = 0.0;
  double ideal_omega = 0.0;
  double witness_value = 0.0;  // reported scale
  double ideal_value = 0.0;
  std::int64_t shots = 0;
  std::uint64_t seed = 0;
};

struct FigureMeasure {
  MeasureTag measure = MeasureTag::Negativity;
  Witness witness;
  double nu = 0.0;
  std::optional<double> regularization_objective;
};

struct FigureOutput {
  std::vector<FigureMeasure> measures;
  std::vector<FigureRow> rows;  // measure-major, lambda ascending
  Json report;
};

FigureOutput cmd_reproduce_figure(const RunConfig& config, const SolverSettings& settings = {});

void write_curve_csv(const std::filesystem::path& path, const std::vector<FigureRow>& rows, const Json& config);

}  // namespace mdiew
