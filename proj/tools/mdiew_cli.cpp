// mdiew: simulate, quantify, evaluate witnesses, reproduce the Werner figure.
//
// exit codes: 0 ok, 1 usage, 2 data consistency, 3 solver, 4 schema/digest

#include <chrono>
#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "mdiew/errors.hpp"
#include "mdiew/pipeline.hpp"

namespace {

using mdiew::RunConfig;

void add_outputs(CLI::App* cmd, RunConfig& c) {
  cmd->add_option("--out-dir", c.out_dir, "Default output directory (else $MDIEW_OUT_DIR, else cwd)");
}

int run(int argc, char** argv) {
  CLI::App app{"Measurement-device-independent entanglement quantification"};
  app.require_subcommand(1);
  RunConfig c;
  std::string measure = "negativity", sep = "ppt", restrict_text;
  bool no_regularize = false;

  auto* sim = app.add_subcommand("simulate", "Simulate a semiquantum experiment");
  sim->add_option("--werner", c.werner, "Werner visibility lambda");
  sim->add_option("--state", c.state_path, "Shared state JSON {dA, dB, rho}");
  sim->add_flag("--bell", "Bell measurements on both sides (default)");
  sim->add_option("--measurement", c.measurement_path, "Custom POVMs JSON {povmA, povmB}");
  sim->add_option("--inputs", c.inputs, "Input state family")->check(CLI::IsMember({"pauli"}));
  sim->add_option("--gamma", c.gamma, "Detection efficiency; relabels outcomes and adds no-detection events");
  sim->add_option("--shots", c.shots, "Events per setting to sample");
  sim->add_option("--seed", c.seed, "Sampling seed");
  sim->add_option("--out", c.table_out, "Probability table JSON");
  sim->add_option("--counts-out", c.counts_out, "Count table JSON");
  sim->add_option("--scenario-out", c.scenario_out, "Scenario JSON");
  add_outputs(sim, c);

  auto* qu = app.add_subcommand("quantify", "Lower-bound an entanglement measure and extract a witness");
  qu->add_option("--scenario", c.scenario_path, "Scenario JSON (default: Pauli inputs)");
  qu->add_option("--table", c.table_path, "Probability table JSON");
  qu->add_option("--counts", c.counts_path, "Count table JSON (unknown-total frequencies)");
  qu->add_option("--measure", measure, "negativity | random-robustness | absolute-robustness | "
                                       "generalized-robustness | dub");
  qu->add_option("--sep", sep, "Separable-cone approximation: ppt | dps2");
  qu->add_flag("--no-regularize", no_regularize, "Quantify the raw table");
  qu->add_option("--restrict", restrict_text, "Constrained settings, x:y,x:y");
  qu->add_option("--report", c.report_out, "Report JSON");
  qu->add_option("--witness", c.witness_out, "Witness JSON");
  add_outputs(qu, c);

  auto* ev = app.add_subcommand("witness-eval", "Evaluate a witness on data files");
  ev->add_option("--witness", c.witness_path, "Witness JSON")->required();
  ev->add_option("--scenario", c.scenario_path, "Scenario JSON to check against the witness");
  ev->add_option("--data", c.data_paths, "Probability or count tables")->required();
  ev->add_option("--csv", c.csv_out, "Evaluation CSV");
  add_outputs(ev, c);

  auto* fig = app.add_subcommand("reproduce-figure", "Witness and ideal curves over the Werner family");
  fig->add_flag("--exact", c.exact, "Use exact behaviors instead of sampled ones");
  fig->add_option("--shots", c.shots, "Events per setting (default 100000)");
  fig->add_option("--seed", c.seed, "Seed of the training sample; evaluation samples use seed+1+k");
  fig->add_option("--points", c.grid_points, "Number of lambda values")->check(CLI::PositiveNumber);
  fig->add_option("--threads", c.threads, "Worker threads (0: all cores)");
  fig->add_option("--csv", c.csv_out, "Curve CSV");
  fig->add_option("--report", c.report_out, "Report JSON");
  add_outputs(fig, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  c.command = app.get_subcommands().front()->get_name();
  c.measure = {mdiew::parse_measure_tag(measure), mdiew::parse_sep_approx(sep)};
  c.regularize = !no_regularize;
  if (!restrict_text.empty()) c.restrict_to = mdiew::parse_settings(restrict_text);
  c.resolve();

  const auto start = std::chrono::steady_clock::now();
  if (c.command == "simulate") {
    const auto out = mdiew::cmd_simulate(c);
    std::cout << "table " << c.table_out.string() << " (" << out.table.values.size() << " entries)\n";
    if (out.counts) std::cout << "counts " << c.counts_out.string() << '\n';
    std::cout << "scenario " << c.scenario_out.string() << '\n';
  } else if (c.command == "quantify") {
    const auto out = mdiew::cmd_quantify(c);
    std::printf("%s %.10g%s\n", measure.c_str(), out.reported,
                out.subnormalized ? "  (lower bound on the SLOCC measure)" : "");
    if (out.regularization_objective) std::printf("regularization objective %.3e\n", *out.regularization_objective);
    std::cout << "report " << c.report_out.string() << "\nwitness " << c.witness_out.string() << '\n';
  } else if (c.command == "witness-eval") {
    const auto records = mdiew::cmd_witness_eval(c);
    for (std::size_t k = 0; k < records.size(); ++k)
      std::printf("%s %.12g\n", c.data_paths[k].string().c_str(), records[k].value);
  } else {
    const auto out = mdiew::cmd_reproduce_figure(c);
    for (const auto& m : out.measures)
      std::printf("%-24s nu %.8g\n", mdiew::to_string(m.measure).c_str(), m.nu);
    std::cout << "csv " << c.csv_out.string() << "\nreport " << c.report_out.string() << '\n';
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::fprintf(stderr, "done in %.2f s\n", seconds);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const mdiew::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const mdiew::SolverFailed& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return 3;
  } catch (const mdiew::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
