// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "mdiew/cones.hpp"
#include "mdiew/pipeline.hpp"
#include "mdiew/programs.hpp"
#include "mdiew/witness.hpp"
#include "support.hpp"

using namespace mdiew;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

// Every solve of the run goes through this observer; criterion 6 audits it.
struct DualityAudit {
  std::mutex mutex;
  int optimal = 0;
  int violations = 0;
  double worst_gap = 0.0;
  double worst_weak = 0.0;  // max(d* - p*)

  void record(const SolveResult& r) {
    if (!r.optimal()) return;
    const DualityReport rep = check_duality(r, 1e-8, 1e-9);
    std::lock_guard lock(mutex);
    ++optimal;
    if (!rep.ok()) ++violations;
    worst_gap = std::max(worst_gap, rep.absolute_gap / (1.0 + std::abs(r.p_star)));
    worst_weak = std::max(worst_weak, r.d_star - r.p_star);
  }
};

DualityAudit audit;

SolverSettings settings() {
  SolverSettings s;
  s.observer = [](const SolveResult& r) { audit.record(r); };
  return s;
}

struct Verdict {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const char* title, const std::function<Verdict()>& body) {
  const auto start = Clock::now();
  Verdict out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  if (!out.pass) ++failures;
  std::printf("%s  %2d  %-34s %s  [%.1f s]\n", out.pass ? "PASS" : "FAIL", id, title, out.detail.c_str(),
              seconds_since(start));
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

QuantificationProblem werner_problem(double lambda, MeasureTag tag) {
  QuantificationProblem p;
  p.scenario = fixtures::pauli_bell_scenario();
  p.data = fixtures::werner_table(lambda);
  p.measure = {tag, SepApprox::ExactPpt};
  return p;
}

// Witnesses extracted along the way, audited by criterion 7.
std::vector<Witness> witnesses;

// Scale on which each measure is reported.
double reported(MeasureTag tag, double omega) { return tag == MeasureTag::Dub ? dub_log2(omega) : omega; }

Verdict tightness() {
  double worst = 0.0, slowest = 0.0;
  for (double lambda : {0.4, 0.7, 0.94}) {
    const auto start = Clock::now();
    const QuantificationResult r = quantify(werner_problem(lambda, MeasureTag::Negativity), settings());
    slowest = std::max(slowest, seconds_since(start));
    worst = std::max(worst, std::abs(r.nu - (3 * lambda - 1) / 4));
    witnesses.push_back(r.witness);
  }
  return {worst <= 1e-6 && slowest < 5.0, fmt("max |nu - (3l-1)/4| = %.2e, slowest solve %.2f s", worst, slowest)};
}

Verdict separable_null() {
  double worst = -INFINITY;
  for (double lambda : {0.0, 0.2, 1.0 / 3.0})
    for (MeasureTag tag : kAllMeasures) {
      const QuantificationResult r = quantify(werner_problem(lambda, tag), settings());
      worst = std::max(worst, reported(tag, r.nu));
    }
  return {worst <= 1e-7, fmt("max reported nu = %.2e (DUB on log2 scale)", worst)};
}

Verdict bell_oracles() {
  const double expected[5] = {0.5, 2.0, 1.0, 1.0, 2.0};
  double worst = 0.0;
  for (int m = 0; m < 5; ++m) {
    const MeasureValue v = evaluate_measure(max_entangled(2), {2, 2}, {kAllMeasures[m], SepApprox::ExactPpt}, settings());
    worst = std::max(worst, std::abs(v.omega - expected[m]));
    if (kAllMeasures[m] == MeasureTag::Dub) worst = std::max(worst, std::abs(v.reported() - 1.0));
  }
  return {worst <= 1e-6, fmt("max deviation %.2e", worst)};
}

Verdict negativity_formula_check() {
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const ComplexMatrix rho = fixtures::random_density(4, rng, 1 + k % 4);
    const double cone = evaluate_measure(rho, {2, 2}, {}, settings()).omega;
    worst = std::max(worst, std::abs(cone - negativity_formula(rho, {2, 2})));
  }
  return {worst <= 1e-6, fmt("50 states, max deviation %.2e", worst)};
}

Verdict expanded_equivalence() {
  std::mt19937_64 rng(77);
  const Scenario sc = fixtures::pauli_bell_scenario();
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    QuantificationProblem p;
    p.scenario = sc;
    p.data = simulate_quantum(sc, fixtures::random_quantum_strategy(sc, rng));
    p.measure = {};
    const SolveResult generic = solve(build_quantification(p).program, settings());
    const SolveResult expanded = solve(build_negativity_sdp_expanded(p).program, settings());
    if (!generic.optimal() || !expanded.optimal())
      return {false, "dataset " + std::to_string(k) + ": " + to_string(generic.status) + "/" +
                         to_string(expanded.status)};
    worst = std::max(worst, std::abs(generic.p_star - expanded.p_star));
  }
  return {worst <= 1e-7, fmt("10 datasets, max |difference| %.2e", worst)};
}

Verdict soundness() {
  for (MeasureTag tag : kAllMeasures)
    if (tag != MeasureTag::Negativity) witnesses.push_back(quantify(werner_problem(0.94, tag), settings()).witness);
  std::mt19937_64 rng(99);
  const Scenario sc = fixtures::pauli_bell_scenario();
  std::vector<ProbabilityTable> local;
  for (int k = 0; k < 200; ++k)
    local.push_back(simulate_shared_randomness(sc, fixtures::random_local_strategy(sc, 1 + k % 5, rng)));
  struct Quantum {
    ProbabilityTable table;
    ComplexMatrix rho;
  };
  std::vector<Quantum> quantum;
  for (int k = 0; k < 50; ++k) {
    const QuantumStrategy st = fixtures::random_quantum_strategy(sc, rng);
    quantum.push_back({simulate_quantum(sc, st), st.shared_state});
  }
  double worst_local = -INFINITY, worst_quantum = -INFINITY;
  for (const Witness& w : witnesses) {
    const MeasureTag tag = w.measure.tag;
    for (const ProbabilityTable& p : local) worst_local = std::max(worst_local, reported(tag, witness_evaluate(w, p)));
    for (const Quantum& q : quantum) {
      const double bound = evaluate_measure(q.rho, {2, 2}, w.measure, settings()).omega;
      worst_quantum = std::max(worst_quantum, reported(tag, witness_evaluate(w, q.table)) - reported(tag, bound));
    }
  }
  return {worst_local <= 1e-7 && worst_quantum <= 1e-6,
          std::to_string(witnesses.size()) + " witnesses, 200 local / 50 quantum: " +
              fmt("max I(P_SR) %.2e, max I(P_Q) - E(rho) %.2e", worst_local, worst_quantum)};
}

Verdict loss_linearity() {
  // measures vanishing on separable states
  double worst = 0.0;
  const ProbabilityTable ideal = relabel_conclusive(fixtures::werner_table(0.94));
  Scenario sc = fixtures::pauli_bell_scenario();
  sc.nA = sc.nB = 5;
  for (MeasureTag tag : {MeasureTag::Negativity, MeasureTag::RandomRobustness, MeasureTag::AbsoluteRobustness,
                         MeasureTag::GeneralizedRobustness}) {
    QuantificationProblem p;
    p.scenario = sc;
    p.measure = {tag, SepApprox::ExactPpt};
    p.data = ideal;
    const double full = quantify(p, settings()).nu;
    for (double gamma : {0.1, 0.5, 0.9}) {
      p.data = apply_isotropic_loss(ideal, default_loss_model(gamma, ideal.index_set));
      worst = std::max(worst, std::abs(quantify(p, settings()).nu - gamma * full));
    }
  }
  return {worst <= 1e-6, fmt("max |nu(g) - g nu(1)| %.2e (negativity, robustnesses)", worst)};
}

Verdict dps_vs_ppt() {
  std::mt19937_64 rng(5150);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const ComplexMatrix rho = fixtures::random_density(4, rng, 1 + k % 4);
    const double ppt =
        evaluate_measure(rho, {2, 2}, {MeasureTag::GeneralizedRobustness, SepApprox::ExactPpt}, settings()).omega;
    const double dps =
        evaluate_measure(rho, {2, 2}, {MeasureTag::GeneralizedRobustness, SepApprox::Dps2}, settings()).omega;
    worst = std::max(worst, std::abs(ppt - dps));
  }
  return {worst <= 1e-5, fmt("20 states, max |GR_dps2 - GR_ppt| %.2e", worst)};
}

Verdict noisy_pipeline() {
  const Scenario sc = fixtures::pauli_bell_scenario();
  const ProbabilityTable exact = fixtures::werner_table(0.94);
  const ProbabilityTable training = frequencies_known_total(sample_counts(exact, 100000, 42));
  const RegularizationResult reg = regularize(sc, training, settings());
  QuantificationProblem p;
  p.scenario = sc;
  p.data = reg.p_reg;
  p.measure = {};
  const QuantificationResult q = quantify(p, settings());
  witnesses.push_back(q.witness);
  const ProbabilityTable fresh = frequencies_known_total(sample_counts(exact, 100000, 43));
  const double value = witness_evaluate(q.witness, fresh);
  return {reg.objective > 0.0 && std::abs(value - 0.455) <= 0.02,
          fmt("regularization objective %.3e, fresh witness value %.5f", reg.objective, value)};
}

Verdict unknown_total() {
  Scenario sc = fixtures::pauli_bell_scenario();
  sc.nA = sc.nB = 5;
  const ProbabilityTable ideal = relabel_conclusive(fixtures::werner_table(0.94));
  const ProbabilityTable lossy = apply_isotropic_loss(ideal, default_loss_model(0.8, ideal.index_set));

  // counts only: unknown total, regularize, quantify
  const ProbabilityTable freq = frequencies_unknown_total(sample_counts(lossy, 100000, 42));
  const RegularizationResult reg = regularize(sc, freq, settings());
  QuantificationProblem p;
  p.scenario = sc;
  p.data = reg.p_reg;
  p.measure = {};
  const double nu_counts = quantify(p, settings()).nu;
  const RecoveredEnsemble ens = recover_ensemble(invert_tomography(sc, reg.p_reg), 2, 2);
  const double best = slocc_lower_bound(ens, {2, 2}, {}, settings()).max_single;

  // exact subnormalized data
  p.data = conclusive_block(lossy);
  const double nu_exact = quantify(p, settings()).nu;
  const bool pass = nu_counts <= best + 1e-6 && std::abs(nu_exact - 0.8 * 0.455) <= 1e-6;
  return {pass, fmt("counts: nu %.5f <= max E(mu) %.5f; ", nu_counts, best) +
                    fmt("exact: |nu - 0.364| %.2e", std::abs(nu_exact - 0.8 * 0.455))};
}

Verdict figure() {
  const auto dir = std::filesystem::temp_directory_path() / "mdiew_acceptance_figure";
  std::filesystem::remove_all(dir);
  RunConfig c;
  c.command = "reproduce-figure";
  c.out_dir = dir;

  const auto start = Clock::now();
  RunConfig sampled = c;
  sampled.resolve();
  const FigureOutput noisy = cmd_reproduce_figure(sampled, settings());
  const double runtime = seconds_since(start);

  RunConfig exact = c;
  exact.exact = true;
  exact.csv_out = dir / "figure_exact.csv";
  exact.report_out = dir / "figure_exact_report.json";
  exact.resolve();
  const FigureOutput f = cmd_reproduce_figure(exact, settings());

  double above = -INFINITY, at_end = 0.0, collinear = 0.0;
  const std::size_t per = static_cast<std::size_t>(exact.grid_points);
  for (std::size_t m = 0; m * per < f.rows.size(); ++m) {
    const FigureRow* row = &f.rows[m * per];
    for (std::size_t k = 0; k < per; ++k) above = std::max(above, row[k].witness_value - row[k].ideal_value);
    const FigureRow& last = row[per - 1];
    at_end = std::max(at_end, std::abs(last.witness_omega - last.ideal_omega) / (1.0 + std::abs(last.ideal_omega)));
    for (std::size_t k = 0; k + 2 < per; ++k) {
      const double t = (row[k + 1].lambda - row[k].lambda) / (row[k + 2].lambda - row[k].lambda);
      const double mid = row[k].witness_omega + t * (row[k + 2].witness_omega - row[k].witness_omega);
      collinear = std::max(collinear, std::abs(row[k + 1].witness_omega - mid));
    }
  }
  std::filesystem::remove_all(dir);
  const bool pass = runtime < 600.0 && noisy.rows.size() == 5 * per && above <= 1e-6 && at_end <= 1e-8 &&
                    collinear <= 1e-6;
  return {pass, fmt("sampled run %.1f s; exact: max(witness - ideal) %.2e, ", runtime, above) +
                    fmt("rel. gap at 0.94 %.2e, collinearity %.2e", at_end, collinear)};
}

}  // namespace

int main() {
  const auto start = Clock::now();
  report(1, "tightness on Werner states", tightness);
  report(2, "separable null", separable_null);
  report(3, "single-state oracles (Bell state)", bell_oracles);
  report(4, "negativity cone vs formula", negativity_formula_check);
  report(5, "expanded negativity program", expanded_equivalence);
  report(7, "witness soundness sweep", soundness);
  report(8, "loss linearity", loss_linearity);
  report(9, "DPS2 equals PPT on 2x2", dps_vs_ppt);
  report(10, "noisy pipeline", noisy_pipeline);
  report(11, "unknown-total path", unknown_total);
  report(12, "figure reproduction", figure);
  // Audits every solve made above, so it runs last.
  report(6, "duality of every optimal solve", [] {
    return Verdict{audit.optimal > 0 && audit.violations == 0,
                   std::to_string(audit.optimal) + " solves, " + std::to_string(audit.violations) +
                       fmt(" violations, max rel. gap %.2e, max d*-p* %.2e", audit.worst_gap, audit.worst_weak)};
  });
  std::printf("%s  (%d failing, %.1f s)\n", failures == 0 ? "ALL PASS" : "FAILURES", failures, seconds_since(start));
  return failures == 0 ? 0 : 1;
}
