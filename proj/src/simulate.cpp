#include "mdiew/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mdiew {

std::int64_t CountTable::count(const EventKey& key) const {
  auto it = counts.find(key);
  return it == counts.end() ? 0 : it->second;
}

std::int64_t CountTable::setting_total(Setting s, bool conclusive_only) const {
  std::int64_t total = 0;
  for (const auto& [key, n] : counts) {
    if (key.setting() != s) continue;
    if (conclusive_only && (key.a == 0 || key.b == 0)) continue;
    total += n;
  }
  return total;
}

void LossModel::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidArgument("loss model: gamma must lie in (0,1]");
  for (const auto& [key, value] : empty_behavior.values)
    if (key.a != 0 && key.b != 0) throw InvalidArgument("loss model: empty behavior registers a detection");
  for (const Setting& s : empty_behavior.index_set)
    if (std::abs(empty_behavior.setting_mass(s) - 1.0) > 1e-9)
      throw InvalidArgument("loss model: empty behavior is not normalized");
}

namespace {

void check_strategy(const Scenario& scenario, const QuantumStrategy& strategy) {
  const int dA = strategy.shared_dims.dA;
  const int dB = strategy.shared_dims.dB;
  detail::require_square(strategy.shared_state, dA * dB, "quantum strategy: shared state");
  for (const auto& e : strategy.povm_a) detail::require_square(e, scenario.dX() * dA, "quantum strategy: A_a");
  for (const auto& e : strategy.povm_b) detail::require_square(e, dB * scenario.dY(), "quantum strategy: B_b");
}

// tr(M N) without forming the product.
Complex trace_product(const ComplexMatrix& m, const ComplexMatrix& n) {
  return (m.array() * n.transpose().array()).sum();
}

}  // namespace

EffectivePOVM effective_povm(const Scenario& scenario, const QuantumStrategy& strategy) {
  check_strategy(scenario, strategy);
  const int dX = scenario.dX(), dY = scenario.dY();
  const int dA = strategy.shared_dims.dA, dB = strategy.shared_dims.dB;
  const ComplexMatrix lifted =
      kron(kron(ComplexMatrix::Identity(dX, dX), strategy.shared_state), ComplexMatrix::Identity(dY, dY));
  const int dims[4] = {dX, dA, dB, dY};
  const int traced[2] = {1, 2};
  EffectivePOVM out;
  out.dX = dX;
  out.dY = dY;
  for (std::size_t a = 0; a < strategy.povm_a.size(); ++a)
    for (std::size_t b = 0; b < strategy.povm_b.size(); ++b) {
      const ComplexMatrix joint = kron(strategy.povm_a[a], strategy.povm_b[b]);
      out.elements[{static_cast<int>(a), static_cast<int>(b)}] =
          symmetrize(partial_trace(lifted * joint, std::span<const int>(dims), std::span<const int>(traced)));
    }
  return out;
}

ProbabilityTable simulate_quantum(const Scenario& scenario, const QuantumStrategy& strategy) {
  check_strategy(scenario, strategy);
  ProbabilityTable out;
  out.index_set = scenario.all_settings();
  std::vector<ComplexMatrix> joints;
  for (const auto& A : strategy.povm_a)
    for (const auto& B : strategy.povm_b) joints.push_back(kron(A, B));
  const int nb = static_cast<int>(strategy.povm_b.size());
  for (const Setting& s : out.index_set) {
    const ComplexMatrix state =
        kron(kron(scenario.inputs_x[s.x], strategy.shared_state), scenario.inputs_y[s.y]);
    for (std::size_t k = 0; k < joints.size(); ++k) {
      const int a = static_cast<int>(k) / nb, b = static_cast<int>(k) % nb;
      out.values[{a, b, s.x, s.y}] = trace_product(joints[k], state).real();
    }
  }
  return out;
}

ProbabilityTable simulate_shared_randomness(const Scenario& scenario, const LocalStrategy& strategy) {
  strategy.validate();
  ProbabilityTable out;
  out.index_set = scenario.all_settings();
  for (std::size_t l = 0; l < strategy.weights.size(); ++l) {
    const auto& pa = strategy.povms_a[l];
    const auto& pb = strategy.povms_b[l];
    for (const Setting& s : out.index_set)
      for (std::size_t a = 0; a < pa.size(); ++a) {
        const double marginal_a = trace_product(pa[a], scenario.inputs_x[s.x]).real();
        for (std::size_t b = 0; b < pb.size(); ++b) {
          const double marginal_b = trace_product(pb[b], scenario.inputs_y[s.y]).real();
          out.values[{static_cast<int>(a), static_cast<int>(b), s.x, s.y}] +=
              strategy.weights[l] * marginal_a * marginal_b;
        }
      }
  }
  return out;
}

ProbabilityTable relabel_conclusive(const ProbabilityTable& table) {
  ProbabilityTable out;
  out.index_set = table.index_set;
  out.normalization = table.normalization;
  for (const auto& [key, value] : table.values) out.values[{key.a + 1, key.b + 1, key.x, key.y}] = value;
  return out;
}

ProbabilityTable conclusive_block(const ProbabilityTable& table) {
  ProbabilityTable out;
  out.index_set = table.index_set;
  out.normalization = Normalization::Subnormalized;
  for (const auto& [key, value] : table.values)
    if (key.a >= 1 && key.b >= 1) out.values[key] = value;
  return out;
}

LossModel default_loss_model(double gamma, const std::set<Setting>& settings) {
  LossModel model;
  model.gamma = gamma;
  model.empty_behavior.index_set = settings;
  for (const Setting& s : settings) model.empty_behavior.values[{0, 0, s.x, s.y}] = 1.0;
  return model;
}

ProbabilityTable apply_isotropic_loss(const ProbabilityTable& ideal, const LossModel& model) {
  model.validate();
  for (const auto& [key, value] : ideal.values)
    if (key.a == 0 || key.b == 0)
      throw InvalidArgument("apply_isotropic_loss: ideal behavior uses the reserved no-detection label 0");
  ProbabilityTable out;
  out.index_set = ideal.index_set;
  out.normalization = ideal.normalization;
  for (const auto& [key, value] : ideal.values) out.values[key] = model.gamma * value;
  for (const auto& [key, value] : model.empty_behavior.values)
    if (ideal.index_set.contains(key.setting())) out.values[key] = (1.0 - model.gamma) * value;
  return out;
}

std::int64_t sample_binomial(std::mt19937_64& engine, std::int64_t n, double p) {
  if (p <= 0.0) return 0;
  if (p >= 1.0) return n;
  std::int64_t hits = 0;
  for (std::int64_t k = 0; k < n; ++k) {
    const double u = static_cast<double>(engine() >> 11) * 0x1.0p-53;
    if (u < p) ++hits;
  }
  return hits;
}

CountTable sample_counts(const ProbabilityTable& table, std::int64_t shots, std::uint64_t seed) {
  if (shots < 0) throw InvalidArgument("sample_counts: negative number of shots");
  std::mt19937_64 engine(seed);
  CountTable out;
  const std::set<Outcome> outcomes = table.outcomes();
  for (const Outcome& o : outcomes) {
    out.nA = std::max(out.nA, o.a + 1);
    out.nB = std::max(out.nB, o.b + 1);
  }
  for (const Setting& s : table.index_set) {
    out.nX = std::max(out.nX, s.x + 1);
    out.nY = std::max(out.nY, s.y + 1);
  }
  // Sequential conditional binomials over outcomes in ascending (a,b) order.
  for (const Setting& s : table.index_set) {
    std::int64_t remaining = shots;
    double remaining_mass = 1.0;
    std::size_t index = 0;
    for (const Outcome& o : outcomes) {
      const EventKey key{o.a, o.b, s.x, s.y};
      const double p = std::max(0.0, table.value_or_zero(key));
      std::int64_t n = 0;
      if (++index == outcomes.size()) {
        n = remaining;
      } else if (remaining > 0 && remaining_mass > 0.0) {
        n = sample_binomial(engine, remaining, std::min(1.0, p / remaining_mass));
      }
      out.counts[key] = n;
      remaining -= n;
      remaining_mass -= p;
    }
  }
  return out;
}

ProbabilityTable frequencies_unknown_total(const CountTable& counts) {
  std::int64_t n_star = 0;
  for (int x = 0; x < counts.nX; ++x)
    for (int y = 0; y < counts.nY; ++y) n_star = std::max(n_star, counts.setting_total({x, y}, true));
  if (n_star <= 0) throw InvalidArgument("frequencies_unknown_total: no conclusive events");
  ProbabilityTable out;
  out.normalization = Normalization::Subnormalized;
  for (int x = 0; x < counts.nX; ++x)
    for (int y = 0; y < counts.nY; ++y) {
      out.index_set.insert({x, y});
      for (int a = 1; a < counts.nA; ++a)
        for (int b = 1; b < counts.nB; ++b)
          out.values[{a, b, x, y}] = static_cast<double>(counts.count({a, b, x, y})) / static_cast<double>(n_star);
    }
  return out;
}

ProbabilityTable frequencies_known_total(const CountTable& counts) {
  ProbabilityTable out;
  for (int x = 0; x < counts.nX; ++x)
    for (int y = 0; y < counts.nY; ++y) {
      const std::int64_t total = counts.setting_total({x, y}, false);
      if (total <= 0) continue;
      out.index_set.insert({x, y});
      for (int a = 0; a < counts.nA; ++a)
        for (int b = 0; b < counts.nB; ++b)
          out.values[{a, b, x, y}] = static_cast<double>(counts.count({a, b, x, y})) / static_cast<double>(total);
    }
  if (out.index_set.empty()) throw InvalidArgument("frequencies_known_total: empty count table");
  return out;
}

}  // namespace mdiew
