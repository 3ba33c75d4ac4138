#include "mdiew/scenario.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace mdiew {

namespace {

constexpr double kStateTolerance = 1e-9;

void check_density_matrix(const ComplexMatrix& m, int dim, const std::string& what) {
  if (m.rows() != dim || m.cols() != dim)
    throw InvalidArgument(what + ": expected dimension " + std::to_string(dim));
  if (!is_hermitian(m)) throw InvalidArgument(what + ": not Hermitian");
  if (std::abs(m.trace().real() - 1.0) > kStateTolerance || std::abs(m.trace().imag()) > kStateTolerance)
    throw InvalidArgument(what + ": trace is not 1");
  if (min_eigenvalue(m) < -kStateTolerance) throw InvalidArgument(what + ": not positive semidefinite");
}

// Orthonormal basis of the Hermitian d x d matrices under <A,B> = tr(AB).
std::vector<ComplexMatrix> hermitian_basis(int d) {
  std::vector<ComplexMatrix> basis;
  basis.reserve(static_cast<std::size_t>(d) * d);
  const double s = 1.0 / std::numbers::sqrt2;
  const Complex i(0.0, 1.0);
  for (int k = 0; k < d; ++k) {
    ComplexMatrix e = ComplexMatrix::Zero(d, d);
    e(k, k) = 1.0;
    basis.push_back(e);
  }
  for (int r = 0; r < d; ++r) {
    for (int c = r + 1; c < d; ++c) {
      ComplexMatrix sym = ComplexMatrix::Zero(d, d);
      sym(r, c) = s;
      sym(c, r) = s;
      basis.push_back(sym);
      ComplexMatrix asym = ComplexMatrix::Zero(d, d);
      asym(r, c) = -i * s;
      asym(c, r) = i * s;
      basis.push_back(asym);
    }
  }
  return basis;
}

int numerical_rank(const RealMatrix& m, double relative) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<RealMatrix> svd(m);
  const RealVector& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k)
    if (sv(k) > relative * sv(0)) ++rank;
  return rank;
}

}  // namespace

ComplexMatrix Scenario::joint_input(Setting s) const {
  return kron(inputs_x.at(static_cast<std::size_t>(s.x)), inputs_y.at(static_cast<std::size_t>(s.y)));
}

std::set<Setting> Scenario::all_settings() const {
  std::set<Setting> out;
  for (int x = 0; x < nX(); ++x)
    for (int y = 0; y < nY(); ++y) out.insert({x, y});
  return out;
}

void Scenario::validate() const {
  if (nA < 1 || nB < 1) throw InvalidArgument("scenario: outcome counts must be positive");
  if (inputs_x.empty() || inputs_y.empty()) throw InvalidArgument("scenario: empty input set");
  for (std::size_t k = 0; k < inputs_x.size(); ++k)
    check_density_matrix(inputs_x[k], dX(), "scenario input xi_" + std::to_string(k));
  for (std::size_t k = 0; k < inputs_y.size(); ++k)
    check_density_matrix(inputs_y[k], dY(), "scenario input psi_" + std::to_string(k));
}

double ProbabilityTable::at(const EventKey& key) const {
  auto it = values.find(key);
  if (it == values.end())
    throw MissingEntries("probability table has no entry for (a,b,x,y) = (" + std::to_string(key.a) + "," +
                         std::to_string(key.b) + "," + std::to_string(key.x) + "," + std::to_string(key.y) + ")");
  return it->second;
}

double ProbabilityTable::value_or_zero(const EventKey& key) const {
  auto it = values.find(key);
  return it == values.end() ? 0.0 : it->second;
}

std::set<Outcome> ProbabilityTable::outcomes() const {
  std::set<Outcome> out;
  for (const auto& [key, value] : values) out.insert(key.outcome());
  return out;
}

double ProbabilityTable::setting_mass(Setting s) const {
  double total = 0.0;
  for (const auto& [key, value] : values)
    if (key.setting() == s) total += value;
  return total;
}

void ProbabilityTable::validate() const {
  constexpr double tol = 1e-9;
  for (const auto& [key, value] : values) {
    if (!(value >= -tol && value <= 1.0 + tol))
      throw InvalidArgument("probability table: value outside [0,1]");
  }
  for (const Setting& s : index_set) {
    const double mass = setting_mass(s);
    if (normalization == Normalization::Normalized && std::abs(mass - 1.0) > tol)
      throw InvalidArgument("probability table: setting (" + std::to_string(s.x) + "," + std::to_string(s.y) +
                            ") is not normalized");
    if (normalization == Normalization::Subnormalized && mass > 1.0 + tol)
      throw InvalidArgument("probability table: subnormalized setting exceeds 1");
  }
}

ComplexMatrix EffectivePOVM::sum() const {
  ComplexMatrix total = ComplexMatrix::Zero(dX * dY, dX * dY);
  for (const auto& [outcome, element] : elements) total += element;
  return total;
}

bool EffectivePOVM::is_complete(double tolerance) const {
  const ComplexMatrix identity = ComplexMatrix::Identity(dX * dY, dX * dY);
  return (sum() - identity).cwiseAbs().maxCoeff() <= tolerance;
}

void LocalStrategy::validate() const {
  if (weights.empty() || weights.size() != povms_a.size() || weights.size() != povms_b.size())
    throw InvalidArgument("local strategy: inconsistent number of hidden-variable values");
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw InvalidArgument("local strategy: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("local strategy: weights do not sum to 1");
  auto check_povm = [](const std::vector<ComplexMatrix>& povm) {
    if (povm.empty()) throw InvalidArgument("local strategy: empty POVM");
    ComplexMatrix sum = ComplexMatrix::Zero(povm.front().rows(), povm.front().cols());
    for (const auto& e : povm) sum += e;
    if ((sum - ComplexMatrix::Identity(sum.rows(), sum.cols())).cwiseAbs().maxCoeff() > 1e-9)
      throw InvalidArgument("local strategy: POVM does not sum to identity");
  };
  for (const auto& p : povms_a) check_povm(p);
  for (const auto& p : povms_b) check_povm(p);
}

std::vector<ComplexMatrix> pauli_input_set() {
  const double s = 1.0 / std::numbers::sqrt2;
  const Complex i(0.0, 1.0);
  std::vector<ComplexVector> kets(6, ComplexVector(2));
  kets[0] << s, s;
  kets[1] << s, -s;
  kets[2] << s, i * s;
  kets[3] << s, -i * s;
  kets[4] << 1, 0;
  kets[5] << 0, 1;
  std::vector<ComplexMatrix> out;
  for (const auto& k : kets) out.push_back(ket_projector(k));
  return out;
}

bool is_tomographically_complete(const std::vector<ComplexMatrix>& inputs, int d) {
  const int n = static_cast<int>(inputs.size());
  RealMatrix gram(n, n);
  for (int i = 0; i < n; ++i) {
    detail::require_square(inputs[i], d, "is_tomographically_complete");
    for (int j = 0; j < n; ++j) gram(i, j) = (inputs[i] * inputs[j]).trace().real();
  }
  return numerical_rank(gram, 1e-8) == d * d;
}

ComplexMatrix werner_state(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidArgument("werner_state: lambda must lie in [0,1]");
  return lambda * max_entangled(2) + (1.0 - lambda) * ComplexMatrix::Identity(4, 4) / 4.0;
}

std::vector<ComplexMatrix> pauli_unitaries() { return {pauli('I'), pauli('X'), pauli('Y'), pauli('Z')}; }

std::vector<ComplexMatrix> weyl_unitaries(int d) {
  ComplexMatrix shift = ComplexMatrix::Zero(d, d);
  ComplexMatrix clock = ComplexMatrix::Zero(d, d);
  for (int j = 0; j < d; ++j) {
    shift((j + 1) % d, j) = 1.0;
    clock(j, j) = std::polar(1.0, 2.0 * std::numbers::pi * j / d);
  }
  std::vector<ComplexMatrix> out;
  ComplexMatrix xk = ComplexMatrix::Identity(d, d);
  for (int k = 0; k < d; ++k) {
    ComplexMatrix zl = ComplexMatrix::Identity(d, d);
    for (int l = 0; l < d; ++l) {
      out.push_back(xk * zl);
      zl = zl * clock;
    }
    xk = xk * shift;
  }
  return out;
}

std::vector<ComplexMatrix> bell_measurement(int d, const std::vector<ComplexMatrix>& unitaries) {
  if (static_cast<int>(unitaries.size()) != d * d)
    throw InvalidArgument("bell_measurement: need d^2 unitaries");
  const ComplexMatrix identity = ComplexMatrix::Identity(d, d);
  for (std::size_t i = 0; i < unitaries.size(); ++i) {
    detail::require_square(unitaries[i], d, "bell_measurement");
    if ((unitaries[i].adjoint() * unitaries[i] - identity).cwiseAbs().maxCoeff() > 1e-9)
      throw InvalidArgument("bell_measurement: family member " + std::to_string(i) + " is not unitary");
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs((unitaries[i].adjoint() * unitaries[j]).trace()) > 1e-9)
        throw InvalidArgument("bell_measurement: family is not trace-orthogonal");
  }
  ComplexVector phi = ComplexVector::Zero(d * d);
  for (int i = 0; i < d; ++i) phi(i * d + i) = 1.0 / std::sqrt(static_cast<double>(d));
  std::vector<ComplexMatrix> out;
  for (const auto& u : unitaries) out.push_back(ket_projector(kron(u, identity) * phi));
  return out;
}

std::vector<ComplexMatrix> bell_measurement(int d) {
  return bell_measurement(d, d == 2 ? pauli_unitaries() : weyl_unitaries(d));
}

EffectivePOVM invert_tomography(const Scenario& scenario, const ProbabilityTable& table,
                                double residual_tolerance) {
  const int D = scenario.dX() * scenario.dY();
  const std::vector<ComplexMatrix> basis = hermitian_basis(D);
  const std::vector<Setting> settings(table.index_set.begin(), table.index_set.end());
  const int ns = static_cast<int>(settings.size());
  RealMatrix design(ns, D * D);
  for (int s = 0; s < ns; ++s) {
    const ComplexMatrix joint = scenario.joint_input(settings[s]);
    for (int k = 0; k < D * D; ++k) design(s, k) = (basis[k] * joint).trace().real();
  }
  Eigen::CompleteOrthogonalDecomposition<RealMatrix> cod(design);
  cod.setThreshold(1e-8);
  if (cod.rank() < D * D) throw IncompleteInputs("invert_tomography: inputs do not span the operator space");

  EffectivePOVM povm;
  povm.dX = scenario.dX();
  povm.dY = scenario.dY();
  for (const Outcome& o : table.outcomes()) {
    RealVector rhs(ns);
    for (int s = 0; s < ns; ++s) rhs(s) = table.at({o.a, o.b, settings[s].x, settings[s].y});
    const RealVector theta = cod.solve(rhs);
    const double residual = (design * theta - rhs).cwiseAbs().maxCoeff();
    if (residual > residual_tolerance)
      throw InconsistentData("invert_tomography: data inconsistent with any operator (residual " +
                             std::to_string(residual) + "); regularize first");
    ComplexMatrix element = ComplexMatrix::Zero(D, D);
    for (int k = 0; k < D * D; ++k) element += theta(k) * basis[k];
    if (min_eigenvalue(element) < -1e-7)
      throw NonPsdElement("invert_tomography: element (" + std::to_string(o.a) + "," + std::to_string(o.b) +
                          ") has a negative eigenvalue");
    povm.elements.emplace(o, element);
  }
  return povm;
}

RecoveredEnsemble recover_ensemble(const EffectivePOVM& povm, int dX, int dY) {
  RecoveredEnsemble out;
  for (const auto& [outcome, element] : povm.elements) {
    const double trace = element.trace().real();
    if (trace < 1e-12) {
      out.probs[outcome] = 0.0;
      continue;
    }
    out.states[outcome] = element.transpose() / trace;
    out.probs[outcome] = trace / (dX * dY);
  }
  return out;
}

}  // namespace mdiew
