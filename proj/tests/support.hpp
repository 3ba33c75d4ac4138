#pragma once

// Random states, measurements and strategies shared by the unit and
// acceptance tests.

#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "mdiew/scenario.hpp"
#include "mdiew/simulate.hpp"

namespace mdiew::fixtures {

inline ComplexMatrix ginibre(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  ComplexMatrix g(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) g(i, j) = Complex(n(rng), n(rng));
  return g;
}

inline ComplexMatrix random_density(int d, std::mt19937_64& rng, int rank = 0) {
  const ComplexMatrix g = ginibre(d, rank > 0 ? rank : d, rng);
  ComplexMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return symmetrize(rho);
}

// n-outcome POVM on C^d: E_k = S^{-1/2} G_k S^{-1/2}.
inline std::vector<ComplexMatrix> random_povm(int n, int d, std::mt19937_64& rng) {
  std::vector<ComplexMatrix> g;
  ComplexMatrix s = ComplexMatrix::Zero(d, d);
  for (int k = 0; k < n; ++k) {
    const ComplexMatrix a = ginibre(d, d, rng);
    g.push_back(a * a.adjoint());
    s += g.back();
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(symmetrize(s));
  const ComplexMatrix root_inv =
      es.eigenvectors() * es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
  for (ComplexMatrix& e : g) e = symmetrize(ComplexMatrix(root_inv * e * root_inv));
  return g;
}

inline LocalStrategy random_local_strategy(const Scenario& sc, int hidden, std::mt19937_64& rng) {
  LocalStrategy st;
  std::exponential_distribution<double> ex;
  double total = 0.0;
  for (int l = 0; l < hidden; ++l) {
    st.weights.push_back(ex(rng));
    total += st.weights.back();
    st.povms_a.push_back(random_povm(sc.nA, sc.dX(), rng));
    st.povms_b.push_back(random_povm(sc.nB, sc.dY(), rng));
  }
  for (double& w : st.weights) w /= total;
  return st;
}

// Two-qubit shared state, joint POVMs on X (x) A and B (x) Y.
inline QuantumStrategy random_quantum_strategy(const Scenario& sc, std::mt19937_64& rng) {
  QuantumStrategy st;
  st.shared_dims = {2, 2};
  st.shared_state = random_density(4, rng);
  st.povm_a = random_povm(sc.nA, sc.dX() * 2, rng);
  st.povm_b = random_povm(sc.nB, 2 * sc.dY(), rng);
  return st;
}

inline Scenario pauli_bell_scenario() {
  Scenario s;
  s.inputs_x = pauli_input_set();
  s.inputs_y = pauli_input_set();
  s.nA = 4;
  s.nB = 4;
  return s;
}

inline QuantumStrategy werner_bell_strategy(double lambda) {
  return {werner_state(lambda), {2, 2}, bell_measurement(2), bell_measurement(2)};
}

inline ProbabilityTable werner_table(double lambda) {
  return simulate_quantum(pauli_bell_scenario(), werner_bell_strategy(lambda));
}

}  // namespace mdiew::fixtures
