#pragma once

// Dense Hermitian matrix arithmetic on Eigen types. Everything here is a free
// function template over the scalar type, so the same routines serve real
// symmetric and complex Hermitian operands.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "mdiew/errors.hpp"

namespace mdiew {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr double kHermitianTolerance = 1e-10;

// Local dimensions of a bipartite space A (x) B.
struct DimPair {
  int dA = 1;
  int dB = 1;

  constexpr int total() const { return dA * dB; }
  friend constexpr bool operator==(const DimPair&, const DimPair&) = default;
};

enum class Subsystem { A, B };

template <typename Derived>
using PlainOf = typename Derived::PlainObject;

// Entrywise Hermiticity test: max |M - M^dagger| <= tolerance.
struct HermitianCheck {
  double tolerance = kHermitianTolerance;

  template <typename Derived>
  bool operator()(const Eigen::MatrixBase<Derived>& m) const {
    if (m.rows() != m.cols()) return false;
    if (m.size() == 0) return true;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tolerance;
  }
};

template <typename Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& m, double tolerance = kHermitianTolerance) {
  return HermitianCheck{tolerance}(m);
}

// (M + M^dagger)/2. Used when ingesting external data only.
template <typename Derived>
PlainOf<Derived> symmetrize(const Eigen::MatrixBase<Derived>& m) {
  return (m + m.adjoint()) / 2.0;
}

template <typename DerivedA, typename DerivedB>
auto kron(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename Eigen::ScalarBinaryOpTraits<typename DerivedA::Scalar,
                                                      typename DerivedB::Scalar>::ReturnType;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b.template cast<Scalar>();
  return out;
}

namespace detail {

inline int product(std::span<const int> dims) {
  return std::accumulate(dims.begin(), dims.end(), 1, std::multiplies<>());
}

// Mixed-radix digits of a flat index, most significant subsystem first.
inline void unflatten(int index, std::span<const int> dims, std::span<int> digits) {
  for (std::size_t k = dims.size(); k-- > 0;) {
    digits[k] = index % dims[k];
    index /= dims[k];
  }
}

inline int flatten(std::span<const int> digits, std::span<const int> dims) {
  int index = 0;
  for (std::size_t k = 0; k < dims.size(); ++k) index = index * dims[k] + digits[k];
  return index;
}

template <typename Derived>
void require_square(const Eigen::MatrixBase<Derived>& m, int dim, const char* what) {
  if (m.rows() != dim || m.cols() != dim)
    throw DimensionError(std::string(what) + ": expected " + std::to_string(dim) + "x" +
                         std::to_string(dim) + " matrix, got " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
}

}  // namespace detail

// Partial transpose of the listed subsystems of a multipartite operator.
template <typename Derived>
PlainOf<Derived> partial_transpose(const Eigen::MatrixBase<Derived>& m, std::span<const int> dims,
                                   std::span<const int> transposed) {
  const int n = detail::product(dims);
  detail::require_square(m, n, "partial_transpose");
  std::vector<char> flip(dims.size(), 0);
  for (int s : transposed) {
    if (s < 0 || s >= static_cast<int>(dims.size())) throw DimensionError("partial_transpose: bad subsystem");
    flip[s] = 1;
  }
  PlainOf<Derived> out(n, n);
  std::vector<int> row(dims.size()), col(dims.size());
  for (int r = 0; r < n; ++r) {
    detail::unflatten(r, dims, row);
    for (int c = 0; c < n; ++c) {
      detail::unflatten(c, dims, col);
      std::vector<int> src_row = row, src_col = col;
      for (std::size_t k = 0; k < dims.size(); ++k)
        if (flip[k]) std::swap(src_row[k], src_col[k]);
      out(r, c) = m(detail::flatten(src_row, dims), detail::flatten(src_col, dims));
    }
  }
  return out;
}

template <typename Derived>
PlainOf<Derived> partial_transpose(const Eigen::MatrixBase<Derived>& m, DimPair dims, Subsystem which) {
  const int d[2] = {dims.dA, dims.dB};
  const int s[1] = {which == Subsystem::A ? 0 : 1};
  return partial_transpose(m, std::span<const int>(d), std::span<const int>(s));
}

// Trace out the listed subsystems; the remaining ones keep their order.
template <typename Derived>
PlainOf<Derived> partial_trace(const Eigen::MatrixBase<Derived>& m, std::span<const int> dims,
                               std::span<const int> traced) {
  const int n = detail::product(dims);
  detail::require_square(m, n, "partial_trace");
  std::vector<char> gone(dims.size(), 0);
  for (int s : traced) {
    if (s < 0 || s >= static_cast<int>(dims.size())) throw DimensionError("partial_trace: bad subsystem");
    gone[s] = 1;
  }
  std::vector<int> kept_dims;
  for (std::size_t k = 0; k < dims.size(); ++k)
    if (!gone[k]) kept_dims.push_back(dims[k]);
  const int nk = detail::product(kept_dims);
  PlainOf<Derived> out = PlainOf<Derived>::Zero(nk, nk);
  std::vector<int> row(dims.size()), col(dims.size()), kr, kc;
  for (int r = 0; r < n; ++r) {
    detail::unflatten(r, dims, row);
    for (int c = 0; c < n; ++c) {
      detail::unflatten(c, dims, col);
      bool diagonal = true;
      kr.clear();
      kc.clear();
      for (std::size_t k = 0; k < dims.size(); ++k) {
        if (gone[k]) {
          if (row[k] != col[k]) {
            diagonal = false;
            break;
          }
        } else {
          kr.push_back(row[k]);
          kc.push_back(col[k]);
        }
      }
      if (diagonal) out(detail::flatten(kr, kept_dims), detail::flatten(kc, kept_dims)) += m(r, c);
    }
  }
  return out;
}

template <typename Derived>
PlainOf<Derived> partial_trace(const Eigen::MatrixBase<Derived>& m, DimPair dims, Subsystem traced) {
  const int d[2] = {dims.dA, dims.dB};
  const int s[1] = {traced == Subsystem::A ? 0 : 1};
  return partial_trace(m, std::span<const int>(d), std::span<const int>(s));
}

// [[Re M, -Im M], [Im M, Re M]].
template <typename Derived>
RealMatrix realify(const Eigen::MatrixBase<Derived>& m) {
  if (!is_hermitian(m)) throw NotHermitian("realify: input is not Hermitian");
  const Eigen::Index d = m.rows();
  RealMatrix out(2 * d, 2 * d);
  const RealMatrix re = m.real();
  const RealMatrix im = m.imag();
  out << re, -im, im, re;
  return out;
}

// Ascending eigenvalues of a Hermitian matrix. Computed from the realified
// matrix, where every eigenvalue appears twice; every second value is kept.
template <typename Derived>
RealVector eigvals_hermitian(const Eigen::MatrixBase<Derived>& m) {
  if (!is_hermitian(m)) throw NotHermitian("eigvals_hermitian: input is not Hermitian");
  const Eigen::Index d = m.rows();
  if (d == 0) return RealVector();
  Eigen::SelfAdjointEigenSolver<RealMatrix> solver(realify(symmetrize(m)), Eigen::EigenvaluesOnly);
  const RealVector& doubled = solver.eigenvalues();
  RealVector out(d);
  for (Eigen::Index i = 0; i < d; ++i) out(i) = 0.5 * (doubled(2 * i) + doubled(2 * i + 1));
  return out;
}

template <typename Derived>
double min_eigenvalue(const Eigen::MatrixBase<Derived>& m) {
  return eigvals_hermitian(m)(0);
}

// |phi_d><phi_d| with |phi_d> = sum_i |ii> / sqrt(d).
inline ComplexMatrix max_entangled(int d) {
  if (d < 1) throw InvalidArgument("max_entangled: dimension must be positive");
  ComplexVector ket = ComplexVector::Zero(d * d);
  for (int i = 0; i < d; ++i) ket(i * d + i) = 1.0 / std::sqrt(static_cast<double>(d));
  return ket * ket.adjoint();
}

inline ComplexMatrix ket_projector(const ComplexVector& ket) { return ket * ket.adjoint(); }

// Pauli matrices, computational basis = sigma_z eigenbasis.
inline ComplexMatrix pauli(char which) {
  ComplexMatrix m(2, 2);
  const Complex i(0.0, 1.0);
  switch (which) {
    case 'I': m << 1, 0, 0, 1; break;
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, -i, i, 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: throw InvalidArgument(std::string("pauli: unknown label ") + which);
  }
  return m;
}

}  // namespace mdiew
