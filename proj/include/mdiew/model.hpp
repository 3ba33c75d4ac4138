#pragma once

// Small affine modeling layer on top of StandardConicProgram. Variables are
// columns of the standard form; expressions are sparse affine combinations of
// them. Hermitian expressions carry real and imaginary parts per entry.

#include <map>
#include <span>
#include <string>
#include <vector>

#include "mdiew/conic.hpp"
#include "mdiew/linalg.hpp"

namespace mdiew {

class ScalarExpr {
 public:
  ScalarExpr() = default;
  ScalarExpr(double constant) : constant_(constant) {}  // NOLINT: implicit by design

  static ScalarExpr variable(int column, double coefficient = 1.0);

  ScalarExpr& operator+=(const ScalarExpr& other);
  ScalarExpr& operator-=(const ScalarExpr& other);
  ScalarExpr& operator*=(double factor);
  ScalarExpr operator-() const;

  friend ScalarExpr operator+(ScalarExpr l, const ScalarExpr& r) { return l += r; }
  friend ScalarExpr operator-(ScalarExpr l, const ScalarExpr& r) { return l -= r; }
  friend ScalarExpr operator*(ScalarExpr l, double f) { return l *= f; }
  friend ScalarExpr operator*(double f, ScalarExpr r) { return r *= f; }

  void add_term(int column, double coefficient);
  const std::map<int, double>& terms() const { return terms_; }
  double constant() const { return constant_; }
  bool is_constant() const { return terms_.empty(); }

  double value(const Eigen::VectorXd& x) const;

 private:
  std::map<int, double> terms_;
  double constant_ = 0.0;
};

// d x d Hermitian affine expression, stored entrywise.
class HermExpr {
 public:
  HermExpr() = default;
  explicit HermExpr(int d);

  static HermExpr constant(const ComplexMatrix& m);

  int dim() const { return d_; }
  ScalarExpr& re(int i, int j) { return re_[i * d_ + j]; }
  ScalarExpr& im(int i, int j) { return im_[i * d_ + j]; }
  const ScalarExpr& re(int i, int j) const { return re_[i * d_ + j]; }
  const ScalarExpr& im(int i, int j) const { return im_[i * d_ + j]; }

  HermExpr& operator+=(const HermExpr& other);
  HermExpr& operator-=(const HermExpr& other);
  HermExpr& operator*=(double factor);
  friend HermExpr operator+(HermExpr l, const HermExpr& r) { return l += r; }
  friend HermExpr operator-(HermExpr l, const HermExpr& r) { return l -= r; }
  friend HermExpr operator*(HermExpr l, double f) { return l *= f; }
  friend HermExpr operator*(double f, HermExpr r) { return r *= f; }

  // this + w * identity
  HermExpr plus_identity(const ScalarExpr& w) const;

  ScalarExpr trace() const;
  // Re tr(this * c) for a constant matrix c.
  ScalarExpr inner(const ComplexMatrix& c) const;

  HermExpr partial_transpose(std::span<const int> dims, std::span<const int> transposed) const;
  HermExpr partial_transpose(DimPair dims, Subsystem s) const;
  HermExpr partial_trace(std::span<const int> dims, std::span<const int> traced) const;
  HermExpr partial_trace(DimPair dims, Subsystem s) const;
  // Conjugation by a constant permutation: out(perm[i], perm[j]) = this(i, j).
  HermExpr permuted(const std::vector<int>& perm) const;

  ComplexMatrix value(const Eigen::VectorXd& x) const;

 private:
  int d_ = 0;
  std::vector<ScalarExpr> re_, im_;
};

class Model {
 public:
  ScalarExpr add_free();
  ScalarExpr add_nonneg();
  std::vector<ScalarExpr> add_soc(int n);
  // Hermitian PSD d x d variable H = (Z11 + Z22) + i (Z21 - Z12) with Z a
  // real 2d x 2d PSD block; every Hermitian PSD H is reached (Z = realify(H)/2)
  // and tr H = tr Z.
  HermExpr add_psd(int d);
  // Real symmetric PSD d x d variable (no imaginary part).
  HermExpr add_psd_real(int d);

  // lhs == 0; returns the row index.
  int add_equality(const ScalarExpr& lhs, const std::string& tag = {});
  // Entrywise lhs == 0 over the d^2 real degrees of freedom; returns the
  // first row index. Rows are ordered (i,i) re, then (i,j) re and im for i<j.
  int add_hermitian_equality(const HermExpr& lhs, const std::string& tag = {});

  void minimize(const ScalarExpr& objective) { objective_ = objective; }
  const ScalarExpr& objective() const { return objective_; }

  int num_columns() const { return columns_; }
  int num_rows() const { return static_cast<int>(rows_.size()); }

  StandardConicProgram compile() const;

 private:
  int allocate(Cone cone);

  int columns_ = 0;
  std::vector<Cone> cones_;
  std::vector<ScalarExpr> rows_;
  std::vector<std::string> tags_;
  ScalarExpr objective_;
};

}  // namespace mdiew
