#include "mdiew/model.hpp"

#include <cmath>

namespace mdiew {

namespace {

void check_dims(int d, std::span<const int> dims, const char* what) {
  if (detail::product(dims) != d)
    throw DimensionError(std::string(what) + ": subsystem dimensions do not multiply to " + std::to_string(d));
}

}  // namespace

ScalarExpr ScalarExpr::variable(int column, double coefficient) {
  ScalarExpr e;
  e.add_term(column, coefficient);
  return e;
}

void ScalarExpr::add_term(int column, double coefficient) {
  if (coefficient == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(column, coefficient);
  if (!inserted) {
    it->second += coefficient;
    if (it->second == 0.0) terms_.erase(it);
  }
}

ScalarExpr& ScalarExpr::operator+=(const ScalarExpr& other) {
  for (const auto& [col, coef] : other.terms_) add_term(col, coef);
  constant_ += other.constant_;
  return *this;
}

ScalarExpr& ScalarExpr::operator-=(const ScalarExpr& other) {
  for (const auto& [col, coef] : other.terms_) add_term(col, -coef);
  constant_ -= other.constant_;
  return *this;
}

ScalarExpr& ScalarExpr::operator*=(double factor) {
  if (factor == 0.0) {
    terms_.clear();
  } else {
    for (auto& [col, coef] : terms_) coef *= factor;
  }
  constant_ *= factor;
  return *this;
}

ScalarExpr ScalarExpr::operator-() const { return *this * -1.0; }

double ScalarExpr::value(const Eigen::VectorXd& x) const {
  double v = constant_;
  for (const auto& [col, coef] : terms_) v += coef * x(col);
  return v;
}

HermExpr::HermExpr(int d) : d_(d), re_(d * d), im_(d * d) {}

HermExpr HermExpr::constant(const ComplexMatrix& m) {
  HermExpr e(static_cast<int>(m.rows()));
  for (int i = 0; i < e.d_; ++i)
    for (int j = 0; j < e.d_; ++j) {
      e.re(i, j) = ScalarExpr(m(i, j).real());
      e.im(i, j) = ScalarExpr(m(i, j).imag());
    }
  return e;
}

HermExpr& HermExpr::operator+=(const HermExpr& other) {
  if (other.d_ != d_) throw DimensionError("HermExpr: dimension mismatch in +");
  for (std::size_t k = 0; k < re_.size(); ++k) {
    re_[k] += other.re_[k];
    im_[k] += other.im_[k];
  }
  return *this;
}

HermExpr& HermExpr::operator-=(const HermExpr& other) {
  if (other.d_ != d_) throw DimensionError("HermExpr: dimension mismatch in -");
  for (std::size_t k = 0; k < re_.size(); ++k) {
    re_[k] -= other.re_[k];
    im_[k] -= other.im_[k];
  }
  return *this;
}

HermExpr& HermExpr::operator*=(double factor) {
  for (std::size_t k = 0; k < re_.size(); ++k) {
    re_[k] *= factor;
    im_[k] *= factor;
  }
  return *this;
}

HermExpr HermExpr::plus_identity(const ScalarExpr& w) const {
  HermExpr out = *this;
  for (int i = 0; i < d_; ++i) out.re(i, i) += w;
  return out;
}

ScalarExpr HermExpr::trace() const {
  ScalarExpr t;
  for (int i = 0; i < d_; ++i) t += re(i, i);
  return t;
}

ScalarExpr HermExpr::inner(const ComplexMatrix& c) const {
  detail::require_square(c, d_, "HermExpr::inner");
  ScalarExpr out;
  for (int i = 0; i < d_; ++i)
    for (int j = 0; j < d_; ++j) {
      const Complex cji = c(j, i);
      if (cji.real() != 0.0) out += re(i, j) * cji.real();
      if (cji.imag() != 0.0) out -= im(i, j) * cji.imag();
    }
  return out;
}

HermExpr HermExpr::partial_transpose(std::span<const int> dims, std::span<const int> transposed) const {
  check_dims(d_, dims, "HermExpr::partial_transpose");
  std::vector<char> flip(dims.size(), 0);
  for (int s : transposed) flip.at(s) = 1;
  HermExpr out(d_);
  std::vector<int> row(dims.size()), col(dims.size());
  for (int r = 0; r < d_; ++r) {
    detail::unflatten(r, dims, row);
    for (int c = 0; c < d_; ++c) {
      detail::unflatten(c, dims, col);
      std::vector<int> sr = row, sc = col;
      for (std::size_t k = 0; k < dims.size(); ++k)
        if (flip[k]) std::swap(sr[k], sc[k]);
      const int i = detail::flatten(sr, dims), j = detail::flatten(sc, dims);
      out.re(r, c) = re(i, j);
      out.im(r, c) = im(i, j);
    }
  }
  return out;
}

HermExpr HermExpr::partial_transpose(DimPair dims, Subsystem s) const {
  const int d[2] = {dims.dA, dims.dB};
  const int t[1] = {s == Subsystem::A ? 0 : 1};
  return partial_transpose(std::span<const int>(d), std::span<const int>(t));
}

HermExpr HermExpr::partial_trace(std::span<const int> dims, std::span<const int> traced) const {
  check_dims(d_, dims, "HermExpr::partial_trace");
  std::vector<char> gone(dims.size(), 0);
  for (int s : traced) gone.at(s) = 1;
  std::vector<int> kept_dims;
  for (std::size_t k = 0; k < dims.size(); ++k)
    if (!gone[k]) kept_dims.push_back(dims[k]);
  HermExpr out(detail::product(kept_dims));
  std::vector<int> row(dims.size()), col(dims.size()), kr, kc;
  for (int r = 0; r < d_; ++r) {
    detail::unflatten(r, dims, row);
    for (int c = 0; c < d_; ++c) {
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
      if (!diagonal) continue;
      const int i = detail::flatten(kr, kept_dims), j = detail::flatten(kc, kept_dims);
      out.re(i, j) += re(r, c);
      out.im(i, j) += im(r, c);
    }
  }
  return out;
}

HermExpr HermExpr::partial_trace(DimPair dims, Subsystem s) const {
  const int d[2] = {dims.dA, dims.dB};
  const int t[1] = {s == Subsystem::A ? 0 : 1};
  return partial_trace(std::span<const int>(d), std::span<const int>(t));
}

HermExpr HermExpr::permuted(const std::vector<int>& perm) const {
  if (static_cast<int>(perm.size()) != d_) throw DimensionError("HermExpr::permuted: bad permutation size");
  HermExpr out(d_);
  for (int i = 0; i < d_; ++i)
    for (int j = 0; j < d_; ++j) {
      out.re(perm[i], perm[j]) = re(i, j);
      out.im(perm[i], perm[j]) = im(i, j);
    }
  return out;
}

ComplexMatrix HermExpr::value(const Eigen::VectorXd& x) const {
  ComplexMatrix m(d_, d_);
  for (int i = 0; i < d_; ++i)
    for (int j = 0; j < d_; ++j) m(i, j) = Complex(re(i, j).value(x), im(i, j).value(x));
  return m;
}

int Model::allocate(Cone cone) {
  const int first = columns_;
  cones_.push_back(cone);
  columns_ += cone.size();
  return first;
}

ScalarExpr Model::add_free() { return ScalarExpr::variable(allocate({ConeKind::Free, 1})); }

ScalarExpr Model::add_nonneg() { return ScalarExpr::variable(allocate({ConeKind::Nonneg, 1})); }

std::vector<ScalarExpr> Model::add_soc(int n) {
  const int first = allocate({ConeKind::SecondOrder, n});
  std::vector<ScalarExpr> out;
  for (int i = 0; i < n; ++i) out.push_back(ScalarExpr::variable(first + i));
  return out;
}

HermExpr Model::add_psd(int d) {
  const int n = 2 * d;
  const int first = allocate({ConeKind::Psd, n});
  // Z(i, j) as an expression of the svec columns.
  auto z = [&](int i, int j) {
    return ScalarExpr::variable(first + svec_index(i, j, n), i == j ? 1.0 : M_SQRT1_2);
  };
  HermExpr h(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      h.re(i, j) = z(i, j) + z(i + d, j + d);
      if (i != j) h.im(i, j) = z(i + d, j) - z(i, j + d);
    }
  return h;
}

HermExpr Model::add_psd_real(int d) {
  const int first = allocate({ConeKind::Psd, d});
  HermExpr h(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) h.re(i, j) = ScalarExpr::variable(first + svec_index(i, j, d), i == j ? 1.0 : M_SQRT1_2);
  return h;
}

int Model::add_equality(const ScalarExpr& lhs, const std::string& tag) {
  rows_.push_back(lhs);
  tags_.push_back(tag);
  return num_rows() - 1;
}

int Model::add_hermitian_equality(const HermExpr& lhs, const std::string& tag) {
  const int first = num_rows();
  const int d = lhs.dim();
  for (int i = 0; i < d; ++i) add_equality(lhs.re(i, i), tag + "[" + std::to_string(i) + "," + std::to_string(i) + "]");
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      const std::string at = tag + "[" + std::to_string(i) + "," + std::to_string(j) + "]";
      add_equality(lhs.re(i, j), at + "re");
      add_equality(lhs.im(i, j), at + "im");
    }
  return first;
}

StandardConicProgram Model::compile() const {
  StandardConicProgram p;
  p.c = Eigen::VectorXd::Zero(columns_);
  for (const auto& [col, coef] : objective_.terms()) p.c(col) += coef;
  std::vector<Eigen::Triplet<double>> trips;
  p.b.resize(num_rows());
  for (int r = 0; r < num_rows(); ++r) {
    for (const auto& [col, coef] : rows_[r].terms()) trips.emplace_back(r, col, coef);
    p.b(r) = -rows_[r].constant();
  }
  p.A.resize(num_rows(), columns_);
  p.A.setFromTriplets(trips.begin(), trips.end());
  // Adjacent scalar cones of the same kind are merged.
  for (const Cone& k : cones_) {
    const bool mergeable = k.kind == ConeKind::Free || k.kind == ConeKind::Nonneg;
    if (mergeable && !p.cones.empty() && p.cones.back().kind == k.kind) {
      p.cones.back().dim += k.dim;
    } else {
      p.cones.push_back(k);
    }
  }
  p.row_tags = tags_;
  return p;
}

}  // namespace mdiew
