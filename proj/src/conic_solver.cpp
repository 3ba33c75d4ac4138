#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "mdiew/conic.hpp"
#include "mdiew/errors.hpp"

namespace mdiew {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string to_string(ConeKind kind) {
  switch (kind) {
    case ConeKind::Free: return "free";
    case ConeKind::Nonneg: return "nonneg";
    case ConeKind::SecondOrder: return "soc";
    case ConeKind::Psd: return "psd";
  }
  return "?";
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::PrimalInfeasible: return "primal-infeasible";
    case SolveStatus::DualInfeasible: return "dual-infeasible";
    case SolveStatus::MaxIterations: return "max-iterations";
    case SolveStatus::NumericalFailure: return "numerical-failure";
  }
  return "?";
}

int StandardConicProgram::cone_columns() const {
  int total = 0;
  for (const Cone& k : cones) total += k.size();
  return total;
}

void StandardConicProgram::validate() const {
  if (A.rows() != b.size() || A.cols() != c.size())
    throw DimensionError("conic program: A is " + std::to_string(A.rows()) + "x" + std::to_string(A.cols()) +
                         ", b has " + std::to_string(b.size()) + ", c has " + std::to_string(c.size()));
  for (const Cone& k : cones)
    if (k.dim <= 0) throw DimensionError("conic program: empty cone");
  if (cone_columns() != c.size())
    throw DimensionError("conic program: cones cover " + std::to_string(cone_columns()) + " columns, expected " +
                         std::to_string(c.size()));
  if (!row_tags.empty() && static_cast<int>(row_tags.size()) != num_rows())
    throw DimensionError("conic program: row tag count differs from row count");
  if (!c.allFinite() || !b.allFinite()) throw InvalidArgument("conic program: non-finite data");
}

int svec_index(int i, int j, int n) {
  if (i < j) std::swap(i, j);
  return j * n - j * (j - 1) / 2 + (i - j);
}

VectorXd svec(const MatrixXd& m) {
  const int n = static_cast<int>(m.rows());
  VectorXd v(n * (n + 1) / 2);
  int k = 0;
  for (int j = 0; j < n; ++j)
    for (int i = j; i < n; ++i) v(k++) = i == j ? m(i, j) : M_SQRT2 * 0.5 * (m(i, j) + m(j, i));
  return v;
}

MatrixXd smat(const Eigen::Ref<const VectorXd>& v, int n) {
  MatrixXd m(n, n);
  int k = 0;
  for (int j = 0; j < n; ++j)
    for (int i = j; i < n; ++i) {
      const double value = i == j ? v(k) : v(k) * M_SQRT1_2;
      m(i, j) = value;
      m(j, i) = value;
      ++k;
    }
  return m;
}

DualityReport check_duality(const SolveResult& result, double eps_gap, double weak_tolerance) {
  DualityReport report;
  if (result.status != SolveStatus::Optimal) {
    report.violations.push_back("status is " + to_string(result.status));
    return report;
  }
  report.checked = true;
  report.absolute_gap = result.p_star - result.d_star;
  report.relative_gap = std::abs(report.absolute_gap) / (1.0 + std::abs(result.p_star));
  if (result.p_star < result.d_star - weak_tolerance) {
    report.weak_duality = false;
    char buf[160];
    std::snprintf(buf, sizeof buf, "weak duality violated: p*=%.12g < d*=%.12g", result.p_star, result.d_star);
    report.violations.emplace_back(buf);
  }
  if (report.relative_gap > eps_gap) {
    report.gap_within = false;
    char buf[160];
    std::snprintf(buf, sizeof buf, "relative gap %.3g exceeds %.3g", report.relative_gap, eps_gap);
    report.violations.emplace_back(buf);
  }
  return report;
}

namespace {

// ---------------------------------------------------------------------------
// Cone algebra on internal blocks (free cones are split before this point).

struct Block {
  ConeKind kind;
  int dim;
  int offset;
  int size;
};

struct Scaling {
  // Nonneg: w = sqrt(s/x).  SOC: theta, wbar.  PSD: R, Rinv, G = R R^T.
  VectorXd w;
  double theta = 1.0;
  MatrixXd R, Rinv, G;
  VectorXd lambda;
};

double soc_det(const Eigen::Ref<const VectorXd>& u) { return u(0) * u(0) - u.tail(u.size() - 1).squaredNorm(); }

VectorXd soc_J(const Eigen::Ref<const VectorXd>& u) {
  VectorXd out = -u;
  out(0) = u(0);
  return out;
}

// Square-root-like factor L with m = L L^T. Cholesky when possible, otherwise
// a symmetric eigen factor with eigenvalues clamped to a tiny positive floor.
MatrixXd psd_factor(const MatrixXd& m) {
  Eigen::LLT<MatrixXd> llt(m);
  if (llt.info() == Eigen::Success) {
    MatrixXd L = llt.matrixL();
    if (L.diagonal().minCoeff() > 0.0) return L;
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m);
  const double floor = std::max(1e-300, 1e-18 * std::abs(es.eigenvalues().maxCoeff()));
  VectorXd root = es.eigenvalues().cwiseMax(floor).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal();
}

Scaling nt_scaling(const Block& k, const Eigen::Ref<const VectorXd>& x, const Eigen::Ref<const VectorXd>& s) {
  Scaling sc;
  switch (k.kind) {
    case ConeKind::Nonneg:
      sc.w = (s.array() / x.array()).sqrt();
      sc.lambda = (x.array() * s.array()).sqrt();
      break;
    case ConeKind::SecondOrder: {
      const double dx = std::sqrt(std::max(soc_det(x), 1e-300));
      const double ds = std::sqrt(std::max(soc_det(s), 1e-300));
      const VectorXd xb = x / dx, sb = s / ds;
      const double gamma = std::sqrt(std::max((1.0 + xb.dot(sb)) / 2.0, 1e-300));
      sc.w = (sb + soc_J(xb)) / (2.0 * gamma);
      sc.theta = std::sqrt(ds / dx);
      // lambda = W x
      const int n = k.size;
      const double w0 = sc.w(0);
      const VectorXd w1 = sc.w.tail(n - 1);
      VectorXd l(n);
      l(0) = w0 * x(0) + w1.dot(x.tail(n - 1));
      l.tail(n - 1) = w1 * x(0) + x.tail(n - 1) + w1 * (w1.dot(x.tail(n - 1)) / (1.0 + w0));
      sc.lambda = sc.theta * l;
      break;
    }
    case ConeKind::Psd: {
      const MatrixXd X = smat(x, k.dim), S = smat(s, k.dim);
      const MatrixXd L1 = psd_factor(X), L2 = psd_factor(S);
      Eigen::JacobiSVD<MatrixXd> svd(L2.transpose() * L1, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const VectorXd lam = svd.singularValues().cwiseMax(1e-300);
      sc.R = L1 * svd.matrixV() * lam.cwiseInverse().cwiseSqrt().asDiagonal();
      sc.Rinv = sc.R.inverse();
      sc.G = sc.R * sc.R.transpose();
      sc.lambda = svec(MatrixXd(lam.asDiagonal()));
      break;
    }
    case ConeKind::Free: break;
  }
  return sc;
}

// W u
VectorXd apply_W(const Block& k, const Scaling& sc, const Eigen::Ref<const VectorXd>& u) {
  switch (k.kind) {
    case ConeKind::Nonneg: return sc.w.cwiseProduct(u);
    case ConeKind::SecondOrder: {
      const int n = k.size;
      const double w0 = sc.w(0);
      const VectorXd w1 = sc.w.tail(n - 1);
      VectorXd out(n);
      out(0) = w0 * u(0) + w1.dot(u.tail(n - 1));
      out.tail(n - 1) = w1 * u(0) + u.tail(n - 1) + w1 * (w1.dot(u.tail(n - 1)) / (1.0 + w0));
      return sc.theta * out;
    }
    case ConeKind::Psd: return svec(sc.Rinv * smat(u, k.dim) * sc.Rinv.transpose());
    case ConeKind::Free: break;
  }
  return u;
}

// W^{-T} u; for the NT scaling W is symmetric on Nonneg and SOC blocks.
VectorXd apply_Winv_T(const Block& k, const Scaling& sc, const Eigen::Ref<const VectorXd>& u) {
  switch (k.kind) {
    case ConeKind::Nonneg: return u.cwiseQuotient(sc.w);
    case ConeKind::SecondOrder: {
      // Wbar^{-1} = J Wbar J
      Scaling flipped = sc;
      flipped.theta = 1.0 / sc.theta;
      return soc_J(apply_W(k, flipped, soc_J(u)));
    }
    case ConeKind::Psd: return svec(sc.R.transpose() * smat(u, k.dim) * sc.R);
    case ConeKind::Free: break;
  }
  return u;
}

// W^T u
VectorXd apply_W_T(const Block& k, const Scaling& sc, const Eigen::Ref<const VectorXd>& u) {
  if (k.kind == ConeKind::Psd) return svec(sc.Rinv.transpose() * smat(u, k.dim) * sc.Rinv);
  return apply_W(k, sc, u);
}

// H^{-1} u = W^{-1} W^{-T} u
VectorXd apply_Hinv(const Block& k, const Scaling& sc, const Eigen::Ref<const VectorXd>& u) {
  switch (k.kind) {
    case ConeKind::Nonneg: return u.cwiseQuotient(sc.w.cwiseAbs2());
    case ConeKind::SecondOrder: {
      const VectorXd v = soc_J(sc.w);
      return (2.0 * v * v.dot(u) - soc_J(u)) / (sc.theta * sc.theta);
    }
    case ConeKind::Psd: return svec(sc.G * smat(u, k.dim) * sc.G);
    case ConeKind::Free: break;
  }
  return u;
}

// Jordan product u o v.
VectorXd jordan(const Block& k, const Eigen::Ref<const VectorXd>& u, const Eigen::Ref<const VectorXd>& v) {
  switch (k.kind) {
    case ConeKind::Nonneg: return u.cwiseProduct(v);
    case ConeKind::SecondOrder: {
      VectorXd out(k.size);
      out(0) = u.dot(v);
      out.tail(k.size - 1) = u(0) * v.tail(k.size - 1) + v(0) * u.tail(k.size - 1);
      return out;
    }
    case ConeKind::Psd: {
      const MatrixXd U = smat(u, k.dim), V = smat(v, k.dim);
      return svec(0.5 * (U * V + V * U));
    }
    case ConeKind::Free: break;
  }
  return u;
}

// lambda^{-1} o v, i.e. the u solving lambda o u = v. For PSD blocks lambda
// is diagonal.
VectorXd jordan_div(const Block& k, const Eigen::Ref<const VectorXd>& lambda, const Eigen::Ref<const VectorXd>& v) {
  switch (k.kind) {
    case ConeKind::Nonneg: return v.cwiseQuotient(lambda);
    case ConeKind::SecondOrder: {
      const int n = k.size;
      const double l0 = lambda(0);
      const VectorXd l1 = lambda.tail(n - 1);
      VectorXd out(n);
      out(0) = (l0 * v(0) - l1.dot(v.tail(n - 1))) / (l0 * l0 - l1.squaredNorm());
      out.tail(n - 1) = (v.tail(n - 1) - out(0) * l1) / l0;
      return out;
    }
    case ConeKind::Psd: {
      const MatrixXd V = smat(v, k.dim);
      MatrixXd out(k.dim, k.dim);
      VectorXd diag(k.dim);
      for (int i = 0; i < k.dim; ++i) diag(i) = lambda(svec_index(i, i, k.dim));
      for (int j = 0; j < k.dim; ++j)
        for (int i = 0; i < k.dim; ++i) out(i, j) = 2.0 * V(i, j) / (diag(i) + diag(j));
      return svec(out);
    }
    case ConeKind::Free: break;
  }
  return v;
}

VectorXd identity(const Block& k) {
  switch (k.kind) {
    case ConeKind::Nonneg: return VectorXd::Ones(k.size);
    case ConeKind::SecondOrder: {
      VectorXd e = VectorXd::Zero(k.size);
      e(0) = 1.0;
      return e;
    }
    case ConeKind::Psd: return svec(MatrixXd::Identity(k.dim, k.dim));
    case ConeKind::Free: break;
  }
  return VectorXd::Zero(k.size);
}

int degree(const Block& k) { return k.kind == ConeKind::SecondOrder ? 1 : k.dim; }

// Largest alpha in [0, inf] with u + alpha du in the cone; u is interior.
double max_step(const Block& k, const Eigen::Ref<const VectorXd>& u, const Eigen::Ref<const VectorXd>& du) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (k.kind) {
    case ConeKind::Nonneg: {
      double alpha = inf;
      for (int i = 0; i < k.size; ++i)
        if (du(i) < 0.0) alpha = std::min(alpha, -u(i) / du(i));
      return alpha;
    }
    case ConeKind::SecondOrder: {
      // Roots of det(u + a du) = A a^2 + 2 B a + C with u0 + a du0 >= 0.
      const double A = soc_det(du);
      const double B = u(0) * du(0) - u.tail(k.size - 1).dot(du.tail(k.size - 1));
      const double C = std::max(soc_det(u), 0.0);
      double alpha = inf;
      if (du(0) < 0.0) alpha = -u(0) / du(0);
      const double disc = B * B - A * C;
      if (A == 0.0) {
        if (B < 0.0) alpha = std::min(alpha, -C / (2.0 * B));
      } else if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        const double q = -(B + std::copysign(sq, B));
        const double r1 = q / A;
        const double r2 = q != 0.0 ? C / q : inf;
        for (double r : {r1, r2})
          if (r > 0.0) alpha = std::min(alpha, r);
      }
      return alpha;
    }
    case ConeKind::Psd: {
      const MatrixXd L = psd_factor(smat(u, k.dim));
      const MatrixXd Linv = L.inverse();
      const MatrixXd M = Linv * smat(du, k.dim) * Linv.transpose();
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
      const double lo = es.eigenvalues()(0);
      return lo < 0.0 ? -1.0 / lo : inf;
    }
    case ConeKind::Free: break;
  }
  return inf;
}

// Minimum "eigenvalue" of u in the cone's Jordan algebra.
double min_eigenvalue(const Block& k, const Eigen::Ref<const VectorXd>& u) {
  switch (k.kind) {
    case ConeKind::Nonneg: return u.minCoeff();
    case ConeKind::SecondOrder: return u(0) - u.tail(k.size - 1).norm();
    case ConeKind::Psd: {
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(smat(u, k.dim), Eigen::EigenvaluesOnly);
      return es.eigenvalues()(0);
    }
    case ConeKind::Free: return 0.0;
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Presolve: split free cones and remove dependent equality rows.

struct RowGroup {
  std::vector<int> rows;  // original row indices
  // Internal rows are U^T (original rows); identity when U is empty.
  MatrixXd U;
  int first_internal = 0;
  int internal_rows = 0;
};

struct Presolved {
  RealSparse A;  // internal rows x internal cols
  VectorXd b, c;
  std::vector<Block> blocks;
  // Original column j maps to internal column plus[j] (and minus[j] >= 0
  // for a split free column).
  std::vector<int> plus, minus;
  std::vector<RowGroup> groups;
  int original_rows = 0;
  bool inconsistent = false;
  VectorXd farkas;  // original-row certificate when inconsistent
};

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

Presolved presolve(const StandardConicProgram& p, const SolverSettings& settings) {
  Presolved out;
  out.original_rows = p.num_rows();
  const int n = p.num_vars();
  out.plus.assign(n, -1);
  out.minus.assign(n, -1);

  // Columns: nonneg/soc/psd blocks keep their order; free columns become a
  // trailing nonneg block of twice their size.
  int next = 0, free_count = 0, col = 0;
  for (const Cone& k : p.cones) {
    if (k.kind == ConeKind::Free) {
      free_count += k.dim;
    } else {
      out.blocks.push_back({k.kind, k.dim, next, k.size()});
      for (int i = 0; i < k.size(); ++i) out.plus[col + i] = next + i;
      next += k.size();
    }
    col += k.size();
  }
  if (free_count > 0) {
    col = 0;
    int f = 0;
    for (const Cone& k : p.cones) {
      if (k.kind == ConeKind::Free)
        for (int i = 0; i < k.dim; ++i, ++f) {
          out.plus[col + i] = next + f;
          out.minus[col + i] = next + free_count + f;
        }
      col += k.size();
    }
    out.blocks.push_back({ConeKind::Nonneg, 2 * free_count, next, 2 * free_count});
    next += 2 * free_count;
  }
  const int n_int = next;

  // Rows sharing a column are grouped; rank is decided per group.
  const int m = p.num_rows();
  DisjointSets sets(m);
  for (int j = 0; j < p.A.outerSize(); ++j) {
    int first = -1;
    for (RealSparse::InnerIterator it(p.A, j); it; ++it) {
      if (it.value() == 0.0) continue;
      if (first < 0) first = static_cast<int>(it.row());
      else sets.unite(first, static_cast<int>(it.row()));
    }
  }
  std::vector<std::vector<int>> members(m);
  for (int i = 0; i < m; ++i) members[sets.find(i)].push_back(i);

  // Row-major copy for fast row access.
  const Eigen::SparseMatrix<double, Eigen::RowMajor> Ar = p.A;
  std::vector<Eigen::Triplet<double>> trips;
  std::vector<double> rhs;
  out.farkas = VectorXd::Zero(m);
  const double b_scale = std::max(1.0, p.b.lpNorm<Eigen::Infinity>());

  auto emit_entry = [&](int row, int j, double v) {
    trips.emplace_back(row, out.plus[j], v);
    if (out.minus[j] >= 0) trips.emplace_back(row, out.minus[j], -v);
  };

  for (int root = 0; root < m; ++root) {
    const std::vector<int>& rows = members[root];
    if (rows.empty()) continue;
    RowGroup g;
    g.rows = rows;
    g.first_internal = static_cast<int>(rhs.size());

    std::vector<int> cols;
    for (int r : rows)
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(Ar, r); it; ++it)
        if (it.value() != 0.0) cols.push_back(static_cast<int>(it.col()));
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());

    const int r = static_cast<int>(rows.size());
    MatrixXd B = MatrixXd::Zero(r, static_cast<int>(cols.size()));
    VectorXd bg(r);
    for (int i = 0; i < r; ++i) {
      bg(i) = p.b(rows[i]);
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(Ar, rows[i]); it; ++it) {
        const auto pos = std::lower_bound(cols.begin(), cols.end(), static_cast<int>(it.col())) - cols.begin();
        B(i, pos) = it.value();
      }
    }

    int rank = 0;
    MatrixXd U;
    if (!cols.empty()) {
      Eigen::ColPivHouseholderQR<MatrixXd> qr(B);
      const VectorXd diag = qr.matrixQR().diagonal().cwiseAbs();
      const double top = diag.size() > 0 ? diag(0) : 0.0;
      for (int i = 0; i < diag.size(); ++i)
        if (diag(i) > settings.eps_rank * std::max(1.0, top) && diag(i) > 1e-13) ++rank;
      U = qr.householderQ() * MatrixXd::Identity(r, r);
    }

    if (rank == r) {
      for (int i = 0; i < r; ++i) {
        const int row = static_cast<int>(rhs.size());
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(Ar, rows[i]); it; ++it)
          if (it.value() != 0.0) emit_entry(row, static_cast<int>(it.col()), it.value());
        rhs.push_back(bg(i));
      }
      g.internal_rows = r;
    } else {
      if (cols.empty()) U = MatrixXd::Identity(r, r);
      const MatrixXd N = U.rightCols(r - rank);
      const VectorXd resid = N.transpose() * bg;
      if (resid.lpNorm<Eigen::Infinity>() > std::sqrt(settings.eps_rank) * b_scale) {
        out.inconsistent = true;
        const VectorXd y = N * resid;
        const double by = bg.dot(y);
        for (int i = 0; i < r; ++i) out.farkas(rows[i]) = y(i) / by;
        return out;
      }
      g.U = U.leftCols(rank);
      const MatrixXd Bk = g.U.transpose() * B;
      const VectorXd bk = g.U.transpose() * bg;
      for (int i = 0; i < rank; ++i) {
        const int row = static_cast<int>(rhs.size());
        for (int j = 0; j < static_cast<int>(cols.size()); ++j)
          if (Bk(i, j) != 0.0) emit_entry(row, cols[j], Bk(i, j));
        rhs.push_back(bk(i));
      }
      g.internal_rows = rank;
    }
    out.groups.push_back(std::move(g));
  }

  out.A.resize(static_cast<int>(rhs.size()), n_int);
  out.A.setFromTriplets(trips.begin(), trips.end());
  out.b = Eigen::Map<const VectorXd>(rhs.data(), static_cast<int>(rhs.size()));
  out.c = VectorXd::Zero(n_int);
  for (int j = 0; j < n; ++j) {
    out.c(out.plus[j]) += p.c(j);
    if (out.minus[j] >= 0) out.c(out.minus[j]) -= p.c(j);
  }
  return out;
}

VectorXd map_x_back(const Presolved& ps, const VectorXd& xi) {
  VectorXd x(ps.plus.size());
  for (std::size_t j = 0; j < ps.plus.size(); ++j)
    x(j) = xi(ps.plus[j]) - (ps.minus[j] >= 0 ? xi(ps.minus[j]) : 0.0);
  return x;
}

VectorXd map_y_back(const Presolved& ps, const VectorXd& yi) {
  VectorXd y = VectorXd::Zero(ps.original_rows);
  for (const RowGroup& g : ps.groups) {
    const int r = static_cast<int>(g.rows.size());
    if (g.U.size() == 0) {
      for (int i = 0; i < r; ++i) y(g.rows[i]) = yi(g.first_internal + i);
    } else {
      const VectorXd yg = g.U * yi.segment(g.first_internal, g.internal_rows);
      for (int i = 0; i < r; ++i) y(g.rows[i]) = yg(i);
    }
  }
  return y;
}

// ---------------------------------------------------------------------------
// Interior-point iterations on the presolved problem.

struct BlockRows {
  std::vector<int> rows;  // internal rows touching the block
  MatrixXd dense;         // rows x block columns (PSD blocks)
  RealSparse sparse;      // rows x block columns (other blocks)
};

class Ipm {
 public:
  Ipm(const Presolved& ps, const SolverSettings& settings) : ps_(ps), set_(settings) {
    m_ = static_cast<int>(ps.b.size());
    n_ = static_cast<int>(ps.c.size());
    At_ = ps.A.transpose();
    nu_ = 0;
    for (const Block& k : ps.blocks) nu_ += degree(k);
    const Eigen::SparseMatrix<double, Eigen::RowMajor> Ar = ps.A;
    for (const Block& k : ps.blocks) {
      BlockRows br;
      RealSparse sub = ps.A.middleCols(k.offset, k.size);
      std::vector<char> touched(m_, 0);
      for (int j = 0; j < sub.outerSize(); ++j)
        for (RealSparse::InnerIterator it(sub, j); it; ++it) touched[it.row()] = 1;
      for (int i = 0; i < m_; ++i)
        if (touched[i]) br.rows.push_back(i);
      std::vector<int> local(m_, -1);
      for (std::size_t i = 0; i < br.rows.size(); ++i) local[br.rows[i]] = static_cast<int>(i);
      std::vector<Eigen::Triplet<double>> trips;
      for (int j = 0; j < sub.outerSize(); ++j)
        for (RealSparse::InnerIterator it(sub, j); it; ++it) trips.emplace_back(local[it.row()], j, it.value());
      br.sparse.resize(static_cast<int>(br.rows.size()), k.size);
      br.sparse.setFromTriplets(trips.begin(), trips.end());
      if (k.kind == ConeKind::Psd) {
        br.dense = MatrixXd(br.sparse);
        br.sparse = RealSparse();
      }
      rows_.push_back(std::move(br));
    }
  }

  struct Point {
    VectorXd x, y, s;
    double tau = 1.0, kappa = 1.0;
  };

  enum class Outcome { Converged, PrimalInfeasible, DualInfeasible, MaxIterations, Stalled };

  Outcome run(Point& pt, int& iterations, const std::function<bool(const Point&)>& accept) {
    pt.x = VectorXd(n_);
    pt.s = VectorXd(n_);
    for (const Block& k : ps_.blocks) {
      pt.x.segment(k.offset, k.size) = identity(k);
      pt.s.segment(k.offset, k.size) = identity(k);
    }
    pt.y = VectorXd::Zero(m_);
    pt.tau = pt.kappa = 1.0;

    const double b_scale = std::max(1.0, ps_.b.lpNorm<Eigen::Infinity>());
    const double c_scale = std::max(1.0, ps_.c.lpNorm<Eigen::Infinity>());
    int stalls = 0, polish = 0;
    // Late iterations can lose accuracy once the iterates approach the
    // boundary; the best point seen so far is the fallback answer.
    Point best = pt;
    double best_score = std::numeric_limits<double>::infinity();
    auto fallback = [&](Outcome failure) {
      if (best_score <= 1.0 && accept(best)) {
        pt = best;
        return Outcome::Converged;
      }
      return failure;
    };

    for (iterations = 0; iterations <= set_.max_iterations; ++iterations) {
      const VectorXd rp = pt.tau * ps_.b - ps_.A * pt.x;
      const VectorXd rd = pt.tau * ps_.c - At_ * pt.y - pt.s;
      const double cx = ps_.c.dot(pt.x), by = ps_.b.dot(pt.y);
      const double rg = pt.kappa + cx - by;
      const double mu = (pt.x.dot(pt.s) + pt.tau * pt.kappa) / (nu_ + 1);

      const double pres = rp.lpNorm<Eigen::Infinity>() / pt.tau;
      const double dres = rd.lpNorm<Eigen::Infinity>() / pt.tau;
      const double pobj = cx / pt.tau, dobj = by / pt.tau;
      const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));
      if (set_.verbose)
        std::fprintf(stderr, "%3d  p=% .10e d=% .10e pres=%.2e dres=%.2e gap=%.2e tau=%.2e kap=%.2e mu=%.2e\n",
                     iterations, pobj, dobj, pres, dres, gap, pt.tau, pt.kappa, mu);

      const double score =
          std::max({pres / (set_.eps_primal * b_scale), dres / (set_.eps_dual * c_scale), gap / set_.eps_gap});
      // after convergence, keep stepping while the score improves
      if (score <= 1.0 && accept(pt)) {
        if (score < best_score) {
          best_score = score;
          best = pt;
          if (++polish > 4 || score < 1e-3) return fallback(Outcome::Converged);
        } else {
          return fallback(Outcome::Converged);
        }
      } else if (polish > 0) {
        return fallback(Outcome::Converged);
      }
      if (polish == 0 && score < best_score) {
        best_score = score;
        best = pt;
      }
      if (by > 0.0 && (At_ * pt.y + pt.s).lpNorm<Eigen::Infinity>() <= set_.eps_infeasible * by)
        return Outcome::PrimalInfeasible;
      if (cx < 0.0 && (ps_.A * pt.x).lpNorm<Eigen::Infinity>() <= set_.eps_infeasible * (-cx))
        return Outcome::DualInfeasible;
      if (iterations == set_.max_iterations) break;

      // Scaling and normal equations.
      scalings_.clear();
      for (const Block& k : ps_.blocks)
        scalings_.push_back(nt_scaling(k, pt.x.segment(k.offset, k.size), pt.s.segment(k.offset, k.size)));
      lambda_ = VectorXd(n_);
      for (std::size_t i = 0; i < ps_.blocks.size(); ++i)
        lambda_.segment(ps_.blocks[i].offset, ps_.blocks[i].size) = scalings_[i].lambda;
      if (!factor()) return fallback(Outcome::Stalled);
      const VectorXd Hc = hinv(ps_.c);
      p_ = solve_M(ps_.A * Hc + ps_.b);
      dx1_ = hinv(At_ * p_ - ps_.c);
      denom_base_ = -ps_.c.dot(dx1_) + ps_.b.dot(p_);

      // Predictor.
      Direction aff = direction(pt, rp, rd, rg, -lambda_, -pt.tau * pt.kappa);
      const double alpha_aff = std::min(1.0, step_to_boundary(pt, aff));
      const double sigma = std::clamp(std::pow(1.0 - alpha_aff, 3), 0.0, 1.0);

      // Corrector.
      VectorXd rhat(n_);
      for (std::size_t i = 0; i < ps_.blocks.size(); ++i) {
        const Block& k = ps_.blocks[i];
        const Scaling& sc = scalings_[i];
        const VectorXd l = sc.lambda;
        const VectorXd wdx = apply_W(k, sc, aff.dx.segment(k.offset, k.size));
        const VectorXd wds = apply_Winv_T(k, sc, aff.ds.segment(k.offset, k.size));
        VectorXd v = -jordan(k, l, l) - jordan(k, wdx, wds) + sigma * mu * identity(k);
        rhat.segment(k.offset, k.size) = jordan_div(k, l, v);
      }
      const double eta = 1.0 - sigma;
      const double r4 = -pt.tau * pt.kappa - aff.dtau * aff.dkappa + sigma * mu;
      Direction dir = direction(pt, eta * rp, eta * rd, eta * rg, rhat, r4);
      const double alpha_max = step_to_boundary(pt, dir);
      const double alpha = std::min(1.0, 0.99 * alpha_max);
      if (!std::isfinite(alpha) || !dir.dx.allFinite() || !dir.dy.allFinite()) return fallback(Outcome::Stalled);

      pt.x += alpha * dir.dx;
      pt.y += alpha * dir.dy;
      pt.s += alpha * dir.ds;
      pt.tau += alpha * dir.dtau;
      pt.kappa += alpha * dir.dkappa;

      stalls = alpha < 1e-8 ? stalls + 1 : 0;
      if (stalls >= 3 || pt.tau <= 0.0 || pt.kappa <= 0.0) return fallback(Outcome::Stalled);
    }
    return fallback(Outcome::MaxIterations);
  }

 private:
  struct Direction {
    VectorXd dx, dy, ds;
    double dtau = 0.0, dkappa = 0.0;
  };

  VectorXd hinv(const VectorXd& u) const {
    VectorXd out(n_);
    for (std::size_t i = 0; i < ps_.blocks.size(); ++i) {
      const Block& k = ps_.blocks[i];
      out.segment(k.offset, k.size) = apply_Hinv(k, scalings_[i], u.segment(k.offset, k.size));
    }
    return out;
  }

  VectorXd wt(const VectorXd& u) const {
    VectorXd out(n_);
    for (std::size_t i = 0; i < ps_.blocks.size(); ++i) {
      const Block& k = ps_.blocks[i];
      out.segment(k.offset, k.size) = apply_W_T(k, scalings_[i], u.segment(k.offset, k.size));
    }
    return out;
  }

  VectorXd w(const VectorXd& u) const {
    VectorXd out(n_);
    for (std::size_t i = 0; i < ps_.blocks.size(); ++i) {
      const Block& k = ps_.blocks[i];
      out.segment(k.offset, k.size) = apply_W(k, scalings_[i], u.segment(k.offset, k.size));
    }
    return out;
  }

  VectorXd winv_t(const VectorXd& u) const {
    VectorXd out(n_);
    for (std::size_t i = 0; i < ps_.blocks.size(); ++i) {
      const Block& k = ps_.blocks[i];
      out.segment(k.offset, k.size) = apply_Winv_T(k, scalings_[i], u.segment(k.offset, k.size));
    }
    return out;
  }

  // Assemble and factor M = A H^{-1} A^T.
  bool factor() {
    MatrixXd M = MatrixXd::Zero(m_, m_);
    for (std::size_t i = 0; i < ps_.blocks.size(); ++i) {
      const Block& k = ps_.blocks[i];
      const Scaling& sc = scalings_[i];
      const BlockRows& br = rows_[i];
      const int r = static_cast<int>(br.rows.size());
      if (r == 0) continue;
      MatrixXd local;
      switch (k.kind) {
        case ConeKind::Nonneg: {
          const VectorXd d = sc.w.cwiseAbs2().cwiseInverse();
          local = MatrixXd(br.sparse * d.asDiagonal() * br.sparse.transpose());
          break;
        }
        case ConeKind::SecondOrder: {
          const VectorXd v = soc_J(sc.w);
          const VectorXd Av = br.sparse * v;
          VectorXd jd = -VectorXd::Ones(k.size);
          jd(0) = 1.0;
          local = MatrixXd(br.sparse * jd.asDiagonal() * br.sparse.transpose());
          local = (2.0 * Av * Av.transpose() - local) / (sc.theta * sc.theta);
          break;
        }
        case ConeKind::Psd: {
          // Rows of G A_j G for every constraint row touching the block.
          MatrixXd GAG(r, k.size);
          for (int a = 0; a < r; ++a) GAG.row(a) = svec(sc.G * smat(br.dense.row(a).transpose(), k.dim) * sc.G);
          local = br.dense * GAG.transpose();
          break;
        }
        case ConeKind::Free: break;
      }
      for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b) M(br.rows[a], br.rows[b]) += local(a, b);
    }
    M = 0.5 * (M + M.transpose());
    chol_.compute(M);
    if (chol_.info() != Eigen::Success) {
      const double reg = 1e-14 * std::max(1.0, M.diagonal().maxCoeff());
      M.diagonal().array() += reg;
      chol_.compute(M);
      if (chol_.info() != Eigen::Success) return false;
    }
    Mmat_ = std::move(M);
    return true;
  }

  VectorXd solve_M(const VectorXd& rhs) const {
    VectorXd sol = chol_.solve(rhs);
    for (int i = 0; i < 2; ++i) sol += chol_.solve(rhs - Mmat_ * sol);
    return sol;
  }

  Direction solve_system(const Point& pt, const VectorXd& r1, const VectorXd& r2, double r3, const VectorXd& rhat,
                         double r4) const {
    Direction d;
    const VectorXd g = wt(rhat) - r2;
    const VectorXd q = solve_M(r1 - ps_.A * hinv(g));
    const VectorXd dx0 = hinv(At_ * q + g);
    const double denom = denom_base_ + pt.kappa / pt.tau;
    d.dtau = (r3 + ps_.c.dot(dx0) - ps_.b.dot(q) + r4 / pt.tau) / denom;
    d.dy = q + p_ * d.dtau;
    d.dx = dx0 + dx1_ * d.dtau;
    // The dual equation is kept exact; complementarity absorbs the rounding.
    d.ds = r2 - At_ * d.dy + ps_.c * d.dtau;
    d.dkappa = (r4 - pt.kappa * d.dtau) / pt.tau;
    return d;
  }

  Direction direction(const Point& pt, const VectorXd& r1, const VectorXd& r2, double r3, const VectorXd& rhat,
                      double r4) const {
    Direction d = solve_system(pt, r1, r2, r3, rhat, r4);
    // One round of iterative refinement on the linear equations.
    const VectorXd e1 = r1 - (ps_.A * d.dx - ps_.b * d.dtau);
    const VectorXd e2 = r2 - (At_ * d.dy + d.ds - ps_.c * d.dtau);
    const double e3 = r3 - (-ps_.c.dot(d.dx) + ps_.b.dot(d.dy) - d.dkappa);
    const double e4 = r4 - (pt.kappa * d.dtau + pt.tau * d.dkappa);
    const VectorXd ec = rhat - w(d.dx) - winv_t(d.ds);
    const double scale = std::max({1.0, r1.lpNorm<Eigen::Infinity>(), r2.lpNorm<Eigen::Infinity>(), std::abs(r3),
                                   rhat.lpNorm<Eigen::Infinity>()});
    const double err = std::max({e1.lpNorm<Eigen::Infinity>(), e2.lpNorm<Eigen::Infinity>(), std::abs(e3),
                                 std::abs(e4), ec.lpNorm<Eigen::Infinity>()});
    if (err > 1e-14 * scale) {
      const Direction c = solve_system(pt, e1, e2, e3, ec, e4);
      d.dx += c.dx;
      d.dy += c.dy;
      d.ds += c.ds;
      d.dtau += c.dtau;
      d.dkappa += c.dkappa;
    }
    return d;
  }

  double step_to_boundary(const Point& pt, const Direction& d) const {
    double alpha = std::numeric_limits<double>::infinity();
    for (const Block& k : ps_.blocks) {
      alpha = std::min(alpha, max_step(k, pt.x.segment(k.offset, k.size), d.dx.segment(k.offset, k.size)));
      alpha = std::min(alpha, max_step(k, pt.s.segment(k.offset, k.size), d.ds.segment(k.offset, k.size)));
    }
    if (d.dtau < 0.0) alpha = std::min(alpha, -pt.tau / d.dtau);
    if (d.dkappa < 0.0) alpha = std::min(alpha, -pt.kappa / d.dkappa);
    return alpha;
  }

  const Presolved& ps_;
  const SolverSettings& set_;
  int m_ = 0, n_ = 0, nu_ = 0;
  RealSparse At_;
  std::vector<BlockRows> rows_;
  std::vector<Scaling> scalings_;
  VectorXd lambda_;
  Eigen::LLT<MatrixXd> chol_;
  MatrixXd Mmat_;
  VectorXd p_, dx1_;
  double denom_base_ = 0.0;
};

struct OriginalMetrics {
  VectorXd s;
  Residuals residuals;
  double p_star = 0.0, d_star = 0.0;
};

OriginalMetrics original_metrics(const StandardConicProgram& p, const VectorXd& x, const VectorXd& y,
                                 const VectorXd& s_iter) {
  OriginalMetrics out;
  const VectorXd slack = p.c - p.A.transpose() * y;
  out.s = s_iter;
  out.residuals.primal = (p.A * x - p.b).lpNorm<Eigen::Infinity>();
  out.residuals.dual = (slack - s_iter).lpNorm<Eigen::Infinity>();
  out.p_star = p.c.dot(x);
  out.d_star = p.b.dot(y);
  out.residuals.relative_gap = std::abs(out.p_star - out.d_star) / (1.0 + std::abs(out.p_star));
  out.residuals.complementarity = x.dot(slack);
  double violation = 0.0;
  int offset = 0;
  for (const Cone& k : p.cones) {
    if (k.kind == ConeKind::Free) {
      violation = std::max(violation, slack.segment(offset, k.size()).lpNorm<Eigen::Infinity>());
    } else {
      const Block b{k.kind, k.dim, 0, k.size()};
      violation = std::max(violation, -min_eigenvalue(b, slack.segment(offset, k.size())));
    }
    offset += k.size();
  }
  out.residuals.dual_cone_violation = violation;
  return out;
}

SolveResult solve_unobserved(const StandardConicProgram& program, const SolverSettings& settings) {
  program.validate();
  SolveResult result;
  const Presolved ps = presolve(program, settings);
  const int n = program.num_vars();
  const int m = program.num_rows();

  if (ps.inconsistent) {
    result.status = SolveStatus::PrimalInfeasible;
    result.x = VectorXd::Zero(n);
    result.y = ps.farkas;
    result.s = -(program.A.transpose() * ps.farkas);
    result.d_star = program.b.dot(ps.farkas);
    result.message = "inconsistent equality constraints";
    return result;
  }

  if (ps.c.size() == 0) {
    result.x = VectorXd::Zero(0);
    result.y = VectorXd::Zero(m);
    result.s = VectorXd::Zero(0);
    result.status = SolveStatus::Optimal;
    return result;
  }

  const double b_scale = std::max(1.0, program.b.lpNorm<Eigen::Infinity>());
  const double c_scale = std::max(1.0, program.c.lpNorm<Eigen::Infinity>());

  auto recover = [&](const Ipm::Point& pt, SolveResult& r) {
    r.x = map_x_back(ps, pt.x / pt.tau);
    r.y = map_y_back(ps, pt.y / pt.tau);
    VectorXd s_int = pt.s / pt.tau;
    VectorXd s(n);
    for (int j = 0; j < n; ++j) s(j) = ps.minus[j] >= 0 ? 0.0 : s_int(ps.plus[j]);
    const OriginalMetrics om = original_metrics(program, r.x, r.y, s);
    r.s = om.s;
    r.residuals = om.residuals;
    r.p_star = om.p_star;
    r.d_star = om.d_star;
  };

  auto meets = [&](const Residuals& res) {
    return res.primal <= settings.eps_primal * b_scale && res.dual <= settings.eps_dual * c_scale &&
           res.relative_gap <= settings.eps_gap && res.dual_cone_violation <= settings.eps_dual * c_scale;
  };

  Ipm ipm(ps, settings);
  Ipm::Point pt;
  int iterations = 0;
  const auto outcome = ipm.run(pt, iterations, [&](const Ipm::Point& candidate) {
    SolveResult probe;
    recover(candidate, probe);
    return meets(probe.residuals);
  });
  result.iterations = iterations;

  switch (outcome) {
    case Ipm::Outcome::Converged:
      recover(pt, result);
      result.status = SolveStatus::Optimal;
      break;
    case Ipm::Outcome::PrimalInfeasible: {
      const double by = ps.b.dot(pt.y);
      result.y = map_y_back(ps, pt.y / by);
      result.x = VectorXd::Zero(n);
      result.s = -(program.A.transpose() * result.y);
      result.d_star = program.b.dot(result.y);
      result.status = SolveStatus::PrimalInfeasible;
      result.message = "Farkas certificate found";
      break;
    }
    case Ipm::Outcome::DualInfeasible: {
      const double cx = ps.c.dot(pt.x);
      result.x = map_x_back(ps, pt.x / (-cx));
      result.y = VectorXd::Zero(m);
      result.s = VectorXd::Zero(n);
      result.p_star = program.c.dot(result.x);
      result.status = SolveStatus::DualInfeasible;
      result.message = "improving ray found";
      break;
    }
    case Ipm::Outcome::MaxIterations:
      recover(pt, result);
      result.status = SolveStatus::MaxIterations;
      result.message = "iteration limit reached";
      break;
    case Ipm::Outcome::Stalled:
      recover(pt, result);
      result.status = SolveStatus::NumericalFailure;
      result.message = "no further progress";
      break;
  }
  return result;
}

}  // namespace

SolveResult solve(const StandardConicProgram& program, const SolverSettings& settings) {
  SolveResult result = solve_unobserved(program, settings);
  if (settings.observer) settings.observer(result);
  return result;
}

}  // namespace mdiew
