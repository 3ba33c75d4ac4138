#pragma once

// Standard-form conic linear programs
//
//   minimize c^T x  subject to  A x = b,  x in K
//   maximize b^T y  subject to  c - A^T y in K*
//
// with K a product of free, nonnegative, second-order and real symmetric PSD
// cones, solved by a homogeneous self-dual interior-point method with
// Nesterov-Todd scaling and Mehrotra predictor-corrector steps.
//
// A PSD(n) cone occupies n(n+1)/2 consecutive columns holding svec(X): the
// lower triangle stacked column by column, off-diagonal entries scaled by
// sqrt(2), so that svec(X) . svec(Y) = tr(XY).

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace mdiew {

using RealSparse = Eigen::SparseMatrix<double, Eigen::ColMajor>;

enum class ConeKind { Free, Nonneg, SecondOrder, Psd };

struct Cone {
  ConeKind kind = ConeKind::Nonneg;
  // Number of entries for Free/Nonneg/SecondOrder; matrix order for Psd.
  int dim = 0;

  int size() const { return kind == ConeKind::Psd ? dim * (dim + 1) / 2 : dim; }
  friend bool operator==(const Cone&, const Cone&) = default;
};

std::string to_string(ConeKind kind);

struct StandardConicProgram {
  Eigen::VectorXd c;
  RealSparse A;
  Eigen::VectorXd b;
  std::vector<Cone> cones;
  // Optional identity of each equality row; empty or one per row.
  std::vector<std::string> row_tags;

  int num_vars() const { return static_cast<int>(c.size()); }
  int num_rows() const { return static_cast<int>(b.size()); }
  int cone_columns() const;

  // Throws DimensionError when the shapes disagree.
  void validate() const;
};

struct SolveResult;

struct SolverSettings {
  double eps_primal = 1e-8;
  double eps_dual = 1e-8;
  double eps_gap = 1e-8;
  double eps_infeasible = 1e-8;
  // Relative threshold for dependent equality rows and their consistency.
  double eps_rank = 1e-9;
  int max_iterations = 100;
  bool verbose = false;
  // Called with every result before solve() returns; may run concurrently.
  std::function<void(const SolveResult&)> observer;
};

enum class SolveStatus { Optimal, PrimalInfeasible, DualInfeasible, MaxIterations, NumericalFailure };

std::string to_string(SolveStatus status);

struct Residuals {
  // ||A x - b||_inf
  double primal = 0.0;
  // ||c - A^T y - s||_inf with s the returned dual slack.
  double dual = 0.0;
  // |p* - d*| / (1 + |p*|)
  double relative_gap = 0.0;
  // max(0, -lambda_min(c - A^T y)) over all cones.
  double dual_cone_violation = 0.0;
  // <x, c - A^T y>
  double complementarity = 0.0;
};

struct SolveResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  // Primal point, or an improving ray (A x = 0, c^T x = -1) when DualInfeasible.
  Eigen::VectorXd x;
  // Dual multipliers, one per row of A, or a Farkas certificate (b^T y = 1,
  // -A^T y in K*) when PrimalInfeasible.
  Eigen::VectorXd y;
  // Dual slack in K*.
  Eigen::VectorXd s;
  double p_star = 0.0;
  double d_star = 0.0;
  Residuals residuals;
  int iterations = 0;
  std::string message;

  bool optimal() const { return status == SolveStatus::Optimal; }
};

SolveResult solve(const StandardConicProgram& program, const SolverSettings& settings = {});

struct DualityReport {
  bool checked = false;        // false unless the status is Optimal
  bool weak_duality = true;    // p* >= d* - weak_tolerance
  bool gap_within = true;      // |p* - d*| <= eps_gap (1 + |p*|)
  double absolute_gap = 0.0;
  double relative_gap = 0.0;
  std::vector<std::string> violations;

  bool ok() const { return checked && weak_duality && gap_within; }
};

DualityReport check_duality(const SolveResult& result, double eps_gap = 1e-8, double weak_tolerance = 1e-9);

// svec/smat on real symmetric matrices.
Eigen::VectorXd svec(const Eigen::MatrixXd& m);
Eigen::MatrixXd smat(const Eigen::Ref<const Eigen::VectorXd>& v, int n);
// Column offset of entry (i, j), i >= j, inside svec of an n x n matrix.
int svec_index(int i, int j, int n);

// Plain-text dump: sections "objective", "equalities" (triplets), "rhs",
// "cones", "tags"; numbers use 17 significant digits.
void write_program(std::ostream& out, const StandardConicProgram& program);
StandardConicProgram read_program(std::istream& in);

}  // namespace mdiew
