#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "mdiew/conic.hpp"
#include "mdiew/errors.hpp"

using namespace mdiew;

namespace {

RealSparse sparse(const Eigen::MatrixXd& dense) { return dense.sparseView(); }

StandardConicProgram program(const Eigen::VectorXd& c, const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                             std::vector<Cone> cones) {
  StandardConicProgram p;
  p.c = c;
  p.A = sparse(a);
  p.b = b;
  p.cones = std::move(cones);
  return p;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) out(k++) = x;
  return out;
}

void expect_certified(const SolveResult& r) {
  ASSERT_TRUE(r.optimal()) << to_string(r.status) << " " << r.message;
  EXPECT_TRUE(check_duality(r).ok());
  EXPECT_LE(r.residuals.primal, 1e-7);
  EXPECT_LE(r.residuals.dual, 1e-7);
  EXPECT_LE(r.residuals.dual_cone_violation, 1e-7);
}

}  // namespace

TEST(Svec, RoundTripAndInnerProduct) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  Eigen::MatrixXd a(4, 4), b(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) a(i, j) = n(rng), b(i, j) = n(rng);
  a = (a + a.transpose()).eval();
  b = (b + b.transpose()).eval();
  EXPECT_LT((smat(svec(a), 4) - a).norm(), 1e-14);
  EXPECT_NEAR(svec(a).dot(svec(b)), (a * b).trace(), 1e-12);
  EXPECT_EQ(svec_index(0, 0, 4), 0);
  EXPECT_EQ(svec_index(3, 0, 4), 3);
  EXPECT_EQ(svec_index(1, 1, 4), 4);
  EXPECT_EQ(svec_index(3, 3, 4), 9);
}

TEST(Solve, LinearProgram) {
  // min x0 + 2 x1, x0 + x1 = 1, x >= 0
  const auto r = solve(program(vec({1, 2}), Eigen::MatrixXd::Ones(1, 2), vec({1}), {{ConeKind::Nonneg, 2}}));
  expect_certified(r);
  EXPECT_NEAR(r.p_star, 1.0, 1e-8);
  EXPECT_NEAR(r.x(0), 1.0, 1e-7);
  EXPECT_NEAR(r.y(0), 1.0, 1e-7);
}

TEST(Solve, TransportationLp) {
  // 2 x 3 transportation problem with a known optimum.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(5, 6);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) {
      a(i, 3 * i + j) = 1;
      a(2 + j, 3 * i + j) = 1;
    }
  const auto r = solve(program(vec({4, 6, 9, 5, 3, 8}), a, vec({30, 25, 15, 20, 20}), {{ConeKind::Nonneg, 6}}));
  expect_certified(r);
  // rows are dependent (supplies and demands both sum to 55)
  EXPECT_NEAR(r.p_star, 15 * 4 + 15 * 9 + 20 * 3 + 5 * 8, 1e-6);
}

TEST(Solve, SecondOrderCone) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 3);
  a(0, 1) = 1;
  a(1, 2) = 1;
  const auto r = solve(program(vec({1, 0, 0}), a, vec({3, 4}), {{ConeKind::SecondOrder, 3}}));
  expect_certified(r);
  EXPECT_NEAR(r.p_star, 5.0, 1e-7);
}

TEST(Solve, SemidefiniteMinimumEigenvalue) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n;
  for (int size : {2, 3, 5}) {
    Eigen::MatrixXd c(size, size);
    for (int i = 0; i < size; ++i)
      for (int j = 0; j < size; ++j) c(i, j) = n(rng);
    c = (c + c.transpose()).eval();
    const Eigen::VectorXd e = svec(Eigen::MatrixXd::Identity(size, size));
    const auto r = solve(program(svec(c), e.transpose(), vec({1}), {{ConeKind::Psd, size}}));
    expect_certified(r);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
    EXPECT_NEAR(r.p_star, es.eigenvalues()(0), 1e-7);
    EXPECT_NEAR(r.y(0), es.eigenvalues()(0), 1e-7);
  }
}

TEST(Solve, MixedConesAndFreeVariables) {
  // min t + x0 s.t. x0 - x1 = 1, 2 x0 - 2 x1 = 2, (t, x0 - 3) in SOC via u = x0 - 3
  //   columns: x0 free, x1 >= 0, (t, u) soc
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 4);
  a.row(0) << 1, -1, 0, 0;
  a.row(1) << 2, -2, 0, 0;
  a.row(2) << 1, 0, 0, -1;
  const auto r = solve(program(vec({1, 0, 1, 0}), a, vec({1, 2, 3}),
                               {{ConeKind::Free, 1}, {ConeKind::Nonneg, 1}, {ConeKind::SecondOrder, 2}}));
  expect_certified(r);
  // t >= |x0 - 3| and x0 >= 1: optimum anywhere on x0 in [1, 3] with value 3
  EXPECT_NEAR(r.p_star, 3.0, 1e-7);
}

TEST(Solve, PrimalInfeasibleCertificate) {
  const auto r = solve(program(vec({1, 1}), Eigen::MatrixXd::Ones(1, 2), vec({-1}), {{ConeKind::Nonneg, 2}}));
  ASSERT_EQ(r.status, SolveStatus::PrimalInfeasible);
  EXPECT_LT(r.y(0), 0.0);
  EXPECT_FALSE(check_duality(r).checked);
}

TEST(Solve, InconsistentEqualities) {
  Eigen::MatrixXd a(2, 2);
  a << 1, 1, 2, 2;
  const auto r = solve(program(vec({1, 1}), a, vec({1, 3}), {{ConeKind::Nonneg, 2}}));
  EXPECT_EQ(r.status, SolveStatus::PrimalInfeasible);
}

TEST(Solve, DualInfeasibleRay) {
  Eigen::MatrixXd a(1, 2);
  a << 1, -1;
  const auto r = solve(program(vec({-1, 0}), a, vec({0}), {{ConeKind::Nonneg, 2}}));
  ASSERT_EQ(r.status, SolveStatus::DualInfeasible);
  EXPECT_GT(r.x(0), 0.0);
}

TEST(Solve, RejectsShapeMismatch) {
  StandardConicProgram p = program(vec({1, 2}), Eigen::MatrixXd::Ones(1, 2), vec({1}), {{ConeKind::Nonneg, 3}});
  EXPECT_THROW(p.validate(), DimensionError);
  EXPECT_THROW(solve(p), DimensionError);
}

TEST(Duality, ReportFlagsLargeGap) {
  SolveResult r;
  r.status = SolveStatus::Optimal;
  r.p_star = 1.0;
  r.d_star = 0.9;
  const DualityReport rep = check_duality(r);
  EXPECT_TRUE(rep.checked);
  EXPECT_TRUE(rep.weak_duality);
  EXPECT_FALSE(rep.gap_within);
  r.d_star = 1.1;
  EXPECT_FALSE(check_duality(r).weak_duality);
}

TEST(ProgramIo, RoundTrip) {
  Eigen::MatrixXd a(2, 4);
  a << 1, 0.1, 0, 1.0 / 3.0, 0, 2, -1, 0;
  StandardConicProgram p = program(vec({1, 2, 3, 0.1}), a, vec({1, 1e-17}), {{ConeKind::Free, 1}, {ConeKind::Psd, 2}});
  p.row_tags = {"first", "second row"};
  std::stringstream ss;
  write_program(ss, p);
  const StandardConicProgram q = read_program(ss);
  EXPECT_EQ(q.c, p.c);
  EXPECT_EQ(q.b, p.b);
  EXPECT_EQ(Eigen::MatrixXd(q.A), Eigen::MatrixXd(p.A));
  EXPECT_EQ(q.cones, p.cones);
  EXPECT_EQ(q.row_tags, p.row_tags);
}

TEST(ProgramIo, MalformedInput) {
  std::stringstream ss("conic-program 2\nobjective\n");
  EXPECT_THROW(read_program(ss), SchemaError);
}
