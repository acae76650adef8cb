#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "dsos/conic.hpp"
#include "oracles.hpp"

namespace dsos {
namespace {

TEST(Conic, SingleBound) {
  // min x s.t. x - s = 1, x, s >= 0.
  ProgramBuilder pb;
  int x = pb.add_nonneg(2);
  pb.set_cost(x, 1.0);
  int r = pb.add_row(1.0);
  pb.add_coef(r, x, 1.0);
  pb.add_coef(r, x + 1, -1.0);
  ConeProgram p = pb.build();
  ConicSolution sol = solve(p);
  ASSERT_EQ(sol.status, SolveStatus::Optimal);
  EXPECT_NEAR(sol.x(x), 1.0, 1e-7);
  EXPECT_LE(verify(p, sol).max(), 1e-7);
}

TEST(Conic, FixedNorm) {
  // min t s.t. (t, u1, u2) in SOC, u = (3, 4).
  ProgramBuilder pb;
  int v = pb.add_soc(3);
  pb.set_cost(v, 1.0);
  int r1 = pb.add_row(3.0);
  pb.add_coef(r1, v + 1, 1.0);
  int r2 = pb.add_row(4.0);
  pb.add_coef(r2, v + 2, 1.0);
  ConeProgram p = pb.build();
  ConicSolution sol = solve(p);
  ASSERT_EQ(sol.status, SolveStatus::Optimal);
  EXPECT_NEAR(sol.x(v), 5.0, 1e-7);
  EXPECT_LE(verify(p, sol).max(), 1e-7);
}

TEST(Conic, FreeVariables) {
  // min x1 + x2, x1 free, x2 >= 0, x1 - x2 = -2, x1 + 2 x2 = 4.
  ProgramBuilder pb;
  int f = pb.add_free(1);
  int n = pb.add_nonneg(1);
  pb.set_cost(f, 1.0);
  pb.set_cost(n, 1.0);
  int r1 = pb.add_row(-2.0);
  pb.add_coef(r1, f, 1.0);
  pb.add_coef(r1, n, -1.0);
  int r2 = pb.add_row(4.0);
  pb.add_coef(r2, f, 1.0);
  pb.add_coef(r2, n, 2.0);
  ConicSolution sol = solve(pb.build());
  ASSERT_EQ(sol.status, SolveStatus::Optimal);
  EXPECT_NEAR(sol.x(f), 0.0, 1e-7);
  EXPECT_NEAR(sol.x(n), 2.0, 1e-7);
}

struct RandomLp {
  Eigen::VectorXd c;
  Eigen::MatrixXd G;  // G x <= h, includes bounds
  Eigen::VectorXd h;
};

RandomLp make_lp(std::mt19937& rng, int n, int m) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> pos(0.5, 2.0);
  RandomLp lp;
  lp.c.resize(n);
  for (int j = 0; j < n; ++j) lp.c(j) = u(rng);
  lp.G = Eigen::MatrixXd::Zero(m + 2 * n, n);
  lp.h = Eigen::VectorXd::Zero(m + 2 * n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) lp.G(i, j) = u(rng);
    lp.h(i) = pos(rng);
  }
  for (int j = 0; j < n; ++j) {
    lp.G(m + j, j) = 1.0;  // x_j <= 3
    lp.h(m + j) = 3.0;
    lp.G(m + n + j, j) = -1.0;  // x_j >= 0
  }
  return lp;
}

// Standard form: G x + s = h over x >= 0, s >= 0 (the x >= 0 rows are implied).
ConeProgram to_standard(const RandomLp& lp) {
  const int n = static_cast<int>(lp.c.size());
  const int rows = static_cast<int>(lp.G.rows()) - n;
  ProgramBuilder pb;
  int x = pb.add_nonneg(n);
  int s = pb.add_nonneg(rows);
  for (int j = 0; j < n; ++j) pb.set_cost(x + j, lp.c(j));
  for (int i = 0; i < rows; ++i) {
    int r = pb.add_row(lp.h(i));
    for (int j = 0; j < n; ++j) pb.add_coef(r, x + j, lp.G(i, j));
    pb.add_coef(r, s + i, 1.0);
  }
  return pb.build();
}

TEST(Conic, RandomLpsMatchVertexEnumeration) {
  std::mt19937 rng(2024);
  for (int t = 0; t < 20; ++t) {
    int n = 2 + t % 7;
    int m = 2 + (t * 3) % 6;
    RandomLp lp = make_lp(rng, n, m);
    double ref = oracle::lp_vertices(lp.c, lp.G, lp.h);
    ConeProgram p = to_standard(lp);
    ConicSolution sol = solve(p);
    ASSERT_EQ(sol.status, SolveStatus::Optimal) << "instance " << t;
    EXPECT_NEAR(sol.primal_obj, ref, 1e-6) << "instance " << t;
    EXPECT_LE(verify(p, sol).max(), 1e-7);
    EXPECT_GE(sol.primal_obj, sol.dual_obj - 1e-7 * (1 + std::abs(sol.primal_obj)));
  }
}

TEST(Conic, ScalingInvariance) {
  std::mt19937 rng(77);
  RandomLp lp = make_lp(rng, 4, 5);
  ConeProgram p = to_standard(lp);
  ConicSolution a = solve(p);
  p.c *= 37.0;
  ConicSolution b = solve(p);
  ASSERT_EQ(a.status, SolveStatus::Optimal);
  ASSERT_EQ(b.status, SolveStatus::Optimal);
  EXPECT_LE((a.x - b.x).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Conic, InfeasibleToy) {
  // x >= 1 and x <= 0: x - s1 = 1, x + s2 = 0.
  ProgramBuilder pb;
  int v = pb.add_nonneg(3);
  pb.set_cost(v, 1.0);
  int r1 = pb.add_row(1.0);
  pb.add_coef(r1, v, 1.0);
  pb.add_coef(r1, v + 1, -1.0);
  int r2 = pb.add_row(0.0);
  pb.add_coef(r2, v, 1.0);
  pb.add_coef(r2, v + 2, 1.0);
  ConicSolution sol = solve(pb.build());
  EXPECT_EQ(sol.status, SolveStatus::PrimalInfeasible);
}

TEST(Conic, Unbounded) {
  // min -x s.t. x - s = 1.
  ProgramBuilder pb;
  int v = pb.add_nonneg(2);
  pb.set_cost(v, -1.0);
  int r = pb.add_row(1.0);
  pb.add_coef(r, v, 1.0);
  pb.add_coef(r, v + 1, -1.0);
  ConicSolution sol = solve(pb.build());
  EXPECT_EQ(sol.status, SolveStatus::DualInfeasible);
}

TEST(Conic, InconsistentDuplicateRows) {
  ProgramBuilder pb;
  int v = pb.add_nonneg(1);
  int r1 = pb.add_row(1.0);
  pb.add_coef(r1, v, 1.0);
  int r2 = pb.add_row(3.0);
  pb.add_coef(r2, v, 2.0);
  EXPECT_EQ(solve(pb.build()).status, SolveStatus::PrimalInfeasible);
}

TEST(Conic, ConsistentDuplicateRows) {
  ProgramBuilder pb;
  int v = pb.add_nonneg(2);
  pb.set_cost(v, 1.0);
  pb.set_cost(v + 1, 2.0);
  for (double k : {1.0, 2.0, -1.0}) {
    int r = pb.add_row(k * 4.0);
    pb.add_coef(r, v, k);
    pb.add_coef(r, v + 1, k);
  }
  ConeProgram p = pb.build();
  ConicSolution sol = solve(p);
  ASSERT_EQ(sol.status, SolveStatus::Optimal);
  EXPECT_NEAR(sol.primal_obj, 4.0, 1e-7);
  EXPECT_LE(verify(p, sol).max(), 1e-7);
}

// Random SOCP built from a known primal-dual pair: pick x, s complementary in
// each cone, choose A and y, then set b = A x and c = A'y + s.
TEST(Conic, RandomSocpOraclePair) {
  std::mt19937 rng(5);
  std::normal_distribution<double> g;
  for (int t = 0; t < 10; ++t) {
    const int ncones = 3, k = 4, m = 5;
    ProgramBuilder pb;
    for (int c = 0; c < ncones; ++c) pb.add_soc(k);
    const int n = ncones * k;
    Eigen::VectorXd x(n), s(n);
    for (int c = 0; c < ncones; ++c) {
      Eigen::VectorXd d(k - 1);
      for (int i = 0; i < k - 1; ++i) d(i) = g(rng);
      d.normalize();
      double a = std::abs(g(rng)) + 0.1, b = std::abs(g(rng)) + 0.1;
      // x on the boundary ray (1, d), s on the opposite ray (1, -d).
      x(c * k) = a;
      x.segment(c * k + 1, k - 1) = a * d;
      s(c * k) = b;
      s.segment(c * k + 1, k - 1) = -b * d;
    }
    Eigen::MatrixXd A(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = g(rng);
    Eigen::VectorXd y(m);
    for (int i = 0; i < m; ++i) y(i) = g(rng);
    Eigen::VectorXd b = A * x, c = A.transpose() * y + s;
    for (int i = 0; i < m; ++i) {
      int r = pb.add_row(b(i));
      for (int j = 0; j < n; ++j) pb.add_coef(r, j, A(i, j));
    }
    for (int j = 0; j < n; ++j) pb.set_cost(j, c(j));
    ConeProgram p = pb.build();
    ConicSolution sol = solve(p);
    ASSERT_EQ(sol.status, SolveStatus::Optimal);
    double ref = c.dot(x);
    EXPECT_NEAR(sol.primal_obj, ref, 1e-6 * (1 + std::abs(ref)));
    // The oracle pair is complementary, so its gap c'x - b'y = x's vanishes.
    EXPECT_NEAR(ref - b.dot(y), 0.0, 1e-9 * (1 + std::abs(ref)));
    EXPECT_NEAR(sol.dual_obj, ref, 1e-6 * (1 + std::abs(ref)));
    EXPECT_LE(verify(p, sol).max(), 1e-7);
  }
}

TEST(Conic, VerifyFlagsViolation) {
  ProgramBuilder pb;
  int x = pb.add_nonneg(2);
  pb.set_cost(x, 1.0);
  int r = pb.add_row(1.0);
  pb.add_coef(r, x, 1.0);
  pb.add_coef(r, x + 1, -1.0);
  ConeProgram p = pb.build();
  ConicSolution fake;
  fake.status = SolveStatus::Optimal;
  fake.x = Eigen::VectorXd::Zero(2);
  fake.y = Eigen::VectorXd::Zero(1);
  fake.s = Eigen::VectorXd::Zero(2);
  EXPECT_GT(verify(p, fake).max(), 1e-7);
}

TEST(Conic, DumpListsProgram) {
  ProgramBuilder pb;
  int x = pb.add_nonneg(1);
  pb.set_cost(x, 2.0);
  int r = pb.add_row(1.0);
  pb.add_coef(r, x, 1.0);
  std::ostringstream os;
  dump(pb.build(), os);
  EXPECT_NE(os.str().find("nonneg 1"), std::string::npos);
  EXPECT_NE(os.str().find("A 1"), std::string::npos);
}

TEST(Conic, Deterministic) {
  std::mt19937 rng(99);
  RandomLp lp = make_lp(rng, 5, 5);
  ConeProgram p = to_standard(lp);
  ConicSolution a = solve(p), b = solve(p);
  EXPECT_EQ((a.x - b.x).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Conic, RecordsWorstGap) {
  auto stats = solver_stats();
  EXPECT_GT(stats.optimal, 0);
  EXPECT_LE(stats.worst_optimal_gap, 1e-7);
}

}  // namespace
}  // namespace dsos
