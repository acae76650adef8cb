#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dsos/apps.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace dsos::apps {
namespace {

using testing::mono;

Graph random_graph(std::mt19937& rng, int n, double p) {
  std::bernoulli_distribution coin(p);
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (coin(rng)) e.push_back({i, j});
  return graph_from_edges(n, e);
}

void expect_nonincreasing(const std::vector<double>& b, double tol = 1e-7) {
  for (size_t k = 1; k < b.size(); ++k) EXPECT_LE(b[k], b[k - 1] + tol) << "k = " << k;
}

Polynomial laplacian(const Polynomial& g) {
  Polynomial out(g.nvars());
  for (int i = 0; i < g.nvars(); ++i) out += partial(partial(g, i), i);
  return out;
}

TEST(Graphs, PetersenAndComplement) {
  Graph p = petersen();
  EXPECT_EQ(p.A.sum(), 30.0);
  EXPECT_EQ(p.min_degree(), 3);
  EXPECT_EQ(oracle::stability_number(p.A), 4);
  Graph c = complement(p);
  EXPECT_EQ(c.min_degree(), 6);
  EXPECT_EQ(oracle::stability_number(c.A), 2);
  EXPECT_THROW(graph_from_edges(3, {{0, 0}}), std::invalid_argument);
  EXPECT_THROW(graph_from_edges(3, {{0, 3}}), std::out_of_range);
  Graph bad = p;
  bad.A(0, 1) = 0.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(StableSet, PetersenComplementBaseBounds) {
  Graph g = complement(petersen());
  for (ConeTag tag : {ConeTag::DD, ConeTag::SDD}) {
    BoundSequence s = stable_set_copositive(g, tag, 0);
    ASSERT_EQ(s.bounds.size(), 1u);
    EXPECT_NEAR(s.bounds[0], 4.0, 0.01);
    RdsosResult r = stable_set_rdsos(g, 0, tag);
    ASSERT_EQ(r.status, SolveStatus::Optimal);
    EXPECT_NEAR(r.bound, 4.0, 0.01);
  }
}

TEST(StableSet, PetersenComplementSequences) {
  Graph g = complement(petersen());
  BoundSequence socp = stable_set_copositive(g, ConeTag::SDD, 5);
  expect_nonincreasing(socp.bounds);
  EXPECT_LT(socp.bounds.back(), 3.0);
  BoundSequence lp = stable_set_copositive(g, ConeTag::DD, 16);
  expect_nonincreasing(lp.bounds);
  EXPECT_LT(lp.bounds.back(), 3.0);
  for (ConeTag tag : {ConeTag::DD, ConeTag::SDD}) {
    BoundSequence outer = stable_set_outer(g, tag, 7);
    ASSERT_EQ(outer.status, SolveStatus::Optimal);
    EXPECT_NEAR(outer.bounds[0], 4.0, 1e-6);
    expect_nonincreasing(outer.bounds);
    EXPECT_NEAR(outer.bounds.back(), 2.5, 1e-2);
    EXPECT_GE(outer.bounds.back(), 2.5 - 1e-6);  // never below theta
  }
}

TEST(StableSet, RdsosLevelOne) {
  Graph g = complement(petersen());
  RdsosResult dd = stable_set_rdsos(g, 1, ConeTag::DD);
  RdsosResult sdd = stable_set_rdsos(g, 1, ConeTag::SDD);
  EXPECT_NEAR(dd.bound, 2.71, 0.02);
  EXPECT_NEAR(sdd.bound, 2.52, 0.02);
  EXPECT_LE(sdd.bound, dd.bound + 1e-7);
}

TEST(StableSet, EmptyGraphFeasibilityBound) {
  Graph g = graph_from_edges(5, {});
  BoundSequence s = stable_set_copositive(g, ConeTag::DD, 0);
  EXPECT_LE(s.bounds[0], 5.0 - 0 + 1 + 1e-6);
  EXPECT_GE(s.bounds[0], 5.0 - 1e-6);
}

TEST(StableSet, BoundsDominateStabilityNumber) {
  std::mt19937 rng(21);
  for (int trial = 0; trial < 8; ++trial) {
    Graph g = random_graph(rng, 5 + trial % 4, 0.4);
    const int alpha = oracle::stability_number(g.A);
    for (ConeTag tag : {ConeTag::DD, ConeTag::SDD}) {
      BoundSequence s = stable_set_copositive(g, tag, 4);
      ASSERT_EQ(s.status, SolveStatus::Optimal);
      EXPECT_LE(s.bounds[0], g.n - g.min_degree() + 1 + 1e-6);
      expect_nonincreasing(s.bounds);
      for (double b : s.bounds) EXPECT_GE(b, alpha - 1e-6);
      BoundSequence o = stable_set_outer(g, tag, 3);
      expect_nonincreasing(o.bounds);
      for (double b : o.bounds) EXPECT_GE(b, alpha - 1e-6);
      for (int r = 0; r <= 1; ++r) EXPECT_GE(stable_set_rdsos(g, r, tag).bound, alpha - 1e-6);
    }
  }
}

TEST(StableSet, OuterMonotoneOnRandomGraphs) {
  std::mt19937 rng(22);
  for (int trial = 0; trial < 10; ++trial) {
    Graph g = random_graph(rng, 20, 0.5);
    BoundSequence o = stable_set_outer(g, ConeTag::DD, 4);
    ASSERT_EQ(o.status, SolveStatus::Optimal);
    expect_nonincreasing(o.bounds);
  }
}

TEST(Partition, FormsMatchDefinitions) {
  std::vector<int> a = {1, 2, 3};
  Polynomial p = partition_polynomial(a);
  EXPECT_NEAR(eval(p, {1, 1, -1}), 0.0, 1e-12);  // 1 + 2 = 3
  EXPECT_NEAR(eval(p, {1, 1, 1}), 36.0, 1e-12);
  Polynomial q = partition_form(a, 0.5);
  EXPECT_TRUE(q.is_homogeneous());
  EXPECT_EQ(q.degree(), 4);
  // On x in {-1, 1}^n, |x|^2 / n = 1: q = n + (a'x)^2 - 2n + n - eps.
  EXPECT_NEAR(eval(q, {1, 1, -1}), -0.5, 1e-12);
  EXPECT_THROW(partition_form({1, 0}, 0.0), std::invalid_argument);
}

TEST(Partition, RefutesOneTwoTwoOneOne) {
  std::vector<int> a = {1, 2, 2, 1, 1};
  NonHomogeneousResult nh = partition_nonhomogeneous(a, ConeTag::DD);
  EXPECT_EQ(nh.status, SolveStatus::PrimalInfeasible);
  ASSERT_EQ(nh.phase_one_status, SolveStatus::Optimal);
  EXPECT_GT(nh.phase_one_shift, 1e-7);
  EXPECT_FALSE(nh.feasible);
  for (ConeTag tag : {ConeTag::DD, ConeTag::SDD}) {
    PartitionResult r = partition_refute(a, tag, 10);
    ASSERT_EQ(r.status, SolveStatus::Optimal);
    EXPECT_TRUE(r.refuted);
    EXPECT_GT(r.eps.back(), 1e-7);
    // Iterates only improve: the previous Gram is feasible in the next basis.
    for (size_t k = 1; k < r.eps.size(); ++k) EXPECT_GE(r.eps[k], r.eps[k - 1] - 1e-7);
    EXPECT_TRUE(validate(r.last_cert, partition_form(a, r.eps.back())));
  }
}

TEST(Partition, AllOnesNotRefutedAtLevelZero) {
  PartitionResult r = partition_refute({1, 1, 1, 1, 1}, ConeTag::DD, 0);
  ASSERT_EQ(r.eps.size(), 1u);
  EXPECT_LE(r.eps[0], 1e-6);
}

TEST(Partition, FeasibleInstancesNeverRefuted) {
  std::mt19937 rng(23);
  int feasible = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<int> len(2, 6);
    std::vector<int> a(len(rng));
    int budget = 30;
    for (size_t i = 0; i < a.size(); ++i) {
      int cap = std::max(1, std::min(9, budget - static_cast<int>(a.size() - i - 1)));
      a[i] = std::uniform_int_distribution<int>(1, cap)(rng);
      budget -= a[i];
    }
    if (!oracle::has_equal_partition(a)) continue;
    ++feasible;
    PartitionResult r = partition_refute(a, ConeTag::DD, 4);
    EXPECT_FALSE(r.refuted);
    for (double e : r.eps) EXPECT_LE(e, 1e-6);
  }
  EXPECT_GT(feasible, 5);
  PartitionResult r = partition_refute({1, 2, 3}, ConeTag::SDD, 10);
  EXPECT_FALSE(r.refuted);
}

TEST(SphereMin, ExactRepresentation) {
  BoundSequence s = sphere_min(sum_squares_power(3, 2), PricingMode::LpEigen, 0);
  EXPECT_NEAR(s.bounds[0], 1.0, 1e-6);
}

TEST(SphereMin, QuarticTwoSquares) {
  Polynomial p = Polynomial::term(mono({4, 0}), 1.0) + Polynomial::term(mono({0, 4}), 1.0);
  for (PricingMode m : {PricingMode::LpEigen, PricingMode::LpTriples, PricingMode::SocpEigen}) {
    BoundSequence s = sphere_min(p, m, 3);
    EXPECT_NEAR(s.bounds[0], 0.5, 1e-6);
    EXPECT_NEAR(s.bounds.back(), 0.5, 1e-6);
  }
  EXPECT_NEAR(oracle::sphere_grid_min(p), 0.5, 1e-9);
  EXPECT_THROW(sphere_min(Polynomial::term(mono({3, 0}), 1.0), PricingMode::LpEigen, 1),
               std::invalid_argument);
}

TEST(SphereMin, BoundsBelowGridMinimum) {
  std::mt19937 rng(24);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 2;
    Polynomial p = testing::random_form(rng, n, 4);
    const double grid = oracle::sphere_grid_min(p, 200);
    for (PricingMode m : {PricingMode::LpEigen, PricingMode::SocpEigen}) {
      BoundSequence s = sphere_min(p, m, 5);
      ASSERT_EQ(s.status, SolveStatus::Optimal);
      for (size_t k = 0; k < s.bounds.size(); ++k) {
        EXPECT_LE(s.bounds[k], grid + 1e-6);
        if (k > 0) EXPECT_GE(s.bounds[k], s.bounds[k - 1] - 1e-7);
      }
    }
  }
}

TEST(SphereMin, TenVariableQuarticImproves) {
  std::mt19937 rng(25);
  Polynomial p = testing::random_form(rng, 10, 4);
  BoundSequence s = sphere_min(p, PricingMode::SocpEigen, 5);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  for (size_t k = 1; k < s.bounds.size(); ++k) EXPECT_GE(s.bounds[k], s.bounds[k - 1] - 1e-7);
  EXPECT_GT(s.bounds.back(), s.bounds.front());
}

TEST(Dcd, ConvexInputNeedsNoMore) {
  Polynomial f = Polynomial::term(mono({4, 0}), 1.0) + Polynomial::term(mono({0, 4}), 1.0);
  DcdResult r = dcd(f);
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_LE(r.objective, sphere_integral_tr_hessian(f) + 1e-6);
}

TEST(Dcd, IndefiniteQuartic) {
  Polynomial f = Polynomial::term(mono({4, 0}), 1.0) - Polynomial::term(mono({2, 2}), 6.0);
  for (ConeTag tag : {ConeTag::DD, ConeTag::SDD}) {
    DcdResult r = dcd(f, tag);
    ASSERT_EQ(r.status, SolveStatus::Optimal);
    EXPECT_LE((r.g - r.h - f).max_abs_coeff(), 1e-6 * (1.0 + f.max_abs_coeff()));
    EXPECT_TRUE(validate(r.g_cert, hessian_biform(r.g)));
    EXPECT_TRUE(validate(r.h_cert, hessian_biform(r.h)));
    if (tag == ConeTag::DD) {
      EXPECT_TRUE(is_dd(r.g_cert.Q, 1e-8));
      EXPECT_TRUE(is_dd(r.h_cert.Q, 1e-8));
    }
  }
  EXPECT_THROW(dcd(Polynomial::term(mono({3, 0}), 1.0)), std::invalid_argument);
}

TEST(Dcd, RandomPolynomialsAreDecomposed) {
  std::mt19937 rng(26);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 1 + trial % 4;
    Polynomial f = trial % 2 ? testing::random_form(rng, n, 4)
                             : testing::random_polynomial(rng, n, 4, 10);
    if (f.degree() != 4) f += sum_squares_power(n, 2);
    DcdResult r = dcd(f);
    ASSERT_EQ(r.status, SolveStatus::Optimal) << to_string(f);
    EXPECT_LE((r.g - r.h - f).max_abs_coeff(), 1e-6 * (1.0 + f.max_abs_coeff()));
    EXPECT_TRUE(validate(r.g_cert, hessian_biform(r.g)));
    EXPECT_TRUE(validate(r.h_cert, hessian_biform(r.h)));
    EXPECT_NEAR(r.objective, sphere_integral_tr_hessian(r.g), 1e-6 * (1.0 + std::abs(r.objective)));
    for (int s = 0; s < 100; ++s) {
      std::vector<double> x = testing::random_point(rng, n, 2.0);
      EXPECT_GE(eig_sym(testing::hessian_at(r.g, x)).values(0), -1e-6);
      EXPECT_GE(eig_sym(testing::hessian_at(r.h, x)).values(0), -1e-6);
    }
    // Independent Monte-Carlo estimate of the sphere average.
    Polynomial lap = laplacian(r.g);
    double acc = 0.0;
    const int samples = 40000;
    for (int s = 0; s < samples; ++s) acc += eval(lap, testing::random_sphere_point(rng, n));
    EXPECT_NEAR(acc / samples, r.objective, 0.01 * std::abs(r.objective));
  }
}

}  // namespace
}  // namespace dsos::apps
