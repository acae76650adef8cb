#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dsos/polya.hpp"
#include "test_util.hpp"

namespace dsos::polya {
namespace {

using testing::mono;

Polynomial var(int n, int i) { return Polynomial::variable(n, i); }

// min x s.t. x >= 0, 1 - x >= 0.
PopInstance unit_interval() {
  PopInstance pop;
  pop.p = var(1, 0);
  pop.g = {var(1, 0), Polynomial::constant(1, 1.0) - var(1, 0)};
  pop.R = 1.0;
  return pop;
}

// Literal product of the membership test with sparse arithmetic.
Polynomial literal_product(const Polynomial& q, int r) {
  const int N = q.nvars();
  const int D = q.is_zero() ? 0 : q.degree() / 2;
  Polynomial quart(2 * N), sq(2 * N);
  for (int i = 0; i < 2 * N; ++i) {
    Monomial m4(2 * N, 0), m2(2 * N, 0);
    m4[i] = 4;
    m2[i] = 2;
    quart.add_term(m4, 1.0);
    sq.add_term(m2, 1.0);
  }
  Polynomial base = substitute_square_difference(q) + (1.0 / (2 * r)) * pow(quart, D);
  return base * pow(sq, r * r);
}

bool literal_accepts(const Polynomial& q, int r) {
  Polynomial prod = literal_product(q, r);
  return min_coefficient(prod) >= -1e-9 * (1.0 + prod.max_abs_coeff());
}

TEST(Polya, BoundsOnSimpleData) {
  PopInstance pop;
  pop.p = var(1, 0);
  pop.g = {var(1, 0)};
  PolyaBounds b = bounds(pop);
  EXPECT_DOUBLE_EQ(b.eta[0], 1.0);
  EXPECT_DOUBLE_EQ(b.beta, 1.0);
  pop.R = 0.0;
  EXPECT_THROW(bounds(pop), std::invalid_argument);
}

TEST(Polya, BoundsDominateSampledMaxima) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PopInstance pop;
  pop.R = 1.5;
  pop.p = testing::random_polynomial(rng, 3, 3, 8);
  pop.g = {testing::random_polynomial(rng, 3, 3, 8)};
  PolyaBounds b = bounds(pop);
  for (int s = 0; s < 10000; ++s) {
    std::vector<double> x(3);
    double nrm = 0.0;
    for (double& xi : x) {
      xi = u(rng);
      nrm += xi * xi;
    }
    if (nrm > 1.0) continue;
    for (double& xi : x) xi *= pop.R;
    EXPECT_LE(eval(pop.g[0], x), b.eta[0]);
    EXPECT_LE(-eval(pop.p, x), b.beta);
  }
}

TEST(Polya, FGammaShapeAndNonnegativity) {
  PopInstance pop = unit_interval();
  Polynomial f = build_f_gamma(pop, bounds(pop), -0.1);
  EXPECT_EQ(f.nvars(), 6);
  EXPECT_TRUE(f.is_homogeneous());
  EXPECT_EQ(f.degree(), 4);
  std::mt19937 rng(12);
  std::normal_distribution<double> g;
  double lowest = 1e300;
  for (int s = 0; s < 1000; ++s) {
    std::vector<double> z = testing::random_sphere_point(rng, 6);
    lowest = std::min(lowest, eval(f, z));
    for (double& zi : z) zi = 3.0 * g(rng);
    EXPECT_GE(eval(f, z), -1e-10);
  }
  // -0.1 is a strict lower bound, so f_gamma is positive on the sphere.
  EXPECT_GT(lowest, 0.0);
}

// gamma = 2 is not a strict lower bound: a feasible point with p <= gamma
// gives a zero of f_gamma at y = 1.
TEST(Polya, FGammaVanishesAtWitness) {
  PopInstance pop = unit_interval();
  const double gamma = 2.0, x = 0.5;
  PolyaBounds b = bounds(pop);
  double K = pop.R * pop.R + b.eta[0] + b.eta[1] + b.beta + gamma;
  double s0 = std::sqrt(gamma - x), s1 = std::sqrt(x), s2 = std::sqrt(1.0 - x);
  double s3 = std::sqrt(K - (x * x + s0 * s0 + s1 * s1 + s2 * s2));
  Polynomial f = build_f_gamma(pop, b, gamma);
  EXPECT_NEAR(eval(f, {x, s0, s1, s2, s3, 1.0}), 0.0, 1e-10);
}

TEST(Polya, MembershipTrivialCases) {
  EXPECT_TRUE(pol_membership(Polynomial(2), 1));
  Polynomial neg = -sum_squares_power(2, 2);
  EXPECT_FALSE(pol_membership(neg, 1));
  EXPECT_FALSE(pol_membership(neg, 2));
  EXPECT_THROW(pol_membership(neg, 0), std::invalid_argument);
  EXPECT_THROW(pol_membership(var(2, 0), 1), std::invalid_argument);
}

TEST(Polya, MembershipProductCoefficientByHand) {
  // q = z^4: the product (1.5v^8 - 4v^6w^2 + 7v^4w^4 - ...)(v^2 + w^2) has
  // -2.5 on v^8 w^2.
  Polynomial q = Polynomial::term(mono({4}), 1.0);
  Polynomial prod = literal_product(q, 1);
  EXPECT_NEAR(prod.coeff(mono({8, 2})), -2.5, 1e-12);
  EXPECT_NEAR(min_coefficient(prod), -2.5, 1e-12);
  PolTest t = pol_test(q, 1);
  EXPECT_EQ(t.verdict, Verdict::Rejected);
  EXPECT_NEAR(t.min_coeff, -2.5, 1e-12);
  EXPECT_EQ(t.terms, static_cast<long>(prod.size()));
}

TEST(Polya, DenseProductMatchesSparseOracle) {
  std::mt19937 rng(13);
  int agree = 0;
  for (int trial = 0; trial < 24; ++trial) {
    const int N = 1 + trial % 3;
    const int D = 1 + (trial / 3) % 2;
    const int r = 1 + (trial / 6) % 2;
    // Positive definite part plus a random perturbation.
    Polynomial q = sum_squares_power(N, D) + 0.3 * testing::random_form(rng, N, 2 * D);
    Polynomial prod = literal_product(q, r);
    PolTest t = pol_test(q, r);
    EXPECT_NEAR(t.min_coeff, min_coefficient(prod), 1e-9 * (1.0 + prod.max_abs_coeff()));
    EXPECT_NEAR(t.max_abs_coeff, prod.max_abs_coeff(), 1e-9 * (1.0 + prod.max_abs_coeff()));
    EXPECT_LE(static_cast<long>(prod.size()), t.terms);
    agree += (t.verdict == Verdict::Accepted) == literal_accepts(q, r);
  }
  EXPECT_EQ(agree, 24);
}

// Polya's theorem: z^2 lifts to a form positive on the simplex, so a high
// enough level accepts it.
TEST(Polya, PositiveFormAcceptedAtSomeLevel) {
  Polynomial q = Polynomial::term(mono({2}), 1.0);
  int first = 0;
  for (int r = 1; r <= 6 && first == 0; ++r)
    if (pol_membership(q, r)) first = r;
  ASSERT_GT(first, 1);
  EXPECT_TRUE(literal_accepts(q, first));
  EXPECT_FALSE(literal_accepts(q, first - 1));
  // Accepted forms are nonnegative with the 1/(2r) margin.
  std::mt19937 rng(14);
  for (int s = 0; s < 100; ++s) {
    std::vector<double> z = testing::random_sphere_point(rng, 1);
    EXPECT_GE(eval(q, z) + 1.0 / (2.0 * first), -1e-6);
  }
}

TEST(Polya, GuardReportsUnevaluatedOrSampledRejection) {
  PolOptions o;
  o.max_terms = 10;
  PolTest pos = pol_test(sum_squares_power(3, 2), 2, o);
  EXPECT_EQ(pos.verdict, Verdict::Unevaluated);
  EXPECT_GT(pos.terms, 10);
  Polynomial q = sum_squares_power(3, 2) - 2.0 * Polynomial::term(mono({4, 0, 0}), 1.0);
  PolTest neg = pol_test(q, 2, o);
  EXPECT_EQ(neg.verdict, Verdict::Rejected);
  EXPECT_TRUE(neg.by_sampling);
  EXPECT_FALSE(literal_accepts(q, 2));
}

TEST(Polya, MultiplierDominatesCoefficientTest) {
  Polynomial q = Polynomial::term(mono({2}), 1.0);
  // At r = 1 the coefficient test fails but P itself is dsos.
  ASSERT_FALSE(pol_membership(q, 1));
  MultiplierTest m1 = multiplier_test(multiplier_target(q, 1), 1, ConeTag::DD);
  EXPECT_EQ(m1.verdict, Verdict::Accepted);
  for (int r = 1; r <= 3; ++r) {
    if (!pol_membership(q, r)) continue;
    EXPECT_EQ(multiplier_test(multiplier_target(q, r), r, ConeTag::DD).verdict,
              Verdict::Accepted);
    EXPECT_EQ(multiplier_test(multiplier_target(q, r), r, ConeTag::SDD).verdict,
              Verdict::Accepted);
  }
  // A form negative somewhere is never accepted.
  Polynomial bad = Polynomial::term(mono({2, 0}), 1.0) - Polynomial::term(mono({0, 2}), 1.0);
  EXPECT_EQ(multiplier_test(multiplier_target(bad, 1), 1, ConeTag::SDD).verdict,
            Verdict::Rejected);
}

TEST(Polya, MultiplierGuard) {
  MultiplierOptions o;
  o.max_atoms = 5;
  MultiplierTest t =
      multiplier_test(multiplier_target(sum_squares_power(2, 1), 1), 1, ConeTag::DD, o);
  EXPECT_EQ(t.verdict, Verdict::Unevaluated);
  EXPECT_GT(t.atoms, 5);
}

TEST(Polya, UnitIntervalLowLevels) {
  PopInstance pop = unit_interval();
  Bracket br = default_bracket(pop);
  EXPECT_DOUBLE_EQ(br.lo, -1.0);
  EXPECT_DOUBLE_EQ(br.hi, 1.0);
  HierarchyOptions o;
  HierarchyResult h = run(pop, 2, o);
  ASSERT_EQ(h.l.size(), 2u);
  for (size_t r = 0; r < h.l.size(); ++r) {
    EXPECT_LE(h.l[r], 1e-6);
    if (r > 0) {
      EXPECT_GE(h.m[r], h.m[r - 1]);
    }
  }
  EXPECT_LE(h.best_accepted, 1e-6);
  for (int r = 1; r <= 2; ++r) EXPECT_EQ(test_gamma(pop, 0.1, r, o), Verdict::Rejected);
  // r_max = 1 is level 1.
  EXPECT_EQ(run(pop, 1, o).l[0], level(pop, 1, o).value);
}

TEST(Polya, AcceptedGammaCertifiesPositivity) {
  // A pop whose level-1 test accepts something: min x^2 over [-1, 1] with a
  // slack-friendly bracket far below the optimum.
  PopInstance pop;
  pop.p = Polynomial::term(mono({2}), 1.0);
  pop.g = {Polynomial::constant(1, 1.0) - Polynomial::term(mono({2}), 1.0)};
  HierarchyOptions o;
  o.bracket = Bracket{-50.0, 1.0};
  o.eps = 0.5;
  HierarchyResult h = run(pop, 2, o);
  std::mt19937 rng(15);
  for (const auto& t : h.tests) {
    if (t.verdict != Verdict::Accepted) continue;
    EXPECT_LT(t.gamma, 0.0);
    Polynomial f = build_f_gamma(pop, bounds(pop), t.gamma);
    for (int s = 0; s < 1000; ++s) {
      std::vector<double> z = testing::random_sphere_point(rng, f.nvars());
      EXPECT_GE(eval(f, z), 1.0 / (2.0 * t.r) - 1e-6);
    }
  }
  auto j = to_json(h);
  EXPECT_EQ(j["l"].size(), 2u);
}

}  // namespace
}  // namespace dsos::polya
