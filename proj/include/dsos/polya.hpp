#pragma once

// Lower bounds for min p(x) s.t. g_i(x) >= 0 over a set inside a ball.
// A candidate gamma is certified by positivity of the sos form f_gamma;
// positivity is checked by coefficient inspection after multiplying by a
// power of the sum of squares (no optimization), or by a dsos/sdsos
// multiplier search.

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dsos/atoms.hpp"
#include "dsos/conic.hpp"
#include "dsos/poly.hpp"

#include "json.hpp"

namespace dsos::polya {

struct PopInstance {
  Polynomial p;
  std::vector<Polynomial> g;  // g_i(x) >= 0
  double R = 1.0;             // feasible set inside B(0, R)

  int n() const { return p.nvars(); }
  int m() const { return static_cast<int>(g.size()); }
  // 2d is the smallest even integer >= the largest degree (at least 2).
  int d() const;
  // Variables of f_gamma: x, s_0..s_{m+1}, y.
  int lifted_vars() const { return n() + m() + 3; }
  // Throws std::invalid_argument on R <= 0 or mismatched variable counts.
  void validate() const;
};

struct PolyaBounds {
  std::vector<double> eta;  // g_i <= eta_i on the ball
  double beta = 0.0;        // -p <= beta on the ball
};

PolyaBounds bounds(const PopInstance& pop);

// Degree 4d form in lifted_vars() variables; the constant of the last square
// uses R^2 + sum eta + beta + gamma.
Polynomial build_f_gamma(const PopInstance& pop, const PolyaBounds& b, double gamma);

enum class Verdict { Accepted, Rejected, Unevaluated };
const char* to_string(Verdict v);

struct PolOptions {
  long max_terms = 5'000'000;  // product size guard
  double rel_tol = 1e-9;
  int screen_starts = 64;      // sphere descent starts used beyond the guard
  unsigned seed = 7;
};

struct PolTest {
  Verdict verdict = Verdict::Unevaluated;
  double min_coeff = 0.0;
  double max_abs_coeff = 0.0;
  long terms = 0;
  // Rejected by exhibiting a point where the multiplied form is negative.
  bool by_sampling = false;
};

// Number of monomials of (q(v^2 - w^2) + ...)(sum v^2 + sum w^2)^{r^2} for q
// of degree 2D in N variables.
long pol_term_count(int N, int two_D, int r);

// q homogeneous of even degree 2D. Accepted iff
// (q(v^2 - w^2) + 1/(2r) (sum v^4 + w^4)^D)(sum v^2 + sum w^2)^{r^2}
// has all coefficients >= -rel_tol (1 + max |coefficient|).
PolTest pol_test(const Polynomial& q, int r, const PolOptions& opts = {});
bool pol_membership(const Polynomial& q, int r, const PolOptions& opts = {});

// f - (1/r) (sum z^2)^{deg f / 2}.
Polynomial level_form(const Polynomial& f, int r);
// q(v^2 - w^2) + 1/(2r) (sum v^4 + w^4)^{deg q / 2}, in 2N variables.
Polynomial multiplier_target(const Polynomial& q, int r);

struct MultiplierOptions {
  long max_atoms = 40'000;
  SolverOptions solver;
};

struct MultiplierTest {
  Verdict verdict = Verdict::Unevaluated;
  SolveStatus status = SolveStatus::Stalled;
  double shift = std::numeric_limits<double>::infinity();
  long atoms = 0;
};

// Searches q s/dsos of degree 2r^2 (trace of its Gram matrix = 1) with
// P q s/dsos. P must be an even form. Accepted iff the smallest t with
// P q + t z'z s/dsos is <= 1e-7.
MultiplierTest multiplier_test(const Polynomial& P, int r, ConeTag tag,
                               const MultiplierOptions& opts = {});

struct Bracket {
  double lo = 0.0;
  double hi = 0.0;
};
// [-beta, monomial_bound(p, R)].
Bracket default_bracket(const PopInstance& pop);

enum class Variant { Pol, Dsos, Sdsos };
const char* to_string(Variant v);

struct GammaTest {
  int r = 0;
  double gamma = 0.0;
  Verdict verdict = Verdict::Unevaluated;
};

struct LevelResult {
  // Last accepted gamma; -inf when the bracket's lower end is not accepted.
  double value = -std::numeric_limits<double>::infinity();
  std::vector<GammaTest> tests;
  std::string diagnostic;
};

struct HierarchyOptions {
  Variant variant = Variant::Pol;
  double eps = 1e-3;
  std::optional<Bracket> bracket;  // default_bracket when empty
  PolOptions pol;
  MultiplierOptions multiplier;
};

// Verdict of a single gamma at level r.
Verdict test_gamma(const PopInstance& pop, double gamma, int r, const HierarchyOptions& opts);

LevelResult level(const PopInstance& pop, int r, const HierarchyOptions& opts = {});

struct HierarchyResult {
  std::vector<double> l;  // l_1 .. l_rmax
  std::vector<double> m;  // running maxima
  std::vector<GammaTest> tests;
  std::vector<std::string> diagnostics;
  double eps = 0.0;
  Bracket bracket;
  // Largest gamma accepted by any individual test.
  double best_accepted = -std::numeric_limits<double>::infinity();
};

HierarchyResult run(const PopInstance& pop, int r_max, const HierarchyOptions& opts = {});

nlohmann::json to_json(const HierarchyResult& h);

}  // namespace dsos::polya
