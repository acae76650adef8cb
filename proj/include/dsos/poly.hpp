#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace dsos {

using Monomial = std::vector<int>;

int total_degree(const Monomial& m);

// Graded lexicographic: lower degree first, then larger exponent of x1 first.
struct GradedLex {
  bool operator()(const Monomial& a, const Monomial& b) const;
};

// All monomials in n variables of exact degree d, graded-lex ordered.
std::vector<Monomial> monomials_of_degree(int n, int d);
// All monomials of degree <= d.
std::vector<Monomial> monomials_up_to_degree(int n, int d);

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Polynomial {
 public:
  using TermMap = std::map<Monomial, double, GradedLex>;
  static constexpr double kCleanup = 1e-14;

  explicit Polynomial(int nvars = 1);

  static Polynomial constant(int nvars, double c);
  static Polynomial variable(int nvars, int i);
  static Polynomial term(const Monomial& m, double c);

  int nvars() const { return nvars_; }
  const TermMap& terms() const { return terms_; }
  size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }

  // Adds c to the coefficient of m; drops the term if it falls below cleanup.
  void add_term(const Monomial& m, double c);
  double coeff(const Monomial& m) const;

  int degree() const;
  bool is_homogeneous() const;
  double max_abs_coeff() const;

  Polynomial& operator+=(const Polynomial& q);
  Polynomial& operator-=(const Polynomial& q);
  Polynomial& operator*=(double s);

 private:
  int nvars_;
  TermMap terms_;
};

Polynomial add(const Polynomial& p, const Polynomial& q);
Polynomial mul(const Polynomial& p, const Polynomial& q);
Polynomial pow(const Polynomial& p, int k);
double eval(const Polynomial& p, const std::vector<double>& point);
Polynomial partial(const Polynomial& p, int i);
Polynomial homogenize(const Polynomial& p, int D);
Polynomial substitute_square_difference(const Polynomial& p);
double min_coefficient(const Polynomial& p);
double monomial_bound(const Polynomial& p, double R);
// Average of the Hessian trace over the unit sphere (surface measure / A_n).
double sphere_integral_tr_hessian(const Polynomial& g);
// Normalized sphere moment of x^alpha, i.e. its mean over S^{n-1}.
double sphere_moment(const Monomial& alpha);

// Embeds p into a ring with more variables; variable i maps to index map[i].
Polynomial embed(const Polynomial& p, int nvars, const std::vector<int>& map);
// (sum_i x_i^2)^k in n variables.
Polynomial sum_squares_power(int n, int k);

Polynomial operator+(const Polynomial& p, const Polynomial& q);
Polynomial operator-(const Polynomial& p, const Polynomial& q);
Polynomial operator-(const Polynomial& p);
Polynomial operator*(const Polynomial& p, const Polynomial& q);
Polynomial operator*(double s, const Polynomial& p);

std::string to_string(const Polynomial& p);

}  // namespace dsos
