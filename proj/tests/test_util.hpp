#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "dsos/linalg.hpp"
#include "dsos/poly.hpp"

namespace dsos::testing {

inline Monomial mono(std::initializer_list<int> e) { return Monomial(e); }

inline Polynomial random_polynomial(std::mt19937& rng, int n, int max_deg, int nterms,
                                    bool homogeneous = false) {
  std::uniform_int_distribution<int> deg(homogeneous ? max_deg : 0, max_deg);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  Polynomial p(n);
  for (int t = 0; t < nterms; ++t) {
    int d = deg(rng);
    auto monos = monomials_of_degree(n, d);
    std::uniform_int_distribution<size_t> pick(0, monos.size() - 1);
    p.add_term(monos[pick(rng)], coef(rng));
  }
  return p;
}

// Dense random form with every monomial of degree d present.
inline Polynomial random_form(std::mt19937& rng, int n, int d) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  Polynomial p(n);
  for (const auto& m : monomials_of_degree(n, d)) p.add_term(m, coef(rng));
  return p;
}

inline std::vector<double> random_point(std::mt19937& rng, int n, double r = 1.0) {
  std::uniform_real_distribution<double> u(-r, r);
  std::vector<double> x(n);
  for (auto& v : x) v = u(rng);
  return x;
}

inline std::vector<double> random_sphere_point(std::mt19937& rng, int n) {
  std::normal_distribution<double> g;
  std::vector<double> x(n);
  double nrm = 0;
  for (auto& v : x) {
    v = g(rng);
    nrm += v * v;
  }
  nrm = std::sqrt(nrm);
  for (auto& v : x) v /= nrm;
  return x;
}

inline SymMatrix random_sym(std::mt19937& rng, int n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  SymMatrix M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) M(i, j) = M(j, i) = u(rng);
  return M;
}

// Hessian of p evaluated at x.
inline Eigen::MatrixXd hessian_at(const Polynomial& p, const std::vector<double>& x) {
  const int n = p.nvars();
  Eigen::MatrixXd H(n, n);
  for (int i = 0; i < n; ++i) {
    Polynomial pi = partial(p, i);
    for (int j = i; j < n; ++j) H(i, j) = H(j, i) = eval(partial(pi, j), x);
  }
  return H;
}

}  // namespace dsos::testing
