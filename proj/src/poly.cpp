#include "dsos/poly.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace dsos {

namespace {

struct MonomialHash {
  size_t operator()(const Monomial& m) const {
    size_t h = 1469598103934665603ull;
    for (int e : m) {
      h ^= static_cast<size_t>(e) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }
};

void check_same(const Polynomial& p, const Polynomial& q) {
  if (p.nvars() != q.nvars()) {
    throw DimensionError("polynomials have different variable counts");
  }
}

void enumerate_degree(int n, int d, int pos, Monomial& cur,
                      std::vector<Monomial>& out) {
  if (pos == n - 1) {
    cur[pos] = d;
    out.push_back(cur);
    cur[pos] = 0;
    return;
  }
  for (int e = d; e >= 0; --e) {
    cur[pos] = e;
    enumerate_degree(n, d - e, pos + 1, cur, out);
  }
  cur[pos] = 0;
}

}  // namespace

int total_degree(const Monomial& m) {
  return std::accumulate(m.begin(), m.end(), 0);
}

bool GradedLex::operator()(const Monomial& a, const Monomial& b) const {
  int da = total_degree(a), db = total_degree(b);
  if (da != db) return da < db;
  return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

std::vector<Monomial> monomials_of_degree(int n, int d) {
  std::vector<Monomial> out;
  if (n <= 0 || d < 0) return out;
  Monomial cur(n, 0);
  enumerate_degree(n, d, 0, cur, out);
  return out;
}

std::vector<Monomial> monomials_up_to_degree(int n, int d) {
  std::vector<Monomial> out;
  for (int k = 0; k <= d; ++k) {
    auto part = monomials_of_degree(n, k);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

Polynomial::Polynomial(int nvars) : nvars_(nvars) {
  if (nvars < 1) throw DimensionError("nvars must be positive");
}

Polynomial Polynomial::constant(int nvars, double c) {
  Polynomial p(nvars);
  p.add_term(Monomial(nvars, 0), c);
  return p;
}

Polynomial Polynomial::variable(int nvars, int i) {
  if (i < 0 || i >= nvars) throw DimensionError("variable index out of range");
  Polynomial p(nvars);
  Monomial m(nvars, 0);
  m[i] = 1;
  p.add_term(m, 1.0);
  return p;
}

Polynomial Polynomial::term(const Monomial& m, double c) {
  Polynomial p(static_cast<int>(m.size()));
  p.add_term(m, c);
  return p;
}

void Polynomial::add_term(const Monomial& m, double c) {
  if (static_cast<int>(m.size()) != nvars_) {
    throw DimensionError("monomial length does not match nvars");
  }
  if (c == 0.0) return;
  auto it = terms_.find(m);
  if (it == terms_.end()) {
    if (std::abs(c) >= kCleanup) terms_.emplace(m, c);
    return;
  }
  it->second += c;
  if (std::abs(it->second) < kCleanup) terms_.erase(it);
}

double Polynomial::coeff(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? 0.0 : it->second;
}

int Polynomial::degree() const {
  if (terms_.empty()) return 0;
  return total_degree(terms_.rbegin()->first);
}

bool Polynomial::is_homogeneous() const {
  if (terms_.empty()) return true;
  return total_degree(terms_.begin()->first) ==
         total_degree(terms_.rbegin()->first);
}

double Polynomial::max_abs_coeff() const {
  double m = 0.0;
  for (const auto& [mono, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

Polynomial& Polynomial::operator+=(const Polynomial& q) {
  check_same(*this, q);
  for (const auto& [m, c] : q.terms_) add_term(m, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& q) {
  check_same(*this, q);
  for (const auto& [m, c] : q.terms_) add_term(m, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto it = terms_.begin(); it != terms_.end();) {
    it->second *= s;
    if (std::abs(it->second) < kCleanup) {
      it = terms_.erase(it);
    } else {
      ++it;
    }
  }
  return *this;
}

Polynomial add(const Polynomial& p, const Polynomial& q) {
  Polynomial r = p;
  r += q;
  return r;
}

Polynomial mul(const Polynomial& p, const Polynomial& q) {
  check_same(p, q);
  const int n = p.nvars();
  std::unordered_map<Monomial, double, MonomialHash> acc;
  acc.reserve(p.size() * q.size());
  Monomial m(n);
  for (const auto& [a, ca] : p.terms()) {
    for (const auto& [b, cb] : q.terms()) {
      for (int i = 0; i < n; ++i) m[i] = a[i] + b[i];
      acc[m] += ca * cb;
    }
  }
  Polynomial r(n);
  for (const auto& [mono, c] : acc) r.add_term(mono, c);
  return r;
}

Polynomial pow(const Polynomial& p, int k) {
  if (k < 0) throw std::invalid_argument("negative power");
  Polynomial result = Polynomial::constant(p.nvars(), 1.0);
  Polynomial base = p;
  while (k > 0) {
    if (k & 1) result = mul(result, base);
    k >>= 1;
    if (k > 0) base = mul(base, base);
  }
  return result;
}

double eval(const Polynomial& p, const std::vector<double>& point) {
  if (static_cast<int>(point.size()) != p.nvars()) {
    throw DimensionError("point length does not match nvars");
  }
  double sum = 0.0;
  for (const auto& [m, c] : p.terms()) {
    double t = c;
    for (int i = 0; i < p.nvars(); ++i) {
      for (int e = 0; e < m[i]; ++e) t *= point[i];
    }
    sum += t;
  }
  return sum;
}

Polynomial partial(const Polynomial& p, int i) {
  if (i < 0 || i >= p.nvars()) throw DimensionError("variable index out of range");
  Polynomial r(p.nvars());
  for (const auto& [m, c] : p.terms()) {
    if (m[i] == 0) continue;
    Monomial d = m;
    d[i] -= 1;
    r.add_term(d, c * m[i]);
  }
  return r;
}

Polynomial homogenize(const Polynomial& p, int D) {
  if (p.degree() > D) throw std::invalid_argument("degree exceeds homogenization degree");
  const int n = p.nvars();
  Polynomial r(n + 1);
  for (const auto& [m, c] : p.terms()) {
    Monomial h(m);
    h.push_back(D - total_degree(m));
    r.add_term(h, c);
  }
  return r;
}

Polynomial substitute_square_difference(const Polynomial& p) {
  const int n = p.nvars();
  std::vector<Polynomial> sub;
  sub.reserve(n);
  for (int i = 0; i < n; ++i) {
    Monomial v(2 * n, 0), w(2 * n, 0);
    v[i] = 2;
    w[n + i] = 2;
    Polynomial s(2 * n);
    s.add_term(v, 1.0);
    s.add_term(w, -1.0);
    sub.push_back(std::move(s));
  }
  // Cache powers of each substituted variable.
  std::vector<std::vector<Polynomial>> powers(n);
  for (int i = 0; i < n; ++i) powers[i].push_back(Polynomial::constant(2 * n, 1.0));
  Polynomial r(2 * n);
  for (const auto& [m, c] : p.terms()) {
    Polynomial t = Polynomial::constant(2 * n, c);
    for (int i = 0; i < n; ++i) {
      while (static_cast<int>(powers[i].size()) <= m[i]) {
        powers[i].push_back(mul(powers[i].back(), sub[i]));
      }
      if (m[i] > 0) t = mul(t, powers[i][m[i]]);
    }
    r += t;
  }
  return r;
}

double min_coefficient(const Polynomial& p) {
  if (p.is_zero()) return 0.0;
  double m = p.terms().begin()->second;
  for (const auto& [mono, c] : p.terms()) m = std::min(m, c);
  return m;
}

double monomial_bound(const Polynomial& p, double R) {
  if (!(R > 0)) throw std::invalid_argument("radius must be positive");
  double s = 0.0;
  for (const auto& [m, c] : p.terms()) s += std::abs(c) * std::pow(R, total_degree(m));
  return s;
}

double sphere_moment(const Monomial& alpha) {
  // With a_i = 2k_i: prod Gamma(k_i+1/2) / Gamma(n/2 + K) * Gamma(n/2) / pi^{n/2},
  // where Gamma(k+1/2) = (2k)! sqrt(pi) / (4^k k!) = sqrt(pi) prod_{j<=k} (2j-1)/2.
  const int n = static_cast<int>(alpha.size());
  double value = 1.0;
  int K = 0;
  for (int a : alpha) {
    if (a % 2 != 0) return 0.0;
    int k = a / 2;
    for (int j = 1; j <= k; ++j) value *= (2.0 * j - 1.0) / 2.0;
    K += k;
  }
  for (int t = 0; t < K; ++t) value /= (n / 2.0 + t);
  return value;
}

double sphere_integral_tr_hessian(const Polynomial& g) {
  double total = 0.0;
  for (const auto& [m, c] : g.terms()) {
    for (int i = 0; i < g.nvars(); ++i) {
      if (m[i] < 2) continue;
      Monomial d = m;
      d[i] -= 2;
      total += c * m[i] * (m[i] - 1) * sphere_moment(d);
    }
  }
  return total;
}

Polynomial embed(const Polynomial& p, int nvars, const std::vector<int>& map) {
  if (static_cast<int>(map.size()) != p.nvars()) {
    throw DimensionError("embedding map has wrong length");
  }
  Polynomial r(nvars);
  for (const auto& [m, c] : p.terms()) {
    Monomial e(nvars, 0);
    for (int i = 0; i < p.nvars(); ++i) e[map[i]] += m[i];
    r.add_term(e, c);
  }
  return r;
}

Polynomial sum_squares_power(int n, int k) {
  Polynomial s(n);
  for (int i = 0; i < n; ++i) {
    Monomial m(n, 0);
    m[i] = 2;
    s.add_term(m, 1.0);
  }
  return pow(s, k);
}

Polynomial operator+(const Polynomial& p, const Polynomial& q) { return add(p, q); }

Polynomial operator-(const Polynomial& p, const Polynomial& q) {
  Polynomial r = p;
  r -= q;
  return r;
}

Polynomial operator-(const Polynomial& p) {
  Polynomial r = p;
  r *= -1.0;
  return r;
}

Polynomial operator*(const Polynomial& p, const Polynomial& q) { return mul(p, q); }

Polynomial operator*(double s, const Polynomial& p) {
  Polynomial r = p;
  r *= s;
  return r;
}

std::string to_string(const Polynomial& p) {
  if (p.is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (auto it = p.terms().rbegin(); it != p.terms().rend(); ++it) {
    const auto& [m, c] = *it;
    if (!first) os << (c < 0 ? " - " : " + ");
    else if (c < 0) os << "-";
    first = false;
    double a = std::abs(c);
    bool unit = total_degree(m) > 0 && a == 1.0;
    if (!unit) os << a;
    bool need_star = !unit;
    for (int i = 0; i < p.nvars(); ++i) {
      if (m[i] == 0) continue;
      if (need_star) os << "*";
      os << "x" << (i + 1);
      if (m[i] > 1) os << "^" << m[i];
      need_star = true;
    }
  }
  return os.str();
}

}  // namespace dsos
