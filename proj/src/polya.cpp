#include "dsos/polya.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "dsos/gram.hpp"

namespace dsos::polya {

namespace {

constexpr double kShiftTol = 1e-7;

Monomial unit(int nvars, int i, int e) {
  Monomial m(nvars, 0);
  m[i] = e;
  return m;
}

// Binomial coefficients C(a, b) for a < size.
class Binomial {
 public:
  explicit Binomial(int size) : t_(size, std::vector<long>(size, 0)) {
    for (int a = 0; a < size; ++a) {
      t_[a][0] = 1;
      for (int b = 1; b <= a; ++b) t_[a][b] = t_[a - 1][b - 1] + (b < a ? t_[a - 1][b] : 0);
    }
  }
  long operator()(int a, int b) const { return (b < 0 || b > a) ? 0 : t_[a][b]; }

 private:
  std::vector<std::vector<long>> t_;
};

// Homogeneous forms of degree k in M variables stored densely; monomials
// are ranked in descending lex order of the exponent vector.
class DenseForms {
 public:
  DenseForms(int M, int max_degree) : M_(M), binom_(max_degree + M + 1) {}

  long count(int k) const { return binom_(k + M_ - 1, M_ - 1); }

  long rank(const std::vector<int>& beta, int k) const {
    long r = 0;
    int rem = k;
    for (int i = 0; i + 1 < M_; ++i) {
      const int mp = M_ - 1 - i;
      const int t = rem - beta[i] - 1;
      if (t >= 0) r += binom_(t + mp, mp);
      rem -= beta[i];
    }
    return r;
  }

  // Advances beta to the next monomial of the same degree; false at the end.
  bool next(std::vector<int>& beta) const {
    int tail = beta[M_ - 1];
    beta[M_ - 1] = 0;
    int j = M_ - 2;
    while (j >= 0 && beta[j] == 0) --j;
    if (j < 0) {
      beta[M_ - 1] = tail;
      return false;
    }
    beta[j] -= 1;
    beta[j + 1] = tail + 1;
    return true;
  }

  // out = in * (u_1 + ... + u_M); in has degree k.
  std::vector<double> times_linear(const std::vector<double>& in, int k) const {
    std::vector<double> out(count(k + 1), 0.0);
    std::vector<int> beta(M_, 0);
    beta[0] = k + 1;
    long idx = 0;
    do {
      // Neumaier summation over the predecessors.
      double s = 0.0, comp = 0.0;
      for (int i = 0; i < M_; ++i) {
        if (beta[i] == 0) continue;
        beta[i] -= 1;
        double v = in[rank(beta, k)];
        beta[i] += 1;
        double t = s + v;
        comp += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
        s = t;
      }
      out[idx++] = s + comp;
    } while (next(beta));
    return out;
  }

 private:
  int M_;
  Binomial binom_;
};

// q(a - b) + 1/(2r) (sum a_i^2 + b_i^2)^D in 2N variables (a, b): the even
// form of the membership test written in the squares a = v^2, b = w^2.
Polynomial squared_base(const Polynomial& q, int r) {
  const int N = q.nvars();
  const int D = q.degree() / 2;
  Polynomial lifted = substitute_square_difference(q);
  Polynomial out(2 * N);
  for (const auto& [m, c] : lifted.terms()) {
    Monomial h(m.size());
    for (size_t i = 0; i < m.size(); ++i) h[i] = m[i] / 2;
    out.add_term(h, c);
  }
  out += (1.0 / (2.0 * r)) * sum_squares_power(2 * N, D);
  return out;
}

void check_level_input(const Polynomial& q, int r) {
  if (r < 1) throw std::invalid_argument("level r must be at least 1");
  if (!q.is_zero() && (!q.is_homogeneous() || q.degree() % 2 != 0))
    throw std::invalid_argument("expected a homogeneous form of even degree");
}

struct Descent {
  double value;
  Eigen::VectorXd z;
};

// Projected gradient descent of q on the unit sphere.
Descent sphere_descent(const Polynomial& q, const std::vector<Polynomial>& grad,
                       Eigen::VectorXd z) {
  const int n = static_cast<int>(z.size());
  auto val = [&](const Eigen::VectorXd& x) {
    return eval(q, std::vector<double>(x.data(), x.data() + n));
  };
  z.normalize();
  double f = val(z);
  double step = 1e-2;
  for (int it = 0; it < 300; ++it) {
    std::vector<double> pt(z.data(), z.data() + n);
    Eigen::VectorXd g(n);
    for (int i = 0; i < n; ++i) g(i) = eval(grad[i], pt);
    g -= g.dot(z) * z;
    if (g.norm() < 1e-12) break;
    bool moved = false;
    for (int ls = 0; ls < 30; ++ls) {
      Eigen::VectorXd cand = (z - step * g).normalized();
      double fc = val(cand);
      if (fc < f) {
        z = cand;
        f = fc;
        step *= 1.5;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return {f, z};
}

// A point with q(z) + 1/(2r) |z|^{2D} < 0 makes the multiplied form negative
// at v = sqrt(z+), w = sqrt(z-), which rules out nonnegative coefficients.
bool screen_rejects(const Polynomial& q, int r, const PolOptions& opts) {
  const int n = q.nvars();
  std::vector<Polynomial> grad;
  for (int i = 0; i < n; ++i) grad.push_back(partial(q, i));
  const double margin = 1e-8 * (1.0 + q.max_abs_coeff());
  const double target = -1.0 / (2.0 * r) - margin;
  std::vector<Eigen::VectorXd> starts;
  for (int i = 0; i < n; ++i) {
    starts.push_back(Eigen::VectorXd::Unit(n, i));
    starts.push_back(-Eigen::VectorXd::Unit(n, i));
  }
  std::mt19937 rng(opts.seed);
  std::normal_distribution<double> gauss;
  for (int s = 0; s < opts.screen_starts; ++s) {
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z(i) = gauss(rng);
    starts.push_back(z);
  }
  for (const auto& z0 : starts)
    if (sphere_descent(q, grad, z0).value < target) return true;
  return false;
}

}  // namespace

int PopInstance::d() const {
  int deg = p.degree();
  for (const auto& gi : g) deg = std::max(deg, gi.degree());
  return std::max(1, (deg + 1) / 2);
}

void PopInstance::validate() const {
  if (!(R > 0)) throw std::invalid_argument("radius must be positive");
  for (const auto& gi : g)
    if (gi.nvars() != p.nvars()) throw DimensionError("constraints and objective differ in nvars");
}

PolyaBounds bounds(const PopInstance& pop) {
  pop.validate();
  PolyaBounds b;
  for (const auto& gi : pop.g) b.eta.push_back(monomial_bound(gi, pop.R));
  b.beta = monomial_bound(-pop.p, pop.R);
  return b;
}

Polynomial build_f_gamma(const PopInstance& pop, const PolyaBounds& b, double gamma) {
  pop.validate();
  if (b.eta.size() != pop.g.size()) throw DimensionError("one eta per constraint");
  const int n = pop.n(), m = pop.m(), d = pop.d();
  const int N = pop.lifted_vars();
  const int y = N - 1;
  auto s = [&](int i) { return n + i; };  // s_0 .. s_{m+1}

  std::vector<int> to_lifted(n + 1);
  for (int i = 0; i < n; ++i) to_lifted[i] = i;
  to_lifted[n] = y;
  auto lift = [&](const Polynomial& h) { return embed(homogenize(h, 2 * d), N, to_lifted); };

  const Polynomial y2d = Polynomial::term(unit(N, y, 2 * d), 1.0);
  auto s2y = [&](int i) {
    Monomial mono = unit(N, y, 2 * d - 2);
    mono[s(i)] += 2;
    return Polynomial::term(mono, 1.0);
  };

  Polynomial first = gamma * y2d - lift(pop.p) - s2y(0);
  Polynomial f = first * first;
  for (int i = 0; i < m; ++i) {
    Polynomial gi = lift(pop.g[i]) - s2y(i + 1);
    f += gi * gi;
  }
  double K = pop.R * pop.R + b.beta + gamma;
  for (double e : b.eta) K += e;
  Polynomial radial(N);
  for (int i = 0; i < n; ++i) radial.add_term(unit(N, i, 2), 1.0);
  for (int i = 0; i <= m; ++i) radial.add_term(unit(N, s(i), 2), 1.0);
  Polynomial last = std::pow(K, d) * y2d - pow(radial, d) -
                    Polynomial::term(unit(N, s(m + 1), 2 * d), 1.0);
  f += last * last;
  return f;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Accepted:
      return "accepted";
    case Verdict::Rejected:
      return "rejected";
    case Verdict::Unevaluated:
      return "unevaluated";
  }
  return "?";
}

const char* to_string(Variant v) {
  switch (v) {
    case Variant::Pol:
      return "pol";
    case Variant::Dsos:
      return "dsos";
    case Variant::Sdsos:
      return "sdsos";
  }
  return "?";
}

long pol_term_count(int N, int two_D, int r) {
  const int M = 2 * N;
  const int k = two_D + r * r;  // degree in the squares
  // C(k + M - 1, M - 1) in floating point to avoid overflow, capped.
  double c = 1.0;
  for (int i = 1; i < M; ++i) c = c * (k + i) / i;
  return c > 9e18 ? std::numeric_limits<long>::max() : std::lround(c);
}

PolTest pol_test(const Polynomial& q, int r, const PolOptions& opts) {
  check_level_input(q, r);
  PolTest t;
  const int N = q.nvars();
  const int two_D = q.is_zero() ? 0 : q.degree();
  t.terms = pol_term_count(N, two_D, r);
  if (t.terms > opts.max_terms) {
    if (screen_rejects(q, r, opts)) {
      t.verdict = Verdict::Rejected;
      t.by_sampling = true;
    }
    return t;
  }

  Polynomial base = squared_base(q, r);
  const int M = 2 * N;
  const int k0 = two_D;
  DenseForms forms(M, k0 + r * r);
  std::vector<double> c(forms.count(k0), 0.0);
  for (const auto& [mono, coef] : base.terms()) c[forms.rank(mono, k0)] += coef;
  for (int j = 0; j < r * r; ++j) c = forms.times_linear(c, k0 + j);

  t.min_coeff = *std::min_element(c.begin(), c.end());
  for (double v : c) t.max_abs_coeff = std::max(t.max_abs_coeff, std::abs(v));
  t.verdict = t.min_coeff >= -opts.rel_tol * (1.0 + t.max_abs_coeff) ? Verdict::Accepted
                                                                       : Verdict::Rejected;
  return t;
}

bool pol_membership(const Polynomial& q, int r, const PolOptions& opts) {
  return pol_test(q, r, opts).verdict == Verdict::Accepted;
}

Polynomial level_form(const Polynomial& f, int r) {
  if (r < 1) throw std::invalid_argument("level r must be at least 1");
  return f - (1.0 / r) * sum_squares_power(f.nvars(), f.degree() / 2);
}

Polynomial multiplier_target(const Polynomial& q, int r) {
  check_level_input(q, r);
  const int N = q.nvars();
  const int D = q.degree() / 2;
  Polynomial quart(2 * N);
  for (int i = 0; i < 2 * N; ++i) quart.add_term(unit(2 * N, i, 4), 1.0);
  return substitute_square_difference(q) + (1.0 / (2.0 * r)) * pow(quart, D);
}

MultiplierTest multiplier_test(const Polynomial& P, int r, ConeTag tag,
                               const MultiplierOptions& opts) {
  if (r < 1) throw std::invalid_argument("level r must be at least 1");
  if (P.is_zero() || !P.is_homogeneous() || P.degree() % 2 != 0)
    throw std::invalid_argument("multiplier_test needs a nonzero even-degree form");
  const int M = P.nvars();
  MonomialBasis qb = basis(M, r * r, BasisKind::Exact);
  MonomialBasis pb = basis(M, P.degree() / 2 + r * r, BasisKind::Exact);
  // P is even in every variable, so q can be taken even as well (averaging
  // over sign flips keeps both memberships); pairs reduce by parity.
  auto q_allowed = parity_filter(qb, {P});
  auto p_allowed = parity_filter(pb, {P});

  MultiplierTest out;
  auto count_pairs = [&](const MonomialBasis& b, const std::function<bool(int, int)>& ok) {
    long c = 0;
    for (int k = 0; k < b.size(); ++k)
      for (int l = k + 1; l < b.size(); ++l) c += (!ok || ok(k, l)) ? 1 : 0;
    return b.size() + (tag == ConeTag::DD ? 2 : 1) * c;
  };
  out.atoms = count_pairs(qb, q_allowed) + count_pairs(pb, p_allowed);
  if (out.atoms > opts.max_atoms) return out;

  GramMap gp = gram_map(pb);
  const int rows = gp.rows();
  const int trace_row = rows;

  PairMap qmap(qb.size(), rows + 1);
  for (int k = 0; k < qb.size(); ++k) {
    for (int l = k; l < qb.size(); ++l) {
      if (q_allowed && k != l && !q_allowed(k, l)) continue;
      Monomial kl(M);
      for (int i = 0; i < M; ++i) kl[i] = qb.entries[k][i] + qb.entries[l][i];
      for (const auto& [mono, c] : P.terms()) {
        Monomial prod(M);
        for (int i = 0; i < M; ++i) prod[i] = kl[i] + mono[i];
        qmap.add(k, l, gp.row(prod), (k == l ? 1.0 : 2.0) * c);
      }
    }
    qmap.add(k, k, trace_row, 1.0);
  }
  PairMap pmap(pb.size(), rows + 1);
  for (int k = 0; k < pb.size(); ++k)
    for (int l = k; l < pb.size(); ++l)
      for (const auto& [row, w] : gp.pairs.terms(k, l)) pmap.add(k, l, row, -w);

  AtomProgram prog;
  prog.rows = rows + 1;
  prog.rhs = Eigen::VectorXd::Zero(rows + 1);
  prog.rhs(trace_row) = 1.0;
  AtomBlock qblk;
  qblk.map = &qmap;
  add_base_atoms(qblk, tag, q_allowed);
  AtomBlock pblk;
  pblk.map = &pmap;
  add_base_atoms(pblk, tag, p_allowed);
  prog.blocks.push_back(std::move(qblk));
  prog.blocks.push_back(std::move(pblk));

  ExtraColumn t;
  t.type = ConeType::Free;
  t.cost = 1.0;
  t.entries = sparsify(gp.pairs.apply(SymMatrix::Identity(pb.size(), pb.size())));
  prog.extras.push_back(std::move(t));

  AtomSolution sol = solve_atoms(prog, opts.solver);
  out.status = sol.status;
  if (sol.status != SolveStatus::Optimal) {
    out.verdict = sol.status == SolveStatus::Stalled ? Verdict::Unevaluated : Verdict::Rejected;
    return out;
  }
  out.shift = sol.extras(0);
  out.verdict = out.shift <= kShiftTol ? Verdict::Accepted : Verdict::Rejected;
  return out;
}

Bracket default_bracket(const PopInstance& pop) {
  PolyaBounds b = bounds(pop);
  return {-b.beta, monomial_bound(pop.p, pop.R)};
}

Verdict test_gamma(const PopInstance& pop, double gamma, int r, const HierarchyOptions& opts) {
  Polynomial q = level_form(build_f_gamma(pop, bounds(pop), gamma), r);
  switch (opts.variant) {
    case Variant::Pol:
      return pol_test(q, r, opts.pol).verdict;
    case Variant::Dsos:
      return multiplier_test(multiplier_target(q, r), r, ConeTag::DD, opts.multiplier).verdict;
    case Variant::Sdsos:
      return multiplier_test(multiplier_target(q, r), r, ConeTag::SDD, opts.multiplier).verdict;
  }
  return Verdict::Unevaluated;
}

LevelResult level(const PopInstance& pop, int r, const HierarchyOptions& opts) {
  if (r < 1) throw std::invalid_argument("level r must be at least 1");
  Bracket br = opts.bracket ? *opts.bracket : default_bracket(pop);
  if (!(br.lo < br.hi)) throw std::invalid_argument("bracket needs lo < hi");
  if (!(opts.eps > 0)) throw std::invalid_argument("bisection tolerance must be positive");
  LevelResult out;
  auto accepts = [&](double g) {
    Verdict v = test_gamma(pop, g, r, opts);
    out.tests.push_back({r, g, v});
    return v == Verdict::Accepted;
  };
  if (!accepts(br.lo)) {
    out.diagnostic = "level " + std::to_string(r) + ": lower end " + std::to_string(br.lo) + " " +
                     to_string(out.tests.back().verdict);
    return out;
  }
  double lo = br.lo, hi = br.hi;
  while (hi - lo >= opts.eps) {
    double mid = 0.5 * (lo + hi);
    if (accepts(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  out.value = lo;
  return out;
}

HierarchyResult run(const PopInstance& pop, int r_max, const HierarchyOptions& opts) {
  if (r_max < 1) throw std::invalid_argument("r_max must be at least 1");
  HierarchyResult h;
  h.eps = opts.eps;
  h.bracket = opts.bracket ? *opts.bracket : default_bracket(pop);
  HierarchyOptions o = opts;
  o.bracket = h.bracket;
  double best = -std::numeric_limits<double>::infinity();
  for (int r = 1; r <= r_max; ++r) {
    LevelResult lr = level(pop, r, o);
    h.l.push_back(lr.value);
    best = std::max(best, lr.value);
    h.m.push_back(best);
    for (const auto& t : lr.tests) {
      h.tests.push_back(t);
      if (t.verdict == Verdict::Accepted) h.best_accepted = std::max(h.best_accepted, t.gamma);
    }
    if (!lr.diagnostic.empty()) h.diagnostics.push_back(lr.diagnostic);
  }
  return h;
}

nlohmann::json to_json(const HierarchyResult& h) {
  auto num = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return v < 0 ? "-inf" : "inf";
  };
  nlohmann::json j;
  j["eps"] = h.eps;
  j["bracket"] = {h.bracket.lo, h.bracket.hi};
  j["l"] = nlohmann::json::array();
  j["m"] = nlohmann::json::array();
  for (double v : h.l) j["l"].push_back(num(v));
  for (double v : h.m) j["m"].push_back(num(v));
  j["best_accepted"] = num(h.best_accepted);
  j["tests"] = nlohmann::json::array();
  for (const auto& t : h.tests)
    j["tests"].push_back({{"r", t.r}, {"gamma", t.gamma}, {"verdict", to_string(t.verdict)}});
  j["diagnostics"] = h.diagnostics;
  return j;
}

}  // namespace dsos::polya
