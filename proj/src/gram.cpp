#include "dsos/gram.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace dsos {

namespace {

constexpr double kCertTol = 1e-7;
constexpr double kInteriorMargin = 1e-6;

Monomial product(const Monomial& a, const Monomial& b) {
  Monomial m(a.size());
  for (size_t i = 0; i < a.size(); ++i) m[i] = a[i] + b[i];
  return m;
}

std::vector<Monomial> hessian_entries(int n, const std::vector<Monomial>& xs) {
  std::vector<Monomial> out;
  for (const auto& m : xs) {
    for (int i = 0; i < n; ++i) {
      Monomial e(2 * n, 0);
      std::copy(m.begin(), m.end(), e.begin());
      e[n + i] = 1;
      out.push_back(std::move(e));
    }
  }
  std::sort(out.begin(), out.end(), GradedLex());
  return out;
}

std::uint64_t parity_mask(const Monomial& m) {
  std::uint64_t mask = 0;
  for (size_t i = 0; i < m.size(); ++i)
    if (m[i] & 1) mask |= std::uint64_t{1} << i;
  return mask;
}

// A form of degree 2d in n variables and the Gram matrix of its Hessian
// biform in basis(n, d, Hessian).
struct FormWithGram {
  Polynomial p;
  MonomialBasis b;
  SymMatrix Q;
};

int index_in(const MonomialBasis& b, const Monomial& m) {
  auto it = std::lower_bound(b.entries.begin(), b.entries.end(), m, GradedLex());
  if (it == b.entries.end() || *it != m) throw std::logic_error("monomial not in basis");
  return static_cast<int>(it - b.entries.begin());
}

Monomial hessian_entry(int n, const Monomial& xpart, int yi) {
  Monomial e(2 * n, 0);
  std::copy(xpart.begin(), xpart.end(), e.begin());
  e[n + yi] = 1;
  return e;
}

FormWithGram base_form(int n, int d) {
  FormWithGram f;
  f.b = basis(n, d, BasisKind::Hessian);
  f.p = Polynomial(n);
  f.Q = SymMatrix::Zero(f.b.size(), f.b.size());
  if (d == 1) {
    for (int i = 0; i < n; ++i) {
      Monomial m(n, 0);
      m[i] = 2;
      f.p.add_term(m, 1.0);
    }
    f.Q.diagonal().setConstant(2.0);
    return f;
  }
  if (n == 1) {
    f.p.add_term({2 * d}, 1.0);
    f.Q(0, 0) = 2.0 * d * (2 * d - 1);
    return f;
  }
  // n == 2: symmetric coefficient table.
  std::vector<double> a(d / 2 + 1, 0.0);
  a[1] = 1.0;
  for (int k = 1; k + 1 <= (d % 2 == 0 ? d / 2 : (d - 1) / 2); ++k)
    a[k + 1] = (2.0 * d - 2.0 * k) / (2.0 * k + 2.0) * a[k];
  if (d % 2 == 0) {
    a[0] = 1.0 / d + d / (2.0 * (2 * d - 1)) * a[d / 2];
  } else {
    a[0] = 1.0 + 2.0 * (2 * d - 2) / (2.0 * d * (2 * d - 1));
  }
  auto c = [&](int k) { return a[std::min(k, d - k)]; };  // coefficient of x1^{2d-2k} x2^{2k}
  for (int k = 0; k <= d; ++k) f.p.add_term({2 * d - 2 * k, 2 * k}, c(k));

  auto idx = [&](int s, int yi) { return index_in(f.b, hessian_entry(2, {d - 1 - s, s}, yi)); };
  for (int s = 0; s < d; ++s) {
    f.Q(idx(s, 0), idx(s, 0)) = c(s) * (2.0 * d - 2 * s) * (2.0 * d - 2 * s - 1);
    f.Q(idx(s, 1), idx(s, 1)) = c(s + 1) * (2.0 * s + 2) * (2.0 * s + 1);
  }
  for (int k = 1; k <= d - 1; ++k) {
    double delta = c(k) * (2.0 * d - 2 * k) * (2.0 * k);
    int s = k - 1, t = k;
    if (d % 2 == 0 && k == d / 2) {
      s = 0;
      t = d - 1;
    }
    int i = idx(s, 0), j = idx(t, 1);
    f.Q(i, j) += delta;
    f.Q(j, i) += delta;
  }
  return f;
}

// Raises a form from n-1 to n variables by summing over coordinate subsets
// and adding a small multiple of the all-positive even monomials.
FormWithGram lift_form(const FormWithGram& prev, int n, int d) {
  const int m = n - 1;
  FormWithGram f;
  f.b = basis(n, d, BasisKind::Hessian);
  const int N = f.b.size();
  f.p = Polynomial(n);
  SymMatrix Qq = SymMatrix::Zero(N, N), Qv = SymMatrix::Zero(N, N);

  for (int skip = n - 1; skip >= 0; --skip) {
    std::vector<int> S;
    for (int i = 0; i < n; ++i)
      if (i != skip) S.push_back(i);
    f.p += embed(prev.p, n, S);
    std::vector<int> where(prev.b.size());
    for (int a = 0; a < prev.b.size(); ++a) {
      const Monomial& e = prev.b.entries[a];
      Monomial x(n, 0);
      int yi = -1;
      for (int i = 0; i < m; ++i) {
        x[S[i]] = e[i];
        if (e[m + i]) yi = S[i];
      }
      where[a] = index_in(f.b, hessian_entry(n, x, yi));
    }
    for (int a = 0; a < prev.b.size(); ++a)
      for (int b = 0; b < prev.b.size(); ++b) Qq(where[a], where[b]) += prev.Q(a, b);
  }

  Polynomial v(n);
  for (const auto& e : monomials_of_degree(n, d)) {
    if (std::any_of(e.begin(), e.end(), [](int t) { return t == 0; })) continue;
    Monomial twice(n);
    for (int i = 0; i < n; ++i) twice[i] = 2 * e[i];
    v.add_term(twice, 1.0);
    for (int k = 0; k < n; ++k) {
      Monomial x = e;
      x[k] -= 1;
      int i = index_in(f.b, hessian_entry(n, x, k));
      Qv(i, i) += 2.0 * e[k] * (2.0 * e[k] - 1.0);
    }
    for (int j = 0; j < n; ++j) {
      for (int k = j + 1; k < n; ++k) {
        Monomial M(n);
        for (int i = 0; i < n; ++i) M[i] = 2 * e[i] - (i == j) - (i == k);
        bool placed = false;
        for (const auto& x1 : monomials_of_degree(n, d - 1)) {
          Monomial x2(n);
          bool ok = true;
          for (int i = 0; i < n && ok; ++i) {
            x2[i] = M[i] - x1[i];
            ok = x2[i] >= 0;
          }
          if (!ok) continue;
          auto missing = [](const Monomial& z) {
            return std::any_of(z.begin(), z.end(), [](int t) { return t == 0; });
          };
          if (!missing(x1) || !missing(x2)) continue;
          int a = index_in(f.b, hessian_entry(n, x1, j));
          int b = index_in(f.b, hessian_entry(n, x2, k));
          double w = 4.0 * e[j] * e[k];
          Qv(a, b) += w;
          Qv(b, a) += w;
          placed = true;
          break;
        }
        if (!placed) throw std::logic_error("no split for a mixed Hessian monomial");
      }
    }
  }

  double alpha = 1.0;
  while (alpha > 1e-12) {
    SymMatrix Q = Qq + alpha * Qv;
    if (dd_margin(Q) >= kInteriorMargin) {
      f.Q = Q;
      f.p += alpha * v;
      return f;
    }
    alpha /= 2.0;
  }
  throw std::runtime_error("interior_dsos_convex: no admissible alpha");
}

FormWithGram interior_form(int n, int d) {
  if (n <= 2 || d == 1) return base_form(n, d);
  FormWithGram f = base_form(2, d);
  for (int k = 3; k <= n; ++k) f = lift_form(f, k, d);
  return f;
}

MembershipResult infeasible_result(const MonomialBasis& b, ConeTag tag, SolveStatus s) {
  MembershipResult r;
  r.feasible = false;
  r.status = s;
  r.shift = std::numeric_limits<double>::infinity();
  r.cert.basis = b;
  r.cert.tag = tag;
  return r;
}

}  // namespace

MonomialBasis basis(int n, int d, BasisKind kind) {
  if (n < 1 || d < 0) throw std::invalid_argument("basis: need n >= 1 and d >= 0");
  MonomialBasis b;
  b.kind = kind;
  b.degree = d;
  switch (kind) {
    case BasisKind::Exact:
      b.nvars = n;
      b.entries = monomials_of_degree(n, d);
      break;
    case BasisKind::UpTo:
      b.nvars = n;
      b.entries = monomials_up_to_degree(n, d);
      break;
    case BasisKind::Hessian:
      if (d < 1) throw std::invalid_argument("Hessian basis needs d >= 1");
      b.nvars = 2 * n;
      b.entries = hessian_entries(n, monomials_of_degree(n, d - 1));
      break;
    case BasisKind::HessianUpTo:
      if (d < 1) throw std::invalid_argument("Hessian basis needs d >= 1");
      b.nvars = 2 * n;
      b.entries = hessian_entries(n, monomials_up_to_degree(n, d - 1));
      break;
  }
  std::sort(b.entries.begin(), b.entries.end(), GradedLex());
  return b;
}

GramMap gram_map(const MonomialBasis& b, const Eigen::MatrixXd& U) {
  const int N = b.size();
  if (U.size() != 0 && (U.rows() != N || U.cols() != N))
    throw DimensionError("basis change must be square of basis size");
  GramMap g;
  g.basis = b;
  g.U = U;
  for (int k = 0; k < N; ++k)
    for (int l = k; l < N; ++l) g.row_of.emplace(product(b.entries[k], b.entries[l]), 0);
  int r = 0;
  for (auto& [m, idx] : g.row_of) {
    idx = r++;
    g.monomials.push_back(m);
  }
  g.pairs = PairMap(N, r);
  for (int k = 0; k < N; ++k)
    for (int l = k; l < N; ++l)
      g.pairs.add(k, l, g.row_of.at(product(b.entries[k], b.entries[l])), k == l ? 1.0 : 2.0);
  return g;
}

int GramMap::row(const Monomial& m) const {
  auto it = row_of.find(m);
  return it == row_of.end() ? -1 : it->second;
}

Polynomial GramMap::apply(const SymMatrix& Q) const {
  SymMatrix G = U.size() == 0 ? Q : SymMatrix(U.transpose() * Q * U);
  Eigen::VectorXd v = pairs.apply(G);
  Polynomial p(basis.nvars);
  for (int r = 0; r < rows(); ++r) p.add_term(monomials[r], v(r));
  return p;
}

bool GramMap::covers(const Polynomial& p) const {
  if (p.nvars() != basis.nvars) return false;
  for (const auto& [m, c] : p.terms())
    if (row(m) < 0) return false;
  return true;
}

Eigen::VectorXd GramMap::coefficients(const Polynomial& p) const {
  if (p.nvars() != basis.nvars) throw DimensionError("polynomial and basis differ in nvars");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(rows());
  for (const auto& [m, c] : p.terms()) {
    int r = row(m);
    if (r < 0) throw std::invalid_argument("monomial outside the Gram map");
    v(r) = c;
  }
  return v;
}

Polynomial reconstruct(const GramCertificate& cert) {
  return gram_map(cert.basis, cert.U).apply(cert.Q);
}

double certificate_error(const GramCertificate& cert, const Polynomial& p) {
  Polynomial diff = reconstruct(cert) - p;
  return diff.max_abs_coeff() / (1.0 + p.max_abs_coeff());
}

bool validate(const GramCertificate& cert, const Polynomial& p) {
  if (certificate_error(cert, p) > kCertTol) return false;
  return cert.tag == ConeTag::DD ? is_dd(cert.Q) : is_sdd(cert.Q);
}

std::function<bool(int, int)> parity_filter(const MonomialBasis& b,
                                            const std::vector<Polynomial>& polys) {
  if (b.nvars > 64) return nullptr;
  // GF(2) row-echelon basis keyed by highest set bit.
  std::vector<std::uint64_t> span(64, 0);
  auto reduce = [](const std::vector<std::uint64_t>& sp, std::uint64_t x) {
    for (int bit = 63; bit >= 0 && x; --bit)
      if ((x >> bit & 1) && sp[bit]) x ^= sp[bit];
    return x;
  };
  int rank = 0;
  for (const auto& p : polys) {
    for (const auto& [m, c] : p.terms()) {
      std::uint64_t x = reduce(span, parity_mask(m));
      if (!x) continue;
      int bit = 63 - __builtin_clzll(x);
      span[bit] = x;
      ++rank;
    }
  }
  if (rank == b.nvars) return nullptr;
  std::vector<std::uint64_t> masks(b.size());
  for (int k = 0; k < b.size(); ++k) masks[k] = parity_mask(b.entries[k]);
  return [span, masks, reduce](int k, int l) { return reduce(span, masks[k] ^ masks[l]) == 0; };
}

MembershipResult membership_in_basis(const Polynomial& p, const MonomialBasis& b, ConeTag tag,
                                     const Eigen::MatrixXd& U) {
  GramMap gm = gram_map(b, U);
  if (!gm.covers(p)) return infeasible_result(b, tag, SolveStatus::PrimalInfeasible);
  const int N = b.size();

  AtomProgram prog;
  prog.rows = gm.rows();
  prog.rhs = gm.coefficients(p);
  AtomBlock blk;
  blk.map = &gm.pairs;
  blk.U = U;
  add_base_atoms(blk, tag, U.size() == 0 ? parity_filter(b, {p}) : nullptr);
  prog.blocks.push_back(std::move(blk));

  // Shift column: -(coefficients of z'U'Uz).
  SymMatrix UtU = U.size() == 0 ? SymMatrix::Identity(N, N) : SymMatrix(U.transpose() * U);
  Eigen::VectorXd shift = gm.pairs.apply(UtU);
  ExtraColumn a;
  a.type = ConeType::Free;
  a.cost = 1.0;
  a.entries = sparsify(-shift);
  prog.extras.push_back(std::move(a));

  AtomSolution sol = solve_atoms(prog);
  if (sol.status != SolveStatus::Optimal) return infeasible_result(b, tag, sol.status);

  MembershipResult r;
  r.status = sol.status;
  r.shift = sol.extras(0);
  r.y = sol.y;
  r.dual = sol.dual[0];
  r.cert.basis = b;
  r.cert.U = U;
  r.cert.tag = tag;
  r.cert.Q = sol.Q[0];
  if (r.shift < 0) r.cert.Q.diagonal().array() -= r.shift;
  r.feasible = r.shift <= kCertTol && certificate_error(r.cert, p) <= kCertTol;
  return r;
}

MembershipResult membership(const Polynomial& p, ConeTag tag, const Eigen::MatrixXd& U) {
  const int deg = p.degree();
  if (deg % 2 != 0) throw std::invalid_argument("membership needs an even degree");
  BasisKind kind = p.is_homogeneous() ? BasisKind::Exact : BasisKind::UpTo;
  return membership_in_basis(p, basis(p.nvars(), deg / 2, kind), tag, U);
}

MembershipResult r_membership(const Polynomial& p, int r, ConeTag tag) {
  if (r < 0) throw std::invalid_argument("r must be nonnegative");
  return membership(p * sum_squares_power(p.nvars(), r), tag);
}

Polynomial hessian_biform(const Polynomial& p) {
  const int n = p.nvars();
  std::vector<int> xmap(n);
  for (int i = 0; i < n; ++i) xmap[i] = i;
  Polynomial out(2 * n);
  for (int i = 0; i < n; ++i) {
    Polynomial pi = partial(p, i);
    for (int j = i; j < n; ++j) {
      Polynomial h = embed(partial(pi, j), 2 * n, xmap);
      Monomial yy(2 * n, 0);
      yy[n + i] += 1;
      yy[n + j] += 1;
      out += (i == j ? 1.0 : 2.0) * (h * Polynomial::term(yy, 1.0));
    }
  }
  return out;
}

MonomialBasis hessian_basis_for(const Polynomial& p) {
  const int deg = p.degree();
  const int d = std::max(1, (deg + 1) / 2);
  return basis(p.nvars(), d, p.is_homogeneous() ? BasisKind::Hessian : BasisKind::HessianUpTo);
}

MembershipResult convexity_membership(const Polynomial& p, ConeTag tag) {
  if (p.degree() < 2 || p.degree() % 2 != 0)
    throw std::invalid_argument("convexity_membership needs an even degree >= 2");
  return membership_in_basis(hessian_biform(p), hessian_basis_for(p), tag);
}

InteriorConvex interior_dsos_convex_with_gram(int n, int two_d) {
  if (n < 1 || two_d < 2 || two_d % 2 != 0)
    throw std::invalid_argument("interior_dsos_convex needs n >= 1 and even degree >= 2");
  const int d = two_d / 2;
  InteriorConvex out;
  out.basis = basis(n, d, BasisKind::HessianUpTo);
  out.p = Polynomial(n);
  out.Q = SymMatrix::Zero(out.basis.size(), out.basis.size());
  for (int k = 1; k <= d; ++k) {
    FormWithGram f = interior_form(n, k);
    out.p += f.p;
    std::vector<int> where(f.b.size());
    for (int a = 0; a < f.b.size(); ++a) where[a] = index_in(out.basis, f.b.entries[a]);
    for (int a = 0; a < f.b.size(); ++a)
      for (int b = 0; b < f.b.size(); ++b) out.Q(where[a], where[b]) += f.Q(a, b);
  }
  out.margin = dd_margin(out.Q);
  return out;
}

Polynomial interior_dsos_convex(int n, int two_d) {
  return interior_dsos_convex_with_gram(n, two_d).p;
}

}  // namespace dsos
