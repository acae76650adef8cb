#include "dsos/apps.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace dsos::apps {

namespace {

constexpr double kRefuteTol = 1e-7;

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

BoundSequence negated(const ColGenState& st) {
  BoundSequence out;
  out.status = st.status;
  out.log = st.log;
  for (double b : st.bounds) out.bounds.push_back(-b);
  for (auto& rec : out.log) rec.bound = -rec.bound;
  return out;
}

Polynomial sq_norm(int n) { return sum_squares_power(n, 1); }

Polynomial linear_form(const std::vector<int>& a) {
  const int n = static_cast<int>(a.size());
  Polynomial out(n);
  for (int i = 0; i < n; ++i) out += static_cast<double>(a[i]) * Polynomial::variable(n, i);
  return out;
}

void check_partition(const std::vector<int>& a) {
  if (a.empty()) throw std::invalid_argument("partition instance is empty");
  for (int ai : a)
    if (ai < 1) throw std::invalid_argument("partition entries must be positive integers");
}

// (x o x)' M (x o x).
Polynomial squared_quadratic(const SymMatrix& M) {
  const int n = static_cast<int>(M.rows());
  Polynomial out(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (M(i, j) == 0.0) continue;
      Monomial m(n, 0);
      m[i] += 2;
      m[j] += 2;
      out.add_term(m, M(i, j));
    }
  return out;
}

}  // namespace

void Graph::validate() const {
  if (n < 1) throw std::invalid_argument("graph needs at least one node");
  if (A.rows() != n || A.cols() != n) throw DimensionError("adjacency must be n x n");
  for (int i = 0; i < n; ++i) {
    if (A(i, i) != 0.0) throw std::invalid_argument("graph has a self-loop");
    for (int j = 0; j < n; ++j) {
      if (A(i, j) != 0.0 && A(i, j) != 1.0)
        throw std::invalid_argument("adjacency entries must be 0 or 1");
      if (A(i, j) != A(j, i)) throw std::invalid_argument("adjacency must be symmetric");
    }
  }
}

int Graph::min_degree() const {
  int best = n;
  for (int i = 0; i < n; ++i) best = std::min(best, static_cast<int>(A.row(i).sum()));
  return best;
}

Graph graph_from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
  if (n < 1) throw std::invalid_argument("graph needs at least one node");
  Graph g;
  g.n = n;
  g.A = SymMatrix::Zero(n, n);
  for (auto [i, j] : edges) {
    if (i < 0 || j < 0 || i >= n || j >= n) throw std::out_of_range("edge endpoint out of range");
    if (i == j) throw std::invalid_argument("graph has a self-loop");
    g.A(i, j) = g.A(j, i) = 1.0;
  }
  return g;
}

Graph complement(const Graph& g) {
  g.validate();
  Graph c;
  c.n = g.n;
  c.A = SymMatrix::Ones(g.n, g.n) - g.A;
  c.A.diagonal().setZero();
  return c;
}

Graph petersen() {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < 5; ++i) {
    e.push_back({i, (i + 1) % 5});
    e.push_back({i, i + 5});
    e.push_back({5 + i, 5 + (i + 2) % 5});
  }
  return graph_from_edges(10, e);
}

BoundSequence sphere_min(const Polynomial& p, PricingMode mode, int iters,
                         const ColGenOptions& opts) {
  if (p.is_zero() || !p.is_homogeneous() || p.degree() % 2 != 0)
    throw std::invalid_argument("sphere_min needs a nonzero form of even degree");
  const int n = p.nvars(), d = p.degree() / 2;
  GramMap gm = gram_map(basis(n, d, BasisKind::Exact));
  Master m;
  m.map = &gm.pairs;
  m.c = gm.coefficients(p);
  m.a = {gm.coefficients(sum_squares_power(n, d))};
  m.b = Eigen::VectorXd::Ones(1);
  ConeTag tag = mode == PricingMode::SocpEigen ? ConeTag::SDD : ConeTag::DD;
  ColGenState st = run(m, AtomSet::initial(gm.basis.size(), tag), mode, iters, opts);
  BoundSequence out;
  out.bounds = st.bounds;
  out.log = st.log;
  out.status = st.status;
  return out;
}

// Variables y = lambda, b = -1: max -lambda s.t.
// -J + lambda (I + A) = X + N, X from atoms, N >= 0 entrywise.
BoundSequence stable_set_copositive(const Graph& g, ConeTag tag, int iters,
                                    const ColGenOptions& opts) {
  g.validate();
  const int n = g.n;
  PairMap map = entry_map(n);
  Master m;
  m.map = &map;
  m.c = map.apply(-SymMatrix::Ones(n, n));
  SymMatrix IA = SymMatrix::Identity(n, n) + g.A;
  m.a = {map.apply(-IA)};
  m.b = -Eigen::VectorXd::Ones(1);
  for (int k = 0; k < n; ++k)
    for (int l = k; l < n; ++l) m.nonneg.push_back({{entry_row(n, k, l), 1.0}});
  PricingMode mode = tag == ConeTag::DD ? PricingMode::LpEigen : PricingMode::SocpEigen;
  return negated(run(m, AtomSet::initial(n, tag), mode, iters, opts));
}

RdsosResult stable_set_rdsos(const Graph& g, int r, ConeTag tag, const SolverOptions& opts) {
  g.validate();
  if (r < 0) throw std::invalid_argument("r must be nonnegative");
  const int n = g.n;
  Polynomial mult = sum_squares_power(n, r);
  Polynomial PA = squared_quadratic(SymMatrix::Identity(n, n) + g.A) * mult;
  Polynomial PJ = squared_quadratic(SymMatrix::Ones(n, n)) * mult;

  MonomialBasis b = basis(n, 2 + r, BasisKind::Exact);
  GramMap gm = gram_map(b);
  AtomProgram prog;
  prog.rows = gm.rows();
  prog.rhs = -gm.coefficients(PJ);
  AtomBlock blk;
  blk.map = &gm.pairs;
  add_base_atoms(blk, tag, parity_filter(b, {PA, PJ}));
  RdsosResult out;
  out.basis_size = b.size();
  out.atoms = static_cast<long>(blk.rank1.size() + blk.pairs.size());
  prog.blocks.push_back(std::move(blk));
  ExtraColumn lam;
  lam.type = ConeType::Free;
  lam.cost = 1.0;
  lam.entries = sparsify(-gm.coefficients(PA));
  prog.extras.push_back(std::move(lam));

  AtomSolution sol = solve_atoms(prog, opts);
  out.status = sol.status;
  if (sol.status == SolveStatus::Optimal) out.bound = sol.extras(0);
  return out;
}

BoundSequence stable_set_outer(const Graph& g, ConeTag tag, int iters,
                               const SolverOptions& opts) {
  g.validate();
  const int n = g.n;
  SdpData d;
  d.C = -SymMatrix::Ones(n, n);
  d.A.push_back(SymMatrix::Identity(n, n));
  std::vector<double> b = {1.0};
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (g.A(i, j) == 0.0) continue;
      SymMatrix E = SymMatrix::Zero(n, n);
      E(i, j) = E(j, i) = 1.0;
      d.A.push_back(E);
      b.push_back(0.0);
    }
  d.b = Eigen::Map<Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
  SequenceOptions so;
  so.iters = iters;
  so.solver = opts;
  so.rel_floor = 0.0;
  BasisSequence seq = outer_sequence(d, tag, so);
  BoundSequence out;
  out.status = seq.status;
  out.log = seq.log;
  for (double v : seq.bounds) out.bounds.push_back(-v);
  for (auto& rec : out.log) rec.bound = -rec.bound;
  return out;
}

Polynomial partition_polynomial(const std::vector<int>& a) {
  check_partition(a);
  const int n = static_cast<int>(a.size());
  Polynomial out(n);
  for (int i = 0; i < n; ++i) {
    Polynomial t = Polynomial::variable(n, i) * Polynomial::variable(n, i) -
                   Polynomial::constant(n, 1.0);
    out += t * t;
  }
  Polynomial l = linear_form(a);
  return out + l * l;
}

Polynomial partition_form(const std::vector<int>& a, double eps) {
  check_partition(a);
  const int n = static_cast<int>(a.size());
  Polynomial s = (1.0 / n) * sq_norm(n);
  Polynomial l = linear_form(a);
  Polynomial quart(n);
  for (int i = 0; i < n; ++i) {
    Monomial m(n, 0);
    m[i] = 4;
    quart.add_term(m, 1.0);
  }
  return quart + (l * l - 2.0 * sq_norm(n)) * s + (n - eps) * (s * s);
}

PartitionResult partition_refute(const std::vector<int>& a, ConeTag tag, int iters,
                                 const SolverOptions& opts) {
  check_partition(a);
  const int n = static_cast<int>(a.size());
  Polynomial q0 = partition_form(a, 0.0);
  Polynomial h = q0 - partition_form(a, 1.0);  // q_eps = q0 - eps h
  MonomialBasis b = basis(n, 2, BasisKind::Exact);
  PartitionResult out;
  Eigen::MatrixXd U;
  for (int k = 0; k <= iters; ++k) {
    auto t0 = std::chrono::steady_clock::now();
    GramMap gm = gram_map(b, U);
    AtomProgram prog;
    prog.rows = gm.rows();
    prog.rhs = gm.coefficients(q0);
    AtomBlock blk;
    blk.map = &gm.pairs;
    blk.U = U;
    add_base_atoms(blk, tag, U.size() == 0 ? parity_filter(b, {q0, h}) : nullptr);
    prog.blocks.push_back(std::move(blk));
    ExtraColumn eps;
    eps.type = ConeType::Free;
    eps.cost = -1.0;
    eps.entries = sparsify(gm.coefficients(h));
    prog.extras.push_back(std::move(eps));

    AtomSolution sol = solve_atoms(prog, opts);
    if (sol.status != SolveStatus::Optimal) {
      out.status = sol.status;
      break;
    }
    const double e = sol.extras(0);
    out.eps.push_back(e);
    out.log.push_back({k, e, 0, elapsed_ms(t0)});
    out.refuted = out.refuted || e > kRefuteTol;
    out.last_cert = GramCertificate{b, U, sol.Q[0], tag};
    if (k < iters) U = update_basis(sol.gram[0]);
  }
  return out;
}

NonHomogeneousResult partition_nonhomogeneous(const std::vector<int>& a, ConeTag tag,
                                              const SolverOptions& opts) {
  Polynomial p = partition_polynomial(a);
  const int n = p.nvars();
  MonomialBasis b = basis(n, 2, BasisKind::UpTo);
  GramMap gm = gram_map(b);
  const int one = gm.row(Monomial(n, 0));
  auto program = [&](bool phase_one) {
    AtomProgram prog;
    prog.rows = gm.rows();
    prog.rhs = gm.coefficients(p);
    AtomBlock blk;
    blk.map = &gm.pairs;
    add_base_atoms(blk, tag, parity_filter(b, {p}));
    prog.blocks.push_back(std::move(blk));
    // p - eps = Gram: eps column +1 on the constant row.
    ExtraColumn eps;
    eps.type = ConeType::Free;
    eps.cost = phase_one ? 0.0 : -1.0;
    eps.entries = {{one, 1.0}};
    prog.extras.push_back(std::move(eps));
    if (phase_one) {
      ExtraColumn t;
      t.type = ConeType::Free;
      t.cost = 1.0;
      t.entries = sparsify(-gm.pairs.apply(SymMatrix::Identity(b.size(), b.size())));
      prog.extras.push_back(std::move(t));
    }
    return solve_atoms(prog, opts);
  };

  NonHomogeneousResult out;
  AtomSolution direct = program(false);
  out.status = direct.status;
  if (direct.status == SolveStatus::Optimal) out.eps = direct.extras(0);
  AtomSolution shifted = program(true);
  out.phase_one_status = shifted.status;
  if (shifted.status == SolveStatus::Optimal) out.phase_one_shift = shifted.extras(1);
  out.feasible = direct.status == SolveStatus::Optimal ||
                 (shifted.status == SolveStatus::Optimal && out.phase_one_shift <= kRefuteTol);
  return out;
}

DcdResult dcd(const Polynomial& f, ConeTag tag, const SolverOptions& opts) {
  const int deg = f.degree();
  if (f.is_zero() || deg < 2 || deg % 2 != 0)
    throw std::invalid_argument("dcd needs a polynomial of even degree >= 2");
  const int n = f.nvars();
  const bool form = f.is_homogeneous();
  MonomialBasis b = basis(n, deg / 2, form ? BasisKind::Hessian : BasisKind::HessianUpTo);
  GramMap gm = gram_map(b);
  const int R = gm.rows();

  std::vector<Monomial> gmons;
  for (int k = form ? deg : 2; k <= deg; ++k)
    for (auto& m : monomials_of_degree(n, k)) gmons.push_back(m);

  // Block 0: Gram of H_g. Block 1: Gram of H_g - H_f.
  AtomProgram prog;
  prog.rows = 2 * R;
  prog.rhs = Eigen::VectorXd::Zero(2 * R);
  prog.rhs.tail(R) = -gm.coefficients(hessian_biform(f));
  for (int blk_i = 0; blk_i < 2; ++blk_i) {
    AtomBlock blk;
    blk.map = &gm.pairs;
    blk.row_offset = blk_i * R;
    add_base_atoms(blk, tag);
    prog.blocks.push_back(std::move(blk));
  }
  for (const auto& m : gmons) {
    Polynomial mono = Polynomial::term(m, 1.0);
    Eigen::VectorXd hc = gm.coefficients(hessian_biform(mono));
    ExtraColumn c;
    c.type = ConeType::Free;
    c.cost = sphere_integral_tr_hessian(mono);
    for (int r = 0; r < R; ++r) {
      if (hc(r) == 0.0) continue;
      c.entries.push_back({r, -hc(r)});
      c.entries.push_back({R + r, -hc(r)});
    }
    prog.extras.push_back(std::move(c));
  }

  AtomSolution sol = solve_atoms(prog, opts);
  DcdResult out;
  out.status = sol.status;
  if (sol.status != SolveStatus::Optimal) return out;
  out.g = Polynomial(n);
  for (size_t j = 0; j < gmons.size(); ++j) out.g.add_term(gmons[j], sol.extras(j));
  out.h = out.g - f;
  out.g_cert = GramCertificate{b, {}, sol.Q[0], tag};
  out.h_cert = GramCertificate{b, {}, sol.Q[1], tag};
  out.objective = sol.value;
  return out;
}

}  // namespace dsos::apps
