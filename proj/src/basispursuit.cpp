#include "dsos/basispursuit.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace dsos {

namespace {

constexpr double kBasisReg = 1e-9;

AtomBlock cone_block(const PairMap* map, const Eigen::MatrixXd& U, ConeTag tag) {
  AtomBlock blk;
  blk.map = map;
  blk.U = U;
  add_base_atoms(blk, tag);
  return blk;
}

void check(const SdpData& d) {
  const int n = d.dim();
  if (d.C.cols() != n) throw DimensionError("C must be square");
  if (d.A.size() != static_cast<size_t>(d.b.size())) throw DimensionError("one b_i per A_i");
  for (const auto& Ai : d.A)
    if (Ai.rows() != n || Ai.cols() != n) throw DimensionError("A_i dimension");
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

bool stalled(const std::vector<double>& bounds, double floor) {
  if (bounds.size() < 2) return false;
  double prev = bounds[bounds.size() - 2], cur = bounds.back();
  return std::abs(cur - prev) <= floor * (1.0 + std::abs(prev));
}

}  // namespace

InnerResult inner_step(const SdpData& d, const Eigen::MatrixXd& U, ConeTag tag,
                       const SolverOptions& opts) {
  check(d);
  if (d.A.empty()) throw std::invalid_argument("inner_step needs at least one constraint");
  PairMap map = constraint_map(d.A);
  AtomProgram prog;
  prog.rows = map.rows();
  prog.rhs = d.b;
  AtomBlock blk = cone_block(&map, U, tag);
  blk.cost = d.C;
  prog.blocks.push_back(std::move(blk));
  AtomSolution sol = solve_atoms(prog, opts);
  InnerResult r;
  r.status = sol.status;
  r.bound = sol.value;
  r.X = sol.gram[0];
  r.Q = sol.Q[0];
  return r;
}

Eigen::MatrixXd update_basis(const SymMatrix& X) {
  double scale = std::max(1.0, X.cwiseAbs().maxCoeff());
  EigenDecomposition ed = eig_sym(X);
  if (ed.values.size() > 0 && ed.values(0) < -1e-8 * scale)
    throw NotPositiveDefinite("update_basis: matrix is not psd");
  return cholesky(X, kBasisReg);
}

PhaseOneResult phase_one(const std::vector<SymMatrix>& A, const Eigen::VectorXd& b, int n,
                         ConeTag tag, int max_iters) {
  if (A.empty()) throw std::invalid_argument("phase_one needs at least one constraint");
  if (A.size() != static_cast<size_t>(b.size())) throw DimensionError("one b_i per A_i");
  for (const auto& Ai : A)
    if (Ai.rows() != n || Ai.cols() != n) throw DimensionError("A_i dimension");
  PairMap map = constraint_map(A);
  // alpha = t - 1 with t >= 0 keeps the program bounded.
  Eigen::VectorXd tr(A.size());
  for (size_t i = 0; i < A.size(); ++i) tr(i) = A[i].trace();

  PhaseOneResult out;
  Eigen::MatrixXd U;  // identity
  for (int k = 0; k < max_iters; ++k) {
    AtomProgram prog;
    prog.rows = map.rows();
    prog.rhs = b - tr;
    ExtraColumn t;
    t.type = ConeType::NonNeg;
    t.cost = 1.0;
    t.entries = sparsify(-tr);
    prog.extras.push_back(std::move(t));
    prog.blocks.push_back(cone_block(&map, U, tag));
    AtomSolution sol = solve_atoms(prog);
    if (sol.status != SolveStatus::Optimal) return out;
    double alpha = sol.extras(0) - 1.0;
    out.alphas.push_back(alpha);
    SymMatrix Z = sol.gram[0];
    if (alpha <= 0.0) {
      out.feasible = true;
      SymMatrix X = Z;
      X.diagonal().array() -= alpha;
      out.U_start = update_basis(X);
      return out;
    }
    U = update_basis(Z);
  }
  return out;
}

OuterResult outer_step(const SdpData& d, const Eigen::MatrixXd& U, ConeTag tag,
                       const SolverOptions& opts) {
  check(d);
  const int n = d.dim();
  PairMap map = entry_map(n);
  Master m;
  m.map = &map;
  m.c = map.apply(d.C);
  for (const auto& Ai : d.A) m.a.push_back(map.apply(Ai));
  m.b = d.b;
  m.U = U;
  MasterResult mr = solve_master(m, AtomSet::initial(n, tag), opts);
  OuterResult r;
  r.status = mr.status;
  r.bound = mr.value;
  r.y = mr.y;
  r.S = d.C;
  for (size_t i = 0; i < d.A.size(); ++i) r.S -= mr.y(i) * d.A[i];
  r.X = mr.X;
  return r;
}

BasisSequence inner_sequence(const SdpData& d, ConeTag tag, const SequenceOptions& opts,
                             const Eigen::MatrixXd& U0) {
  BasisSequence seq;
  seq.tag = tag;
  Eigen::MatrixXd U = U0.size() == 0 ? Eigen::MatrixXd::Identity(d.dim(), d.dim()) : U0;
  for (int k = 0; k <= opts.iters; ++k) {
    auto t0 = std::chrono::steady_clock::now();
    InnerResult r = inner_step(d, U, tag, opts.solver);
    if (r.status != SolveStatus::Optimal) {
      seq.status = r.status;
      break;
    }
    seq.bases.push_back(U);
    seq.bounds.push_back(r.bound);
    seq.last_X = r.X;
    seq.log.push_back({k, r.bound, 0, elapsed_ms(t0)});
    if (stalled(seq.bounds, opts.rel_floor)) break;
    U = update_basis(r.X);
  }
  return seq;
}

BasisSequence outer_sequence(const SdpData& d, ConeTag tag, const SequenceOptions& opts) {
  BasisSequence seq;
  seq.tag = tag;
  Eigen::MatrixXd U = Eigen::MatrixXd::Identity(d.dim(), d.dim());
  for (int k = 0; k <= opts.iters; ++k) {
    auto t0 = std::chrono::steady_clock::now();
    OuterResult r = outer_step(d, U, tag, opts.solver);
    if (r.status != SolveStatus::Optimal) {
      seq.status = r.status;
      break;
    }
    seq.bases.push_back(U);
    seq.bounds.push_back(r.bound);
    seq.last_X = r.X;
    seq.last_y = r.y;
    seq.log.push_back({k, r.bound, 0, elapsed_ms(t0)});
    if (stalled(seq.bounds, opts.rel_floor)) break;
    U = update_basis(r.S);
  }
  return seq;
}

}  // namespace dsos
