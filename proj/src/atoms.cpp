#include "dsos/atoms.hpp"

#include <cmath>
#include <stdexcept>

namespace dsos {

namespace {

const std::vector<std::pair<int, double>> kNoTerms;

SparseVec physical(const AtomBlock& block, const SparseVec& u) {
  if (block.U.size() == 0) return u;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(block.U.cols());
  for (const auto& [i, a] : u) v += a * block.U.row(i).transpose();
  return sparsify(v);
}

// Physical atoms are unit-normalized before entering the solver; the
// returned weights are rescaled. Ill-conditioned U otherwise stalls the IPM.
double unit_scale(SparseVec& u) {
  double s = 0.0;
  for (const auto& e : u) s += e.second * e.second;
  s = std::sqrt(s);
  if (s > 0.0)
    for (auto& e : u) e.second /= s;
  return s > 0.0 ? s : 1.0;
}

double quad(const SymMatrix& C, const SparseVec& u, const SparseVec& v) {
  if (C.size() == 0) return 0.0;
  double s = 0.0;
  for (const auto& [i, a] : u)
    for (const auto& [j, b] : v) s += a * b * C(i, j);
  return s;
}

Eigen::Matrix2d psd_part(const Eigen::Matrix2d& L) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(L);
  Eigen::Vector2d d = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

const char* to_string(ConeTag t) { return t == ConeTag::DD ? "dd" : "sdd"; }

SparseVec sparsify(const Eigen::VectorXd& v, double drop) {
  SparseVec out;
  for (int i = 0; i < v.size(); ++i)
    if (std::abs(v(i)) > drop) out.emplace_back(i, v(i));
  return out;
}

Eigen::VectorXd densify(const SparseVec& v, int n) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (const auto& [i, a] : v) out(i) += a;
  return out;
}

PairMap::PairMap(int dim, int rows)
    : dim_(dim), rows_(rows), terms_(static_cast<size_t>(dim) * dim) {}

void PairMap::add(int k, int l, int row, double w) {
  if (k < 0 || l < 0 || k >= dim_ || l >= dim_ || row < 0 || row >= rows_)
    throw std::out_of_range("PairMap::add index out of range");
  auto& t = terms_[index(k, l)];
  for (auto& e : t) {
    if (e.first == row) {
      e.second += w;
      return;
    }
  }
  t.emplace_back(row, w);
}

const std::vector<std::pair<int, double>>& PairMap::terms(int k, int l) const {
  if (terms_.empty()) return kNoTerms;
  return terms_[index(k, l)];
}

Eigen::VectorXd PairMap::apply(const SymMatrix& Q) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(rows_);
  for (int k = 0; k < dim_; ++k)
    for (int l = k; l < dim_; ++l)
      for (const auto& [r, w] : terms_[index(k, l)]) out(r) += w * Q(k, l);
  return out;
}

SymMatrix PairMap::adjoint(const Eigen::VectorXd& y) const {
  SymMatrix M = SymMatrix::Zero(dim_, dim_);
  for (int k = 0; k < dim_; ++k) {
    for (int l = k; l < dim_; ++l) {
      double s = 0.0;
      for (const auto& [r, w] : terms_[index(k, l)]) s += w * y(r);
      if (k == l) {
        M(k, k) = s;
      } else {
        M(k, l) = M(l, k) = s / 2.0;
      }
    }
  }
  return M;
}

void PairMap::accumulate_outer(const SparseVec& u, const SparseVec& v, double scale,
                               std::vector<double>& out, std::vector<int>* touched) const {
  for (const auto& [k, a] : u) {
    for (const auto& [l, b] : v) {
      const auto& t = terms_[index(k, l)];
      if (t.empty()) continue;
      double f = scale * a * b * (k == l ? 1.0 : 0.5);
      for (const auto& [r, w] : t) {
        if (touched && out[r] == 0.0) touched->push_back(r);
        out[r] += f * w;
      }
    }
  }
}

int entry_row(int n, int k, int l) {
  if (k > l) std::swap(k, l);
  return k * n - k * (k - 1) / 2 + (l - k);
}

PairMap entry_map(int n) {
  PairMap m(n, n * (n + 1) / 2);
  for (int k = 0; k < n; ++k)
    for (int l = k; l < n; ++l) m.add(k, l, entry_row(n, k, l), 1.0);
  return m;
}

PairMap constraint_map(const std::vector<SymMatrix>& A) {
  if (A.empty()) throw std::invalid_argument("constraint_map needs at least one matrix");
  const int n = static_cast<int>(A[0].rows());
  PairMap m(n, static_cast<int>(A.size()));
  for (size_t i = 0; i < A.size(); ++i) {
    for (int k = 0; k < n; ++k) {
      for (int l = k; l < n; ++l) {
        double w = (k == l ? 1.0 : 2.0) * A[i](k, l);
        if (w != 0.0) m.add(k, l, static_cast<int>(i), w);
      }
    }
  }
  return m;
}

void add_base_atoms(AtomBlock& block, ConeTag tag,
                    const std::function<bool(int, int)>& allowed) {
  const int n = block.dim();
  for (int k = 0; k < n; ++k) block.rank1.push_back({{k, 1.0}});
  for (int k = 0; k < n; ++k) {
    for (int l = k + 1; l < n; ++l) {
      if (allowed && !allowed(k, l)) continue;
      if (tag == ConeTag::DD) {
        block.rank1.push_back({{k, 1.0}, {l, 1.0}});
        block.rank1.push_back({{k, 1.0}, {l, -1.0}});
      } else {
        block.pairs.push_back({SparseVec{{k, 1.0}}, SparseVec{{l, 1.0}}});
      }
    }
  }
}

SymMatrix atom_dual(const AtomBlock& block, const SymMatrix& physical_dual) {
  if (block.U.size() == 0) return physical_dual;
  return block.U * physical_dual * block.U.transpose();
}

AtomSolution solve_atoms(const AtomProgram& prog, const SolverOptions& opts) {
  if (prog.rhs.size() != prog.rows) throw std::invalid_argument("rhs size mismatch");
  ProgramBuilder pb;
  for (int r = 0; r < prog.rows; ++r) pb.add_row(prog.rhs(r));

  // Extras first so that Free columns stay contiguous.
  std::vector<int> extra_var(prog.extras.size());
  for (size_t e = 0; e < prog.extras.size(); ++e) {
    const auto& col = prog.extras[e];
    int v = col.type == ConeType::Free ? pb.add_free(1) : pb.add_nonneg(1);
    extra_var[e] = v;
    pb.set_cost(v, col.cost);
    for (const auto& [r, a] : col.entries) pb.add_coef(r, v, a);
  }

  std::vector<double> buf;
  std::vector<int> touched;
  auto flush = [&](int var, int offset) {
    for (int r : touched) {
      if (buf[r] != 0.0) {
        pb.add_coef(r + offset, var, buf[r]);
        buf[r] = 0.0;
      }
    }
    touched.clear();
  };

  std::vector<int> rank1_start(prog.blocks.size()), pair_start(prog.blocks.size());
  std::vector<std::vector<double>> rank1_norm(prog.blocks.size());
  std::vector<std::vector<Eigen::Vector2d>> pair_norm(prog.blocks.size());
  for (size_t bi = 0; bi < prog.blocks.size(); ++bi) {
    const AtomBlock& blk = prog.blocks[bi];
    if (blk.map == nullptr) throw std::invalid_argument("atom block without map");
    buf.assign(blk.map->rows(), 0.0);
    const int k1 = static_cast<int>(blk.rank1.size());
    rank1_start[bi] = k1 > 0 ? pb.add_nonneg(k1) : pb.num_vars();
    for (int a = 0; a < k1; ++a) {
      SparseVec u = physical(blk, blk.rank1[a]);
      rank1_norm[bi].push_back(unit_scale(u));
      blk.map->accumulate_outer(u, u, 1.0, buf, &touched);
      flush(rank1_start[bi] + a, blk.row_offset);
      pb.set_cost(rank1_start[bi] + a, quad(blk.cost, u, u));
    }
  }
  // SOC blocks after all nonnegative columns.
  for (size_t bi = 0; bi < prog.blocks.size(); ++bi) {
    const AtomBlock& blk = prog.blocks[bi];
    buf.assign(blk.map->rows(), 0.0);
    pair_start[bi] = pb.num_vars();
    for (const auto& pa : blk.pairs) {
      SparseVec v1 = physical(blk, pa[0]), v2 = physical(blk, pa[1]);
      double s1 = unit_scale(v1), s2 = unit_scale(v2);
      pair_norm[bi].emplace_back(s1, s2);
      int t = pb.add_soc(3);
      // L = [[a, c], [c, b]] with a = (t0+t1)/2, b = (t0-t1)/2, c = t2/2.
      blk.map->accumulate_outer(v1, v1, 0.5, buf, &touched);
      blk.map->accumulate_outer(v2, v2, 0.5, buf, &touched);
      flush(t, blk.row_offset);
      blk.map->accumulate_outer(v1, v1, 0.5, buf, &touched);
      blk.map->accumulate_outer(v2, v2, -0.5, buf, &touched);
      flush(t + 1, blk.row_offset);
      blk.map->accumulate_outer(v1, v2, 1.0, buf, &touched);
      flush(t + 2, blk.row_offset);
      double c11 = quad(blk.cost, v1, v1), c22 = quad(blk.cost, v2, v2),
             c12 = quad(blk.cost, v1, v2);
      pb.set_cost(t, 0.5 * (c11 + c22));
      pb.set_cost(t + 1, 0.5 * (c11 - c22));
      pb.set_cost(t + 2, c12);
    }
  }

  ConeProgram cp = pb.build();
  ConicSolution sol = solve(cp, opts);

  AtomSolution out;
  out.status = sol.status;
  out.iterations = sol.iterations;
  out.value = sol.primal_obj;
  out.y = sol.y;
  out.extras.resize(prog.extras.size());
  for (size_t e = 0; e < prog.extras.size(); ++e) out.extras(e) = sol.x(extra_var[e]);

  for (size_t bi = 0; bi < prog.blocks.size(); ++bi) {
    const AtomBlock& blk = prog.blocks[bi];
    const int n = blk.dim();
    Eigen::VectorXd w(blk.rank1.size());
    SymMatrix Q = SymMatrix::Zero(n, n);
    for (size_t a = 0; a < blk.rank1.size(); ++a) {
      double s = rank1_norm[bi][a];
      w(a) = std::max(sol.x(rank1_start[bi] + static_cast<int>(a)), 0.0) / (s * s);
      Eigen::VectorXd u = densify(blk.rank1[a], n);
      Q += w(a) * u * u.transpose();
    }
    std::vector<Eigen::Matrix2d> L(blk.pairs.size());
    for (size_t a = 0; a < blk.pairs.size(); ++a) {
      int t = pair_start[bi] + 3 * static_cast<int>(a);
      Eigen::Matrix2d M;
      M << (sol.x(t) + sol.x(t + 1)) / 2, sol.x(t + 2) / 2, sol.x(t + 2) / 2,
          (sol.x(t) - sol.x(t + 1)) / 2;
      Eigen::Vector2d inv = pair_norm[bi][a].cwiseInverse();
      L[a] = inv.asDiagonal() * psd_part(M) * inv.asDiagonal();
      Eigen::MatrixXd V(n, 2);
      V.col(0) = densify(blk.pairs[a][0], n);
      V.col(1) = densify(blk.pairs[a][1], n);
      Q += V * L[a] * V.transpose();
    }
    out.rank1_weights.push_back(w);
    out.pair_weights.push_back(std::move(L));
    out.gram.push_back(blk.U.size() == 0 ? Q : SymMatrix(blk.U.transpose() * Q * blk.U));
    out.Q.push_back(std::move(Q));

    Eigen::VectorXd yb = sol.y.segment(blk.row_offset, blk.map->rows());
    SymMatrix D = -blk.map->adjoint(yb);
    if (blk.cost.size() != 0) D += blk.cost;
    out.dual.push_back(std::move(D));
  }
  return out;
}

}  // namespace dsos
