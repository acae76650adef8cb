#include "dsos/conic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>

namespace dsos {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

std::mutex g_stats_mutex;
SolverStats g_stats;

void record_solve(const ConicSolution& sol) {
  std::lock_guard<std::mutex> lock(g_stats_mutex);
  ++g_stats.solves;
  if (sol.status == SolveStatus::Optimal) {
    ++g_stats.optimal;
    double g = sol.gap / (1.0 + std::abs(sol.primal_obj));
    g_stats.worst_optimal_gap = std::max(g_stats.worst_optimal_gap, g);
  }
}

struct Block {
  ConeType type;
  int start;
  int size;
};

// Nesterov-Todd scaling of one second-order cone block.
struct SocScaling {
  double eta = 1.0;
  VectorXd wbar;    // hyperbolic unit vector
  MatrixXd W;       // eta (2 wbar wbar' - J)
  MatrixXd Winv;
  MatrixXd W2;
  VectorXd lambda;  // W s = W^{-1} x
};

double jnorm(const VectorXd& z) {
  double v = z(0) * z(0) - z.tail(z.size() - 1).squaredNorm();
  return std::sqrt(std::max(v, 0.0));
}

VectorXd jmul(const VectorXd& z) {
  VectorXd r = -z;
  r(0) = z(0);
  return r;
}

SocScaling soc_scaling(const VectorXd& x, const VectorXd& s) {
  const int k = static_cast<int>(x.size());
  SocScaling sc;
  double nx = jnorm(x), ns = jnorm(s);
  VectorXd xb = x / nx, sb = s / ns;
  double gamma = std::sqrt(std::max((1.0 + xb.dot(sb)) / 2.0, 0.0));
  sc.wbar = (xb + jmul(sb)) / (2.0 * gamma);
  sc.eta = std::sqrt(nx / ns);
  // Hyperbolic rotation taking s to x: W^2 s = x.
  const double w0 = sc.wbar(0);
  const VectorXd w1 = sc.wbar.tail(k - 1);
  MatrixXd Wb(k, k);
  Wb(0, 0) = w0;
  Wb.row(0).tail(k - 1) = w1.transpose();
  Wb.col(0).tail(k - 1) = w1;
  Wb.bottomRightCorner(k - 1, k - 1) =
      MatrixXd::Identity(k - 1, k - 1) + w1 * w1.transpose() / (1.0 + w0);
  sc.W = sc.eta * Wb;
  Wb.row(0).tail(k - 1) *= -1.0;
  Wb.col(0).tail(k - 1) *= -1.0;
  sc.Winv = Wb / sc.eta;
  sc.W2 = sc.W * sc.W;
  sc.lambda = sc.W * s;
  return sc;
}

// Jordan product for the second-order cone.
VectorXd soc_prod(const VectorXd& u, const VectorXd& v) {
  VectorXd r(u.size());
  r(0) = u.dot(v);
  r.tail(u.size() - 1) = u(0) * v.tail(v.size() - 1) + v(0) * u.tail(u.size() - 1);
  return r;
}

// Solves lambda o z = v.
VectorXd soc_div(const VectorXd& l, const VectorXd& v) {
  const int k = static_cast<int>(l.size());
  auto l1 = l.tail(k - 1);
  auto v1 = v.tail(k - 1);
  double det = l(0) * l(0) - l1.squaredNorm();
  VectorXd z(k);
  z(0) = (l(0) * v(0) - l1.dot(v1)) / det;
  z.tail(k - 1) = (v1 - z(0) * l1) / l(0);
  return z;
}

// Largest alpha with z + alpha dz in the cone (infinity if unbounded).
double max_step_soc(const VectorXd& z, const VectorXd& dz) {
  const int k = static_cast<int>(z.size());
  auto z1 = z.tail(k - 1);
  auto d1 = dz.tail(k - 1);
  double a = dz(0) * dz(0) - d1.squaredNorm();
  double b = z(0) * dz(0) - z1.dot(d1);
  double c = std::max(z(0) * z(0) - z1.squaredNorm(), 0.0);
  double inf = std::numeric_limits<double>::infinity();
  double alpha = inf;
  double scale = std::max({std::abs(a), std::abs(b), c, 1e-300});
  if (std::abs(a) <= 1e-14 * scale) {
    if (b < 0) alpha = -c / (2.0 * b);
  } else {
    double disc = b * b - a * c;
    if (disc >= 0) {
      double sq = std::sqrt(disc);
      // Roots of a t^2 + 2 b t + c, computed stably.
      double q = -(b + (b >= 0 ? sq : -sq));
      double r1 = q / a;
      double r2 = (q != 0.0) ? c / q : inf;
      for (double r : {r1, r2}) {
        if (r > 0 && r < alpha) alpha = r;
      }
    }
  }
  if (dz(0) < 0) alpha = std::min(alpha, -z(0) / dz(0));
  return alpha;
}

class IpmSolver {
 public:
  IpmSolver(const ConeProgram& prog, const SolverOptions& opts)
      : orig_(prog), opts_(opts) {}

  ConicSolution run();

 private:
  bool presolve(ConicSolution& early);
  void scale();
  void unscale(const VectorXd& xs, const VectorXd& ys, const VectorXd& ss,
               VectorXd& x, VectorXd& y, VectorXd& s) const;
  void compute_scalings();
  bool factor();
  void apply_w2(const VectorXd& v, VectorXd& out) const;
  void newton(const VectorXd& rp, const VectorXd& rd, const VectorXd& rc,
              VectorXd& dx, VectorXd& dy, VectorXd& ds) const;
  void newton_raw(const VectorXd& rp, const VectorXd& rd, const VectorXd& rc,
                  VectorXd& dx, VectorXd& dy, VectorXd& ds) const;
  double max_step(const VectorXd& z, const VectorXd& dz) const;
  double complementarity(const VectorXd& x, const VectorXd& s) const;

  const ConeProgram& orig_;
  SolverOptions opts_;

  // Working problem after presolve and scaling.
  std::vector<int> kept_rows_;
  SparseMatrix A_;
  VectorXd b_, c_;
  VectorXd row_scale_, col_scale_;
  double b_scale_ = 1.0, c_scale_ = 1.0;
  std::vector<Block> blocks_;
  std::vector<int> free_idx_;
  int degree_ = 0;
  int m_ = 0, n_ = 0;

  VectorXd x_, y_, s_;
  VectorXd lp_d_;                 // x/s on nonneg entries
  std::vector<SocScaling> soc_;   // per SOC block
  std::vector<int> soc_block_of_;  // block index -> soc_ index
  Eigen::LLT<MatrixXd> llt_;
  MatrixXd G_;                    // M^{-1} A_F
  Eigen::LDLT<MatrixXd> schur_;
};

bool IpmSolver::presolve(ConicSolution& early) {
  const int m = orig_.num_rows();
  SparseMatrix At = orig_.A.transpose();
  std::map<std::vector<std::pair<int, double>>, int> seen;
  std::vector<double> norm_factor(m, 1.0);
  double bnorm = orig_.b.norm();
  for (int i = 0; i < m; ++i) {
    std::vector<std::pair<int, double>> row;
    for (SparseMatrix::InnerIterator it(At, i); it; ++it) {
      if (it.value() != 0.0) row.emplace_back(static_cast<int>(it.index()), it.value());
    }
    if (row.empty()) {
      if (std::abs(orig_.b(i)) > 1e-12 * (1.0 + bnorm)) {
        early.status = SolveStatus::PrimalInfeasible;
        return false;
      }
      continue;
    }
    double lead = row.front().second;
    for (auto& e : row) e.second /= lead;
    auto it = seen.find(row);
    if (it != seen.end()) {
      int j = it->second;
      double bi = orig_.b(i) / lead;
      double bj = orig_.b(j) / norm_factor[j];
      if (std::abs(bi - bj) > 1e-12 * (1.0 + std::abs(bi))) {
        early.status = SolveStatus::PrimalInfeasible;
        return false;
      }
      continue;
    }
    seen.emplace(std::move(row), i);
    norm_factor[i] = lead;
    kept_rows_.push_back(i);
  }
  m_ = static_cast<int>(kept_rows_.size());
  n_ = orig_.num_vars();
  std::vector<int> new_index(m, -1);
  for (int k = 0; k < m_; ++k) new_index[kept_rows_[k]] = k;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(orig_.A.nonZeros());
  for (int j = 0; j < orig_.A.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(orig_.A, j); it; ++it) {
      int r = new_index[it.row()];
      if (r >= 0 && it.value() != 0.0) trips.emplace_back(r, j, it.value());
    }
  }
  A_.resize(m_, n_);
  A_.setFromTriplets(trips.begin(), trips.end());
  A_.makeCompressed();
  b_.resize(m_);
  for (int k = 0; k < m_; ++k) b_(k) = orig_.b(kept_rows_[k]);
  c_ = orig_.c;

  int start = 0;
  for (const auto& cb : orig_.cones) {
    blocks_.push_back({cb.type, start, cb.size});
    if (cb.type == ConeType::Free) {
      for (int t = 0; t < cb.size; ++t) free_idx_.push_back(start + t);
    } else if (cb.type == ConeType::NonNeg) {
      degree_ += cb.size;
    } else {
      degree_ += 1;
    }
    start += cb.size;
  }
  return true;
}

void IpmSolver::scale() {
  row_scale_ = VectorXd::Ones(m_);
  col_scale_ = VectorXd::Ones(n_);
  for (int pass = 0; pass < 8; ++pass) {
    VectorXd rmax = VectorXd::Zero(m_);
    VectorXd cmax = VectorXd::Zero(n_);
    for (int j = 0; j < n_; ++j) {
      for (SparseMatrix::InnerIterator it(A_, j); it; ++it) {
        double v = std::abs(it.value());
        rmax(it.row()) = std::max(rmax(it.row()), v);
        cmax(j) = std::max(cmax(j), v);
      }
    }
    for (const auto& blk : blocks_) {
      if (blk.type != ConeType::SecondOrder) continue;
      double mx = cmax.segment(blk.start, blk.size).maxCoeff();
      cmax.segment(blk.start, blk.size).setConstant(mx);
    }
    VectorXd rf(m_), cf(n_);
    for (int i = 0; i < m_; ++i) rf(i) = rmax(i) > 0 ? 1.0 / std::sqrt(rmax(i)) : 1.0;
    for (int j = 0; j < n_; ++j) cf(j) = cmax(j) > 0 ? 1.0 / std::sqrt(cmax(j)) : 1.0;
    for (int j = 0; j < n_; ++j) {
      for (SparseMatrix::InnerIterator it(A_, j); it; ++it) {
        it.valueRef() *= rf(it.row()) * cf(j);
      }
    }
    row_scale_.array() *= rf.array();
    col_scale_.array() *= cf.array();
  }
  b_ = row_scale_.cwiseProduct(b_);
  c_ = col_scale_.cwiseProduct(c_);
  b_scale_ = std::max(1.0, b_.lpNorm<Eigen::Infinity>());
  c_scale_ = std::max(1.0, c_.lpNorm<Eigen::Infinity>());
  b_ /= b_scale_;
  c_ /= c_scale_;
}

void IpmSolver::unscale(const VectorXd& xs, const VectorXd& ys, const VectorXd& ss,
                        VectorXd& x, VectorXd& y, VectorXd& s) const {
  x = col_scale_.cwiseProduct(xs) * b_scale_;
  s = ss.cwiseQuotient(col_scale_) * c_scale_;
  y = VectorXd::Zero(orig_.num_rows());
  for (int k = 0; k < m_; ++k) y(kept_rows_[k]) = row_scale_(k) * ys(k) * c_scale_;
}

void IpmSolver::compute_scalings() {
  lp_d_ = VectorXd::Zero(n_);
  for (size_t bi = 0; bi < blocks_.size(); ++bi) {
    const auto& blk = blocks_[bi];
    if (blk.type == ConeType::NonNeg) {
      for (int t = 0; t < blk.size; ++t) {
        int j = blk.start + t;
        lp_d_(j) = x_(j) / s_(j);
      }
    } else if (blk.type == ConeType::SecondOrder) {
      soc_[soc_block_of_[bi]] =
          soc_scaling(x_.segment(blk.start, blk.size), s_.segment(blk.start, blk.size));
    }
  }
}

bool IpmSolver::factor() {
  MatrixXd M = MatrixXd::Zero(m_, m_);
  // Dense-ish nonneg columns go through blocked rank-k updates; scalar
  // accumulation of their outer products dominates otherwise.
  constexpr int kDenseNnz = 24, kBatch = 128;
  MatrixXd batch(m_, kBatch);
  int filled = 0;
  auto flush = [&] {
    if (filled == 0) return;
    M.selfadjointView<Eigen::Lower>().rankUpdate(batch.leftCols(filled));
    filled = 0;
  };
  for (size_t bi = 0; bi < blocks_.size(); ++bi) {
    const auto& blk = blocks_[bi];
    if (blk.type == ConeType::NonNeg) {
      for (int t = 0; t < blk.size; ++t) {
        int j = blk.start + t;
        double d = lp_d_(j);
        if (A_.col(j).nonZeros() >= kDenseNnz) {
          batch.col(filled).setZero();
          const double r = std::sqrt(d);
          for (SparseMatrix::InnerIterator p(A_, j); p; ++p) batch(p.row(), filled) = r * p.value();
          if (++filled == kBatch) flush();
          continue;
        }
        for (SparseMatrix::InnerIterator p(A_, j); p; ++p) {
          double vp = d * p.value();
          for (SparseMatrix::InnerIterator q(A_, j); q; ++q) {
            if (q.row() < p.row()) continue;
            M(q.row(), p.row()) += vp * q.value();
          }
        }
      }
    } else if (blk.type == ConeType::SecondOrder) {
      const SocScaling& sc = soc_[soc_block_of_[bi]];
      const MatrixXd& W2 = sc.W2;
      int nnz = 0;
      for (int a = 0; a < blk.size; ++a) nnz += A_.col(blk.start + a).nonZeros();
      if (nnz >= kDenseNnz && blk.size <= kBatch) {
        // W is symmetric with W W = W2, so A_B W2 A_B' = (A_B W)(A_B W)'.
        if (filled + blk.size > kBatch) flush();
        batch.middleCols(filled, blk.size).setZero();
        for (int a = 0; a < blk.size; ++a)
          for (SparseMatrix::InnerIterator p(A_, blk.start + a); p; ++p)
            batch.row(p.row()).segment(filled, blk.size) += p.value() * sc.W.row(a);
        filled += blk.size;
        if (filled == kBatch) flush();
        continue;
      }
      for (int a = 0; a < blk.size; ++a) {
        for (int bb = 0; bb < blk.size; ++bb) {
          double w = W2(a, bb);
          if (w == 0.0) continue;
          for (SparseMatrix::InnerIterator p(A_, blk.start + a); p; ++p) {
            double vp = w * p.value();
            for (SparseMatrix::InnerIterator q(A_, blk.start + bb); q; ++q) {
              if (q.row() < p.row()) continue;
              M(q.row(), p.row()) += vp * q.value();
            }
          }
        }
      }
    }
  }
  flush();
  double maxdiag = m_ > 0 ? M.diagonal().maxCoeff() : 1.0;
  if (!(maxdiag > 0)) maxdiag = 1.0;
  double reg = 0.0;
  for (int attempt = 0; attempt < 12; ++attempt) {
    MatrixXd Mr = M;
    if (reg > 0) Mr.diagonal().array() += reg;
    // Tiny diagonals indicate rows carried only by free columns.
    for (int i = 0; i < m_; ++i) {
      if (Mr(i, i) < 1e-14 * maxdiag) Mr(i, i) += 1e-14 * maxdiag;
    }
    llt_.compute(Mr.selfadjointView<Eigen::Lower>());
    if (llt_.info() == Eigen::Success) break;
    reg = (reg == 0.0) ? 1e-13 * maxdiag : reg * 100.0;
    if (attempt == 11) return false;
  }
  if (!free_idx_.empty()) {
    const int f = static_cast<int>(free_idx_.size());
    MatrixXd AF = MatrixXd::Zero(m_, f);
    for (int k = 0; k < f; ++k) {
      for (SparseMatrix::InnerIterator it(A_, free_idx_[k]); it; ++it) {
        AF(it.row(), k) = it.value();
      }
    }
    G_ = llt_.solve(AF);
    MatrixXd S = AF.transpose() * G_;
    S = 0.5 * (S + S.transpose());
    double sd = S.diagonal().cwiseAbs().maxCoeff();
    S.diagonal().array() += 1e-14 * std::max(sd, 1e-300);
    schur_.compute(S);
    if (schur_.info() != Eigen::Success) return false;
  }
  return true;
}

void IpmSolver::apply_w2(const VectorXd& v, VectorXd& out) const {
  out = VectorXd::Zero(n_);
  for (size_t bi = 0; bi < blocks_.size(); ++bi) {
    const auto& blk = blocks_[bi];
    if (blk.type == ConeType::NonNeg) {
      out.segment(blk.start, blk.size) =
          lp_d_.segment(blk.start, blk.size).cwiseProduct(v.segment(blk.start, blk.size));
    } else if (blk.type == ConeType::SecondOrder) {
      out.segment(blk.start, blk.size) =
          soc_[soc_block_of_[bi]].W2 * v.segment(blk.start, blk.size);
    }
  }
}

// Solves  A dx = rp,  A'dy + ds = rd,  dx + W^2 ds = rc (cone part),
// ds = 0 on free entries.
void IpmSolver::newton_raw(const VectorXd& rp, const VectorXd& rd, const VectorXd& rc,
                           VectorXd& dx, VectorXd& dy, VectorXd& ds) const {
  VectorXd rdK = rd;
  for (int j : free_idx_) rdK(j) = 0.0;
  VectorXd w2rd;
  apply_w2(rdK, w2rd);
  VectorXd t = rc - w2rd;
  for (int j : free_idx_) t(j) = 0.0;
  VectorXd h = rp - A_ * t;
  VectorXd Minv_h = llt_.solve(h);
  VectorXd dxF;
  if (!free_idx_.empty()) {
    const int f = static_cast<int>(free_idx_.size());
    VectorXd rdF(f);
    for (int k = 0; k < f; ++k) rdF(k) = rd(free_idx_[k]);
    dxF = schur_.solve(G_.transpose() * h - rdF);
    dy = Minv_h - G_ * dxF;
  } else {
    dy = Minv_h;
  }
  ds = rdK - A_.transpose() * dy;
  for (int j : free_idx_) ds(j) = 0.0;
  VectorXd w2ds;
  apply_w2(ds, w2ds);
  dx = rc - w2ds;
  for (size_t k = 0; k < free_idx_.size(); ++k) dx(free_idx_[k]) = dxF(k);
}

void IpmSolver::newton(const VectorXd& rp, const VectorXd& rd, const VectorXd& rc,
                       VectorXd& dx, VectorXd& dy, VectorXd& ds) const {
  newton_raw(rp, rd, rc, dx, dy, ds);
  // Iterative refinement on the full linear system while it keeps helping.
  double prev = std::numeric_limits<double>::infinity();
  for (int round = 0; round < 4; ++round) {
    VectorXd ep = rp - A_ * dx;
    VectorXd ed = rd - A_.transpose() * dy - ds;
    VectorXd w2ds;
    apply_w2(ds, w2ds);
    VectorXd ec = rc - dx - w2ds;
    for (int j : free_idx_) ec(j) = 0.0;
    double err = std::max({ep.lpNorm<Eigen::Infinity>(), ed.lpNorm<Eigen::Infinity>(),
                           ec.lpNorm<Eigen::Infinity>()});
    if (err == 0.0 || err > 0.5 * prev) break;
    prev = err;
    VectorXd cx, cy, cs;
    newton_raw(ep, ed, ec, cx, cy, cs);
    dx += cx;
    dy += cy;
    ds += cs;
  }
}

double IpmSolver::max_step(const VectorXd& z, const VectorXd& dz) const {
  double alpha = std::numeric_limits<double>::infinity();
  for (const auto& blk : blocks_) {
    if (blk.type == ConeType::NonNeg) {
      for (int t = 0; t < blk.size; ++t) {
        int j = blk.start + t;
        if (dz(j) < 0) alpha = std::min(alpha, -z(j) / dz(j));
      }
    } else if (blk.type == ConeType::SecondOrder) {
      alpha = std::min(alpha, max_step_soc(z.segment(blk.start, blk.size),
                                           dz.segment(blk.start, blk.size)));
    }
  }
  return alpha;
}

double IpmSolver::complementarity(const VectorXd& x, const VectorXd& s) const {
  double v = 0.0;
  for (const auto& blk : blocks_) {
    if (blk.type == ConeType::Free) continue;
    v += x.segment(blk.start, blk.size).dot(s.segment(blk.start, blk.size));
  }
  return v;
}

ConicSolution IpmSolver::run() {
  ConicSolution sol;
  orig_.validate();
  const int n_orig = orig_.num_vars();
  if (!presolve(sol)) {
    sol.x = VectorXd::Zero(n_orig);
    sol.s = VectorXd::Zero(n_orig);
    sol.y = VectorXd::Zero(orig_.num_rows());
    return sol;
  }
  scale();

  soc_block_of_.assign(blocks_.size(), -1);
  for (size_t bi = 0; bi < blocks_.size(); ++bi) {
    if (blocks_[bi].type == ConeType::SecondOrder) {
      soc_block_of_[bi] = static_cast<int>(soc_.size());
      soc_.emplace_back();
    }
  }

  x_ = VectorXd::Zero(n_);
  s_ = VectorXd::Zero(n_);
  y_ = VectorXd::Zero(m_);
  for (const auto& blk : blocks_) {
    if (blk.type == ConeType::NonNeg) {
      x_.segment(blk.start, blk.size).setOnes();
      s_.segment(blk.start, blk.size).setOnes();
    } else if (blk.type == ConeType::SecondOrder) {
      x_(blk.start) = 1.0;
      s_(blk.start) = 1.0;
    }
  }

  const double bnorm = orig_.b.norm();
  const double cnorm = orig_.c.norm();
  VectorXd X, Y, S;
  int small_steps = 0;
  double best_acc = std::numeric_limits<double>::infinity();
  int since_best = 0;
  // Most accurate iterate seen, returned if the method stops making progress.
  VectorXd best_x, best_y, best_s;
  double best_seen = std::numeric_limits<double>::infinity();
  int best_iter = 0;

  auto finish = [&](SolveStatus st, int iters) {
    unscale(x_, y_, s_, X, Y, S);
    sol.status = st;
    sol.x = X;
    sol.y = Y;
    sol.s = S;
    sol.primal_obj = orig_.c.dot(X);
    sol.dual_obj = orig_.b.dot(Y);
    sol.gap = std::abs(sol.primal_obj - sol.dual_obj);
    sol.iterations = iters;
    return sol;
  };

  for (int iter = 0; iter <= opts_.max_iters; ++iter) {
    unscale(x_, y_, s_, X, Y, S);
    VectorXd rp_o = orig_.A * X - orig_.b;
    VectorXd rd_o = orig_.c - orig_.A.transpose() * Y - S;
    double pobj = orig_.c.dot(X), dobj = orig_.b.dot(Y);
    double pres = rp_o.norm() / (1.0 + bnorm);
    double dres = rd_o.norm() / (1.0 + cnorm);
    double compl_o = std::abs(X.dot(S));
    double gap = std::max(std::abs(pobj - dobj), compl_o) / (1.0 + std::abs(pobj));
    double acc = std::max({pres, dres, gap});
    sol.rel_accuracy = acc;
    if (opts_.verbose) {
      std::cerr << std::setw(4) << iter << std::scientific << std::setprecision(3)
                << "  pobj " << pobj << "  dobj " << dobj << "  pres " << pres
                << "  dres " << dres << "  gap " << gap << "\n";
    }
    if (!std::isfinite(acc)) break;
    if (acc <= opts_.tol) return finish(SolveStatus::Optimal, iter);
    if (acc < best_seen) {
      best_seen = acc;
      best_x = x_;
      best_y = y_;
      best_s = s_;
      best_iter = iter;
    }

    // Farkas-type certificates.
    double by = orig_.b.dot(Y);
    if (by > 0) {
      VectorXd r = orig_.A.transpose() * Y + S;
      if (r.norm() <= opts_.infeas_tol * by) return finish(SolveStatus::PrimalInfeasible, iter);
    }
    double cx = orig_.c.dot(X);
    if (cx < 0) {
      VectorXd r = orig_.A * X;
      if (r.norm() <= opts_.infeas_tol * (-cx)) return finish(SolveStatus::DualInfeasible, iter);
    }
    double big = std::max({X.lpNorm<Eigen::Infinity>(), Y.lpNorm<Eigen::Infinity>(),
                           S.lpNorm<Eigen::Infinity>()});
    if (big > 1e10) {
      if (by > 0 && (orig_.A.transpose() * Y + S).norm() <= 1e-5 * by)
        return finish(SolveStatus::PrimalInfeasible, iter);
      if (cx < 0 && (orig_.A * X).norm() <= 1e-5 * (-cx))
        return finish(SolveStatus::DualInfeasible, iter);
      break;
    }
    if (acc < best_acc * 0.9) {
      best_acc = acc;
      since_best = 0;
    } else if (++since_best > 15) {
      break;
    }
    if (iter == opts_.max_iters) break;

    compute_scalings();
    if (!factor()) break;

    VectorXd rp = b_ - A_ * x_;
    VectorXd rd = c_ - A_.transpose() * y_ - s_;
    double mu = degree_ > 0 ? complementarity(x_, s_) / degree_ : 0.0;

    // Predictor.
    VectorXd rc = -x_;
    for (int j : free_idx_) rc(j) = 0.0;
    VectorXd dxa, dya, dsa;
    newton(rp, rd, rc, dxa, dya, dsa);
    double alpha_a = std::min({1.0, max_step(x_, dxa), max_step(s_, dsa)});
    double sigma = 0.0;
    if (degree_ > 0) {
      double mu_a = complementarity(x_ + alpha_a * dxa, s_ + alpha_a * dsa) / degree_;
      sigma = std::clamp(std::pow(std::max(mu_a, 0.0) / mu, 3.0), 0.0, 1.0);
    }

    // Corrector.
    rc = VectorXd::Zero(n_);
    for (size_t bi = 0; bi < blocks_.size(); ++bi) {
      const auto& blk = blocks_[bi];
      if (blk.type == ConeType::NonNeg) {
        for (int t = 0; t < blk.size; ++t) {
          int j = blk.start + t;
          rc(j) = (sigma * mu - x_(j) * s_(j) - dxa(j) * dsa(j)) / s_(j);
        }
      } else if (blk.type == ConeType::SecondOrder) {
        const SocScaling& sc = soc_[soc_block_of_[bi]];
        VectorXd u = sc.Winv * dxa.segment(blk.start, blk.size);
        VectorXd v = sc.W * dsa.segment(blk.start, blk.size);
        VectorXd target = -soc_prod(sc.lambda, sc.lambda) - soc_prod(u, v);
        target(0) += sigma * mu;
        rc.segment(blk.start, blk.size) = sc.W * soc_div(sc.lambda, target);
      }
    }
    VectorXd dx, dy, ds;
    newton(rp, rd, rc, dx, dy, ds);
    double amax = std::min(max_step(x_, dx), max_step(s_, ds));
    double alpha = std::min(1.0, opts_.step_fraction * amax);
    if (!std::isfinite(alpha) || alpha < 1e-10) {
      if (++small_steps >= 3) break;
      alpha = std::max(alpha, 0.0);
      if (!std::isfinite(alpha)) break;
    } else {
      small_steps = 0;
    }
    x_ += alpha * dx;
    y_ += alpha * dy;
    s_ += alpha * ds;
    sol.iterations = iter + 1;
  }

  // Out of progress: fall back to the best iterate and accept it at 1e-7.
  if (best_x.size() != 0) {
    x_ = best_x;
    y_ = best_y;
    s_ = best_s;
    sol.rel_accuracy = best_seen;
  }
  ConicSolution out = finish(SolveStatus::Stalled, best_iter);
  if (sol.rel_accuracy <= 1e-7) out.status = SolveStatus::Optimal;
  return out;
}

}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::PrimalInfeasible: return "PrimalInfeasible";
    case SolveStatus::DualInfeasible: return "DualInfeasible";
    case SolveStatus::Stalled: return "Stalled";
  }
  return "Unknown";
}

void ConeProgram::validate() const {
  int total = 0;
  for (const auto& cb : cones) {
    if (cb.size <= 0) throw std::invalid_argument("cone block size must be positive");
    if (cb.type == ConeType::SecondOrder && cb.size < 2)
      throw std::invalid_argument("second-order block needs size >= 2");
    total += cb.size;
  }
  if (total != c.size()) throw std::invalid_argument("cone sizes do not match variable count");
  if (A.cols() != c.size() || A.rows() != b.size())
    throw std::invalid_argument("constraint matrix has inconsistent dimensions");
}

namespace {

std::mutex g_dump_mutex;
std::string g_dump_path;
int g_dump_count = 0;

void maybe_dump(const ConeProgram& prog) {
  std::lock_guard<std::mutex> lock(g_dump_mutex);
  if (g_dump_path.empty()) return;
  std::ofstream f(g_dump_path, g_dump_count == 0 ? std::ios::trunc : std::ios::app);
  if (!f) throw std::runtime_error("cannot open dump file " + g_dump_path);
  f << "program " << g_dump_count++ << "\n";
  dump(prog, f);
}

}  // namespace

ConicSolution solve(const ConeProgram& prog, const SolverOptions& opts) {
  maybe_dump(prog);
  IpmSolver solver(prog, opts);
  ConicSolution sol = solver.run();
  if (sol.status == SolveStatus::Optimal) {
    // Re-measure on the returned point so the recorded gap is the final one.
    sol.rel_accuracy = verify(prog, sol).max();
  }
  record_solve(sol);
  return sol;
}

double ResidualReport::max() const {
  return std::max({primal, dual, gap, primal_cone, dual_cone});
}

ResidualReport verify(const ConeProgram& prog, const ConicSolution& sol) {
  ResidualReport r;
  const VectorXd& x = sol.x;
  const VectorXd& y = sol.y;
  const VectorXd& s = sol.s;
  r.primal = (prog.A * x - prog.b).norm() / (1.0 + prog.b.norm());
  r.dual = (prog.c - prog.A.transpose() * y - s).norm() / (1.0 + prog.c.norm());
  double pobj = prog.c.dot(x), dobj = prog.b.dot(y);
  r.gap = std::max(std::abs(pobj - dobj), std::abs(x.dot(s))) / (1.0 + std::abs(pobj));
  int start = 0;
  for (const auto& cb : prog.cones) {
    auto xs = x.segment(start, cb.size);
    auto ss = s.segment(start, cb.size);
    if (cb.type == ConeType::Free) {
      r.dual_cone = std::max(r.dual_cone, ss.cwiseAbs().maxCoeff());
    } else if (cb.type == ConeType::NonNeg) {
      r.primal_cone = std::max(r.primal_cone, -std::min(xs.minCoeff(), 0.0));
      r.dual_cone = std::max(r.dual_cone, -std::min(ss.minCoeff(), 0.0));
    } else {
      r.primal_cone = std::max(r.primal_cone, xs.tail(cb.size - 1).norm() - xs(0));
      r.dual_cone = std::max(r.dual_cone, ss.tail(cb.size - 1).norm() - ss(0));
    }
    start += cb.size;
  }
  return r;
}

void dump(const ConeProgram& prog, std::ostream& os) {
  os << std::setprecision(17);
  os << "rows " << prog.num_rows() << "\n";
  os << "vars " << prog.num_vars() << "\n";
  os << "cones " << prog.cones.size() << "\n";
  for (const auto& cb : prog.cones) {
    const char* t = cb.type == ConeType::Free     ? "free"
                    : cb.type == ConeType::NonNeg ? "nonneg"
                                                  : "soc";
    os << t << " " << cb.size << "\n";
  }
  os << "c\n";
  for (int j = 0; j < prog.num_vars(); ++j)
    if (prog.c(j) != 0.0) os << j << " " << prog.c(j) << "\n";
  os << "b\n";
  for (int i = 0; i < prog.num_rows(); ++i)
    if (prog.b(i) != 0.0) os << i << " " << prog.b(i) << "\n";
  os << "A " << prog.A.nonZeros() << "\n";
  for (int j = 0; j < prog.A.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(prog.A, j); it; ++it)
      os << it.row() << " " << j << " " << it.value() << "\n";
}

void dump_to_file(const ConeProgram& prog, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open dump file " + path);
  dump(prog, f);
}

void set_dump_path(const std::string& path) {
  std::lock_guard<std::mutex> lock(g_dump_mutex);
  g_dump_path = path;
  g_dump_count = 0;
}

SolverStats solver_stats() {
  std::lock_guard<std::mutex> lock(g_stats_mutex);
  return g_stats;
}

void reset_solver_stats() {
  std::lock_guard<std::mutex> lock(g_stats_mutex);
  g_stats = SolverStats{};
}

int ProgramBuilder::add_block(ConeType t, int k) {
  if (k <= 0) throw std::invalid_argument("block size must be positive");
  int start = num_vars();
  if (!cones_.empty() && cones_.back().type == t && t != ConeType::SecondOrder) {
    cones_.back().size += k;
  } else {
    cones_.push_back({t, k});
  }
  c_.resize(c_.size() + k, 0.0);
  return start;
}

int ProgramBuilder::add_free(int k) { return add_block(ConeType::Free, k); }
int ProgramBuilder::add_nonneg(int k) { return add_block(ConeType::NonNeg, k); }
int ProgramBuilder::add_soc(int k) { return add_block(ConeType::SecondOrder, k); }

int ProgramBuilder::add_row(double rhs) {
  b_.push_back(rhs);
  return num_rows() - 1;
}

void ProgramBuilder::add_coef(int row, int var, double value) {
  if (value != 0.0) coefs_.emplace_back(row, var, value);
}

void ProgramBuilder::add_cost(int var, double value) { c_[var] += value; }
void ProgramBuilder::set_cost(int var, double value) { c_[var] = value; }
void ProgramBuilder::set_rhs(int row, double value) { b_[row] = value; }

ConeProgram ProgramBuilder::build() const {
  ConeProgram p;
  p.c = Eigen::Map<const VectorXd>(c_.data(), static_cast<Eigen::Index>(c_.size()));
  p.b = Eigen::Map<const VectorXd>(b_.data(), static_cast<Eigen::Index>(b_.size()));
  p.A.resize(num_rows(), num_vars());
  p.A.setFromTriplets(coefs_.begin(), coefs_.end());
  p.A.makeCompressed();
  p.cones = cones_;
  return p;
}

}  // namespace dsos
