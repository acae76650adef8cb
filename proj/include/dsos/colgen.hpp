#pragma once

// Column generation over inner approximations of the psd cone. The master
// problem keeps the cone variable as a nonnegative combination of atoms
// u u' and V L V'; pricing adds atoms that violate the current dual.

#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dsos/atoms.hpp"
#include "dsos/conic.hpp"
#include "dsos/linalg.hpp"
#include "dsos/poly.hpp"

#include "json.hpp"

namespace dsos {

enum class PricingMode { LpEigen, LpTriples, SocpEigen };
const char* to_string(PricingMode m);

class AtomSet {
 public:
  AtomSet() = default;
  explicit AtomSet(int dim) : dim_(dim) {}

  // U_{n,2} for DD, V_{n,2} for SDD (e_1 alone when n = 1).
  static AtomSet initial(int n, ConeTag tag);

  int dim() const { return dim_; }
  // Both return false for duplicates (sign-canonical, exact entries).
  bool add(const Eigen::VectorXd& u);
  bool add(const Eigen::MatrixXd& V);  // n x 2

  const std::vector<SparseVec>& rank1() const { return rank1_; }
  const std::vector<PairAtom>& pairs() const { return pairs_; }
  size_t size() const { return rank1_.size() + pairs_.size(); }

 private:
  int dim_ = 0;
  std::vector<SparseVec> rank1_;
  std::vector<PairAtom> pairs_;
  std::set<std::vector<double>> seen_;
};

// max b'y  s.t.  c - sum_i y_i a_i = map(sum atoms) + sum_j t_j e_j,  t >= 0.
// Rows are given by map: matrix entries for master_lp, polynomial
// coefficients for Gram-based masters.
struct Master {
  const PairMap* map = nullptr;
  Eigen::VectorXd c;
  std::vector<Eigen::VectorXd> a;
  Eigen::VectorXd b;
  std::vector<SparseVec> nonneg;  // extra nonnegative columns, zero cost
  Eigen::MatrixXd U;              // atoms enter as U'u; empty: identity
};

struct MasterResult {
  SolveStatus status = SolveStatus::Stalled;
  double value = 0.0;  // b'y
  Eigen::VectorXd y;
  Eigen::VectorXd rank1_weights;
  std::vector<Eigen::Matrix2d> pair_weights;
  SymMatrix Q;  // sum of weighted atoms
  // Dual matrix: <X, atom> >= 0 for every atom in the master; the
  // relaxation is exact when X is psd.
  SymMatrix X;
};

MasterResult solve_master(const Master& m, const AtomSet& atoms, const SolverOptions& opts = {});

// Matrix form: max b'y s.t. C - sum y_i A_i = sum alpha_j u_j u_j'.
MasterResult master_lp(const SymMatrix& C, const std::vector<SymMatrix>& A,
                       const Eigen::VectorXd& b, const AtomSet& atoms);

// Unit eigenvectors for eigenvalues below -1e-9, most negative first. LP
// mode returns up to how_many rank-one atoms; SOCP mode pairs consecutive
// eigenvectors into n x 2 atoms and falls back to one rank-one atom when a
// single negative eigenvalue is left.
struct PricedAtoms {
  std::vector<Eigen::VectorXd> rank1;
  std::vector<Eigen::MatrixXd> pairs;
  bool empty() const { return rank1.empty() && pairs.empty(); }
};
PricedAtoms price_eigen(const SymMatrix& X, int how_many, bool socp);

// Vectors with at most three nonzero entries in {-1, +1}, first nonzero +1.
// Enumeration order: support size, then support (lex), then sign pattern.
long triples_count(int n);
Eigen::VectorXd triple_at(int n, long index);

struct TriplesResult {
  std::vector<Eigen::VectorXd> atoms;
  long cursor = 0;
  long scanned = 0;
};
TriplesResult price_triples(const SymMatrix& B, long cursor, long t1 = 300000, long t2 = 5000);

struct IterationRecord {
  int iter = 0;
  double bound = 0.0;
  int atoms_added = 0;
  double wall_ms = 0.0;
};

struct ColGenOptions {
  int eigen_atoms = 1;  // atoms added per eigen pricing round
  long t1 = 300000;
  long t2 = 5000;
  SolverOptions solver;
};

struct ColGenState {
  AtomSet atoms;
  std::vector<double> bounds;  // b'y per iteration, nondecreasing
  SymMatrix dual;
  long triples_cursor = 0;
  SolveStatus status = SolveStatus::Optimal;
  MasterResult last;
  std::vector<IterationRecord> log;
};

// Iteration 0 solves the master over the initial atoms; each later
// iteration prices, adds atoms and re-solves. Stops early when pricing finds
// nothing. status reports the first non-Optimal master.
ColGenState run(const Master& m, AtomSet atoms, PricingMode mode, int iters,
                const ColGenOptions& opts = {});
ColGenState run(const SymMatrix& C, const std::vector<SymMatrix>& A, const Eigen::VectorXd& b,
                PricingMode mode, int iters, const ColGenOptions& opts = {});

nlohmann::json to_json(const IterationRecord& r);
nlohmann::json log_json(const std::vector<IterationRecord>& log);

}  // namespace dsos
