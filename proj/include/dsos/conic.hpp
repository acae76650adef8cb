#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace dsos {

// Free is an extension used for unconstrained decision variables; its dual
// slack is fixed at zero.
enum class ConeType { Free, NonNeg, SecondOrder };

struct ConeBlock {
  ConeType type;
  int size;
};

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

// min c'x  s.t.  A x = b,  x in cones (blocks laid out in order).
struct ConeProgram {
  Eigen::VectorXd c;
  SparseMatrix A;
  Eigen::VectorXd b;
  std::vector<ConeBlock> cones;

  int num_vars() const { return static_cast<int>(c.size()); }
  int num_rows() const { return static_cast<int>(b.size()); }
  void validate() const;
};

enum class SolveStatus { Optimal, PrimalInfeasible, DualInfeasible, Stalled };
const char* to_string(SolveStatus s);

struct ConicSolution {
  SolveStatus status = SolveStatus::Stalled;
  Eigen::VectorXd x, y, s;
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  double gap = 0.0;             // |c'x - b'y|
  double rel_accuracy = 1.0;    // worst of the three relative optimality measures
  int iterations = 0;
};

struct SolverOptions {
  int max_iters = 200;
  double tol = 1e-9;       // target relative accuracy for Optimal
  double step_fraction = 0.99;
  double infeas_tol = 1e-8;
  bool verbose = false;
};

ConicSolution solve(const ConeProgram& prog, const SolverOptions& opts = {});

struct ResidualReport {
  double primal = 0.0;     // ||Ax-b|| / (1+||b||)
  double dual = 0.0;       // ||c-A'y-s|| / (1+||c||)
  double gap = 0.0;        // |c'x-b'y| / (1+|c'x|)
  double primal_cone = 0.0;  // worst cone violation of x
  double dual_cone = 0.0;    // worst cone violation of s
  double max() const;
};

ResidualReport verify(const ConeProgram& prog, const ConicSolution& sol);

// Plain-text listing of the standard form.
void dump(const ConeProgram& prog, std::ostream& os);
void dump_to_file(const ConeProgram& prog, const std::string& path);

// When set, every solve() appends its program to this file. Empty disables.
void set_dump_path(const std::string& path);

// Process-wide record of every Optimal solve's relative gap.
struct SolverStats {
  long solves = 0;
  long optimal = 0;
  double worst_optimal_gap = 0.0;
};
SolverStats solver_stats();
void reset_solver_stats();

// Incremental assembly of a ConeProgram. Variables are created in blocks and
// keep their creation order.
class ProgramBuilder {
 public:
  int add_free(int k);
  int add_nonneg(int k);
  int add_soc(int k);
  int add_row(double rhs);
  void add_coef(int row, int var, double value);
  void add_cost(int var, double value);
  void set_cost(int var, double value);
  void set_rhs(int row, double value);
  double rhs(int row) const { return b_[row]; }
  int num_vars() const { return static_cast<int>(c_.size()); }
  int num_rows() const { return static_cast<int>(b_.size()); }
  ConeProgram build() const;

 private:
  int add_block(ConeType t, int k);
  std::vector<double> c_;
  std::vector<double> b_;
  std::vector<Eigen::Triplet<double>> coefs_;
  std::vector<ConeBlock> cones_;
};

}  // namespace dsos
