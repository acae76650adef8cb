#pragma once

// Application drivers: forms on the sphere, stable-set upper bounds,
// partition refutation and difference-of-convex decomposition.

#include <vector>

#include <Eigen/Dense>

#include "dsos/atoms.hpp"
#include "dsos/basispursuit.hpp"
#include "dsos/colgen.hpp"
#include "dsos/gram.hpp"
#include "dsos/poly.hpp"

namespace dsos::apps {

struct Graph {
  int n = 0;
  SymMatrix A;  // 0/1, symmetric, zero diagonal

  // Throws std::invalid_argument when A is not a valid adjacency matrix.
  void validate() const;
  int min_degree() const;
};

Graph graph_from_edges(int n, const std::vector<std::pair<int, int>>& edges);  // 0-indexed
Graph complement(const Graph& g);
Graph petersen();

struct BoundSequence {
  std::vector<double> bounds;
  std::vector<IterationRecord> log;
  SolveStatus status = SolveStatus::Optimal;
};

// Lower bounds on min p over the unit sphere: max lambda s.t.
// p - lambda (sum x^2)^d is a combination of atoms, with column generation.
BoundSequence sphere_min(const Polynomial& p, PricingMode mode, int iters,
                         const ColGenOptions& opts = {});

// Upper bounds on the stability number from lambda (I + A) - J >= X,
// X in DD / SDD, then eigenvector atoms (LP) or eigenvector pairs (SOCP).
BoundSequence stable_set_copositive(const Graph& g, ConeTag tag, int iters,
                                    const ColGenOptions& opts = {});

// min lambda s.t. (x o x)' (lambda (I + A) - J) (x o x) (sum x^2)^r is
// dsos / sdsos.
struct RdsosResult {
  SolveStatus status = SolveStatus::Stalled;
  double bound = 0.0;
  int basis_size = 0;
  long atoms = 0;
};
RdsosResult stable_set_rdsos(const Graph& g, int r, ConeTag tag, const SolverOptions& opts = {});

// Lovasz-type outer sequence: max J.X s.t. tr X = 1, X_ij = 0 on edges,
// X in DD(U_k)^* / SDD(U_k)^*, with U_{k+1} = chol(yI + Y - J).
BoundSequence stable_set_outer(const Graph& g, ConeTag tag, int iters,
                               const SolverOptions& opts = {});

// sum (x_i^2 - 1)^2 + (a'x)^2.
Polynomial partition_polynomial(const std::vector<int>& a);
// sum x_i^4 + ((a'x)^2 - 2 |x|^2) |x|^2 / n + (n - eps) (|x|^2 / n)^2.
Polynomial partition_form(const std::vector<int>& a, double eps);

struct PartitionResult {
  std::vector<double> eps;  // eps_k per iteration
  std::vector<IterationRecord> log;
  SolveStatus status = SolveStatus::Optimal;
  bool refuted = false;  // some eps_k > 1e-7
  GramCertificate last_cert;
};

// max eps s.t. partition_form(a, eps) in DSOS(U_k) / SDSOS(U_k), with U_k
// updated from the optimal Gram matrix.
PartitionResult partition_refute(const std::vector<int>& a, ConeTag tag, int iters,
                                 const SolverOptions& opts = {});

struct NonHomogeneousResult {
  SolveStatus status = SolveStatus::Stalled;  // of max eps s.t. p_a - eps in cone
  double eps = 0.0;                           // when Optimal
  // min t s.t. p_a + c + t z'z in cone with c free; t > 1e-7 certifies that
  // no eps makes p_a - eps a member.
  SolveStatus phase_one_status = SolveStatus::Stalled;
  double phase_one_shift = 0.0;
  // Direct program Optimal, or phase one Optimal with shift <= 1e-7.
  bool feasible = false;
};
NonHomogeneousResult partition_nonhomogeneous(const std::vector<int>& a, ConeTag tag,
                                              const SolverOptions& opts = {});

struct DcdResult {
  SolveStatus status = SolveStatus::Stalled;
  Polynomial g, h;  // f = g - h
  GramCertificate g_cert, h_cert;
  double objective = 0.0;  // normalized sphere integral of tr H_g
};

// min int tr H_g s.t. g and g - f dsos-convex (sdsos-convex). Forms get a
// homogeneous g of the same degree; otherwise g has all monomials of degree
// 2..deg f.
DcdResult dcd(const Polynomial& f, ConeTag tag = ConeTag::DD, const SolverOptions& opts = {});

}  // namespace dsos::apps
