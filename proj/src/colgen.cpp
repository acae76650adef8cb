#include "dsos/colgen.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace dsos {

namespace {

constexpr double kViolation = -1e-9;

// Sign-canonical copy: first entry above 1e-12 in magnitude is positive.
Eigen::VectorXd canonical(const Eigen::VectorXd& u) {
  for (int i = 0; i < u.size(); ++i) {
    if (std::abs(u(i)) > 1e-12) return u(i) < 0 ? Eigen::VectorXd(-u) : u;
  }
  return u;
}

std::vector<double> key_of(const Eigen::VectorXd& u, double tag) {
  std::vector<double> k(u.data(), u.data() + u.size());
  k.push_back(tag);
  return k;
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

const char* to_string(PricingMode m) {
  switch (m) {
    case PricingMode::LpEigen:
      return "lp-eigen";
    case PricingMode::LpTriples:
      return "lp-triples";
    case PricingMode::SocpEigen:
      return "socp-eigen";
  }
  return "?";
}

AtomSet AtomSet::initial(int n, ConeTag tag) {
  AtomSet s(n);
  if (tag == ConeTag::DD || n == 1) {
    for (int k = 0; k < n; ++k) s.add(Eigen::VectorXd(Eigen::VectorXd::Unit(n, k)));
  }
  for (int k = 0; k < n; ++k) {
    for (int l = k + 1; l < n; ++l) {
      if (tag == ConeTag::DD) {
        Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
        u(k) = 1.0;
        u(l) = 1.0;
        s.add(u);
        u(l) = -1.0;
        s.add(u);
      } else {
        Eigen::MatrixXd V = Eigen::MatrixXd::Zero(n, 2);
        V(k, 0) = 1.0;
        V(l, 1) = 1.0;
        s.add(V);
      }
    }
  }
  return s;
}

bool AtomSet::add(const Eigen::VectorXd& u) {
  if (u.size() != dim_) throw DimensionError("atom dimension mismatch");
  Eigen::VectorXd c = canonical(u);
  if (!seen_.insert(key_of(c, 1.0)).second) return false;
  rank1_.push_back(sparsify(c));
  return true;
}

bool AtomSet::add(const Eigen::MatrixXd& V) {
  if (V.rows() != dim_ || V.cols() != 2) throw DimensionError("pair atom must be n x 2");
  Eigen::VectorXd a = canonical(V.col(0)), b = canonical(V.col(1));
  std::vector<double> ka = key_of(a, 2.0), kb = key_of(b, 2.0);
  if (kb < ka) std::swap(ka, kb);
  std::vector<double> key = ka;
  key.insert(key.end(), kb.begin(), kb.end());
  if (!seen_.insert(key).second) return false;
  pairs_.push_back({sparsify(a), sparsify(b)});
  return true;
}

MasterResult solve_master(const Master& m, const AtomSet& atoms, const SolverOptions& opts) {
  if (m.map == nullptr) throw std::invalid_argument("master without row map");
  if (atoms.size() == 0) throw std::invalid_argument("master needs at least one atom");
  if (m.a.size() != static_cast<size_t>(m.b.size()))
    throw DimensionError("master: one objective entry per free column");

  AtomProgram prog;
  prog.rows = m.map->rows();
  prog.rhs = m.c;
  for (size_t i = 0; i < m.a.size(); ++i) {
    ExtraColumn col;
    col.type = ConeType::Free;
    col.cost = -m.b(i);
    col.entries = sparsify(m.a[i]);
    prog.extras.push_back(std::move(col));
  }
  for (const auto& t : m.nonneg) {
    ExtraColumn col;
    col.type = ConeType::NonNeg;
    col.entries = t;
    prog.extras.push_back(std::move(col));
  }
  AtomBlock blk;
  blk.map = m.map;
  blk.U = m.U;
  blk.rank1 = atoms.rank1();
  blk.pairs = atoms.pairs();
  prog.blocks.push_back(std::move(blk));

  AtomSolution sol = solve_atoms(prog, opts);
  MasterResult r;
  r.status = sol.status;
  r.value = -sol.value;
  r.y = sol.extras.head(m.a.size());
  r.rank1_weights = sol.rank1_weights[0];
  r.pair_weights = sol.pair_weights[0];
  r.Q = sol.Q[0];
  r.X = sol.dual[0];
  return r;
}

MasterResult master_lp(const SymMatrix& C, const std::vector<SymMatrix>& A,
                       const Eigen::VectorXd& b, const AtomSet& atoms) {
  const int n = static_cast<int>(C.rows());
  if (atoms.dim() != n) throw DimensionError("atoms and C differ in dimension");
  PairMap map = entry_map(n);
  Master m;
  m.map = &map;
  m.c = map.apply(C);
  for (const auto& Ai : A) {
    if (Ai.rows() != n) throw DimensionError("constraint matrix dimension");
    m.a.push_back(map.apply(Ai));
  }
  m.b = b;
  return solve_master(m, atoms);
}

PricedAtoms price_eigen(const SymMatrix& X, int how_many, bool socp) {
  PricedAtoms out;
  if (how_many <= 0) return out;
  EigenDecomposition ed = eig_sym(X);
  std::vector<int> neg;
  for (int i = 0; i < ed.values.size(); ++i)
    if (ed.values(i) < kViolation) neg.push_back(i);  // ascending already
  if (!socp) {
    for (int i = 0; i < static_cast<int>(neg.size()) && i < how_many; ++i)
      out.rank1.push_back(ed.vectors.col(neg[i]).normalized());
    return out;
  }
  for (size_t i = 0; i < neg.size() && static_cast<int>(out.pairs.size() + out.rank1.size()) < how_many;
       i += 2) {
    if (i + 1 < neg.size()) {
      Eigen::MatrixXd V(X.rows(), 2);
      V.col(0) = ed.vectors.col(neg[i]).normalized();
      V.col(1) = ed.vectors.col(neg[i + 1]).normalized();
      out.pairs.push_back(V);
    } else {
      out.rank1.push_back(ed.vectors.col(neg[i]).normalized());
    }
  }
  return out;
}

long triples_count(int n) {
  long m = n;
  return m + m * (m - 1) + m * (m - 1) * (m - 2) / 6 * 4;
}

Eigen::VectorXd triple_at(int n, long index) {
  if (index < 0 || index >= triples_count(n)) throw std::out_of_range("triple index");
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  if (index < n) {
    u(index) = 1.0;
    return u;
  }
  index -= n;
  const long n2 = static_cast<long>(n) * (n - 1) / 2;
  if (index < 2 * n2) {
    long pair = index / 2;
    int sign = index % 2;
    for (int i = 0; i < n; ++i) {
      if (pair < n - 1 - i) {
        u(i) = 1.0;
        u(i + 1 + pair) = sign ? -1.0 : 1.0;
        return u;
      }
      pair -= n - 1 - i;
    }
  }
  index -= 2 * n2;
  long support = index / 4;
  int pattern = static_cast<int>(index % 4);
  for (int i = 0; i < n; ++i) {
    long below = static_cast<long>(n - 1 - i) * (n - 2 - i) / 2;
    if (support >= below) {
      support -= below;
      continue;
    }
    for (int j = i + 1; j < n; ++j) {
      if (support < n - 1 - j) {
        int k = j + 1 + static_cast<int>(support);
        u(i) = 1.0;
        u(j) = (pattern & 2) ? -1.0 : 1.0;
        u(k) = (pattern & 1) ? -1.0 : 1.0;
        return u;
      }
      support -= n - 1 - j;
    }
  }
  throw std::logic_error("triple_at: enumeration mismatch");
}

TriplesResult price_triples(const SymMatrix& B, long cursor, long t1, long t2) {
  if (t1 < t2 || t2 < 1) throw std::invalid_argument("need t1 >= t2 >= 1");
  const int n = static_cast<int>(B.rows());
  const long total = triples_count(n);
  TriplesResult out;
  if (total == 0) return out;
  cursor = ((cursor % total) + total) % total;

  struct Hit {
    double value;
    long index;
  };
  std::vector<Hit> hits;
  long idx = cursor;
  for (long step = 0; step < total && static_cast<long>(hits.size()) < t1; ++step) {
    Eigen::VectorXd u = triple_at(n, idx);
    int nz[3], cnt = 0;
    for (int i = 0; i < n && cnt < 3; ++i)
      if (u(i) != 0.0) nz[cnt++] = i;
    double v = 0.0;
    for (int a = 0; a < cnt; ++a)
      for (int c = 0; c < cnt; ++c) v += u(nz[a]) * u(nz[c]) * B(nz[a], nz[c]);
    if (v < kViolation) hits.push_back({v, idx});
    idx = (idx + 1) % total;
    ++out.scanned;
  }
  out.cursor = idx;
  // Enumeration order is graded-lex on supports, so the index is the tie-break.
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    return a.value != b.value ? a.value < b.value : a.index < b.index;
  });
  for (long i = 0; i < static_cast<long>(hits.size()) && i < t2; ++i)
    out.atoms.push_back(triple_at(n, hits[i].index));
  return out;
}

ColGenState run(const Master& m, AtomSet atoms, PricingMode mode, int iters,
                const ColGenOptions& opts) {
  if (iters < 0) throw std::invalid_argument("iters must be nonnegative");
  ColGenState st;
  st.atoms = std::move(atoms);
  int added = 0;
  for (int it = 0; it <= iters; ++it) {
    auto t0 = std::chrono::steady_clock::now();
    MasterResult r = solve_master(m, st.atoms, opts.solver);
    if (r.status != SolveStatus::Optimal) {
      st.status = r.status;
      break;
    }
    st.last = r;
    st.dual = r.X;
    st.bounds.push_back(r.value);
    if (it == iters) {
      st.log.push_back({it, r.value, added, elapsed_ms(t0)});
      break;
    }
    added = 0;
    if (mode == PricingMode::LpTriples) {
      TriplesResult tr = price_triples(r.X, st.triples_cursor, opts.t1, opts.t2);
      st.triples_cursor = tr.cursor;
      for (const auto& u : tr.atoms) added += st.atoms.add(u);
    } else {
      PricedAtoms pa = price_eigen(r.X, opts.eigen_atoms, mode == PricingMode::SocpEigen);
      for (const auto& u : pa.rank1) added += st.atoms.add(u);
      for (const auto& V : pa.pairs) added += st.atoms.add(V);
    }
    st.log.push_back({it, r.value, added, elapsed_ms(t0)});
    if (added == 0) break;
  }
  return st;
}

ColGenState run(const SymMatrix& C, const std::vector<SymMatrix>& A, const Eigen::VectorXd& b,
                PricingMode mode, int iters, const ColGenOptions& opts) {
  const int n = static_cast<int>(C.rows());
  PairMap map = entry_map(n);
  Master m;
  m.map = &map;
  m.c = map.apply(C);
  for (const auto& Ai : A) m.a.push_back(map.apply(Ai));
  m.b = b;
  ConeTag tag = mode == PricingMode::SocpEigen ? ConeTag::SDD : ConeTag::DD;
  return run(m, AtomSet::initial(n, tag), mode, iters, opts);
}

nlohmann::json to_json(const IterationRecord& r) {
  return {{"iter", r.iter}, {"bound", r.bound}, {"atoms_added", r.atoms_added},
          {"wall_ms", r.wall_ms}};
}

nlohmann::json log_json(const std::vector<IterationRecord>& log) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : log) j.push_back(to_json(r));
  return j;
}

}  // namespace dsos
