#include "dsos/io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace dsos::io {

using nlohmann::json;

namespace {

const char* kind_name(BasisKind k) {
  switch (k) {
    case BasisKind::Exact: return "exact";
    case BasisKind::UpTo: return "upto";
    case BasisKind::Hessian: return "hessian";
    case BasisKind::HessianUpTo: return "hessian_upto";
  }
  return "?";
}

BasisKind kind_from(const std::string& s) {
  if (s == "exact") return BasisKind::Exact;
  if (s == "upto") return BasisKind::UpTo;
  if (s == "hessian") return BasisKind::Hessian;
  if (s == "hessian_upto") return BasisKind::HessianUpTo;
  throw ParseError(0, "unknown basis kind '" + s + "'");
}

json matrix_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (int i = 0; i < M.rows(); ++i) {
    json r = json::array();
    for (int j = 0; j < M.cols(); ++j) r.push_back(M(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

Eigen::MatrixXd matrix_from(const json& j, const char* what) {
  if (!j.is_array()) throw ParseError(0, std::string(what) + " must be an array of rows");
  const int r = static_cast<int>(j.size());
  if (r == 0) return {};
  const int c = static_cast<int>(j[0].size());
  Eigen::MatrixXd M(r, c);
  for (int i = 0; i < r; ++i) {
    if (!j[i].is_array() || static_cast<int>(j[i].size()) != c)
      throw ParseError(0, std::string(what) + " rows must have equal length");
    for (int k = 0; k < c; ++k) M(i, k) = j[i][k].get<double>();
  }
  return M;
}

// Splits a line into tokens, ignoring everything after '#'.
std::vector<std::string> tokens(const std::string& line) {
  std::istringstream ss(line.substr(0, line.find('#')));
  std::vector<std::string> out;
  std::string t;
  while (ss >> t) out.push_back(t);
  return out;
}

long to_long(const std::string& s, int line) {
  size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || s.empty()) throw ParseError(line, "expected an integer, got '" + s + "'");
  return v;
}

double to_double(const std::string& s, int line) {
  size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || s.empty()) throw ParseError(line, "expected a number, got '" + s + "'");
  return v;
}

}  // namespace

ParseError::ParseError(int line, const std::string& what)
    : std::invalid_argument(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
      line_(line) {}

json to_json(const Polynomial& p) {
  json terms = json::array();
  for (const auto& [m, c] : p.terms()) terms.push_back(json::array({m, c}));
  return {{"nvars", p.nvars()}, {"terms", terms}};
}

Polynomial polynomial_from_json(const json& j) {
  try {
    if (!j.is_object() || !j.contains("nvars") || !j.contains("terms"))
      throw ParseError(0, "polynomial needs \"nvars\" and \"terms\"");
    const int n = j.at("nvars").get<int>();
    if (n < 1) throw ParseError(0, "nvars must be positive");
    Polynomial p(n);
    for (const auto& t : j.at("terms")) {
      if (!t.is_array() || t.size() != 2) throw ParseError(0, "term must be [exponents, coeff]");
      Monomial m = t[0].get<Monomial>();
      if (static_cast<int>(m.size()) != n) throw ParseError(0, "exponent vector length != nvars");
      for (int e : m)
        if (e < 0) throw ParseError(0, "negative exponent");
      p.add_term(m, t[1].get<double>());
    }
    return p;
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("polynomial: ") + e.what());
  }
}

polya::PopInstance pop_from_json(const json& j) {
  if (!j.is_object() || !j.contains("objective"))
    throw ParseError(0, "POP needs an \"objective\"");
  polya::PopInstance pop;
  pop.p = polynomial_from_json(j.at("objective"));
  if (j.contains("constraints"))
    for (const auto& g : j.at("constraints")) pop.g.push_back(polynomial_from_json(g));
  try {
    pop.R = j.value("radius", 1.0);
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("radius: ") + e.what());
  }
  pop.validate();
  return pop;
}

json to_json(const polya::PopInstance& pop) {
  json g = json::array();
  for (const auto& gi : pop.g) g.push_back(to_json(gi));
  return {{"objective", to_json(pop.p)}, {"constraints", g}, {"radius", pop.R}};
}

json to_json(const GramCertificate& c) {
  json b = {{"kind", kind_name(c.basis.kind)},
            {"nvars", c.basis.nvars},
            {"degree", c.basis.degree},
            {"exponents", c.basis.entries}};
  return {{"basis", b},
          {"U", c.U.size() == 0 ? json::array() : matrix_json(c.U)},
          {"Q", matrix_json(c.Q)},
          {"cone_tag", to_string(c.tag)}};
}

GramCertificate certificate_from_json(const json& j) {
  try {
    GramCertificate c;
    const json& b = j.at("basis");
    c.basis.kind = kind_from(b.at("kind").get<std::string>());
    c.basis.nvars = b.at("nvars").get<int>();
    c.basis.degree = b.at("degree").get<int>();
    c.basis.entries = b.at("exponents").get<std::vector<Monomial>>();
    c.U = matrix_from(j.at("U"), "U");
    c.Q = matrix_from(j.at("Q"), "Q");
    const std::string tag = j.at("cone_tag").get<std::string>();
    if (tag == to_string(ConeTag::DD)) {
      c.tag = ConeTag::DD;
    } else if (tag == to_string(ConeTag::SDD)) {
      c.tag = ConeTag::SDD;
    } else {
      throw ParseError(0, "unknown cone_tag '" + tag + "'");
    }
    if (c.Q.rows() != c.basis.size() || c.Q.cols() != c.basis.size())
      throw ParseError(0, "Q does not match the basis size");
    return c;
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("certificate: ") + e.what());
  }
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // Byte offset to line number.
    size_t upto = std::min(e.byte, text.size());
    int line = 1;
    for (size_t i = 0; i + 1 < upto; ++i) line += text[i] == '\n';
    throw ParseError(line, e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError(0, "cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

apps::Graph read_dimacs(std::istream& in) {
  std::string line;
  int lineno = 0;
  long n = -1, m = -1, seen = 0;
  std::vector<std::pair<int, int>> edges;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = tokens(line);
    if (t.empty() || t[0] == "c") continue;
    if (t[0] == "p") {
      if (n >= 0) throw ParseError(lineno, "duplicate problem line");
      if (t.size() != 4 || (t[1] != "edge" && t[1] != "col"))
        throw ParseError(lineno, "expected 'p edge N M'");
      n = to_long(t[2], lineno);
      m = to_long(t[3], lineno);
      if (n < 1 || m < 0) throw ParseError(lineno, "bad node or edge count");
    } else if (t[0] == "e") {
      if (n < 0) throw ParseError(lineno, "edge before problem line");
      if (t.size() != 3) throw ParseError(lineno, "expected 'e i j'");
      long i = to_long(t[1], lineno), j = to_long(t[2], lineno);
      if (i < 1 || j < 1 || i > n || j > n) throw ParseError(lineno, "node index out of range");
      if (i == j) throw ParseError(lineno, "self-loop");
      edges.push_back({static_cast<int>(i - 1), static_cast<int>(j - 1)});
      ++seen;
    } else {
      throw ParseError(lineno, "unknown line type '" + t[0] + "'");
    }
  }
  if (n < 0) throw ParseError(0, "missing 'p edge N M' line");
  if (seen != m)
    throw ParseError(0, "header announces " + std::to_string(m) + " edges, found " +
                            std::to_string(seen));
  return apps::graph_from_edges(static_cast<int>(n), edges);
}

void write_dimacs(const apps::Graph& g, std::ostream& out) {
  g.validate();
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < g.n; ++i)
    for (int j = i + 1; j < g.n; ++j)
      if (g.A(i, j) != 0.0) e.push_back({i, j});
  out << "p edge " << g.n << " " << e.size() << "\n";
  for (auto [i, j] : e) out << "e " << i + 1 << " " << j + 1 << "\n";
}

std::vector<int> read_partition(std::istream& in) {
  std::vector<int> a;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    for (const auto& t : tokens(line)) {
      long v = to_long(t, lineno);
      if (v < 1 || v > 1'000'000) throw ParseError(lineno, "entries must be positive integers");
      a.push_back(static_cast<int>(v));
    }
  }
  if (a.empty()) throw ParseError(0, "empty partition instance");
  return a;
}

std::vector<ConeProgram> read_conic_listing(std::istream& in) {
  std::vector<ConeProgram> out;
  std::string line;
  int lineno = 0;
  auto next = [&](bool required) -> std::vector<std::string> {
    while (std::getline(in, line)) {
      ++lineno;
      auto t = tokens(line);
      if (!t.empty()) return t;
    }
    if (required) throw ParseError(lineno, "unexpected end of listing");
    return {};
  };
  auto keyed = [&](const std::vector<std::string>& t, const char* key) {
    if (t.size() != 2 || t[0] != key) throw ParseError(lineno, std::string("expected '") + key + " <n>'");
    long v = to_long(t[1], lineno);
    if (v < 0) throw ParseError(lineno, "negative count");
    return v;
  };

  std::vector<std::string> t = next(false);
  while (!t.empty()) {
    if (t.size() == 2 && t[0] == "program") t = next(true);  // set_dump_path header
    const long rows = keyed(t, "rows");
    const long vars = keyed(next(true), "vars");
    const long ncones = keyed(next(true), "cones");
    ConeProgram p;
    long covered = 0;
    for (long k = 0; k < ncones; ++k) {
      auto c = next(true);
      if (c.size() != 2) throw ParseError(lineno, "expected '<cone> <size>'");
      ConeType type;
      if (c[0] == "free") {
        type = ConeType::Free;
      } else if (c[0] == "nonneg") {
        type = ConeType::NonNeg;
      } else if (c[0] == "soc") {
        type = ConeType::SecondOrder;
      } else {
        throw ParseError(lineno, "unknown cone '" + c[0] + "'");
      }
      long size = to_long(c[1], lineno);
      if (size < 1) throw ParseError(lineno, "cone size must be positive");
      p.cones.push_back({type, static_cast<int>(size)});
      covered += size;
    }
    if (covered != vars) throw ParseError(lineno, "cone sizes do not add up to vars");
    p.c = Eigen::VectorXd::Zero(vars);
    p.b = Eigen::VectorXd::Zero(rows);

    t = next(true);
    if (t.size() != 1 || t[0] != "c") throw ParseError(lineno, "expected 'c'");
    for (t = next(true); t.size() == 2 && t[0] != "A"; t = next(true)) {
      long j = to_long(t[0], lineno);
      if (j < 0 || j >= vars) throw ParseError(lineno, "variable index out of range");
      p.c(j) = to_double(t[1], lineno);
    }
    if (t.size() != 1 || t[0] != "b") throw ParseError(lineno, "expected 'b'");
    for (t = next(true); t.size() == 2 && t[0] != "A"; t = next(true)) {
      long i = to_long(t[0], lineno);
      if (i < 0 || i >= rows) throw ParseError(lineno, "row index out of range");
      p.b(i) = to_double(t[1], lineno);
    }
    const long nnz = keyed(t, "A");
    std::vector<Eigen::Triplet<double>> trip;
    for (long k = 0; k < nnz; ++k) {
      auto e = next(true);
      if (e.size() != 3) throw ParseError(lineno, "expected 'row col value'");
      long i = to_long(e[0], lineno), j = to_long(e[1], lineno);
      if (i < 0 || i >= rows || j < 0 || j >= vars) throw ParseError(lineno, "entry out of range");
      trip.emplace_back(static_cast<int>(i), static_cast<int>(j), to_double(e[2], lineno));
    }
    p.A.resize(rows, vars);
    p.A.setFromTriplets(trip.begin(), trip.end());
    out.push_back(std::move(p));
    t = next(false);
  }
  if (out.empty()) throw ParseError(0, "listing contains no program");
  return out;
}

}  // namespace dsos::io
