#include "dsos/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "dsos/apps.hpp"
#include "dsos/io.hpp"
#include "dsos/polya.hpp"

namespace dsos::cli {

namespace {

using nlohmann::json;

struct Config {
  std::string cone = "dsos";
  int iters = 10;
  int rmax = 2;
  double bisect_eps = 1e-3;
  long t1 = 300000;
  long t2 = 5000;
  bool verify = false;
  std::string dump_conic;
  std::string out;
  unsigned seed = 7;
  bool no_timing = false;

  // Subcommand inputs.
  std::string poly, graph, pop, program, file;
  std::string pricing = "eigen";
  std::string method = "copositive";
  std::string variant = "pol";
  std::vector<int> numbers;
};

struct Outcome {
  json instance;
  json bounds = json::array();
  json extra = json::object();
  json certificates;  // null: none emitted
  bool ok = true;
};

ConeTag cone_tag(const Config& c) {
  if (c.cone == "dsos") return ConeTag::DD;
  if (c.cone == "sdsos") return ConeTag::SDD;
  throw std::invalid_argument("--cone must be dsos or sdsos");
}

json number(double v) {
  if (std::isfinite(v)) return v;
  return v < 0 ? "-inf" : "inf";
}

json bounds_json(const std::vector<double>& b) {
  json j = json::array();
  for (double v : b) j.push_back(number(v));
  return j;
}

void require_positive(const Config& c) {
  if (c.iters < 0) throw std::invalid_argument("--iters must be nonnegative");
  if (c.rmax < 0) throw std::invalid_argument("--rmax must be nonnegative");
  if (!(c.bisect_eps > 0)) throw std::invalid_argument("--bisect-eps must be positive");
  if (c.t1 < 1 || c.t2 < 1) throw std::invalid_argument("--t1 and --t2 must be positive");
}

apps::Graph load_graph(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw io::ParseError(0, "cannot open " + path);
  return io::read_dimacs(f);
}

Polynomial load_polynomial(const std::string& path) {
  return io::polynomial_from_json(io::parse_json(io::read_file(path)));
}

// Certificate entry with optional replay against the polynomial it claims.
json certificate_entry(const GramCertificate& cert, const Polynomial& target, const Config& c,
                       bool& ok) {
  json j = io::to_json(cert);
  if (c.verify) {
    // Replay from the serialized form, as an external checker would.
    GramCertificate back = io::certificate_from_json(json::parse(j.dump()));
    bool valid = validate(back, target);
    j["verified"] = valid;
    j["error"] = certificate_error(back, target);
    ok = ok && valid;
  }
  return j;
}

Outcome sphere_min_cmd(const Config& c) {
  Polynomial p = load_polynomial(c.poly);
  ConeTag tag = cone_tag(c);
  PricingMode mode;
  if (c.pricing == "eigen") {
    mode = tag == ConeTag::DD ? PricingMode::LpEigen : PricingMode::SocpEigen;
  } else if (c.pricing == "triples") {
    if (tag != ConeTag::DD) throw std::invalid_argument("triples pricing needs --cone dsos");
    mode = PricingMode::LpTriples;
  } else {
    throw std::invalid_argument("--pricing must be eigen or triples");
  }
  ColGenOptions opts;
  opts.t1 = c.t1;
  opts.t2 = c.t2;
  apps::BoundSequence s = apps::sphere_min(p, mode, c.iters, opts);
  Outcome o;
  o.instance = {{"polynomial", io::to_json(p)}};
  o.bounds = bounds_json(s.bounds);
  o.extra = {{"status", to_string(s.status)}, {"pricing", to_string(mode)}, {"log", log_json(s.log)}};
  o.ok = s.status == SolveStatus::Optimal;
  return o;
}

Outcome stable_set_cmd(const Config& c) {
  apps::Graph g = load_graph(c.graph);
  ConeTag tag = cone_tag(c);
  apps::BoundSequence s;
  if (c.method == "copositive") {
    ColGenOptions opts;
    opts.t1 = c.t1;
    opts.t2 = c.t2;
    s = apps::stable_set_copositive(g, tag, c.iters, opts);
  } else if (c.method == "outer") {
    s = apps::stable_set_outer(g, tag, c.iters);
  } else {
    throw std::invalid_argument("--method must be copositive or outer");
  }
  Outcome o;
  o.instance = {{"graph", c.graph}, {"nodes", g.n}, {"edges", static_cast<int>(g.A.sum() / 2)}};
  o.bounds = bounds_json(s.bounds);
  o.extra = {{"status", to_string(s.status)}, {"method", c.method}, {"log", log_json(s.log)}};
  o.ok = s.status == SolveStatus::Optimal;
  return o;
}

Outcome rdsos_cmd(const Config& c) {
  apps::Graph g = load_graph(c.graph);
  ConeTag tag = cone_tag(c);
  Outcome o;
  o.instance = {{"graph", c.graph}, {"nodes", g.n}, {"edges", static_cast<int>(g.A.sum() / 2)}};
  json levels = json::array();
  for (int r = 0; r <= c.rmax; ++r) {
    apps::RdsosResult res = apps::stable_set_rdsos(g, r, tag);
    levels.push_back({{"r", r},
                      {"status", to_string(res.status)},
                      {"bound", res.bound},
                      {"basis_size", res.basis_size},
                      {"atoms", res.atoms}});
    if (res.status != SolveStatus::Optimal) {
      o.ok = false;
      break;
    }
    o.bounds.push_back(res.bound);
  }
  o.extra = {{"levels", levels}};
  return o;
}

Outcome partition_cmd(const Config& c) {
  std::vector<int> a = c.numbers;
  if (!c.file.empty()) {
    if (!a.empty()) throw std::invalid_argument("give the integers or --file, not both");
    std::ifstream f(c.file);
    if (!f) throw io::ParseError(0, "cannot open " + c.file);
    a = io::read_partition(f);
  }
  if (a.empty()) throw std::invalid_argument("partition needs integers");
  for (int v : a)
    if (v < 1) throw std::invalid_argument("partition entries must be positive integers");
  ConeTag tag = cone_tag(c);
  apps::PartitionResult r = apps::partition_refute(a, tag, c.iters);
  apps::NonHomogeneousResult nh = apps::partition_nonhomogeneous(a, tag);
  Outcome o;
  o.instance = {{"a", a}};
  o.bounds = bounds_json(r.eps);
  o.extra = {{"refuted", r.refuted},
             {"status", to_string(r.status)},
             {"log", log_json(r.log)},
             {"nonhomogeneous",
              {{"status", to_string(nh.status)},
               {"eps", nh.eps},
               {"phase_one_status", to_string(nh.phase_one_status)},
               {"phase_one_shift", nh.phase_one_shift},
               {"feasible", nh.feasible}}}};
  o.ok = r.status == SolveStatus::Optimal;
  if (!r.eps.empty()) {
    o.certificates = json::array(
        {certificate_entry(r.last_cert, apps::partition_form(a, r.eps.back()), c, o.ok)});
  }
  return o;
}

Outcome pop_cmd(const Config& c) {
  polya::PopInstance pop = io::pop_from_json(io::parse_json(io::read_file(c.pop)));
  polya::HierarchyOptions opts;
  if (c.variant == "pol") {
    opts.variant = polya::Variant::Pol;
  } else if (c.variant == "dsos") {
    opts.variant = polya::Variant::Dsos;
  } else if (c.variant == "sdsos") {
    opts.variant = polya::Variant::Sdsos;
  } else {
    throw std::invalid_argument("--variant must be pol, dsos or sdsos");
  }
  if (c.rmax < 1) throw std::invalid_argument("pop-polya needs --rmax >= 1");
  opts.eps = c.bisect_eps;
  opts.pol.seed = c.seed;
  polya::HierarchyResult h = polya::run(pop, c.rmax, opts);
  Outcome o;
  o.instance = io::to_json(pop);
  o.bounds = bounds_json(h.l);
  o.extra = polya::to_json(h);
  o.extra["variant"] = polya::to_string(opts.variant);
  return o;
}

Outcome dcd_cmd(const Config& c) {
  Polynomial f = load_polynomial(c.poly);
  apps::DcdResult r = apps::dcd(f, cone_tag(c));
  Outcome o;
  o.instance = {{"polynomial", io::to_json(f)}};
  o.ok = r.status == SolveStatus::Optimal;
  o.extra = {{"status", to_string(r.status)}};
  if (!o.ok) return o;
  o.bounds.push_back(r.objective);
  o.extra["g"] = io::to_json(r.g);
  o.extra["h"] = io::to_json(r.h);
  o.extra["objective"] = r.objective;
  o.certificates = json::array({certificate_entry(r.g_cert, hessian_biform(r.g), c, o.ok),
                                certificate_entry(r.h_cert, hessian_biform(r.h), c, o.ok)});
  return o;
}

Outcome conic_cmd(const Config& c) {
  std::ifstream f(c.program);
  if (!f) throw io::ParseError(0, "cannot open " + c.program);
  std::vector<ConeProgram> progs = io::read_conic_listing(f);
  for (const auto& p : progs) p.validate();
  Outcome o;
  o.instance = {{"program", c.program}, {"count", progs.size()}};
  json results = json::array();
  for (const auto& p : progs) {
    ConicSolution s = solve(p);
    json r = {{"status", to_string(s.status)},
              {"iterations", s.iterations},
              {"primal_obj", s.primal_obj},
              {"dual_obj", s.dual_obj}};
    if (c.verify && s.status == SolveStatus::Optimal) {
      ResidualReport rep = verify(p, s);
      r["residuals"] = {{"primal", rep.primal},
                        {"dual", rep.dual},
                        {"gap", rep.gap},
                        {"primal_cone", rep.primal_cone},
                        {"dual_cone", rep.dual_cone}};
      r["verified"] = rep.max() <= 1e-6;
      o.ok = o.ok && rep.max() <= 1e-6;
    }
    // Infeasibility is an answer; only a stalled solve is a failure.
    if (s.status == SolveStatus::Stalled) o.ok = false;
    o.bounds.push_back(s.status == SolveStatus::Optimal ? json(s.primal_obj) : json(nullptr));
    results.push_back(std::move(r));
  }
  o.extra = {{"results", results}};
  return o;
}

void zero_timings(json& j) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it.key() == "wall_ms") {
        it.value() = 0;
      } else {
        zero_timings(it.value());
      }
    }
  } else if (j.is_array()) {
    for (auto& v : j) zero_timings(v);
  }
}

void add_common(CLI::App* sub, Config& c) {
  sub->add_option("--cone", c.cone, "dsos or sdsos")->capture_default_str();
  sub->add_option("--iters", c.iters, "iterations after the base solve")->capture_default_str();
  sub->add_option("--t1", c.t1, "triples scanned per pricing round")->capture_default_str();
  sub->add_option("--t2", c.t2, "atoms kept per triples round")->capture_default_str();
  sub->add_flag("--verify", c.verify, "replay emitted certificates");
  sub->add_option("--dump-conic", c.dump_conic, "append every conic program to this file");
  sub->add_option("--out", c.out, "write JSON here instead of stdout");
  sub->add_option("--seed", c.seed, "seed for sampled diagnostics")->capture_default_str();
  sub->add_flag("--no-timing", c.no_timing, "report wall_ms as 0");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Config c;
  CLI::App app{"Inner and outer LP/SOCP approximations of sum-of-squares programs", "dsos"};
  app.require_subcommand(1);

  auto* sm = app.add_subcommand("sphere-min", "lower bounds on min of a form over the sphere");
  sm->add_option("--poly", c.poly, "polynomial JSON")->required();
  sm->add_option("--pricing", c.pricing, "eigen or triples")->capture_default_str();
  auto* ss = app.add_subcommand("stable-set", "upper bounds on the stability number");
  ss->add_option("--graph", c.graph, "DIMACS edge file")->required();
  ss->add_option("--method", c.method, "copositive or outer")->capture_default_str();
  auto* rd = app.add_subcommand("stable-set-rdsos", "r-dsos / r-sdsos stability bounds");
  rd->add_option("--graph", c.graph, "DIMACS edge file")->required();
  rd->add_option("--rmax", c.rmax, "levels 0..rmax")->capture_default_str();
  auto* pt = app.add_subcommand("partition", "refute a partition instance");
  pt->add_option("numbers", c.numbers, "positive integers");
  pt->add_option("--file", c.file, "whitespace-separated integers");
  auto* pp = app.add_subcommand("pop-polya", "Polya hierarchy lower bounds for a POP");
  pp->add_option("--pop", c.pop, "POP JSON")->required();
  pp->add_option("--rmax", c.rmax, "levels 1..rmax")->capture_default_str();
  pp->add_option("--bisect-eps", c.bisect_eps, "bisection tolerance")->capture_default_str();
  pp->add_option("--variant", c.variant, "pol, dsos or sdsos")->capture_default_str();
  auto* dc = app.add_subcommand("dcd", "difference-of-convex decomposition");
  dc->add_option("--poly", c.poly, "polynomial JSON")->required();
  auto* sc = app.add_subcommand("solve-conic", "solve programs from a conic listing");
  sc->add_option("--program", c.program, "listing written by --dump-conic")->required();
  for (auto* sub : {sm, ss, rd, pt, pp, dc, sc}) add_common(sub, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  std::string name = app.get_subcommands().front()->get_name();
  try {
    require_positive(c);
    cone_tag(c);
    if (!c.dump_conic.empty()) set_dump_path(c.dump_conic);
    if (name == "sphere-min") {
      o = sphere_min_cmd(c);
    } else if (name == "stable-set") {
      o = stable_set_cmd(c);
    } else if (name == "stable-set-rdsos") {
      o = rdsos_cmd(c);
    } else if (name == "partition") {
      o = partition_cmd(c);
    } else if (name == "pop-polya") {
      o = pop_cmd(c);
    } else if (name == "dcd") {
      o = dcd_cmd(c);
    } else {
      o = conic_cmd(c);
    }
  } catch (const std::invalid_argument& e) {  // includes ParseError, DimensionError
    set_dump_path("");
    err << "dsos " << name << ": input error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::out_of_range& e) {
    set_dump_path("");
    err << "dsos " << name << ": input error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    set_dump_path("");
    err << "dsos " << name << ": solver failure: " << e.what() << "\n";
    return kSolverFailure;
  }
  set_dump_path("");
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

  json result = {{"command", name},
                 {"instance", o.instance},
                 {"params",
                  {{"cone", c.cone},
                   {"iters", c.iters},
                   {"rmax", c.rmax},
                   {"bisect_eps", c.bisect_eps},
                   {"t1", c.t1},
                   {"t2", c.t2},
                   {"verify", c.verify},
                   {"seed", c.seed}}},
                 {"bounds", o.bounds},
                 {"wall_ms", ms}};
  if (!o.certificates.is_null()) result["certificates"] = o.certificates;
  for (auto it = o.extra.begin(); it != o.extra.end(); ++it) result[it.key()] = it.value();
  if (c.no_timing) zero_timings(result);

  const std::string text = result.dump(2) + "\n";
  if (c.out.empty()) {
    out << text;
  } else {
    std::ofstream f(c.out);
    if (!f) {
      err << "dsos: cannot write " << c.out << "\n";
      return kInputError;
    }
    f << text;
  }
  err << "dsos " << name << ": " << o.bounds.size() << " bound(s)";
  if (!o.bounds.empty()) err << ", last " << o.bounds.back().dump();
  err << (o.ok ? "" : " [solver failure]") << "\n";
  return o.ok ? kOk : kSolverFailure;
}

}  // namespace dsos::cli
