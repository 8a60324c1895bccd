#include "pacrit/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "internal.hpp"
#include "pacrit/criticality.hpp"
#include "pacrit/minimal.hpp"

namespace pacrit {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ValidationError(path + ": " + what);
}

const Json& require(const Json& obj, const std::string& path, const std::string& key) {
  if (!obj.is_object() || !obj.contains(key)) fail(path + "." + key, "missing field");
  return obj.at(key);
}

double as_number(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

std::string as_string(const Json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

Point as_point(const Json& j, const std::string& path, int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim)
    fail(path, "expected an array of length " + std::to_string(dim));
  Point x = Point::Zero();
  for (int a = 0; a < dim; ++a) x[a] = as_number(j.at(static_cast<std::size_t>(a)), path);
  return x;
}

CoefficientField parse_field(const Json& j, const std::string& path, FieldKind kind) {
  const std::string text = as_string(j, path);
  try {
    return parse_field_expr(text, kind);
  } catch (const ParseError& e) {
    fail(path, e.what());
  }
}

DomainBox parse_domain(const Json& j, const std::string& path) {
  const int dim = static_cast<int>(as_number(require(j, path, "dim"), path + ".dim"));
  if (dim != 1 && dim != 2) fail(path + ".dim", "dimension must be 1 or 2");
  DomainBox box;
  box.dim = dim;
  const Point lo = as_point(require(j, path, "lower"), path + ".lower", dim);
  const Point hi = as_point(require(j, path, "upper"), path + ".upper", dim);
  box.lower = lo;
  box.upper = hi;
  if (dim == 1) {
    box.lower[1] = 0;
    box.upper[1] = 1;
  }
  try {
    box.validate();
  } catch (const ValidationError& e) {
    fail(path, e.what());
  }
  return box;
}

GridPtr parse_grid(const Json& j, const std::string& path, const DomainBox& box) {
  if (j.contains("nodes")) {
    const Json& nodes = j.at("nodes");
    if (!nodes.is_array() || static_cast<int>(nodes.size()) != box.dim)
      fail(path + ".nodes", "expected an array of length dim");
    const int nx = static_cast<int>(as_number(nodes.at(0), path + ".nodes"));
    const int ny = box.dim == 2 ? static_cast<int>(as_number(nodes.at(1), path + ".nodes")) : 1;
    try {
      return make_grid(box, nx, ny);
    } catch (const ValidationError& e) {
      fail(path, e.what());
    }
  }
  if (j.contains("spacing")) {
    try {
      return make_grid(box, as_number(j.at("spacing"), path + ".spacing"));
    } catch (const ValidationError& e) {
      fail(path, e.what());
    }
  }
  fail(path, "needs either nodes or spacing");
}

struct ParsedProblem {
  double p = 2;
  DomainBox domain;
  GridPtr grid;
  CoefficientField A;
  CoefficientField V;
  std::optional<Regularization> reg;

  ProblemSpec spec() const { return ProblemSpec(p, grid, A, V, reg); }
};

ParsedProblem parse_problem(const Json& config) {
  const Json& pj = require(config, "config", "problem");
  ParsedProblem out{.p = as_number(require(pj, "problem", "p"), "problem.p"),
                    .domain = parse_domain(require(pj, "problem", "domain"), "problem.domain"),
                    .grid = nullptr,
                    .A = parse_field(require(pj, "problem", "A"), "problem.A",
                                     FieldKind::SpdMatrix),
                    .V = parse_field(require(pj, "problem", "V"), "problem.V",
                                     FieldKind::Scalar),
                    .reg = std::nullopt};
  if (!(out.p > 1)) fail("problem.p", "exponent p must be > 1");
  out.grid = parse_grid(require(pj, "problem", "grid"), "problem.grid", out.domain);
  if (pj.contains("epsilon")) {
    Regularization reg{as_number(pj.at("epsilon"), "problem.epsilon")};
    try {
      reg.validate(out.p);
    } catch (const ValidationError& e) {
      fail("problem.epsilon", e.what());
    }
    out.reg = reg;
  }
  return out;
}

Exhaustion parse_exhaustion(const Json& config, const DomainBox& domain) {
  const Json& ej = require(config, "config", "exhaustion");
  ExhaustionOptions opts;
  opts.count = static_cast<int>(as_number(require(ej, "exhaustion", "count"),
                                          "exhaustion.count"));
  opts.spacing = as_number(require(ej, "exhaustion", "spacing"), "exhaustion.spacing");
  const std::string policy =
      ej.contains("policy") ? as_string(ej.at("policy"), "exhaustion.policy") : "margin";
  if (policy == "margin") opts.policy = ExhaustionPolicy::MarginShrink;
  else if (policy == "concentric") opts.policy = ExhaustionPolicy::Concentric;
  else fail("exhaustion.policy", "must be 'margin' or 'concentric'");
  if (ej.contains("growth")) opts.growth = as_number(ej.at("growth"), "exhaustion.growth");
  try {
    return make_exhaustion(domain, opts);
  } catch (const ValidationError& e) {
    fail("exhaustion", e.what());
  }
}

BallSpec parse_ball(const Json& j, const std::string& path, int dim) {
  BallSpec ball;
  ball.center = as_point(require(j, path, "center"), path + ".center", dim);
  ball.radius = as_number(require(j, path, "radius"), path + ".radius");
  if (!(ball.radius > 0)) fail(path + ".radius", "radius must be positive");
  return ball;
}

std::string csv_of_sequences(const std::vector<std::string>& headers,
                             const std::vector<std::vector<double>>& cols) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t c = 0; c < headers.size(); ++c)
    os << headers[c] << (c + 1 < headers.size() ? "," : "\n");
  std::size_t rows = 0;
  for (const auto& col : cols) rows = std::max(rows, col.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (r < cols[c].size()) os << cols[c][r];
      os << (c + 1 < cols.size() ? "," : "\n");
    }
  }
  return os.str();
}

std::string csv_of_field(const NodalField& u) {
  std::ostringstream os;
  write_csv(os, u.grid(), {{"value", &u}});
  return os.str();
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

unsigned seed_of(const Json& config) {
  if (config.contains("seed")) {
    const Json& s = config.at("seed");
    if (!s.is_number_integer()) fail("seed", "expected an integer");
    return s.get<unsigned>();
  }
  return 1;
}

// ---- analyses -------------------------------------------------------------

void run_eigen(const Json& config, const ParsedProblem& prob, RunReport& out) {
  EigenOptions opts;
  if (config.contains("params") && config.at("params").contains("tol"))
    opts.tol = as_number(config.at("params").at("tol"), "params.tol");
  const ProblemSpec spec = prob.spec();
  const EigenReport eig = principal_eigenpair(spec, opts);
  internal::MassResult mass = internal::mass_and_grad(spec, eig.phi.values());
  out.json["lambda1"] = eig.lambda1;
  out.json["normalization"] = mass.mass;
  out.json["iterations"] = eig.iterations;
  out.json["converged"] = eig.converged;
  out.json["diagnostics"] = {{"residual", eig.residual},
                             {"tolerance", opts.tol.value_or(default_solve_tol(prob.p))},
                             {"shift", eig.shift}};
  out.tables.emplace_back("eigenfunction", csv_of_field(eig.phi));
  if (!eig.converged) out.exit_code = 3;
}

void run_dirichlet(const Json& config, const ParsedProblem& prob, RunReport& out) {
  const Json& params = require(config, "config", "params");
  const ProblemSpec spec = prob.spec();
  const NodalField f = NodalField::from_expr(
      prob.grid, parse_field(require(params, "params", "f"), "params.f", FieldKind::Scalar));
  const NodalField g = NodalField::from_expr(
      prob.grid, parse_field(require(params, "params", "g"), "params.g", FieldKind::Scalar));
  SolveOptions opts;
  if (params.contains("tol")) opts.tol = as_number(params.at("tol"), "params.tol");
  const SolveReport sol = solve_dirichlet(spec, f, g, opts);
  out.json["energy"] = sol.energy;
  out.json["converged"] = sol.converged;
  out.json["iterations"] = sol.iterations;
  out.json["min_value"] = sol.solution.min();
  out.json["max_value"] = sol.solution.max();
  out.json["diagnostics"] = {{"residual", sol.residual},
                             {"tolerance", opts.tol.value_or(default_solve_tol(prob.p))}};
  out.tables.emplace_back("solution", csv_of_field(sol.solution));
  if (!sol.converged) out.exit_code = 3;
}

void run_classify(const Json& config, const ParsedProblem& prob, RunReport& out) {
  const Json& params = require(config, "config", "params");
  const Exhaustion ex = parse_exhaustion(config, prob.domain);
  const ProblemFamily family(prob.p, prob.A, prob.V, ex, prob.reg);
  const BallSpec probe =
      parse_ball(require(params, "params", "probe"), "params.probe", prob.domain.dim);
  const CriticalityReport rep = classify(family, probe);
  out.json["verdict"] = to_string(rep.verdict);
  out.json["lambda1"] = rep.lambda1;
  out.json["capacity"] = rep.cap;
  out.json["tN"] = rep.tN;
  out.json["member_scale"] = rep.member_scale;
  out.json["fit"] = {{"capacity",
                      {{"slope", rep.cap_fit.slope},
                       {"intercept", rep.cap_fit.intercept},
                       {"max_rel_residual", rep.cap_fit.max_rel_residual},
                       {"valid", rep.cap_fit.valid}}},
                     {"tN",
                      {{"slope", rep.tn_fit.slope},
                       {"intercept", rep.tn_fit.intercept},
                       {"max_rel_residual", rep.tn_fit.max_rel_residual},
                       {"valid", rep.tn_fit.valid}}}};
  out.json["notes"] = rep.notes;
  std::vector<double> idx(rep.lambda1.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<double>(i);
  out.tables.emplace_back("sequences",
                          csv_of_sequences({"member", "lambda1", "capacity", "tN"},
                                           {idx, rep.lambda1, rep.cap, rep.tN}));
  if (rep.verdict == Verdict::Inconclusive) out.exit_code = 3;
}

void run_capacity(const Json& config, const ParsedProblem& prob, RunReport& out) {
  const Json& params = require(config, "config", "params");
  GridPtr grid = prob.grid;
  if (params.contains("disk_mask")) {
    const BallSpec mask =
        parse_ball(params.at("disk_mask"), "params.disk_mask", prob.domain.dim);
    grid = std::make_shared<Grid>(grid->with_disk_mask(mask.center, mask.radius));
  }
  const ProblemSpec spec(prob.p, grid, prob.A, prob.V, prob.reg);
  const BallSpec ball =
      parse_ball(require(params, "params", "ball"), "params.ball", prob.domain.dim);
  const auto K = grid->nodes_in_ball(ball.center, ball.radius);
  const CapacityReport rep = capacity(K, spec);
  out.json["capacity"] = rep.value;
  out.json["converged"] = rep.converged;
  out.json["iterations"] = rep.iterations;
  out.json["K_nodes"] = static_cast<long>(K.size());
  out.json["diagnostics"] = {{"tolerance", default_solve_tol(prob.p)}};
  out.tables.emplace_back("potential", csv_of_field(rep.minimizer));
  if (!rep.converged) out.exit_code = 3;
}

void run_tau_scan(const Json& config, const ParsedProblem& prob, RunReport& out) {
  const Json& params = require(config, "config", "params");
  const Exhaustion ex = parse_exhaustion(config, prob.domain);
  const ProblemFamily family(prob.p, prob.A, prob.V, ex, prob.reg);
  const CoefficientField V0 =
      parse_field(require(params, "params", "V0"), "params.V0", FieldKind::Scalar);
  PerturbOptions opts;
  const PerturbationScan scan = perturbation_threshold(family, V0, opts);
  out.json["tau_plus_infinite"] = scan.tau_plus_infinite;
  if (!scan.tau_plus_infinite) {
    out.json["tau_plus"] = scan.tau_plus;
    out.json["lambda_at_tau_plus"] = scan.lambda_at_tau_plus;
  }
  out.json["base_lambda"] = scan.base_lambda;
  if (scan.tau_minus) out.json["tau_minus"] = *scan.tau_minus;
  out.json["tau_minus_probed_down_to"] = scan.tau_minus_probed_down_to;
  out.json["diagnostics"] = {{"lambda_zero_rel_tol", opts.lambda_zero_rel_tol},
                             {"bisect_steps", opts.bisect_steps}};
  std::vector<double> taus, lambdas;
  for (const auto& [t, l] : scan.history) {
    taus.push_back(t);
    lambdas.push_back(l);
  }
  out.tables.emplace_back("history", csv_of_sequences({"tau", "lambda1"}, {taus, lambdas}));
}

void run_ground_state(const Json& config, const ParsedProblem& prob, RunReport& out) {
  const Json& params = require(config, "config", "params");
  const Exhaustion ex = parse_exhaustion(config, prob.domain);
  const ProblemFamily family(prob.p, prob.A, prob.V, ex, prob.reg);
  const BallSpec probe =
      parse_ball(require(params, "params", "probe"), "params.probe", prob.domain.dim);
  GroundStateOptions opts;
  if (params.contains("override_critical_check"))
    opts.override_critical_check = params.at("override_critical_check").get<bool>();
  const GroundStateReport rep = ground_state(family, probe, opts);
  out.json["tN"] = rep.tN;
  out.json["gaps"] = rep.gaps;
  out.json["stabilized"] = rep.stabilized;
  out.json["members_used"] = rep.members_used;
  out.json["diagnostics"] = {{"stabilize_tol", opts.stabilize_tol}};
  out.tables.emplace_back("ground_state", csv_of_field(rep.state));
  std::vector<double> idx(rep.tN.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<double>(i);
  out.tables.emplace_back("tN", csv_of_sequences({"member", "tN"}, {idx, rep.tN}));
  if (!rep.stabilized) out.exit_code = 3;
}

void run_green(const Json& config, const ParsedProblem& prob, RunReport& out) {
  const Json& params = require(config, "config", "params");
  const Exhaustion ex = parse_exhaustion(config, prob.domain);
  const ProblemFamily family(prob.p, prob.A, prob.V, ex, prob.reg);
  const Point x0 = as_point(require(params, "params", "x0"), "params.x0", prob.domain.dim);
  const Point x1 = as_point(require(params, "params", "x1"), "params.x1", prob.domain.dim);
  GreenOptions opts;
  const GreenReport rep = green_function(family, x0, x1, opts);
  out.json["model"] =
      rep.model == SingularityModel::Logarithmic ? "logarithmic" : "power-law";
  out.json["exponent"] = rep.fit.value;
  out.json["r2"] = rep.fit.r2;
  out.json["classification"] = rep.fit.classification;
  out.json["shells"] = rep.fit.shells;
  out.json["stabilized"] = rep.stabilized;
  out.json["gaps"] = rep.gaps;
  out.json["source_radius"] = rep.source_radius;
  out.json["diagnostics"] = {{"stabilize_tol", opts.stabilize_tol},
                             {"fit_min_shells", opts.fit_min_shells}};
  std::vector<double> rs, vs;
  for (const auto& [r, v] : rep.fit.profile) {
    rs.push_back(r);
    vs.push_back(v);
  }
  out.tables.emplace_back("profile", csv_of_sequences({"radius", "value"}, {rs, vs}));
  out.tables.emplace_back("field", csv_of_field(rep.field));
  if (!rep.stabilized || rep.fit.classification == "inconclusive") out.exit_code = 3;
}

void run_liouville(const Json& config, const ParsedProblem& prob, RunReport& out) {
  const Json& params = require(config, "config", "params");
  const Json& p1 = require(params, "params", "problem1");
  LiouvilleInput input{
      prob.spec(),
      ProblemSpec(prob.p, prob.grid,
                  parse_field(require(p1, "params.problem1", "A"), "params.problem1.A",
                              FieldKind::SpdMatrix),
                  parse_field(require(p1, "params.problem1", "V"), "params.problem1.V",
                              FieldKind::Scalar),
                  prob.reg),
      NodalField::from_expr(prob.grid, parse_field(require(params, "params", "psi"),
                                                   "params.psi", FieldKind::Scalar)),
      NodalField::from_expr(prob.grid, parse_field(require(params, "params", "phi"),
                                                   "params.phi", FieldKind::Scalar)),
      as_number(require(params, "params", "M"), "params.M"),
      as_number(require(params, "params", "N"), "params.N")};
  const LiouvilleReport rep = liouville_check(input);
  auto cond = [](const LiouvilleCondition& c) {
    return Json{{"pass", c.pass}, {"detail", c.detail}};
  };
  out.json["conditions"] = {{"i_ground_state", cond(rep.ground_state)},
                            {"ii_subsolution", cond(rep.subsolution)},
                            {"iii_matrix_bound", cond(rep.matrix_bound)},
                            {"iv_gradient_bound", cond(rep.gradient_bound)}};
  out.json["certified"] = rep.certified;
  out.json["conclusion"] = rep.conclusion;
}

void run_verify_identities(const Json& config, const ParsedProblem& prob, RunReport& out,
                           unsigned seed) {
  int battery = 200;
  std::vector<double> ps = {1.5, 2.0, 3.0};
  if (config.contains("params")) {
    const Json& params = config.at("params");
    if (params.contains("battery"))
      battery = static_cast<int>(as_number(params.at("battery"), "params.battery"));
    if (params.contains("ps")) {
      ps.clear();
      for (const auto& v : params.at("ps")) ps.push_back(as_number(v, "params.ps"));
    }
  }
  std::mt19937_64 rng(seed);
  bool all_ok = true;
  Json per_p = Json::array();
  for (const double p : ps) {
    const ProblemSpec spec(p, prob.grid, prob.A, prob.V,
                           Regularization::default_for(p));
    double min_cell_L = 0, max_rel_gap = 0, min_I = 0;
    for (int t = 0; t < battery; ++t) {
      NodalField a = internal::random_smooth_field(spec, rng());
      NodalField b = internal::random_smooth_field(spec, rng());
      NodalField u(prob.grid, a.values().cwiseAbs());
      NodalField v(prob.grid, Vector::Constant(prob.grid->num_nodes(), 1.0) +
                                  0.45 * b.values());
      u.enforce_zero_trace();
      const PiconeResult pr = picone(u, v, spec);
      const double scale = 1 + pr.L.cwiseAbs().maxCoeff();
      min_cell_L = std::min(min_cell_L, pr.L.minCoeff() / scale);
      max_rel_gap = std::max(max_rel_gap,
                             std::abs(pr.intL - pr.intR) / (1 + std::abs(pr.intL)));
      NodalField up(prob.grid, u.values() + Vector::Constant(prob.grid->num_nodes(), 0.2));
      const double I = adsa_I(up, v, spec);
      min_I = std::min(min_I, I / (1 + std::abs(I)));
    }
    const bool ok = min_cell_L >= -1e-8 && max_rel_gap <= 1e-8 && min_I >= -1e-8;
    all_ok = all_ok && ok;
    per_p.push_back({{"p", p},
                     {"min_cell_L_scaled", min_cell_L},
                     {"max_rel_int_gap", max_rel_gap},
                     {"min_adsa_scaled", min_I},
                     {"pass", ok}});
  }
  out.json["battery"] = battery;
  out.json["results"] = per_p;
  out.json["all_pass"] = all_ok;
  out.json["diagnostics"] = {{"cell_tolerance", 1e-8}, {"integral_rel_tolerance", 1e-8}};
  if (!all_ok) throw AnalysisError("verify-identities: a property battery failed");
}

}  // namespace

Json parse_config(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
}

void apply_override(Json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ValidationError("override must look like path.to.key=value: " + assignment);
  const std::string path = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  Json parsed;
  try {
    parsed = Json::parse(value);
  } catch (const nlohmann::json::parse_error&) {
    parsed = value;  // plain string
  }
  Json* node = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (key.empty()) throw ValidationError("override has an empty path segment: " + assignment);
    if (dot == std::string::npos) {
      (*node)[key] = parsed;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

RunReport run_scenario(const Json& config) {
  if (!config.is_object()) throw ValidationError("config: expected a JSON object");
  const std::string analysis =
      as_string(require(config, "config", "analysis"), "analysis");
  const unsigned seed = seed_of(config);
  const ParsedProblem prob = parse_problem(config);

  RunReport out;
  out.json["scenario"] = config;
  out.json["analysis"] = analysis;
  out.json["provenance"] = {{"seed", seed},
                            {"config_hash", fnv1a(config.dump())}};

  if (analysis == "eigen") run_eigen(config, prob, out);
  else if (analysis == "dirichlet") run_dirichlet(config, prob, out);
  else if (analysis == "classify") run_classify(config, prob, out);
  else if (analysis == "capacity") run_capacity(config, prob, out);
  else if (analysis == "tau-scan") run_tau_scan(config, prob, out);
  else if (analysis == "ground-state") run_ground_state(config, prob, out);
  else if (analysis == "green") run_green(config, prob, out);
  else if (analysis == "liouville") run_liouville(config, prob, out);
  else if (analysis == "verify-identities") run_verify_identities(config, prob, out, seed);
  else fail("analysis", "unknown analysis '" + analysis + "'");
  return out;
}

RunReport run_scenario(const std::string& config_text) {
  return run_scenario(parse_config(config_text));
}

namespace {

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw AnalysisError("cannot open " + tmp.string() + " for writing");
    os << content;
    if (!os.good()) throw AnalysisError("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

}  // namespace

void emit_report(const RunReport& report, const std::string& format, const std::string& path) {
  if (format == "json") {
    write_atomic(path, report.json.dump(2) + "\n");
    return;
  }
  if (format == "csv") {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const std::string stem = (target.parent_path() / target.stem()).string();
    for (const auto& [name, content] : report.tables)
      write_atomic(stem + "." + name + ".csv", content);
    return;
  }
  throw ValidationError("unknown report format '" + format + "' (use json or csv)");
}

}  // namespace pacrit
