#include "persisters/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "persisters/csv.hpp"
#include "persisters/errors.hpp"

namespace persisters {

using nlohmann::json;

VectorXd build_initial_profile(const InitialConditionSpec& spec, const Grid& grid,
                               std::uint64_t seed) {
  const int K = grid.size();
  VectorXd n = VectorXd::Zero(K);
  switch (spec.type) {
    case InitialConditionSpec::Type::no_persisters:
      for (int i = 0; i < K; ++i)
        if (grid.active(i)) n[i] = 1.0;
      break;
    case InitialConditionSpec::Type::only_persisters:
      for (int i = 0; i < K; ++i)
        if (!grid.active(i)) n[i] = 1.0;
      break;
    case InitialConditionSpec::Type::uniform:
      if (spec.level < 0.0) throw ConfigError("initial level must be nonnegative");
      return VectorXd::Constant(K, spec.level);
    case InitialConditionSpec::Type::gaussian: {
      if (!(spec.width > 0.0)) throw ConfigError("gaussian width must be positive");
      for (int i = 0; i < K; ++i) {
        const double z = (grid.midpoint(i) - spec.center) / spec.width;
        n[i] = std::exp(-0.5 * z * z);
      }
      break;
    }
    case InitialConditionSpec::Type::random: {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> uni(0.0, 1.0);
      for (int i = 0; i < K; ++i) n[i] = uni(rng);
      break;
    }
    case InitialConditionSpec::Type::from_file: {
      const MatrixXd M = read_csv_matrix(spec.path);
      VectorXd v;
      if (M.cols() == 1)
        v = M.col(0);
      else if (M.rows() == 1)
        v = M.row(0).transpose();
      else
        throw ConfigError("initial profile file must hold a single row or column");
      if (v.size() != K)
        throw ConfigError("initial profile has " + std::to_string(v.size()) +
                          " entries, expected K = " + std::to_string(K));
      if ((v.array() < 0.0).any()) throw ConfigError("initial profile must be nonnegative");
      return v;
    }
  }
  const double total = grid.total_mass(n);
  if (!(spec.mass >= 0.0)) throw ConfigError("initial mass must be nonnegative");
  if (total > 0.0) n *= spec.mass / total;
  return n;
}

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& why) {
  throw ConfigError("config field '" + field + "': " + why);
}

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) fail(where + "." + it.key(), "unknown key");
}

double get_num(const json& obj, const std::string& where, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) fail(where + "." + key, "expected a number");
  return obj[key].get<double>();
}

InitialConditionSpec parse_initial(const json& j, const std::string& where,
                                   const ModelParams& params) {
  InitialConditionSpec ic;
  if (!j.is_object()) fail(where, "expected an object");
  check_keys(j, where, {"type", "mass", "level", "center", "width", "path", "R0"});
  const std::string type = j.value("type", "no_persisters");
  if (type == "no_persisters")
    ic.type = InitialConditionSpec::Type::no_persisters;
  else if (type == "only_persisters")
    ic.type = InitialConditionSpec::Type::only_persisters;
  else if (type == "uniform")
    ic.type = InitialConditionSpec::Type::uniform;
  else if (type == "gaussian")
    ic.type = InitialConditionSpec::Type::gaussian;
  else if (type == "random")
    ic.type = InitialConditionSpec::Type::random;
  else if (type == "from_file")
    ic.type = InitialConditionSpec::Type::from_file;
  else
    fail(where + ".type", "unknown initial condition '" + type + "'");
  ic.mass = get_num(j, where, "mass", ic.mass);
  ic.level = get_num(j, where, "level", ic.level);
  ic.center = get_num(j, where, "center", ic.center);
  ic.width = get_num(j, where, "width", ic.width);
  ic.path = j.value("path", std::string{});
  if (ic.type == InitialConditionSpec::Type::from_file && ic.path.empty())
    fail(where + ".path", "required for from_file");
  if (j.contains("R0")) {
    ic.R0 = get_num(j, where, "R0", 0.0);
    if (*ic.R0 < 0.0) fail(where + ".R0", "must be nonnegative");
  }
  (void)params;
  return ic;
}

Scenario parse_scenario(const json& j, const RunConfig& cfg) {
  if (!j.is_object()) fail("scenario", "expected an object");
  const std::string type = j.value("type", "simulate");
  if (type == "simulate") {
    check_keys(j, "scenario", {"type", "initial"});
    SimulateScenario s;
    if (j.contains("initial")) s.initial = parse_initial(j["initial"], "scenario.initial", cfg.params);
    return s;
  }
  if (type == "spectrum") {
    check_keys(j, "scenario", {"type", "R_values", "bracket", "tol"});
    SpectrumScenario s;
    if (j.contains("R_values")) {
      if (!j["R_values"].is_array()) fail("scenario.R_values", "expected an array");
      for (const auto& v : j["R_values"]) s.R_values.push_back(v.get<double>());
    }
    if (j.contains("bracket")) {
      const auto& b = j["bracket"];
      if (!b.is_array() || b.size() != 2) fail("scenario.bracket", "expected [R_lo, R_hi]");
      s.bracket = std::make_pair(b[0].get<double>(), b[1].get<double>());
    }
    s.tol = get_num(j, "scenario", "tol", s.tol);
    if (s.R_values.empty() && !s.bracket)
      fail("scenario", "spectrum needs R_values and/or a bracket");
    return s;
  }
  if (type == "equilibria") {
    check_keys(j, "scenario", {"type"});
    return EquilibriaScenario{};
  }
  if (type == "sweep") {
    check_keys(j, "scenario", {"type", "grid", "inner", "spectrum", "initial"});
    SweepScenario s;
    if (!j.contains("grid") || !j["grid"].is_object() || j["grid"].empty())
      fail("scenario.grid", "sweep needs a nonempty parameter grid");
    for (auto it = j["grid"].begin(); it != j["grid"].end(); ++it) {
      if (!it.value().is_array() || it.value().empty())
        fail("scenario.grid." + it.key(), "expected a nonempty array of values");
      std::vector<double> vals;
      for (const auto& v : it.value()) vals.push_back(v.get<double>());
      s.grid[it.key()] = std::move(vals);
    }
    s.inner = j.value("inner", s.inner);
    if (s.inner != "spectrum" && s.inner != "equilibria" && s.inner != "simulate")
      fail("scenario.inner", "must be spectrum, equilibria or simulate");
    if (j.contains("spectrum")) {
      const auto inner = parse_scenario(json{{"type", "spectrum"},
                                             {"R_values", j["spectrum"].value("R_values", json::array())},
                                             {"bracket", j["spectrum"].value("bracket", json::array({0.0, 0.1}))}},
                                        cfg);
      s.spectrum = std::get<SpectrumScenario>(inner);
    } else {
      s.spectrum.bracket = std::make_pair(0.0, 0.1);
    }
    if (j.contains("initial")) s.initial = parse_initial(j["initial"], "scenario.initial", cfg.params);
    return s;
  }
  if (type == "reproduce_fig1") {
    check_keys(j, "scenario", {"type", "t_end"});
    ReproduceFig1Scenario s;
    s.t_end = get_num(j, "scenario", "t_end", s.t_end);
    if (!(s.t_end > 0.0)) fail("scenario.t_end", "must be positive");
    return s;
  }
  if (type == "convergence") {
    check_keys(j, "scenario", {"type", "K_list", "dt_list", "K_temporal", "t_end_temporal"});
    ConvergenceScenario s;
    if (j.contains("K_list")) {
      s.K_list.clear();
      for (const auto& v : j["K_list"]) s.K_list.push_back(v.get<int>());
    }
    if (j.contains("dt_list")) {
      s.dt_list.clear();
      for (const auto& v : j["dt_list"]) s.dt_list.push_back(v.get<double>());
    }
    s.K_temporal = static_cast<int>(get_num(j, "scenario", "K_temporal", s.K_temporal));
    s.t_end_temporal = get_num(j, "scenario", "t_end_temporal", s.t_end_temporal);
    return s;
  }
  fail("scenario.type", "unknown scenario '" + type + "'");
}

}  // namespace

RunConfig parse_config(const std::string& json_text, const std::string& origin) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError(origin + ": top level must be an object");
  check_keys(j, "config",
             {"params", "grid", "scheme", "kernel", "solver", "scenario", "output_dir", "seed",
              "jobs", "exact_csv", "dump_operators"});

  RunConfig cfg;
  if (j.contains("params")) {
    const auto& p = j["params"];
    if (!p.is_object()) fail("params", "expected an object");
    check_keys(p, "params", {"b", "d", "theta", "eta", "m", "mu", "alpha", "gamma", "v0"});
    cfg.params.b = get_num(p, "params", "b", cfg.params.b);
    cfg.params.d = get_num(p, "params", "d", cfg.params.d);
    cfg.params.theta = get_num(p, "params", "theta", cfg.params.theta);
    cfg.params.eta = get_num(p, "params", "eta", cfg.params.eta);
    cfg.params.m = get_num(p, "params", "m", cfg.params.m);
    cfg.params.mu = get_num(p, "params", "mu", cfg.params.mu);
    cfg.params.alpha = get_num(p, "params", "alpha", cfg.params.alpha);
    cfg.params.gamma = get_num(p, "params", "gamma", cfg.params.gamma);
    cfg.params.v0 = get_num(p, "params", "v0", cfg.params.v0);
  }
  try {
    validate_params(cfg.params);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("params: ") + e.what());
  }

  if (j.contains("grid")) {
    const auto& g = j["grid"];
    check_keys(g, "grid", {"K"});
    cfg.K = static_cast<int>(get_num(g, "grid", "K", cfg.K));
  }
  try {
    (void)Grid::from_alpha(cfg.K, cfg.params.alpha);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }

  if (j.contains("scheme")) {
    const std::string s = j["scheme"].get<std::string>();
    if (s == "flux_form" || s == "flux")
      cfg.scheme = Scheme::flux_form;
    else if (s == "paper_central" || s == "central")
      cfg.scheme = Scheme::paper_central;
    else
      fail("scheme", "must be flux_form or paper_central");
  }

  if (j.contains("kernel")) {
    const auto& k = j["kernel"];
    if (k.is_string()) {
      if (k.get<std::string>() != "uniform") fail("kernel", "unknown kernel name");
    } else if (k.is_object()) {
      check_keys(k, "kernel", {"matrix_csv"});
      cfg.kernel_csv = k.value("matrix_csv", std::string{});
      if (cfg.kernel_csv.empty()) fail("kernel.matrix_csv", "required");
    } else {
      fail("kernel", "expected 'uniform' or {matrix_csv: path}");
    }
  }

  if (j.contains("solver")) {
    const auto& s = j["solver"];
    check_keys(s, "solver",
               {"method", "dt", "rel_tol", "abs_tol", "dt_max", "t_end", "snapshot_stride",
                "negativity_clip_tol"});
    const std::string method = s.value("method", "rk45_adaptive");
    if (method == "rk45_adaptive" || method == "rk45")
      cfg.solver.method = SolverConfig::Method::rk45_adaptive;
    else if (method == "rk4_fixed" || method == "rk4")
      cfg.solver.method = SolverConfig::Method::rk4_fixed;
    else
      fail("solver.method", "must be rk45_adaptive or rk4_fixed");
    cfg.solver.dt = get_num(s, "solver", "dt", cfg.solver.dt);
    cfg.solver.rel_tol = get_num(s, "solver", "rel_tol", cfg.solver.rel_tol);
    cfg.solver.abs_tol = get_num(s, "solver", "abs_tol", cfg.solver.abs_tol);
    cfg.solver.dt_max = get_num(s, "solver", "dt_max", cfg.solver.dt_max);
    cfg.solver.t_end = get_num(s, "solver", "t_end", cfg.solver.t_end);
    cfg.solver.snapshot_stride =
        static_cast<int>(get_num(s, "solver", "snapshot_stride", cfg.solver.snapshot_stride));
    cfg.solver.negativity_clip_tol =
        get_num(s, "solver", "negativity_clip_tol", cfg.solver.negativity_clip_tol);
    try {
      cfg.solver.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("solver: ") + e.what());
    }
  }

  if (j.contains("scenario")) cfg.scenario = parse_scenario(j["scenario"], cfg);
  cfg.output_dir = j.value("output_dir", cfg.output_dir);
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("jobs")) cfg.jobs = j["jobs"].get<int>();
  if (j.contains("exact_csv")) cfg.exact_csv = j["exact_csv"].get<bool>();
  if (j.contains("dump_operators")) cfg.dump_operators = j["dump_operators"].get<bool>();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

namespace {

json initial_to_json(const InitialConditionSpec& ic) {
  static const char* names[] = {"no_persisters", "only_persisters", "uniform",
                                "gaussian",      "random",          "from_file"};
  json j{{"type", names[static_cast<int>(ic.type)]},
         {"mass", ic.mass},
         {"level", ic.level},
         {"center", ic.center},
         {"width", ic.width}};
  if (!ic.path.empty()) j["path"] = ic.path;
  if (ic.R0) j["R0"] = *ic.R0;
  return j;
}

json scenario_to_json(const Scenario& sc) {
  json j;
  if (const auto* s = std::get_if<SimulateScenario>(&sc)) {
    j["type"] = "simulate";
    j["initial"] = initial_to_json(s->initial);
  } else if (const auto* s = std::get_if<SpectrumScenario>(&sc)) {
    j["type"] = "spectrum";
    if (!s->R_values.empty()) j["R_values"] = s->R_values;
    if (s->bracket) j["bracket"] = {s->bracket->first, s->bracket->second};
    j["tol"] = s->tol;
  } else if (std::get_if<EquilibriaScenario>(&sc)) {
    j["type"] = "equilibria";
  } else if (const auto* s = std::get_if<SweepScenario>(&sc)) {
    j["type"] = "sweep";
    j["inner"] = s->inner;
    json grid;
    for (const auto& [name, vals] : s->grid) grid[name] = vals;
    j["grid"] = grid;
    if (s->spectrum.bracket) j["spectrum"]["bracket"] = {s->spectrum.bracket->first, s->spectrum.bracket->second};
    if (!s->spectrum.R_values.empty()) j["spectrum"]["R_values"] = s->spectrum.R_values;
    if (s->inner == "simulate") j["initial"] = initial_to_json(s->initial);
  } else if (const auto* s = std::get_if<ReproduceFig1Scenario>(&sc)) {
    j["type"] = "reproduce_fig1";
    j["t_end"] = s->t_end;
  } else if (const auto* s = std::get_if<ConvergenceScenario>(&sc)) {
    j["type"] = "convergence";
    j["K_list"] = s->K_list;
    j["dt_list"] = s->dt_list;
    j["K_temporal"] = s->K_temporal;
    j["t_end_temporal"] = s->t_end_temporal;
  }
  return j;
}

}  // namespace

std::string config_to_json(const RunConfig& c) {
  json j;
  j["params"] = {{"b", c.params.b},       {"d", c.params.d},     {"theta", c.params.theta},
                 {"eta", c.params.eta},   {"m", c.params.m},     {"mu", c.params.mu},
                 {"alpha", c.params.alpha}, {"gamma", c.params.gamma}, {"v0", c.params.v0}};
  j["grid"] = {{"K", c.K}};
  j["scheme"] = c.scheme == Scheme::flux_form ? "flux_form" : "paper_central";
  j["kernel"] = c.kernel_csv.empty() ? json("uniform") : json{{"matrix_csv", c.kernel_csv}};
  j["solver"] = {
      {"method",
       c.solver.method == SolverConfig::Method::rk45_adaptive ? "rk45_adaptive" : "rk4_fixed"},
      {"dt", c.solver.dt},
      {"rel_tol", c.solver.rel_tol},
      {"abs_tol", c.solver.abs_tol},
      {"dt_max", c.solver.dt_max},
      {"t_end", c.solver.t_end},
      {"snapshot_stride", c.solver.snapshot_stride},
      {"negativity_clip_tol", c.solver.negativity_clip_tol}};
  j["scenario"] = scenario_to_json(c.scenario);
  j["output_dir"] = c.output_dir;
  j["seed"] = c.seed;
  j["jobs"] = c.jobs;
  j["exact_csv"] = c.exact_csv;
  j["dump_operators"] = c.dump_operators;
  return j.dump(2);
}

RedistributionKernel load_kernel(const RunConfig& config) {
  if (config.kernel_csv.empty()) return RedistributionKernel::uniform();
  const MatrixXd P = read_csv_matrix(config.kernel_csv);
  try {
    return RedistributionKernel::matrix(P);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("kernel " + config.kernel_csv + ": " + e.what());
  }
}

AssemblyContext make_context(const RunConfig& config) {
  return AssemblyContext::make(config.params, config.K, config.scheme, load_kernel(config));
}

}  // namespace persisters
