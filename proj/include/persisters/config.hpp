#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "persisters/simulator.hpp"

namespace persisters {

/// Initial population profile plus the initial resource level. Profiles are
/// scaled so the discrete total biomass equals `mass` (except `uniform`,
/// which fixes the level directly, and `from_file`, which is taken as-is).
struct InitialConditionSpec {
  enum class Type { no_persisters, only_persisters, uniform, gaussian, random, from_file };
  Type type = Type::no_persisters;
  double mass = 1.0;
  double level = 1.0;    // uniform
  double center = 0.5;   // gaussian
  double width = 0.1;    // gaussian
  std::string path;      // from_file: one density value per line (or csv row)
  std::optional<double> R0;  // default: theta/eta
};

VectorXd build_initial_profile(const InitialConditionSpec& spec, const Grid& grid,
                               std::uint64_t seed);

struct SimulateScenario {
  InitialConditionSpec initial;
};

struct SpectrumScenario {
  std::vector<double> R_values;                    // scan, may be empty
  std::optional<std::pair<double, double>> bracket;  // threshold root
  double tol = 1e-8;
};

struct EquilibriaScenario {};

struct SweepScenario {
  // parameter name -> values; cartesian product over all names
  std::map<std::string, std::vector<double>> grid;
  std::string inner = "spectrum";  // spectrum | equilibria | simulate
  SpectrumScenario spectrum;       // settings for the inner spectrum runs
  InitialConditionSpec initial;    // settings for inner simulate runs
};

struct ReproduceFig1Scenario {
  double t_end = 200.0;
};

struct ConvergenceScenario {
  std::vector<int> K_list = {100, 200, 400};
  std::vector<double> dt_list = {1e-2, 5e-3, 2.5e-3};
  int K_temporal = 50;  // grid used for the time-step ladder
  double t_end_temporal = 10.0;
};

using Scenario = std::variant<SimulateScenario, SpectrumScenario, EquilibriaScenario,
                              SweepScenario, ReproduceFig1Scenario, ConvergenceScenario>;

struct RunConfig {
  ModelParams params;
  int K = 200;
  Scheme scheme = Scheme::flux_form;
  std::string kernel_csv;  // empty: uniform kernel
  SolverConfig solver;
  Scenario scenario = SimulateScenario{};
  std::string output_dir = "runs/run";
  std::uint64_t seed = 0;
  int jobs = 0;  // 0: logical CPU count
  bool exact_csv = false;
  bool dump_operators = false;

  RunConfig() {
    solver.t_end = 100.0;
    solver.snapshot_stride = 0;
  }
};

/// Parses and validates a JSON configuration file; unknown keys are
/// rejected, missing ones filled with the defaults above. Throws ConfigError
/// with position information on parse errors and the offending field name on
/// validation errors.
RunConfig load_config(const std::string& path);

/// Same, from an already-parsed JSON string (used by tests and by sweep
/// sub-run manifests).
RunConfig parse_config(const std::string& json_text, const std::string& origin = "<string>");

/// Resolved configuration echoed back as JSON (the manifest embeds this).
std::string config_to_json(const RunConfig& config);

RedistributionKernel load_kernel(const RunConfig& config);
AssemblyContext make_context(const RunConfig& config);

}  // namespace persisters
