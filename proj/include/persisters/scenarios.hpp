#pragma once

#include <filesystem>
#include <functional>

#include "persisters/config.hpp"
#include "persisters/equilibrium.hpp"

namespace persisters {

inline constexpr const char* kArtifactVersion = "0.1.0";

/// Runs the configured scenario, writing manifest.json plus the scenario's
/// CSV/JSON/image artifacts into config.output_dir. Returns the directory.
std::filesystem::path run_scenario(const RunConfig& config);

struct ConvergenceTable {
  struct SpatialRow {
    int K = 0;
    double s_threshold = 0.0;    ///< spectral bound at R = d/b (zero in flux form)
    double N_alpha_hat = 0.0;
    double profile_error = 0.0;  ///< max-norm gap to the next finer level (0 on the finest)
  };
  struct TemporalRow {
    double dt = 0.0;
    double final_state_error = 0.0;  ///< gap to the next finer step (0 on the finest)
  };
  std::vector<SpatialRow> spatial;
  std::vector<TemporalRow> temporal;
  std::vector<double> spatial_orders;   ///< log2 ratios of successive profile errors
  std::vector<double> temporal_orders;
  double spatial_order = 0.0;   ///< finest available ratio
  double temporal_order = 0.0;
};

/// Richardson self-convergence study: positive-equilibrium profiles over a
/// doubling K ladder and rk4 final states over a halving dt ladder. Rejects
/// ladders that do not double/halve or have fewer than 3 entries.
ConvergenceTable convergence_study(const RunConfig& config);

/// Runs fn(0..count-1) on a small worker pool; jobs <= 0 means the logical
/// CPU count. The first exception thrown by a worker is rethrown.
void parallel_for(int jobs, int count, const std::function<void(int)>& fn);

}  // namespace persisters
