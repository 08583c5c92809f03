#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "persisters/operators.hpp"

namespace persisters {

/// Population vector, resource amount and time.
struct SimState {
  VectorXd n;
  double R = 0.0;
  double t = 0.0;
};

struct SolverConfig {
  enum class Method { rk4_fixed, rk45_adaptive };
  Method method = Method::rk45_adaptive;
  double dt = 1e-3;       ///< rk4_fixed step size
  double rel_tol = 1e-6;  ///< rk45 relative tolerance
  double abs_tol = 1e-9;  ///< rk45 absolute tolerance
  double dt_max = 0.0;    ///< rk45 step cap; 0 = unlimited
  double t_end = 100.0;
  /// Accepted steps between stored full-state snapshots; 0 disables
  /// snapshots (the final state is always kept).
  int snapshot_stride = 0;
  /// Negative density entries with magnitude below this threshold (relative
  /// to ||n||_inf) are clipped to zero and counted; anything larger aborts
  /// the run.
  double negativity_clip_tol = 1e-12;
  /// Hold R constant and integrate the population equation alone; the map
  /// n0 -> n(t) is then linear.
  bool freeze_resource = false;

  void validate() const;
};

/// Observable series sampled at every accepted step, optional full-state
/// snapshots, and integration metadata.
struct Trajectory {
  std::vector<double> times;
  std::vector<double> N_series;        ///< total biomass (1/K) sum n_i
  std::vector<double> N_alpha_series;  ///< active biomass (1/K) sum_{i<k} n_i
  std::vector<double> R_series;
  /// max of ||dn/dt||_inf / max(||n||_inf, 1) and |dR/dt| / max(R, 1)
  /// at each sample; drives steady-state detection.
  std::vector<double> deriv_norm_series;
  /// |dN/dt - (b R - d) N_alpha| at interior samples (central differences);
  /// empty for runs with fewer than 3 samples.
  std::vector<double> mass_balance_residuals;
  std::vector<std::pair<double, VectorXd>> snapshots;
  SimState final_state;

  long clip_count = 0;
  long entry_samples = 0;  ///< total density entries examined by the clip check
  long steps_accepted = 0;
  long steps_rejected = 0;
  double max_undershoot = 0.0;  ///< largest |negative entry| seen before clipping

  std::size_t samples() const { return times.size(); }
};

/// Coupled right-hand side: dn = A n + b R (N n),
/// dR = theta - eta R - b R N_alpha(n).
std::pair<VectorXd, double> rhs(const SimState& state, const OperatorMatrix& A,
                                const OperatorMatrix& N, const ModelParams& params);

/// Integrates the coupled system to config.t_end, sampling observables at
/// every accepted step. Throws NumericalError on blowup (NaN/Inf) or on
/// negative densities beyond the clip threshold.
Trajectory integrate(SimState initial, const SolverConfig& config, const OperatorMatrix& A,
                     const OperatorMatrix& N, const ModelParams& params);

/// Per-sample residuals of the biomass identity dN/dt = (b R - d) N_alpha,
/// recomputed from the stored series by central differences.
std::vector<double> mass_balance_residual_series(const Trajectory& traj,
                                                 const ModelParams& params);

/// Max of the above over interior samples; requires >= 3 samples.
double mass_balance_residual(const Trajectory& traj, const ModelParams& params);

/// True iff every resource sample lies in [-tol, max(R0, theta/eta) + tol]
/// with tol = 1e-8 * max(R0, theta/eta).
bool resource_bound_check(const Trajectory& traj, double R0, const ModelParams& params);

/// Independent cross-check of `integrate` through the variation-of-constants
/// form: iterates n(t) = e^{A t} n0 + int_0^t e^{A(t-s)} b R(s) N n(s) ds on
/// a uniform grid (matrix exponential, composite trapezoid, linearly
/// interpolated R) until successive iterates differ by less than `tol` in
/// max norm. The resource path comes from a previous `integrate` run.
VectorXd picard_mild_oracle(const SimState& initial, const Trajectory& resource_path,
                            const OperatorMatrix& A, const OperatorMatrix& N,
                            const ModelParams& params, double t_end, int max_iterations = 100,
                            int grid_points = 1024, double tol = 1e-8);

/// Returns the final state when, over the trailing time window, every sampled
/// relative derivative norm is below tol; otherwise nullopt. The window must
/// not exceed the sampled span.
std::optional<SimState> steady_state_detect(const Trajectory& traj, double window, double tol);

}  // namespace persisters
