#include "persisters/simulator.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "persisters/errors.hpp"

namespace persisters {

void SolverConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
    throw std::invalid_argument("solver tolerances must be positive");
  if (dt_max < 0.0) throw std::invalid_argument("dt_max must be nonnegative");
  if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
  if (snapshot_stride < 0) throw std::invalid_argument("snapshot_stride must be nonnegative");
  if (negativity_clip_tol < 0.0)
    throw std::invalid_argument("negativity_clip_tol must be nonnegative");
}

std::pair<VectorXd, double> rhs(const SimState& state, const OperatorMatrix& A,
                                const OperatorMatrix& N, const ModelParams& params) {
  const Grid& grid = A.grid();
  if (state.n.size() != grid.size() || N.grid().size() != grid.size())
    throw std::invalid_argument("state/operator dimension mismatch");
  const double N_alpha = grid.active_mass(state.n);
  VectorXd dn = A.apply(state.n) + (params.b * state.R) * N.apply(state.n);
  const double dR = params.theta - params.eta * state.R - params.b * state.R * N_alpha;
  return {std::move(dn), dR};
}

namespace {

struct Deriv {
  VectorXd n;
  double R;
};

class System {
 public:
  System(const OperatorMatrix& A, const OperatorMatrix& N, const ModelParams& p, bool freeze)
      : A_(A), N_(N), p_(p), freeze_(freeze), grid_(A.grid()) {}

  Deriv eval(const VectorXd& n, double R) const {
    const double N_alpha = grid_.active_mass(n);
    Deriv d;
    d.n = A_.apply(n) + (p_.b * R) * N_.apply(n);
    d.R = freeze_ ? 0.0 : p_.theta - p_.eta * R - p_.b * R * N_alpha;
    return d;
  }

 private:
  const OperatorMatrix& A_;
  const OperatorMatrix& N_;
  const ModelParams& p_;
  bool freeze_;
  const Grid& grid_;
};

class Recorder {
 public:
  Recorder(Trajectory& traj, const Grid& grid, const SolverConfig& cfg)
      : traj_(traj), grid_(grid), cfg_(cfg) {}

  void record(double t, const VectorXd& n, double R, const Deriv& d) {
    traj_.times.push_back(t);
    traj_.N_series.push_back(grid_.total_mass(n));
    traj_.N_alpha_series.push_back(grid_.active_mass(n));
    traj_.R_series.push_back(R);
    const double nscale = std::max(n.lpNorm<Eigen::Infinity>(), 1.0);
    const double rscale = std::max(std::abs(R), 1.0);
    traj_.deriv_norm_series.push_back(
        std::max(d.n.lpNorm<Eigen::Infinity>() / nscale, std::abs(d.R) / rscale));
    ++count_;
    if (cfg_.snapshot_stride > 0 && (count_ - 1) % cfg_.snapshot_stride == 0)
      traj_.snapshots.emplace_back(t, n);
  }

  void record_final(double t, const VectorXd& n, double R) {
    traj_.final_state = SimState{n, R, t};
    if (cfg_.snapshot_stride > 0 &&
        (traj_.snapshots.empty() || traj_.snapshots.back().first < t))
      traj_.snapshots.emplace_back(t, n);
  }

 private:
  Trajectory& traj_;
  const Grid& grid_;
  const SolverConfig& cfg_;
  long count_ = 0;
};

void check_finite(const VectorXd& n, double R, double t) {
  if (!n.allFinite() || !std::isfinite(R))
    throw NumericalError("integration blew up (NaN/Inf) at t = " + std::to_string(t));
}

// Clip tiny negative entries, abort on anything beyond tolerance.
void apply_negativity_policy(VectorXd& n, double t, const SolverConfig& cfg, Trajectory& traj) {
  const double scale = n.cwiseAbs().maxCoeff();
  const double thresh = cfg.negativity_clip_tol * scale;
  traj.entry_samples += n.size();
  for (Eigen::Index i = 0; i < n.size(); ++i) {
    if (n[i] < 0.0) {
      const double mag = -n[i];
      traj.max_undershoot = std::max(traj.max_undershoot, mag);
      if (mag > thresh)
        throw NumericalError("negative density " + std::to_string(n[i]) + " in compartment " +
                             std::to_string(i) + " at t = " + std::to_string(t) +
                             " exceeds the clip tolerance");
      n[i] = 0.0;
      ++traj.clip_count;
    }
  }
}

// Dormand-Prince 5(4) pair, FSAL.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

double error_norm(const VectorXd& en, double eR, const VectorXd& n0, const VectorXd& n1,
                  double R0, double R1, double atol, double rtol) {
  double acc = 0.0;
  const auto K = en.size();
  for (Eigen::Index i = 0; i < K; ++i) {
    const double sc = atol + rtol * std::max(std::abs(n0[i]), std::abs(n1[i]));
    const double q = en[i] / sc;
    acc += q * q;
  }
  const double scR = atol + rtol * std::max(std::abs(R0), std::abs(R1));
  const double qR = eR / scR;
  acc += qR * qR;
  return std::sqrt(acc / (K + 1));
}

void integrate_rk45(SimState state, const SolverConfig& cfg, const System& sys, Recorder& rec,
                    Trajectory& traj) {
  const double t_end = cfg.t_end;
  double t = state.t;
  VectorXd n = state.n;
  double R = state.R;

  Deriv k1 = sys.eval(n, R);
  rec.record(t, n, R, k1);

  // initial step guess from the derivative scale
  double dscale = std::max(k1.n.lpNorm<Eigen::Infinity>(), std::abs(k1.R));
  double yscale = std::max(n.lpNorm<Eigen::Infinity>(), std::abs(R));
  double h = 0.01 * (yscale + cfg.abs_tol) / (dscale + 1e-30);
  h = std::clamp(h, 1e-12, t_end - t);
  if (cfg.dt_max > 0.0) h = std::min(h, cfg.dt_max);

  double err_prev = 1.0;
  const int max_steps = 100'000'000;
  for (int step = 0; step < max_steps && t < t_end; ++step) {
    h = std::min(h, t_end - t);

    const Deriv k2 = sys.eval(n + h * a21 * k1.n, R + h * a21 * k1.R);
    const Deriv k3 = sys.eval(n + h * (a31 * k1.n + a32 * k2.n), R + h * (a31 * k1.R + a32 * k2.R));
    const Deriv k4 = sys.eval(n + h * (a41 * k1.n + a42 * k2.n + a43 * k3.n),
                              R + h * (a41 * k1.R + a42 * k2.R + a43 * k3.R));
    const Deriv k5 = sys.eval(n + h * (a51 * k1.n + a52 * k2.n + a53 * k3.n + a54 * k4.n),
                              R + h * (a51 * k1.R + a52 * k2.R + a53 * k3.R + a54 * k4.R));
    const Deriv k6 =
        sys.eval(n + h * (a61 * k1.n + a62 * k2.n + a63 * k3.n + a64 * k4.n + a65 * k5.n),
                 R + h * (a61 * k1.R + a62 * k2.R + a63 * k3.R + a64 * k4.R + a65 * k5.R));

    VectorXd n_new = n + h * (b1 * k1.n + b3 * k3.n + b4 * k4.n + b5 * k5.n + b6 * k6.n);
    const double R_new = R + h * (b1 * k1.R + b3 * k3.R + b4 * k4.R + b5 * k5.R + b6 * k6.R);
    const Deriv k7 = sys.eval(n_new, R_new);

    const VectorXd en =
        h * (e1 * k1.n + e3 * k3.n + e4 * k4.n + e5 * k5.n + e6 * k6.n + e7 * k7.n);
    const double eR = h * (e1 * k1.R + e3 * k3.R + e4 * k4.R + e5 * k5.R + e6 * k6.R + e7 * k7.R);

    double err = error_norm(en, eR, n, n_new, R, R_new, cfg.abs_tol, cfg.rel_tol);
    if (!std::isfinite(err)) err = 1e10;

    if (err <= 1.0) {
      t += h;
      n = std::move(n_new);
      R = R_new;
      check_finite(n, R, t);
      apply_negativity_policy(n, t, cfg, traj);
      k1 = k7;  // FSAL (clipping perturbs it below rounding relevance)
      rec.record(t, n, R, k1);
      ++traj.steps_accepted;
      // PI controller (Hairer dopri5 constants)
      double fac = 0.9 * std::pow(err + 1e-30, -0.17) * std::pow(err_prev + 1e-30, 0.04);
      fac = std::clamp(fac, 0.2, 10.0);
      h *= fac;
      err_prev = std::max(err, 1e-4);
    } else {
      ++traj.steps_rejected;
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
    }
    if (cfg.dt_max > 0.0) h = std::min(h, cfg.dt_max);
    if (h < 1e-14 * std::max(1.0, t))
      throw NumericalError("step size underflow at t = " + std::to_string(t));
  }
  if (t < t_end) throw NumericalError("step budget exhausted before t_end");
  rec.record_final(t, n, R);
}

void integrate_rk4(SimState state, const SolverConfig& cfg, const System& sys, Recorder& rec,
                   Trajectory& traj) {
  const double t_end = cfg.t_end;
  double t = state.t;
  VectorXd n = state.n;
  double R = state.R;

  Deriv k1 = sys.eval(n, R);
  rec.record(t, n, R, k1);

  const long nsteps = static_cast<long>(std::ceil((t_end - t) / cfg.dt - 1e-9));
  for (long step = 0; step < nsteps; ++step) {
    const double h = std::min(cfg.dt, t_end - t);
    const Deriv k2 = sys.eval(n + 0.5 * h * k1.n, R + 0.5 * h * k1.R);
    const Deriv k3 = sys.eval(n + 0.5 * h * k2.n, R + 0.5 * h * k2.R);
    const Deriv k4 = sys.eval(n + h * k3.n, R + h * k3.R);
    n += (h / 6.0) * (k1.n + 2.0 * k2.n + 2.0 * k3.n + k4.n);
    R += (h / 6.0) * (k1.R + 2.0 * k2.R + 2.0 * k3.R + k4.R);
    t = (step + 1 == nsteps) ? t_end : t + h;
    check_finite(n, R, t);
    apply_negativity_policy(n, t, cfg, traj);
    ++traj.steps_accepted;
    k1 = sys.eval(n, R);
    rec.record(t, n, R, k1);
  }
  rec.record_final(t, n, R);
}

}  // namespace

Trajectory integrate(SimState initial, const SolverConfig& config, const OperatorMatrix& A,
                     const OperatorMatrix& N, const ModelParams& params) {
  config.validate();
  if (initial.n.size() != A.grid().size())
    throw std::invalid_argument("initial state size does not match the grid");
  check_finite(initial.n, initial.R, initial.t);

  Trajectory traj;
  Recorder rec(traj, A.grid(), config);
  System sys(A, N, params, config.freeze_resource);

  if (config.method == SolverConfig::Method::rk4_fixed)
    integrate_rk4(std::move(initial), config, sys, rec, traj);
  else
    integrate_rk45(std::move(initial), config, sys, rec, traj);

  traj.mass_balance_residuals = mass_balance_residual_series(traj, params);
  return traj;
}

std::vector<double> mass_balance_residual_series(const Trajectory& traj,
                                                 const ModelParams& params) {
  std::vector<double> out;
  const std::size_t S = traj.samples();
  if (S < 3) return out;
  out.reserve(S - 2);
  for (std::size_t j = 1; j + 1 < S; ++j) {
    const double dNdt =
        (traj.N_series[j + 1] - traj.N_series[j - 1]) / (traj.times[j + 1] - traj.times[j - 1]);
    const double expected =
        (params.b * traj.R_series[j] - params.d) * traj.N_alpha_series[j];
    out.push_back(std::abs(dNdt - expected));
  }
  return out;
}

double mass_balance_residual(const Trajectory& traj, const ModelParams& params) {
  if (traj.samples() < 3)
    throw std::invalid_argument("mass balance residual needs at least 3 samples");
  const auto series = mass_balance_residual_series(traj, params);
  return *std::max_element(series.begin(), series.end());
}

bool resource_bound_check(const Trajectory& traj, double R0, const ModelParams& params) {
  const double bound = std::max(R0, params.washout_resource());
  const double tol = 1e-8 * bound;
  for (double R : traj.R_series)
    if (R < -tol || R > bound + tol) return false;
  return true;
}

VectorXd picard_mild_oracle(const SimState& initial, const Trajectory& resource_path,
                            const OperatorMatrix& A, const OperatorMatrix& N,
                            const ModelParams& params, double t_end, int max_iterations,
                            int grid_points, double tol) {
  if (grid_points < 2) throw std::invalid_argument("picard grid needs at least 2 points");
  if (resource_path.times.empty() || resource_path.times.front() > 1e-12 ||
      resource_path.times.back() < t_end - 1e-12)
    throw std::invalid_argument("resource path does not cover [0, t_end]");

  const int M = grid_points;
  const double dt = t_end / M;
  const int K = A.grid().size();

  // resource level at the uniform grid times, linear interpolation
  VectorXd Rg(M + 1);
  {
    std::size_t cur = 0;
    for (int j = 0; j <= M; ++j) {
      const double t = j * dt;
      while (cur + 1 < resource_path.times.size() && resource_path.times[cur + 1] < t) ++cur;
      if (cur + 1 >= resource_path.times.size()) {
        Rg[j] = resource_path.R_series.back();
      } else {
        const double t0 = resource_path.times[cur], t1 = resource_path.times[cur + 1];
        const double w = (t1 > t0) ? (t - t0) / (t1 - t0) : 0.0;
        Rg[j] = (1.0 - w) * resource_path.R_series[cur] + w * resource_path.R_series[cur + 1];
      }
    }
  }

  const MatrixXd E = (A.entries() * dt).exp();

  // homogeneous part u_j = E^j n0, also the initial guess
  MatrixXd path(K, M + 1);
  path.col(0) = initial.n;
  for (int j = 1; j <= M; ++j) path.col(j) = E * path.col(j - 1);
  const MatrixXd hom = path;

  MatrixXd g(K, M + 1);
  double last_diff = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iterations; ++it) {
    for (int j = 0; j <= M; ++j)
      g.col(j) = (params.b * Rg[j]) * N.apply(path.col(j));

    // trapezoid convolution S_{j+1} = E (S_j + g_j/2) + g_{j+1}/2
    MatrixXd next(K, M + 1);
    next.col(0) = initial.n;
    VectorXd S = VectorXd::Zero(K);
    for (int j = 0; j < M; ++j) {
      S = E * (S + 0.5 * g.col(j)) + 0.5 * g.col(j + 1);
      next.col(j + 1) = hom.col(j + 1) + dt * S;
    }

    last_diff = (next - path).cwiseAbs().maxCoeff();
    path.swap(next);
    if (last_diff < tol) return path.col(M);
  }
  throw NumericalError("picard iteration did not converge within the cap (last increment " +
                       std::to_string(last_diff) + ")");
}

std::optional<SimState> steady_state_detect(const Trajectory& traj, double window, double tol) {
  if (traj.times.empty()) throw std::invalid_argument("empty trajectory");
  const double t_end = traj.times.back();
  const double span = t_end - traj.times.front();
  if (window > span + 1e-12)
    throw std::invalid_argument("detection window exceeds the sampled span");
  const double t_from = t_end - window;
  for (std::size_t j = 0; j < traj.samples(); ++j) {
    if (traj.times[j] < t_from) continue;
    if (traj.deriv_norm_series[j] >= tol) return std::nullopt;
  }
  return traj.final_state;
}

}  // namespace persisters
