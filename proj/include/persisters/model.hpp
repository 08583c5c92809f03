#pragma once

#include <Eigen/Dense>

#include <string>

namespace persisters {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Scalar rates and structural parameters of the structured chemostat model.
/// All symbols entering the equations live here; defaults are the reference
/// parameter set used throughout the test suites.
struct ModelParams {
  double b = 0.6;     ///< growth-rate coefficient per unit resource (> 0)
  double d = 0.03;    ///< death rate of active cells (> 0)
  double theta = 1.0; ///< resource inflow rate (> 0)
  double eta = 0.3;   ///< resource loss rate (> 0)
  double m = 1e-2;    ///< phenotype diffusion coefficient (> 0)
  double mu = 0.4;    ///< probability of phenotype redistribution at birth, in [0,1]
  double alpha = 0.8; ///< persister cutoff coordinate, in (0,1)
  double gamma = 0.6; ///< homeostatic point of the drift field, in (0,1)
  double v0 = 1.0;    ///< drift amplitude (any sign)

  /// Resource level d/b at which net reproduction of active cells vanishes.
  double growth_threshold() const { return d / b; }
  /// Resource level theta/eta attained when the population is extinct.
  double washout_resource() const { return theta / eta; }
};

/// Returns `p` unchanged iff every constraint holds; otherwise throws
/// std::invalid_argument naming the first violated constraint
/// (e.g. "mu out of [0,1]", "m must be positive").
ModelParams validate_params(const ModelParams& p);

/// Uniform midpoint grid over the phenotype interval (0,1).
///
/// Compartment i (0-based) covers (i/K, (i+1)/K) with midpoint (i+1/2)/K and
/// quadrature weight 1/K. The first `cutoff()` compartments hold active
/// cells; the cutoff coordinate alpha = cutoff/K falls on a compartment
/// boundary, so no compartment straddles it and the active mask is
/// unambiguous.
class Grid {
 public:
  /// Builds a grid whose cutoff index is alpha*K. Rejects (K, alpha) pairs
  /// where alpha*K is not an integer within 1e-9 ("alpha*K not integral").
  static Grid from_alpha(int K, double alpha);

  /// Builds a grid with an explicit cutoff index, 1 <= k <= K. The k == K
  /// case (every compartment active) is admitted for scalar reductions that
  /// have no persister region.
  static Grid with_cutoff(int K, int k);

  int size() const { return K_; }
  int cutoff() const { return k_; }
  double weight() const { return 1.0 / K_; }
  double alpha() const { return static_cast<double>(k_) / K_; }
  double midpoint(int i) const { return (i + 0.5) / K_; }
  const VectorXd& midpoints() const { return midpoints_; }
  bool active(int i) const { return i < k_; }
  /// Indicator vector of the active compartments (1 for i < cutoff, else 0).
  const VectorXd& chi() const { return chi_; }

  /// Discrete integral of n over the active region: (1/K) * sum_{i<k} n_i.
  double active_mass(const VectorXd& n) const;
  /// Discrete integral of n over (0,1): (1/K) * sum_i n_i.
  double total_mass(const VectorXd& n) const;

 private:
  Grid(int K, int k);
  int K_;
  int k_;
  VectorXd midpoints_;
  VectorXd chi_;
};

/// Phenotype drift field v on [0,1] with v(0) = v(1) = 0.
///
/// Either the cubic v(x) = v0 * x * (x - gamma) * (x - 1), or a field
/// tabulated at the grid midpoints and both endpoints (piecewise linear in
/// between). Tabulated endpoint values must vanish within 1e-12.
class VelocityField {
 public:
  static VelocityField cubic(double v0, double gamma);

  /// `values` holds v(0), v(x_1), ..., v(x_K), v(1) (size K + 2).
  static VelocityField tabulated(const Grid& grid, VectorXd values);

  /// v(x) for x in [0,1]; throws std::domain_error outside.
  double operator()(double x) const;

  /// Evaluation without the domain guard, used for the ghost points of the
  /// central difference scheme. The cubic is simply evaluated as a
  /// polynomial; tabulated fields are extended by odd reflection through
  /// the nearest endpoint (v(-x) = -v(x), v(2-x) = -v(x)).
  double eval_extended(double x) const;

  bool is_cubic() const { return is_cubic_; }

 private:
  VelocityField() = default;
  double eval_interp(double x) const;
  bool is_cubic_ = true;
  double v0_ = 0.0;
  double gamma_ = 0.5;
  VectorXd nodes_;   // tabulated form: 0, x_1, ..., x_K, 1
  VectorXd values_;  // tabulated form: matching values
};

/// v(x) with the [0,1] domain check.
double eval_velocity(const VelocityField& v, double x);

/// max_{[0,1]} |v| by dense sampling (>= 10^4 points) refined by local
/// golden-section maximization around the best sample.
double velocity_sup_norm(const VelocityField& v, int samples = 20001);

/// Quasi-contraction growth constant omega = ||v||_inf^2 / (2 m).
double quasi_contraction_bound(const ModelParams& p, const VelocityField& v);

/// Offspring phenotype redistribution kernel p(x;y).
///
/// Uniform (p == 1, the default in all bundled scenarios) or a K x K matrix
/// P with P(i,j) ~ p(x_i; x_j), column j being the source phenotype. Matrix
/// kernels are validated entrywise nonnegative with discrete column
/// normalization (1/K) sum_i P(i,j) = 1 within 1e-10, then rescaled so the
/// normalization holds exactly in the quadrature sense (this is what makes
/// the discrete adjoint identities in the operator module exact).
class RedistributionKernel {
 public:
  static RedistributionKernel uniform();
  static RedistributionKernel matrix(MatrixXd P);

  bool is_uniform() const { return is_uniform_; }
  /// Matrix form only.
  const MatrixXd& values() const;
  /// Dense K x K table of p(x_i; x_j); for the uniform kernel a matrix of
  /// ones. Throws if a matrix kernel was built for a different K.
  MatrixXd materialize(int K) const;
  /// Discrete squared L2(Omega x Omega) norm C_p = (1/K^2) sum_{ij} P_ij^2.
  double l2_norm_sq(int K) const;

 private:
  RedistributionKernel() = default;
  bool is_uniform_ = true;
  MatrixXd P_;
};

}  // namespace persisters
