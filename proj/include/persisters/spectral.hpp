#pragma once

#include <vector>

#include "persisters/operators.hpp"

namespace persisters {

enum class SpectralMethod { dense_eig, power_iteration };

/// Principal eigendata of a generator-kind matrix L_R.
///
/// phi is the right (Perron) eigenvector normalized to mean one,
/// (1/K) sum phi_i = 1; psi is the left eigenvector normalized against phi
/// in the quadrature pairing, (1/K) sum phi_i psi_i = 1.
struct SpectralReport {
  double R = 0.0;
  double s = 0.0;  ///< spectral bound: largest real part over the spectrum
  VectorXd phi;
  VectorXd psi;
  double spectral_gap = 0.0;  ///< s minus the next-largest real part
  SpectralMethod method = SpectralMethod::dense_eig;
  int iterations = 0;      ///< power iteration count (0 for dense)
  bool fallback = false;   ///< power iteration hit its cap and fell back to dense
  double residual = 0.0;          ///< ||L phi - s phi||_inf
  double adjoint_residual = 0.0;  ///< ||L^T psi - s psi||_inf
  double min_phi = 0.0;
  double min_psi = 0.0;
};

struct PowerIterationOptions {
  int max_iterations = 200'000;
  /// Collatz-Wielandt bracket width (relative) at which to stop.
  double ratio_tol = 1e-9;
};

/// Computes the spectral bound and both principal eigenvectors.
///
/// dense_eig runs the QR algorithm on L and L^T and polishes both eigenpairs
/// by shifted inverse iteration. power_iteration iterates on exp(tau L) with
/// tau = 1/||L||_inf (which makes the rightmost eigenvalue dominant in
/// modulus) and recovers s = log(dominant eigenvalue)/tau; if the
/// Collatz-Wielandt bracket has not collapsed within the cap it falls back
/// to dense_eig and flags it. Throws NumericalError if the eigen-residual
/// exceeds 1e-8 * ||L||_inf * ||phi||_inf.
SpectralReport spectral_bound(const OperatorMatrix& L,
                              SpectralMethod method = SpectralMethod::dense_eig,
                              const PowerIterationOptions& options = {});

/// Eigenvalue-only fast path (no eigenvectors); used by scans and root
/// finding.
double spectral_bound_value(const OperatorMatrix& L);

/// Spectral reports along a strictly increasing list of resource levels.
/// Strict monotonicity of s over the list is the caller's assertion.
std::vector<SpectralReport> monotonicity_scan(const AssemblyContext& ctx,
                                              const std::vector<double>& R_values);

/// Root of R -> s(L_R) inside [R_lo, R_hi]: bisection to bracket width 1e-8
/// followed by one secant polish. Requires s(L_{R_lo}) < 0 < s(L_{R_hi}).
double threshold_root(const AssemblyContext& ctx, double R_lo, double R_hi, double tol = 1e-8);

/// ||L^T psi - s psi||_inf for a report produced from L.
double adjoint_eigen_check(const SpectralReport& report, const OperatorMatrix& L);

/// Eigenvalue-perturbation pairing b <N phi, psi> / <phi, psi>; equals the
/// derivative of s with respect to R.
double pairing_derivative(const SpectralReport& report, const OperatorMatrix& N,
                          const ModelParams& params);

}  // namespace persisters
