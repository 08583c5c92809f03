#include "persisters/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "persisters/errors.hpp"

namespace persisters {

namespace {

// A couple of shifted inverse-iteration sweeps to polish an eigenvector; the
// shift is offset by a hair so the factorization stays usable when s is an
// exact eigenvalue.
VectorXd polish_eigenvector(const MatrixXd& M, double s, VectorXd x) {
  const auto K = M.rows();
  const double shift = s + 1e-12 * std::max(1.0, M.cwiseAbs().rowwise().sum().maxCoeff());
  const MatrixXd shifted = M - shift * MatrixXd::Identity(K, K);
  Eigen::PartialPivLU<MatrixXd> lu(shifted);
  for (int it = 0; it < 2; ++it) {
    VectorXd y = lu.solve(x);
    if (!y.allFinite()) break;
    const double norm = y.cwiseAbs().maxCoeff();
    if (!(norm > 0.0) || !std::isfinite(norm)) break;
    x = y / norm;
  }
  return x;
}

VectorXd principal_vector_dense(const MatrixXd& M, double& s_out, double& gap_out) {
  Eigen::EigenSolver<MatrixXd> es(M, true);
  if (es.info() != Eigen::Success) throw NumericalError("dense eigensolver failed");
  const auto& vals = es.eigenvalues();
  Eigen::Index idx = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < vals.size(); ++i)
    if (vals[i].real() > best) {
      best = vals[i].real();
      idx = i;
    }
  double second = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < vals.size(); ++i)
    if (i != idx) second = std::max(second, vals[i].real());
  s_out = best;
  gap_out = vals.size() > 1 ? best - second : std::numeric_limits<double>::infinity();

  // strip the (numerically tiny) imaginary phase from the principal column
  Eigen::VectorXcd col = es.eigenvectors().col(idx);
  Eigen::Index imax = 0;
  col.cwiseAbs().maxCoeff(&imax);
  col /= col[imax];
  return col.real();
}

void orient_positive(VectorXd& v) {
  if (v.sum() < 0.0) v = -v;
}

}  // namespace

double spectral_bound_value(const OperatorMatrix& L) {
  Eigen::EigenSolver<MatrixXd> es(L.entries(), false);
  if (es.info() != Eigen::Success) throw NumericalError("dense eigensolver failed");
  return es.eigenvalues().real().maxCoeff();
}

namespace {

SpectralReport spectral_bound_dense(const OperatorMatrix& L) {
  SpectralReport rep;
  rep.R = L.resource_level();
  rep.method = SpectralMethod::dense_eig;

  double s = 0.0, gap = 0.0;
  VectorXd phi = principal_vector_dense(L.entries(), s, gap);
  const MatrixXd Lt = L.entries().transpose();
  double s_adj = 0.0, gap_adj = 0.0;
  VectorXd psi = principal_vector_dense(Lt, s_adj, gap_adj);

  phi = polish_eigenvector(L.entries(), s, std::move(phi));
  psi = polish_eigenvector(Lt, s, std::move(psi));
  orient_positive(phi);
  orient_positive(psi);

  rep.s = s;
  rep.spectral_gap = gap;
  rep.phi = std::move(phi);
  rep.psi = std::move(psi);
  return rep;
}

SpectralReport spectral_bound_power(const OperatorMatrix& L, const PowerIterationOptions& opt) {
  SpectralReport rep;
  rep.R = L.resource_level();
  rep.method = SpectralMethod::power_iteration;

  const double tau = 1.0 / std::max(L.inf_norm(), 1e-300);
  const MatrixXd E = (L.entries() * tau).exp();
  const MatrixXd Et = E.transpose();
  const auto K = E.rows();

  auto iterate = [&](const MatrixXd& M, VectorXd v, int& iters) -> std::pair<double, VectorXd> {
    v /= v.cwiseAbs().maxCoeff();
    double lambda = 0.0;
    for (iters = 0; iters < opt.max_iterations; ++iters) {
      VectorXd w = M * v;
      // Collatz-Wielandt bracket for a positive matrix and positive vector
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      bool positive = true;
      for (Eigen::Index i = 0; i < K; ++i) {
        if (v[i] <= 0.0 || w[i] <= 0.0) {
          positive = false;
          break;
        }
        const double r = w[i] / v[i];
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
      lambda = 0.5 * (lo + hi);
      v = w / w.cwiseAbs().maxCoeff();
      if (positive && hi - lo <= opt.ratio_tol * lambda) return {lambda, v};
    }
    return {std::numeric_limits<double>::quiet_NaN(), v};
  };

  int it_r = 0, it_l = 0;
  auto [lam, phi] = iterate(E, VectorXd::Ones(K), it_r);
  auto [lam_l, psi] = iterate(Et, VectorXd::Ones(K), it_l);
  rep.iterations = it_r + it_l;

  if (!std::isfinite(lam) || !std::isfinite(lam_l)) {
    std::fprintf(stderr, "warning: power iteration hit the cap; falling back to dense solve\n");
    SpectralReport dense = spectral_bound_dense(L);
    dense.method = SpectralMethod::power_iteration;
    dense.fallback = true;
    dense.iterations = rep.iterations;
    return dense;
  }

  rep.s = std::log(lam) / tau;
  rep.phi = std::move(phi);
  rep.psi = std::move(psi);
  orient_positive(rep.phi);
  orient_positive(rep.psi);
  // gap from the eigenvalue-only dense pass (the iteration does not expose it)
  Eigen::EigenSolver<MatrixXd> es(L.entries(), false);
  double second = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double re = es.eigenvalues()[i].real();
    if (re < rep.s - 1e-12 * std::max(1.0, std::abs(rep.s))) second = std::max(second, re);
  }
  rep.spectral_gap = rep.s - second;
  return rep;
}

}  // namespace

SpectralReport spectral_bound(const OperatorMatrix& L, SpectralMethod method,
                              const PowerIterationOptions& options) {
  if (L.kind() != OperatorKind::generator)
    throw std::invalid_argument("spectral_bound expects a generator-kind matrix");

  SpectralReport rep = method == SpectralMethod::dense_eig ? spectral_bound_dense(L)
                                                           : spectral_bound_power(L, options);

  const Grid& grid = L.grid();
  const double mean_phi = grid.total_mass(rep.phi);
  if (!(std::abs(mean_phi) > 0.0)) throw NumericalError("degenerate principal eigenvector");
  rep.phi /= mean_phi;
  const double pairing = rep.phi.dot(rep.psi) / grid.size();
  if (!(std::abs(pairing) > 0.0)) throw NumericalError("degenerate eigenvector pairing");
  rep.psi /= pairing;

  rep.residual = (L.entries() * rep.phi - rep.s * rep.phi).cwiseAbs().maxCoeff();
  rep.adjoint_residual =
      (L.entries().transpose() * rep.psi - rep.s * rep.psi).cwiseAbs().maxCoeff();
  rep.min_phi = rep.phi.minCoeff();
  rep.min_psi = rep.psi.minCoeff();

  const double tol = 1e-8 * L.inf_norm() * rep.phi.cwiseAbs().maxCoeff();
  if (rep.residual > tol)
    throw NumericalError("principal eigenpair residual " + std::to_string(rep.residual) +
                         " exceeds tolerance " + std::to_string(tol));
  return rep;
}

std::vector<SpectralReport> monotonicity_scan(const AssemblyContext& ctx,
                                              const std::vector<double>& R_values) {
  if (R_values.empty()) throw std::invalid_argument("empty resource list");
  for (std::size_t i = 0; i < R_values.size(); ++i) {
    if (!(R_values[i] >= 0.0)) throw std::invalid_argument("resource levels must be nonnegative");
    if (i > 0 && !(R_values[i] > R_values[i - 1]))
      throw std::invalid_argument("resource levels must be strictly increasing");
  }
  std::vector<SpectralReport> reports;
  reports.reserve(R_values.size());
  for (double R : R_values) reports.push_back(spectral_bound(ctx.L(R)));
  return reports;
}

double threshold_root(const AssemblyContext& ctx, double R_lo, double R_hi, double tol) {
  if (!(R_lo < R_hi) || R_lo < 0.0) throw std::invalid_argument("invalid bracket");
  double s_lo = spectral_bound_value(ctx.L(R_lo));
  double s_hi = spectral_bound_value(ctx.L(R_hi));
  if (!(s_lo < 0.0 && s_hi > 0.0))
    throw std::invalid_argument("bracket does not straddle the spectral-bound zero (s(lo) = " +
                                std::to_string(s_lo) + ", s(hi) = " + std::to_string(s_hi) + ")");
  double s_mid = std::min(-s_lo, s_hi);
  while ((R_hi - R_lo > 1e-8 || std::abs(s_mid) >= tol) &&
         R_hi - R_lo > 8.0 * std::numeric_limits<double>::epsilon() * std::max(R_hi, 1.0)) {
    const double mid = 0.5 * (R_lo + R_hi);
    s_mid = spectral_bound_value(ctx.L(mid));
    if (s_mid == 0.0) return mid;
    if (s_mid < 0.0) {
      R_lo = mid;
      s_lo = s_mid;
    } else {
      R_hi = mid;
      s_hi = s_mid;
    }
  }
  // one secant polish on the final bracket
  const double denom = s_hi - s_lo;
  if (denom > 0.0) {
    const double R_star = R_lo - s_lo * (R_hi - R_lo) / denom;
    if (R_star >= R_lo && R_star <= R_hi) return R_star;
  }
  return 0.5 * (R_lo + R_hi);
}

double adjoint_eigen_check(const SpectralReport& report, const OperatorMatrix& L) {
  return (L.entries().transpose() * report.psi - report.s * report.psi).cwiseAbs().maxCoeff();
}

double pairing_derivative(const SpectralReport& report, const OperatorMatrix& N,
                          const ModelParams& params) {
  const double numer = (N.entries() * report.phi).dot(report.psi);
  const double denom = report.phi.dot(report.psi);
  return params.b * numer / denom;
}

}  // namespace persisters
