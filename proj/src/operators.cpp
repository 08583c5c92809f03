#include "persisters/operators.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace persisters {

OperatorMatrix::OperatorMatrix(MatrixXd entries, OperatorKind kind, Scheme scheme, Grid grid)
    : entries_(std::move(entries)), kind_(kind), scheme_(scheme), grid_(std::move(grid)) {}

void OperatorMatrix::finalize() {
  const auto K = entries_.rows();
  metzler_ = true;
  for (Eigen::Index i = 0; i < K && metzler_; ++i)
    for (Eigen::Index j = 0; j < K; ++j)
      if (i != j && entries_(i, j) < 0.0) {
        metzler_ = false;
        break;
      }
  irreducible_ = K == 1;
  if (K > 1) {
    irreducible_ = true;
    for (Eigen::Index i = 0; i + 1 < K; ++i)
      if (entries_(i, i + 1) <= 0.0 || entries_(i + 1, i) <= 0.0) {
        irreducible_ = false;
        break;
      }
  }
  inf_norm_ = entries_.cwiseAbs().rowwise().sum().maxCoeff();
}

double OperatorMatrix::resource_level() const {
  if (kind_ != OperatorKind::generator)
    throw std::logic_error("resource level is only defined for generator-kind matrices");
  return R_;
}

VectorXd OperatorMatrix::apply(const VectorXd& n) const {
  if (n.size() != entries_.rows()) throw std::invalid_argument("operator/vector size mismatch");
  if (bands_) {
    const auto& b = *bands_;
    const auto K = n.size();
    VectorXd out(K);
    for (Eigen::Index i = 0; i < K; ++i) {
      double acc = b.diag[i] * n[i];
      if (i > 0) acc += b.lower[i - 1] * n[i - 1];
      if (i + 1 < K) acc += b.upper[i] * n[i + 1];
      out[i] = acc;
    }
    return out;
  }
  if (jump_) {
    const auto& j = *jump_;
    const double pool = j.jump_per_k * n.head(j.k).sum();
    VectorXd out = VectorXd::Constant(n.size(), pool);
    out.head(j.k) += j.keep * n.head(j.k);
    return out;
  }
  return entries_ * n;
}

OperatorMatrix OperatorMatrix::adjoint() const {
  OperatorMatrix t(entries_.transpose(), kind_, scheme_, grid_);
  t.R_ = R_;
  t.finalize();
  return t;
}

OperatorMatrix assemble_A(const Grid& grid, const ModelParams& params, const VelocityField& v,
                          Scheme scheme) {
  const int K = grid.size();
  const double Kd = static_cast<double>(K);
  const double diff = params.m * Kd * Kd;

  // tridiagonal bands; the dense entries are filled from these so the
  // banded apply and the dense matvec agree
  VectorXd lower = VectorXd::Zero(std::max(K - 1, 0));
  VectorXd diag = VectorXd::Zero(K);
  VectorXd upper = VectorXd::Zero(std::max(K - 1, 0));

  // diffusion: 3-point stencil, Neumann ghosts n_0 = n_1, n_{K+1} = n_K
  for (int i = 0; i < K; ++i) {
    double c = -2.0 * diff;
    if (i == 0) c += diff;
    if (i == K - 1) c += diff;
    diag[i] += c;
  }
  for (int i = 0; i + 1 < K; ++i) {
    upper[i] += diff;
    lower[i] += diff;
  }

  if (scheme == Scheme::flux_form) {
    // face fluxes F_{i+1/2} = v(face) * (n_i + n_{i+1})/2, zero at both ends;
    // row i receives -K (F_{i+1/2} - F_{i-1/2})
    for (int f = 1; f < K; ++f) {  // interior face f at x = f/K, between cells f-1 and f
      const double vf = v(static_cast<double>(f) / K);
      const double c = 0.5 * Kd * vf;
      diag[f - 1] -= c;
      upper[f - 1] -= c;
      diag[f] += c;
      lower[f - 1] += c;
    }
  } else {
    // central differences on the product (v n)_i with ghost values; ghost
    // velocities sit at the reflected midpoints -x_1 and 2 - x_K
    const double c = 0.5 * Kd;
    for (int i = 0; i < K; ++i) {
      if (i == 0)
        diag[0] += c * v.eval_extended(-grid.midpoint(0));  // n_0 = n_1
      else
        lower[i - 1] += c * v.eval_extended(grid.midpoint(i - 1));
      if (i == K - 1)
        diag[K - 1] -= c * v.eval_extended(2.0 - grid.midpoint(K - 1));  // n_{K+1} = n_K
      else
        upper[i] -= c * v.eval_extended(grid.midpoint(i + 1));
    }
  }

  // death on active compartments
  for (int i = 0; i < grid.cutoff(); ++i) diag[i] -= params.d;

  MatrixXd entries = MatrixXd::Zero(K, K);
  for (int i = 0; i < K; ++i) {
    entries(i, i) = diag[i];
    if (i + 1 < K) {
      entries(i, i + 1) = upper[i];
      entries(i + 1, i) = lower[i];
    }
  }

  OperatorMatrix op(std::move(entries), OperatorKind::transport, scheme, grid);
  op.bands_ = OperatorMatrix::Bands{std::move(lower), std::move(diag), std::move(upper)};
  op.finalize();
  if (!op.metzler())
    std::fprintf(stderr,
                 "warning: transport operator is not Metzler at K=%d "
                 "(m*K = %g < ||v||_inf/2; refine the grid)\n",
                 K, params.m * Kd);
  return op;
}

OperatorMatrix assemble_N(const Grid& grid, const ModelParams& params,
                          const RedistributionKernel& kernel) {
  const int K = grid.size();
  const int k = grid.cutoff();
  const MatrixXd P = kernel.materialize(K);

  MatrixXd entries = MatrixXd::Zero(K, K);
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i < K; ++i) entries(i, j) = params.mu * P(i, j) / K;
    entries(j, j) += 1.0 - params.mu;
  }

  OperatorMatrix op(std::move(entries), OperatorKind::birth_jump, Scheme::flux_form, grid);
  if (kernel.is_uniform())
    op.jump_ = OperatorMatrix::UniformJump{1.0 - params.mu, params.mu / K, k};
  op.finalize();
  return op;
}

OperatorMatrix assemble_L(const Grid& grid, const ModelParams& params, const VelocityField& v,
                          const RedistributionKernel& kernel, double R, Scheme scheme) {
  if (!(R >= 0.0)) throw std::domain_error("resource level R must be nonnegative");
  const OperatorMatrix A = assemble_A(grid, params, v, scheme);
  const OperatorMatrix N = assemble_N(grid, params, kernel);
  MatrixXd entries = A.entries() + (params.b * R) * N.entries();
  OperatorMatrix op(std::move(entries), OperatorKind::generator, scheme, grid);
  op.R_ = R;
  op.finalize();
  return op;
}

double column_sum_residual(const OperatorMatrix& L, const ModelParams& params) {
  if (L.kind() != OperatorKind::generator)
    throw std::invalid_argument("column_sum_residual expects a generator-kind matrix");
  const double coeff = params.b * L.resource_level() - params.d;
  const VectorXd expected = coeff * L.grid().chi();
  const VectorXd colsums = L.entries().colwise().sum();
  return (colsums - expected).cwiseAbs().maxCoeff();
}

double birth_jump_norm_bound(const ModelParams& params, const RedistributionKernel& kernel,
                             int K) {
  return (1.0 - params.mu) + params.mu * std::sqrt(kernel.l2_norm_sq(K));
}

AssemblyContext AssemblyContext::make(const ModelParams& params, int K, Scheme scheme,
                                      const RedistributionKernel& kernel) {
  const ModelParams p = validate_params(params);
  return AssemblyContext{p, VelocityField::cubic(p.v0, p.gamma), kernel,
                         Grid::from_alpha(K, p.alpha), scheme};
}

}  // namespace persisters
