#include "persisters/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace persisters {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

ModelParams validate_params(const ModelParams& p) {
  require(std::isfinite(p.b) && p.b > 0.0, "b must be positive");
  require(std::isfinite(p.d) && p.d > 0.0, "d must be positive");
  require(std::isfinite(p.theta) && p.theta > 0.0, "theta must be positive");
  require(std::isfinite(p.eta) && p.eta > 0.0, "eta must be positive");
  require(std::isfinite(p.m) && p.m > 0.0, "m must be positive");
  require(std::isfinite(p.mu) && p.mu >= 0.0 && p.mu <= 1.0, "mu out of [0,1]");
  require(std::isfinite(p.alpha) && p.alpha > 0.0 && p.alpha < 1.0, "alpha out of (0,1)");
  require(std::isfinite(p.gamma) && p.gamma > 0.0 && p.gamma < 1.0, "gamma out of (0,1)");
  require(std::isfinite(p.v0), "v0 must be finite");
  return p;
}

Grid::Grid(int K, int k) : K_(K), k_(k) {
  midpoints_.resize(K_);
  for (int i = 0; i < K_; ++i) midpoints_[i] = (i + 0.5) / K_;
  chi_ = VectorXd::Zero(K_);
  chi_.head(k_).setOnes();
}

Grid Grid::from_alpha(int K, double alpha) {
  if (K < 2) throw std::invalid_argument("K must be at least 2");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha out of (0,1)");
  const double ak = alpha * K;
  const double rounded = std::round(ak);
  if (std::abs(ak - rounded) > 1e-9)
    throw std::invalid_argument("alpha*K not integral (alpha must align with a compartment boundary)");
  const int k = static_cast<int>(rounded);
  if (k < 1 || k > K - 1) throw std::invalid_argument("cutoff index must satisfy 1 <= k <= K-1");
  return Grid(K, k);
}

Grid Grid::with_cutoff(int K, int k) {
  if (K < 1) throw std::invalid_argument("K must be positive");
  if (k < 1 || k > K) throw std::invalid_argument("cutoff index must satisfy 1 <= k <= K");
  return Grid(K, k);
}

double Grid::active_mass(const VectorXd& n) const {
  return n.head(k_).sum() / K_;
}

double Grid::total_mass(const VectorXd& n) const {
  return n.sum() / K_;
}

VelocityField VelocityField::cubic(double v0, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma out of (0,1)");
  VelocityField v;
  v.is_cubic_ = true;
  v.v0_ = v0;
  v.gamma_ = gamma;
  return v;
}

VelocityField VelocityField::tabulated(const Grid& grid, VectorXd values) {
  const int K = grid.size();
  if (values.size() != K + 2)
    throw std::invalid_argument("tabulated velocity needs K+2 values (both endpoints and all midpoints)");
  if (std::abs(values[0]) > 1e-12 || std::abs(values[K + 1]) > 1e-12)
    throw std::invalid_argument("tabulated velocity must vanish at x=0 and x=1 (within 1e-12)");
  VelocityField v;
  v.is_cubic_ = false;
  v.nodes_.resize(K + 2);
  v.nodes_[0] = 0.0;
  v.nodes_.segment(1, K) = grid.midpoints();
  v.nodes_[K + 1] = 1.0;
  v.values_ = std::move(values);
  return v;
}

double VelocityField::eval_interp(double x) const {
  // piecewise linear on the node set {0, x_1, ..., x_K, 1}
  const auto n = nodes_.size();
  if (x <= nodes_[0]) return values_[0];
  if (x >= nodes_[n - 1]) return values_[n - 1];
  const double* lo = std::upper_bound(nodes_.data(), nodes_.data() + n, x);
  const auto j = lo - nodes_.data();  // first node > x, in [1, n-1]
  const double t = (x - nodes_[j - 1]) / (nodes_[j] - nodes_[j - 1]);
  return (1.0 - t) * values_[j - 1] + t * values_[j];
}

double VelocityField::operator()(double x) const {
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("velocity evaluated outside [0,1]");
  if (is_cubic_) return v0_ * x * (x - gamma_) * (x - 1.0);
  return eval_interp(x);
}

double VelocityField::eval_extended(double x) const {
  if (is_cubic_) return v0_ * x * (x - gamma_) * (x - 1.0);
  if (x < 0.0) return -eval_interp(-x);
  if (x > 1.0) return -eval_interp(2.0 - x);
  return eval_interp(x);
}

double eval_velocity(const VelocityField& v, double x) { return v(x); }

double velocity_sup_norm(const VelocityField& v, int samples) {
  samples = std::max(samples, 10001);
  double best = 0.0;
  double best_x = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double x = static_cast<double>(i) / (samples - 1);
    const double a = std::abs(v(x));
    if (a > best) {
      best = a;
      best_x = x;
    }
  }
  // golden-section refinement of |v| on a bracket around the best sample
  const double h = 1.5 / (samples - 1);
  double lo = std::max(0.0, best_x - h);
  double hi = std::min(1.0, best_x + h);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - gr * (hi - lo);
  double d = lo + gr * (hi - lo);
  double fc = std::abs(v(c));
  double fd = std::abs(v(d));
  for (int it = 0; it < 90 && hi - lo > 1e-15; ++it) {
    if (fc > fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - gr * (hi - lo);
      fc = std::abs(v(c));
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + gr * (hi - lo);
      fd = std::abs(v(d));
    }
  }
  return std::max({best, fc, fd});
}

double quasi_contraction_bound(const ModelParams& p, const VelocityField& v) {
  const double sup = velocity_sup_norm(v);
  return sup * sup / (2.0 * p.m);
}

RedistributionKernel RedistributionKernel::uniform() { return RedistributionKernel(); }

RedistributionKernel RedistributionKernel::matrix(MatrixXd P) {
  if (P.rows() != P.cols() || P.rows() < 1)
    throw std::invalid_argument("kernel matrix must be square and nonempty");
  if ((P.array() < 0.0).any())
    throw std::invalid_argument("kernel matrix entries must be nonnegative");
  const int K = static_cast<int>(P.rows());
  for (int j = 0; j < K; ++j) {
    const double colsum = P.col(j).sum() / K;
    if (std::abs(colsum - 1.0) > 1e-10)
      throw std::invalid_argument("kernel column " + std::to_string(j) +
                                  " not normalized: (1/K)*sum = " + std::to_string(colsum));
    P.col(j) /= colsum;  // exact discrete normalization
  }
  RedistributionKernel k;
  k.is_uniform_ = false;
  k.P_ = std::move(P);
  return k;
}

const MatrixXd& RedistributionKernel::values() const {
  if (is_uniform_) throw std::logic_error("uniform kernel has no stored matrix");
  return P_;
}

MatrixXd RedistributionKernel::materialize(int K) const {
  if (is_uniform_) return MatrixXd::Ones(K, K);
  if (P_.rows() != K)
    throw std::invalid_argument("kernel matrix size " + std::to_string(P_.rows()) +
                                " does not match grid size " + std::to_string(K));
  return P_;
}

double RedistributionKernel::l2_norm_sq(int K) const {
  if (is_uniform_) return 1.0;
  if (P_.rows() != K)
    throw std::invalid_argument("kernel matrix size does not match grid size");
  return P_.array().square().sum() / (static_cast<double>(K) * K);
}

}  // namespace persisters
