#include "persisters/equilibrium.hpp"

#include <cmath>
#include <string>

#include "persisters/errors.hpp"

namespace persisters {

Regime classify_regime(const ModelParams& params) {
  const double supply = params.washout_resource();
  const double threshold = params.growth_threshold();
  const double tol = 1e-12 * std::max(supply, threshold);
  if (std::abs(supply - threshold) <= tol) return Regime::at_threshold;
  return supply < threshold ? Regime::below_threshold : Regime::above_threshold;
}

EquilibriumSet compute_equilibria(const AssemblyContext& ctx) {
  EquilibriumSet eq;
  eq.regime = classify_regime(ctx.params);
  eq.washout_n = VectorXd::Zero(ctx.grid.size());
  eq.washout_R = ctx.params.washout_resource();
  if (eq.regime != Regime::above_threshold) return eq;

  const double R_star = ctx.params.growth_threshold();
  const SpectralReport rep = spectral_bound(ctx.L(R_star));
  if (!(rep.min_phi > 0.0))
    throw NumericalError("principal eigenvector at R = d/b is not strictly positive (min entry " +
                         std::to_string(rep.min_phi) + ")");

  PositiveEquilibrium pos;
  pos.R_star = R_star;
  pos.N_alpha_hat = (ctx.params.theta - ctx.params.eta * R_star) / ctx.params.d;
  const double active = ctx.grid.active_mass(rep.phi);
  pos.c = pos.N_alpha_hat / active;
  pos.n_star = pos.c * rep.phi;
  eq.positive = std::move(pos);
  return eq;
}

EquilibriumResiduals equilibrium_residual(const EquilibriumSet& eq, const AssemblyContext& ctx) {
  EquilibriumResiduals out;
  // washout: the population term vanishes identically
  out.washout.pde = 0.0;
  out.washout.resource = std::abs(ctx.params.theta - ctx.params.eta * eq.washout_R);
  if (eq.positive) {
    const auto& pos = *eq.positive;
    const OperatorMatrix L = ctx.L(pos.R_star);
    out.positive = ResidualPair{
        (L.entries() * pos.n_star).cwiseAbs().maxCoeff(),
        std::abs(ctx.params.theta - ctx.params.eta * pos.R_star -
                 ctx.params.b * pos.R_star * pos.N_alpha_hat)};
  }
  return out;
}

}  // namespace persisters
