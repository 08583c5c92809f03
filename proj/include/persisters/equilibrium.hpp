#pragma once

#include <optional>

#include "persisters/spectral.hpp"

namespace persisters {

enum class Regime { below_threshold, at_threshold, above_threshold };

/// The positive steady state: population profile at resource level d/b,
/// scaled so the active biomass balances the resource equation.
struct PositiveEquilibrium {
  VectorXd n_star;
  double R_star = 0.0;      ///< d/b
  double c = 0.0;           ///< scaling applied to the principal eigenvector
  double N_alpha_hat = 0.0; ///< active biomass (theta - eta d/b) / d
};

struct EquilibriumSet {
  Regime regime = Regime::below_threshold;
  VectorXd washout_n;  ///< zero vector
  double washout_R = 0.0;
  std::optional<PositiveEquilibrium> positive;  ///< present iff above threshold
};

/// Compares theta/eta with d/b; at_threshold when they agree within
/// 1e-12 relative.
Regime classify_regime(const ModelParams& params);

/// Washout is always present. Above threshold the positive equilibrium is
/// built from the principal eigenvector of L_{d/b} scaled so
/// (1/K) sum_{i<k} n*_i = (theta - eta d/b)/d. Throws NumericalError if the
/// eigenvector fails strict positivity.
EquilibriumSet compute_equilibria(const AssemblyContext& ctx);

struct ResidualPair {
  double pde = 0.0;       ///< ||L_R n||_inf at the equilibrium
  double resource = 0.0;  ///< |theta - eta R - b R N_alpha|
};

struct EquilibriumResiduals {
  ResidualPair washout;
  std::optional<ResidualPair> positive;
};

EquilibriumResiduals equilibrium_residual(const EquilibriumSet& eq, const AssemblyContext& ctx);

}  // namespace persisters
