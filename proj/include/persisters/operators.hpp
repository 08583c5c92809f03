#pragma once

#include <optional>

#include "persisters/model.hpp"

namespace persisters {

/// Advection discretization. `flux_form` (default) uses conservative face
/// fluxes with zero boundary flux, so the discrete mass identities hold to
/// machine precision. `paper_central` is the plain central-difference form
/// with ghost cells, kept for fidelity comparisons.
enum class Scheme { flux_form, paper_central };

enum class OperatorKind {
  transport,   ///< A: advection-diffusion-death
  birth_jump,  ///< N: reproduction with phenotype redistribution
  generator    ///< L_R = A + b*R*N at a fixed resource level R
};

/// Dense K x K discretization of one of the model operators, plus assembly
/// metadata. Immutable after assembly; safe to share across threads.
///
/// Fast application paths (tridiagonal bands for A, diagonal-plus-rank-one
/// for N with the uniform kernel) are kept alongside the dense entries so
/// time integration does not pay the dense matvec; `apply` agrees with
/// `entries() * n` to rounding.
class OperatorMatrix {
 public:
  const MatrixXd& entries() const { return entries_; }
  OperatorKind kind() const { return kind_; }
  Scheme scheme() const { return scheme_; }
  const Grid& grid() const { return grid_; }
  /// Resource level R for generator-kind matrices.
  double resource_level() const;
  /// True when all off-diagonal entries are nonnegative.
  bool metzler() const { return metzler_; }
  /// True when both first off-diagonals are strictly positive (together with
  /// metzler() this is the discrete irreducibility certificate).
  bool irreducible() const { return irreducible_; }
  double inf_norm() const { return inf_norm_; }

  VectorXd apply(const VectorXd& n) const;

  /// Transpose; with the uniform quadrature weight the discrete L2 adjoint
  /// of a matrix is exactly its transpose.
  OperatorMatrix adjoint() const;

  friend OperatorMatrix assemble_A(const Grid&, const ModelParams&, const VelocityField&, Scheme);
  friend OperatorMatrix assemble_N(const Grid&, const ModelParams&, const RedistributionKernel&);
  friend OperatorMatrix assemble_L(const Grid&, const ModelParams&, const VelocityField&,
                                   const RedistributionKernel&, double, Scheme);

 private:
  OperatorMatrix(MatrixXd entries, OperatorKind kind, Scheme scheme, Grid grid);
  void finalize();

  MatrixXd entries_;
  OperatorKind kind_;
  Scheme scheme_;
  Grid grid_;
  double R_ = 0.0;
  bool metzler_ = false;
  bool irreducible_ = false;
  double inf_norm_ = 0.0;

  // fast apply paths
  struct Bands {
    VectorXd lower, diag, upper;
  };
  std::optional<Bands> bands_;  // transport kind
  struct UniformJump {
    double keep;        // (1-mu) on active compartments
    double jump_per_k;  // mu/K
    int k;
  };
  std::optional<UniformJump> jump_;  // birth-jump kind, uniform kernel
};

/// Discretization of A n = -d chi n - (v n)_x + m n_xx with Neumann ghost
/// cells. Diffusion is the 3-point stencil in both schemes; advection is
/// scheme dependent. Emits a warning on stderr when the result is not
/// Metzler (diffusion too weak against face advection at this K).
OperatorMatrix assemble_A(const Grid& grid, const ModelParams& params, const VelocityField& v,
                          Scheme scheme = Scheme::flux_form);

/// N(i,j) = (1-mu) delta_ij chi_j + mu chi_j P(i,j)/K. Entrywise nonnegative,
/// persister source columns identically zero, column sums equal chi.
OperatorMatrix assemble_N(const Grid& grid, const ModelParams& params,
                          const RedistributionKernel& kernel);

/// L_R = A + b R N for R >= 0; throws std::domain_error for R < 0.
OperatorMatrix assemble_L(const Grid& grid, const ModelParams& params, const VelocityField& v,
                          const RedistributionKernel& kernel, double R,
                          Scheme scheme = Scheme::flux_form);

/// max_j | sum_i L(i,j) - (b R - d) chi_j | for a generator-kind matrix.
/// Zero to rounding in flux form.
double column_sum_residual(const OperatorMatrix& L, const ModelParams& params);

/// Operator-norm bound (1-mu) + mu*sqrt(C_p) for the birth-jump operator.
double birth_jump_norm_bound(const ModelParams& params, const RedistributionKernel& kernel, int K);

/// Everything needed to assemble the discrete operators; bundles the model
/// definition so the spectral and equilibrium layers can assemble on demand.
/// Immutable; sweeps share one context across worker threads.
struct AssemblyContext {
  ModelParams params;
  VelocityField velocity;
  RedistributionKernel kernel;
  Grid grid;
  Scheme scheme = Scheme::flux_form;

  static AssemblyContext make(const ModelParams& params, int K, Scheme scheme = Scheme::flux_form,
                              const RedistributionKernel& kernel = RedistributionKernel::uniform());

  OperatorMatrix A() const { return assemble_A(grid, params, velocity, scheme); }
  OperatorMatrix N() const { return assemble_N(grid, params, kernel); }
  OperatorMatrix L(double R) const {
    return assemble_L(grid, params, velocity, kernel, R, scheme);
  }
};

}  // namespace persisters
