#pragma once

#include <string_view>
#include <vector>

#include "homoglab/assembly.hpp"
#include "homoglab/cell.hpp"
#include "homoglab/correctors.hpp"
#include "homoglab/kernels.hpp"

namespace homoglab {

/// Which V_{ε,j}^β enters w = u_ε − u₀ − (V − P)·∇u₀.
enum class CorrectorFamily { chi, dirichlet, neumann };

std::string_view to_string(CorrectorFamily family);
CorrectorFamily corrector_family_from_string(std::string_view tag);

/// V_k^{·γ} − P_k^γ for every column k·m + γ. The chi family uses the nodal
/// values of εχ(x/ε); the others read the corrector set.
std::vector<Field> family_columns(CorrectorFamily family, const CorrectorSet* set, const CellSolution* cell,
                                  MeshPtr mesh, double epsilon);

struct Expansion {
  Field u_eps;
  Field u0;
  CorrectorFamily family = CorrectorFamily::chi;
  double epsilon = 0.0;
  std::vector<Field> v_minus_p;
  /// Recovered ∇u₀, component k·m + γ.
  Field grad_u0;
  Field w;
  /// ∂_i u_ε^α − ∂_i V_k^{αγ} ∂_k u₀^γ, component i·m + α.
  Field gradient_comparison;
};

/// w^α = u_ε^α − u₀^α − (V − P)_k^{αγ} ∂_k u₀^γ, nodal.
Field compose_w(const Field& u_eps, const Field& u0, const std::vector<Field>& v_minus_p, const Field& grad_u0);

Expansion build_expansion(const Field& u_eps, const Field& u0, CorrectorFamily family,
                          std::vector<Field> v_minus_p, double epsilon);

/// Terms of the right-hand side of the identity for L_ε w:
///   flux:       ε ∂_i{F_jik(x/ε) ∂²_jk u₀}
///   divergence: ∂_i{a_ij(x/ε) (V − P)_k ∂²_jk u₀}
///   volume:     a_ij(x/ε) ∂_j[V − P − εχ(x/ε)]_k ∂²_ik u₀
struct IdentityTerms {
  bool flux = true;
  bool divergence = true;
  bool volume = true;
};

struct IdentityResidual {
  /// Weak residual K_ε w − ⟨rhs, φ⟩ per dof (zero at boundary dofs).
  Eigen::VectorXd residual;
  /// max |residual| / ∫φ over nodes with dist(x, ∂Ω) ≥ margin.
  double max_scaled = 0.0;
  /// Same for the right-hand side alone, for scale.
  double rhs_scaled = 0.0;
};

/// Tests both sides of the identity against interior hat functions. ∇²u₀ is
/// recovered twice from nodal values; F, χ come from the cell tables.
IdentityResidual residual_identity_check(const Expansion& e, const AssembledOperator& op,
                                         const ScaledCoefficient& coeff, const CellSolution& cell,
                                         IdentityTerms terms = {}, double margin = 0.1);

struct BoundaryResidual {
  BoundaryField residual;
  double max = 0.0;
  double l2 = 0.0;
};

/// ∂w/∂ν_ε − [∂u_ε/∂ν_ε − ∂u₀/∂ν₀ − n_i a_ij (V − P)_k ∂²_kj u₀] on non-corner
/// boundary nodes, all conormals taken from recovered nodal gradients.
BoundaryResidual conormal_identity_check(const Expansion& e, const ScaledCoefficient& coeff, const Tensor4& hat_a);

struct Approximation {
  Field u_eps;
  Field v_eps;
  double l1 = 0.0;
  double l2 = 0.0;
};

/// u_ε: L_ε u = 0, u = f on ∂Ω. v_ε: L₀ v = 0, v = ω f on ∂Ω.
Approximation poisson_approx(const AssembledOperator& op_eps, const AssembledOperator& op0, const OmegaTable& omega,
                             const BoundaryField& f);

/// u_ε: L_ε u = div f. v_ε: L₀ v = div F_ε with F_{ε,i}^α = f_j^β ∂_j Φ*_{ε,i}^{βα}.
/// f has 2m components, j·m + β. Both with zero Dirichlet data.
Approximation divergence_data_approx(const AssembledOperator& op_eps, const AssembledOperator& op0,
                                     const CorrectorSet& set, const Field& f);

/// S_ε(g) = T_ε,ij(g) − ∂_iΦ_k T_0,kl(∂_jΦ*_l g) + ∂_iΦ_k T_0,kl(∂_jΦ*_l) g for
/// m = 1, where T_ε,ij(g) = ∂_i of the solution of L_ε u = ∂_j g, u = 0 on ∂Ω.
Field s_epsilon(const AssembledOperator& op_eps, const AssembledOperator& op0, const CorrectorSet& set,
                const Field& g, int i, int j);

/// Λ_ε(f) − n_i ∂f/∂t_ij Λ_ε(x_j) + ω[fΛ₀(ω) − Λ₀(ωf)] + ω n_i ∂f/∂t_ij [Λ₀(ωx_j) − x_jΛ₀(ω)]
/// for m = 1 and a symmetric coefficient.
BoundaryField dtn_defect(const AssembledOperator& op_eps, const AssembledOperator& op0, const OmegaTable& omega,
                         const BoundaryField& f);

/// ∂²G_ε/∂x_i∂y_j(x, y) and ∂_iΦ_k(x) ∂²G₀/∂x_k∂y_l(x, y) ∂_jΦ*_l(y) for m = 1,
/// with y-derivatives by centered differences of Green columns and
/// x-derivatives by gradient recovery. Indexed [i][j].
struct MixedKernel {
  std::array<std::array<double, 2>, 2> exact{};
  std::array<std::array<double, 2>, 2> expansion{};
  double defect() const;
};

MixedKernel mixed_kernel(const AssembledOperator& op_eps, const AssembledOperator& op0, const CorrectorSet& set,
                         int x_node, int y_node);

}  // namespace homoglab
