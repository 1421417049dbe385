#pragma once

#include <vector>

#include "homoglab/assembly.hpp"
#include "homoglab/cell.hpp"

namespace homoglab {

/// P_j^β(x) = x_j e^β as an m-component field.
Field linear_monomial(GridPtr grid, int m, int j, int beta);

/// Φ_{ε,j}^β: L_ε Φ = 0 in Ω, Φ = P_j^β on ∂Ω. One field per column j·m + β.
std::vector<Field> dirichlet_correctors(const AssembledOperator& op);

/// Ψ_{ε,j}^β: L_ε Ψ = 0 in Ω with conormal flux n_i â_ij^{αβ}, shifted so
/// that Ψ(x₀) = P(x₀) at the pin node.
std::vector<Field> neumann_correctors(const AssembledOperator& op, const Tensor4& hat_a, int pin_node);

/// Node nearest the centre of the square.
int default_pin(const DomainMesh& mesh);

struct CorrectorSet {
  MeshPtr mesh;
  double epsilon = 0.0;
  int m = 1;
  std::vector<Field> phi;
  std::vector<Field> phi_star;
  /// Empty unless Neumann correctors were requested.
  std::vector<Field> psi;
  int pin_node = -1;

  const Field& phi_column(int j, int beta) const { return phi[static_cast<std::size_t>(j * m + beta)]; }
  const Field& phi_star_column(int j, int beta) const { return phi_star[static_cast<std::size_t>(j * m + beta)]; }
  const Field& psi_column(int j, int beta) const { return psi[static_cast<std::size_t>(j * m + beta)]; }
};

/// Builds the set from already assembled operators. `adjoint` may be the same
/// operator as `dirichlet` when the coefficient is symmetric; `neumann` may be
/// null to skip Ψ.
CorrectorSet corrector_set(const AssembledOperator& dirichlet, const AssembledOperator& adjoint,
                           const AssembledOperator* neumann, const Tensor4& hat_a, int pin_node = -1);

/// Assembles what is needed and builds the set. Neumann correctors require a
/// symmetric coefficient.
CorrectorSet corrector_set(const ScaledCoefficient& coeff, const Tensor4& hat_a, MeshPtr mesh, bool with_neumann,
                           SolverOptions options = {});

struct CorrectorFamilyBounds {
  /// sup |∇V| over nodes with dist ≥ 0.1
  double grad_sup = 0.0;
  /// sup |V − P| away from the corners
  double deviation_sup = 0.0;
  /// sup |∇(V − P − εχ(x/ε))| over nodes with dist ≥ 0.1
  double first_order_sup = 0.0;
  /// sup |∇(V − P − εχ(x/ε))| · max(1, δ(x)/ε) away from the corners
  double layer_sup = 0.0;
};

struct CorrectorReport {
  double epsilon = 0.0;
  CorrectorFamilyBounds phi;
  CorrectorFamilyBounds phi_star;
  bool has_psi = false;
  CorrectorFamilyBounds psi;
};

/// Nodes within 4h of a corner are left out of every sup. Φ* is compared
/// with the adjoint cell table; it defaults to `cell` for symmetric
/// coefficients, otherwise the Φ* first-order terms are NaN.
CorrectorReport corrector_report(const CorrectorSet& set, const CellSolution& cell,
                                 const CellSolution* adjoint_cell = nullptr);

/// Bounds for an arbitrary corrector family V against a cell table.
CorrectorFamilyBounds family_bounds(const std::vector<Field>& v, const std::vector<Field>& eps_chi, double epsilon);

}  // namespace homoglab
