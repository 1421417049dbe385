#pragma once

#include <memory>
#include <vector>

#include "homoglab/coeff.hpp"
#include "homoglab/linear_solver.hpp"
#include "homoglab/mesh.hpp"

namespace homoglab {

/// Index of the (row, col) entry of a (2m)×(2m) tensor stored per node,
/// with row = i·m + α and col = j·m + β.
inline int tensor_index(int i, int j, int alpha, int beta, int m) { return (i * m + alpha) * (2 * m) + j * m + beta; }
/// Index of F_kij^{αβ} in a per-node table.
inline int flux_index(int k, int i, int j, int alpha, int beta, int m) {
  return k * (4 * m * m) + tensor_index(i, j, alpha, beta, m);
}

/// Correctors χ_j^β, one m-component field per (j, β) at position j·m + β.
using CellCorrectors = std::vector<Field>;

/// Mean-zero periodic solutions of L₁χ_j^β = −L₁P_j^β on the n-grid torus.
CellCorrectors solve_cell(const CoefficientField& coeff, int n, SolverOptions options = {});

/// â_ij^{αβ} = ∫_Y a_ij^{αβ} + a_ik^{αγ} ∂_k χ_j^{γβ} by element quadrature.
Tensor4 homogenize(const CoefficientField& coeff, const CellCorrectors& chi);

/// Nodal b_ij^{αβ} = â_ij − σ_ij, where σ = a + a∇χ is averaged over each
/// element's Gauss points and then over the elements sharing a node. The
/// nodal mean then vanishes up to rounding; it is returned through
/// `mean_defect` when non-null.
Field discrepancy(const CoefficientField& coeff, const CellCorrectors& chi, const Tensor4& hat_a,
                  double* mean_defect = nullptr);

struct FluxCorrector {
  /// f_ij^{αβ}, mean zero, layout tensor_index.
  Field f;
  /// F_kij^{αβ} = ∂_k f_ij − ∂_i f_kj, antisymmetric in (k, i), layout flux_index.
  Field F;
};

/// Solves Δf = b on the torus (mean zero) and antisymmetrizes ∇f.
FluxCorrector flux_corrector(const Field& b, SolverOptions options = {});

/// max_a |∫ b_h φ_a + ∫ F_h · ∇φ_a| / ∫ φ_a: the weak defect of ∂_k F_kij = b_ij.
double flux_residual(const Field& b, const Field& F);

/// max_a |∫ (â − a − a∇χ)_ij ∂_i φ_a| / max_a |∫ a_ij ∂_i φ_a|, using element
/// gradients at Gauss points.
double discrepancy_divergence(const CoefficientField& coeff, const CellCorrectors& chi, const Tensor4& hat_a);

struct CellSolution {
  std::shared_ptr<const TorusGrid> grid;
  CoefficientPtr coeff;
  int m = 1;
  CellCorrectors chi;
  Tensor4 hat_a;
  Field b;
  Field f;
  Field F;
  double b_mean_defect = 0.0;
  double flux_residual = 0.0;
  double divergence_residual = 0.0;

  const Field& chi_column(int j, int beta) const { return chi[static_cast<std::size_t>(j * m + beta)]; }
  /// Periodic bilinear interpolation at a cell point y.
  double chi_at(const Point& y, int j, int alpha, int beta) const;
  double b_at(const Point& y, int i, int j, int alpha, int beta) const;
  double F_at(const Point& y, int k, int i, int j, int alpha, int beta) const;
};

using CellPtr = std::shared_ptr<const CellSolution>;

CellPtr cell_solution(CoefficientPtr coeff, int n, SolverOptions options = {});

/// Domain field x ↦ v(x/ε) for a cell table v (all components).
Field periodic_extension(const Field& cell_field, GridPtr domain, double epsilon);

/// εχ_j^{αβ}(x/ε) on a domain grid as d·m fields, laid out like the correctors.
std::vector<Field> scaled_correctors(const CellSolution& cell, GridPtr domain, double epsilon);

}  // namespace homoglab
