#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include "homoglab/assembly.hpp"
#include "homoglab/correctors.hpp"

namespace homoglab {

/// G(·, y) e^β: Dirichlet solve with the point-evaluation load at node y.
Field green(const AssembledOperator& dirichlet, int y_node, int beta = 0);

/// N(·, y) e^β: point load at y, boundary flux −e^β/|∂Ω|, boundary mean zero.
/// Requires a symmetric operator in Neumann mode.
Field neumann_fn(const AssembledOperator& neumann, int y_node, int beta = 0);

/// P(·, y) e^β for a non-corner boundary node y (boundary index b): Dirichlet
/// solve with the hat function at y divided by its arc-length weight as data.
Field poisson_kernel(const AssembledOperator& dirichlet, int b, int beta = 0);

enum class KernelKind { green, neumann_fn, poisson };
std::string_view to_string(KernelKind kind);

struct KernelTable {
  KernelKind kind = KernelKind::green;
  /// 0 for the homogenized operator.
  double epsilon = 0.0;
  MeshPtr mesh;
  /// Source nodes (boundary indices for Poisson kernels).
  std::vector<int> sources;
  int beta = 0;
  std::vector<Field> columns;
};

KernelTable kernel_table(KernelKind kind, const AssembledOperator& op, const std::vector<int>& sources, int beta = 0);

/// Kernel values are trusted at |x − y| ≥ max(4h, 0.02).
bool kernel_trusted(const DomainMesh& mesh, const Point& x, const Point& y);

/// ω^{γβ} (index γ·m + β) and h^{γβ} = ((n_i n_j â_ij)^{-1})^{γβ} on the boundary.
struct OmegaTable {
  BoundaryField omega;
  BoundaryField h;
  int m = 1;
  double operator()(int b, int gamma, int beta) const { return omega(b, gamma * m + beta); }
};

/// ω_ε^{γβ}(y) = h^{γσ}(y) ∂_n Φ*_k^{ρσ}(y) n_k n_i n_j a_ij^{ρβ}(y/ε).
///
/// The normal derivative comes from the variational conormal flux of Φ*
/// under the adjoint operator: Φ* = P on ∂Ω, so the tangential part of the
/// flux is known and Σ_k n_k ∂_n Φ*_k = N^{-T} Σ_k n_k ∂Φ*_k/∂ν* with
/// N = n_i n_j a_ij(y/ε). Corner nodes take the mean of their neighbours.
OmegaTable omega(const ScaledCoefficient& coeff, const Tensor4& hat_a, const CorrectorSet& set,
                 const AssembledOperator& adjoint);

/// Λ f: conormal flux of the Dirichlet solution with boundary data f.
BoundaryField apply_dtn(const AssembledOperator& dirichlet, const BoundaryField& f);

/// Dense D-to-N matrix in moment form: column c holds the boundary moments
/// (K u_c)_B of the solution with hat data at boundary dof c. Nodal values
/// of Λf are (M f) divided by the arc-length weights.
struct DtNMatrix {
  MeshPtr mesh;
  double epsilon = 0.0;
  int m = 1;
  Eigen::MatrixXd moments;

  BoundaryField apply(const BoundaryField& f) const;
};

DtNMatrix dtn(const AssembledOperator& dirichlet);

/// Λ(fg) − fΛ(g) and Λ(f x_i) − x_i Λ(f) for scalar boundary fields.
struct Commutators {
  BoundaryField product;
  BoundaryField coordinate;
};

using DtNApply = std::function<BoundaryField(const BoundaryField&)>;
Commutators leibniz_commutators(const DtNApply& dtn, const BoundaryField& f, const BoundaryField& g, int i);
BoundaryField product_commutator(const DtNApply& dtn, const BoundaryField& f, const BoundaryField& g);
BoundaryField coordinate_commutator(const DtNApply& dtn, const BoundaryField& f, int i);

/// Nodal product of two boundary fields (scalar).
BoundaryField times(const BoundaryField& f, const BoundaryField& g);

}  // namespace homoglab
