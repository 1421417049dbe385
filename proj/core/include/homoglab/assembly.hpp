#pragma once

#include <array>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "homoglab/coeff.hpp"
#include "homoglab/linear_solver.hpp"
#include "homoglab/mesh.hpp"

namespace homoglab {

enum class ConstraintMode { dirichlet, neumann };

/// One Gauss point of the 2×2 rule on a bilinear element, with physical
/// weight and basis data.
struct QuadPoint {
  int element = 0;
  std::array<int, 4> nodes{};
  Point x{};
  double weight = 0.0;
  std::array<double, 4> phi{};
  std::array<std::array<double, 2>, 4> dphi{};
};

void for_each_quad_point(const Grid& grid, const std::function<void(const QuadPoint&)>& visit);

/// Right-hand side ⟨ℓ, φ_(a,α)⟩ of a weak problem, one entry per dof.
struct Load {
  GridPtr grid;
  int m = 1;
  Eigen::VectorXd values;

  Load() = default;
  Load(GridPtr g, int components);
  Load& operator+=(const Load& other);
  Load& operator*=(double s);
};

/// ∫ f^α φ dx with f given analytically.
Load volume_load(GridPtr grid, int components, const std::function<void(const Point&, std::span<double>)>& f);
Load volume_load(GridPtr grid, const std::function<double(const Point&)>& f);
/// ∫ f_h^α φ dx with f_h the bilinear interpolant of a nodal field.
Load volume_load(const Field& f);
/// Load for L u = div H: −∫ H_i^α ∂_i φ^α dx. H(x, out) fills out[i·m + α].
Load divergence_load(GridPtr grid, int components,
                     const std::function<void(const QuadPoint&, std::span<double>)>& h);
/// Same with H a nodal field of 2m components (i·m + α), interpolated bilinearly.
Load divergence_load(const Field& h);
/// Point-evaluation functional at a node.
Load point_load(GridPtr grid, int components, int node, int alpha, double value = 1.0);
/// Adds ∫_{∂Ω} g^α φ dσ with lumped arc-length weights.
void add_boundary_flux(Load& load, const BoundaryField& g);
/// Adds ∫_{∂Ω} g^α(x, n) φ dσ by two-point Gauss on each boundary segment.
void add_boundary_flux(Load& load, const std::function<void(const Point&, const Point&, std::span<double>)>& g);

/// Stiffness matrix of ∫ a_ij^{αβ} ∂_j u^β ∂_i v^α plus its constrained
/// factorization (built on first use, then shared read-only).
class AssembledOperator {
 public:
  AssembledOperator(GridPtr grid, int components, ConstraintMode mode, bool symmetric, SparseMatrix stiffness,
                    SolverOptions options, double epsilon, std::string key);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  int components() const { return m_; }
  ConstraintMode mode() const { return mode_; }
  bool symmetric() const { return symmetric_; }
  /// Period length of the coefficient; 0 for constant tensors.
  double epsilon() const { return epsilon_; }
  const std::string& key() const { return key_; }
  const SparseMatrix& stiffness() const { return stiffness_; }
  const SolverOptions& options() const { return options_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

  /// Dofs replaced by identity rows in the factored system.
  const std::vector<int>& constrained_dofs() const { return constrained_; }
  /// Weights of the pin functional (boundary arc length, or cell volume on
  /// the torus); one per node.
  const Eigen::VectorXd& pin_weights() const { return pin_weights_; }
  const LinearSolver& solver() const;

 private:
  GridPtr grid_;
  int m_;
  ConstraintMode mode_;
  bool symmetric_;
  SparseMatrix stiffness_;
  SolverOptions options_;
  double epsilon_;
  std::string key_;
  std::vector<std::string> warnings_;
  std::vector<int> constrained_;
  Eigen::VectorXd pin_weights_;
  mutable std::mutex factor_mutex_;
  mutable std::unique_ptr<LinearSolver> solver_;
};

using OperatorPtr = std::shared_ptr<const AssembledOperator>;

/// Warns (without failing) when an oscillating coefficient has fewer than
/// 8 cells per period.
OperatorPtr assemble(const ScaledCoefficient& coeff, GridPtr grid, ConstraintMode mode, SolverOptions options = {});
OperatorPtr assemble(const Tensor4& tensor, GridPtr grid, ConstraintMode mode, SolverOptions options = {});

/// Dirichlet problem: weak equation at interior nodes, u = bdata on ∂Ω.
Field solve_dirichlet(const AssembledOperator& op, const Load& load, const BoundaryField& bdata);
Field solve_dirichlet(const AssembledOperator& op, const Load& load);

/// Neumann problem with the boundary fluxes already in `load`. Rejects
/// incompatible data; the result satisfies the pin functional = 0.
Field solve_neumann(const AssembledOperator& op, const Load& load);
Field solve_neumann(const AssembledOperator& op, const Load& source, const BoundaryField& flux);

/// K u − ℓ
Eigen::VectorXd weak_residual(const AssembledOperator& op, const Field& u, const Load& load);

/// Variational conormal derivative: moments r = (K u − ℓ) at boundary dofs,
/// nodal values r / arc-length weight, corners averaged from neighbours.
struct BoundaryFlux {
  BoundaryField nodal;
  Eigen::VectorXd moments;
  double total(int alpha) const;
};

BoundaryFlux conormal(const Field& u, const AssembledOperator& op, const Load& source);

}  // namespace homoglab
