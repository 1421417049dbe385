#pragma once

#include <functional>

#include "homoglab/mesh.hpp"

namespace homoglab {

/// Nodal gradient: component k·m + α holds ∂_k u^α.
///
/// Centered differences at interior nodes (the average of the adjacent
/// element gradients); second-order one-sided differences across the
/// boundary of a bounded grid.
Field recover_gradient(const Field& u);

/// Recovery applied twice: component (l·2 + k)·m + α holds ∂_l ∂_k u^α.
Field recover_hessian(const Field& u);
inline int hessian_index(int l, int k, int alpha, int m) { return (l * 2 + k) * m + alpha; }

/// Arc-length derivative along the counterclockwise boundary; zero at corners.
BoundaryField arc_derivative(const BoundaryField& f);
/// ∂f/∂t_ij = n_i ∂_j f − n_j ∂_i f on non-corner nodes, zero at corners.
BoundaryField tangential_derivative(const BoundaryField& f, int i, int j);

enum class NormKind { lp, w1p, grad_lp, lp_boundary, h1_boundary, weighted_grad };

/// Gauss quadrature of the bilinear interpolant; p = ∞ takes nodal (or
/// element-corner) maxima. Component values are combined in the Euclidean norm.
double norm(const Field& u, NormKind kind, double p = 2.0);
/// Boundary norms: lumped arc-length weights on non-corner nodes for
/// lp_boundary, exact piecewise-linear integrals for h1_boundary.
double norm(const BoundaryField& g, NormKind kind, double p = 2.0);
/// ‖u‖₂^{1/2} ‖u‖_{H¹}^{1/2}
double h_half_proxy(const Field& u);

/// max over nodes passing `keep` of the Euclidean norm of the nodal vector.
double sup_over(const Field& u, const std::function<bool(int node)>& keep);
double sup_over(const BoundaryField& g, const std::function<bool(int b)>& keep);

}  // namespace homoglab
