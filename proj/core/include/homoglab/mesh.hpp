#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace homoglab {

using Point = std::array<double, 2>;

/// Uniform tensor grid of n×n bilinear elements on the unit square.
///
/// Periodic grids identify opposite sides (n² nodes); bounded grids keep
/// them distinct ((n+1)² nodes). Node (i, j) sits at (i h, j h).
class Grid {
 public:
  Grid(int n, bool periodic);
  virtual ~Grid() = default;

  int n() const { return n_; }
  double h() const { return h_; }
  bool periodic() const { return periodic_; }
  int nodes_per_axis() const { return periodic_ ? n_ : n_ + 1; }
  int node_count() const { return nodes_per_axis() * nodes_per_axis(); }
  int element_count() const { return n_ * n_; }

  /// Node index of lattice point (i, j); wraps on periodic grids.
  int node(int i, int j) const;
  int node_i(int node) const { return node % nodes_per_axis(); }
  int node_j(int node) const { return node / nodes_per_axis(); }
  Point point(int node) const { return {node_i(node) * h_, node_j(node) * h_}; }
  /// Counterclockwise from the lower-left corner.
  std::array<int, 4> element_nodes(int ex, int ey) const;
  /// Nearest node to x (bounded grids clamp, periodic grids wrap).
  int nearest_node(const Point& x) const;

 private:
  int n_;
  double h_;
  bool periodic_;
};

/// The unit torus Y = [0, 1)².
class TorusGrid : public Grid {
 public:
  explicit TorusGrid(int n);
};

struct BoundaryNode {
  int node = 0;
  /// Arc length from (0, 0), counterclockwise.
  double s = 0.0;
  /// Outward unit normal; zero at corners.
  Point normal{0.0, 0.0};
  bool corner = false;
  /// Trapezoid arc-length weight.
  double weight = 0.0;
};

/// Ω = [0, 1]² with boundary structure.
class DomainMesh : public Grid {
 public:
  explicit DomainMesh(int n);

  int boundary_count() const { return static_cast<int>(boundary_.size()); }
  const std::vector<BoundaryNode>& boundary() const { return boundary_; }
  const BoundaryNode& boundary_node(int b) const { return boundary_[static_cast<std::size_t>(b)]; }
  /// Position in the boundary list, or -1 for interior nodes.
  int boundary_index(int node) const { return boundary_index_[static_cast<std::size_t>(node)]; }
  bool on_boundary(int node) const { return boundary_index(node) >= 0; }
  /// Boundary neighbours (previous, next) in the counterclockwise order.
  int boundary_prev(int b) const { return (b + boundary_count() - 1) % boundary_count(); }
  int boundary_next(int b) const { return (b + 1) % boundary_count(); }

  /// dist(x, ∂Ω)
  static double dist(const Point& x);
  /// Distance to the nearest corner of the square.
  static double corner_dist(const Point& x);

 private:
  std::vector<BoundaryNode> boundary_;
  std::vector<int> boundary_index_;
};

using GridPtr = std::shared_ptr<const Grid>;
using MeshPtr = std::shared_ptr<const DomainMesh>;

/// Nodal field with m components; dof of (node, α) is node·m + α.
struct Field {
  GridPtr grid;
  int m = 1;
  Eigen::VectorXd values;

  Field() = default;
  Field(GridPtr g, int components);
  Field(GridPtr g, int components, Eigen::VectorXd v);

  double& operator()(int node, int alpha) { return values[node * m + alpha]; }
  double operator()(int node, int alpha) const { return values[node * m + alpha]; }
  int node_count() const { return grid->node_count(); }

  /// Bilinear interpolant at x (wrapped on periodic grids).
  double interpolate(const Point& x, int alpha) const;
  bool finite() const { return values.allFinite(); }
};

/// Field sampled at the boundary nodes of a DomainMesh, in boundary order.
struct BoundaryField {
  MeshPtr mesh;
  int m = 1;
  Eigen::VectorXd values;

  BoundaryField() = default;
  BoundaryField(MeshPtr msh, int components);

  double& operator()(int b, int alpha) { return values[b * m + alpha]; }
  double operator()(int b, int alpha) const { return values[b * m + alpha]; }
  int size() const { return mesh->boundary_count(); }
};

/// Nodal interpolation of an analytic function.
Field interpolate(GridPtr grid, int components, const std::function<void(const Point&, std::span<double>)>& f);
Field interpolate(GridPtr grid, const std::function<double(const Point&)>& f);
BoundaryField boundary_interpolate(MeshPtr mesh, const std::function<double(const Point&)>& f);
/// Boundary trace of a domain field.
BoundaryField trace(const Field& u);

}  // namespace homoglab
