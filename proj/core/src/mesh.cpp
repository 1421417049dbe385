#include "homoglab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "homoglab/error.hpp"

namespace homoglab {

Grid::Grid(int n, bool periodic) : n_(n), h_(1.0 / n), periodic_(periodic) {
  require(n >= 1, "grid: need at least one cell per axis");
}

int Grid::node(int i, int j) const {
  const int p = nodes_per_axis();
  if (periodic_) {
    i = ((i % p) + p) % p;
    j = ((j % p) + p) % p;
  }
  return j * p + i;
}

std::array<int, 4> Grid::element_nodes(int ex, int ey) const {
  return {node(ex, ey), node(ex + 1, ey), node(ex + 1, ey + 1), node(ex, ey + 1)};
}

int Grid::nearest_node(const Point& x) const {
  int i = static_cast<int>(std::lround(x[0] / h_));
  int j = static_cast<int>(std::lround(x[1] / h_));
  if (!periodic_) {
    i = std::clamp(i, 0, n_);
    j = std::clamp(j, 0, n_);
  }
  return node(i, j);
}

TorusGrid::TorusGrid(int n) : Grid(n, true) {}

DomainMesh::DomainMesh(int n) : Grid(n, false), boundary_index_(static_cast<std::size_t>(node_count()), -1) {
  boundary_.reserve(static_cast<std::size_t>(4 * n));
  const double hh = h();
  auto push = [&](int i, int j, Point normal) {
    BoundaryNode b;
    b.node = node(i, j);
    b.s = static_cast<double>(boundary_.size()) * hh;
    b.corner = (i == 0 || i == n) && (j == 0 || j == n);
    b.normal = b.corner ? Point{0.0, 0.0} : normal;
    b.weight = hh;
    boundary_index_[static_cast<std::size_t>(b.node)] = static_cast<int>(boundary_.size());
    boundary_.push_back(b);
  };
  for (int i = 0; i < n; ++i) push(i, 0, {0.0, -1.0});
  for (int j = 0; j < n; ++j) push(n, j, {1.0, 0.0});
  for (int i = n; i > 0; --i) push(i, n, {0.0, 1.0});
  for (int j = n; j > 0; --j) push(0, j, {-1.0, 0.0});
}

double DomainMesh::dist(const Point& x) {
  return std::max(0.0, std::min({x[0], 1.0 - x[0], x[1], 1.0 - x[1]}));
}

double DomainMesh::corner_dist(const Point& x) {
  double best = std::numeric_limits<double>::infinity();
  for (double cx : {0.0, 1.0})
    for (double cy : {0.0, 1.0}) best = std::min(best, std::hypot(x[0] - cx, x[1] - cy));
  return best;
}

Field::Field(GridPtr g, int components) : grid(std::move(g)), m(components) {
  require(grid != nullptr && m >= 1, "Field: null grid or no components");
  values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid->node_count()) * m);
}

Field::Field(GridPtr g, int components, Eigen::VectorXd v) : grid(std::move(g)), m(components), values(std::move(v)) {
  require(grid != nullptr && m >= 1, "Field: null grid or no components");
  require(values.size() == static_cast<Eigen::Index>(grid->node_count()) * m, "Field: value count != m * node count");
}

double Field::interpolate(const Point& x, int alpha) const {
  const Grid& g = *grid;
  const int n = g.n();
  double px = x[0] * n, py = x[1] * n;
  if (g.periodic()) {
    px -= std::floor(px / n) * n;
    py -= std::floor(py / n) * n;
  }
  int ex = std::clamp(static_cast<int>(std::floor(px)), 0, n - 1);
  int ey = std::clamp(static_cast<int>(std::floor(py)), 0, n - 1);
  const double sx = px - ex, sy = py - ey;
  const auto nd = g.element_nodes(ex, ey);
  return (1 - sx) * (1 - sy) * (*this)(nd[0], alpha) + sx * (1 - sy) * (*this)(nd[1], alpha) +
         sx * sy * (*this)(nd[2], alpha) + (1 - sx) * sy * (*this)(nd[3], alpha);
}

BoundaryField::BoundaryField(MeshPtr msh, int components) : mesh(std::move(msh)), m(components) {
  require(mesh != nullptr && m >= 1, "BoundaryField: null mesh or no components");
  values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh->boundary_count()) * m);
}

Field interpolate(GridPtr grid, int components, const std::function<void(const Point&, std::span<double>)>& f) {
  Field u(std::move(grid), components);
  for (int a = 0; a < u.node_count(); ++a)
    f(u.grid->point(a), std::span<double>(u.values.data() + static_cast<std::ptrdiff_t>(a) * components,
                                          static_cast<std::size_t>(components)));
  return u;
}

Field interpolate(GridPtr grid, const std::function<double(const Point&)>& f) {
  Field u(std::move(grid), 1);
  for (int a = 0; a < u.node_count(); ++a) u.values[a] = f(u.grid->point(a));
  return u;
}

BoundaryField boundary_interpolate(MeshPtr mesh, const std::function<double(const Point&)>& f) {
  BoundaryField g(mesh, 1);
  for (int b = 0; b < mesh->boundary_count(); ++b) g.values[b] = f(mesh->point(mesh->boundary_node(b).node));
  return g;
}

BoundaryField trace(const Field& u) {
  auto mesh = std::dynamic_pointer_cast<const DomainMesh>(u.grid);
  require(mesh != nullptr, "trace: field does not live on a DomainMesh");
  BoundaryField g(mesh, u.m);
  for (int b = 0; b < mesh->boundary_count(); ++b)
    for (int a = 0; a < u.m; ++a) g(b, a) = u(mesh->boundary_node(b).node, a);
  return g;
}

}  // namespace homoglab
