#include "homoglab/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "homoglab/assembly.hpp"
#include "homoglab/error.hpp"

namespace homoglab {

namespace {

void check_finite(const Eigen::VectorXd& v) {
  if (!v.allFinite()) throw InvalidArgument("norm: field contains non-finite values");
}

}  // namespace

Field recover_gradient(const Field& u) {
  const Grid& g = *u.grid;
  const int m = u.m;
  const int p = g.nodes_per_axis();
  require(g.n() >= 2, "recover_gradient: need at least two cells per axis");
  const double h = g.h();
  Field out(u.grid, 2 * m);
  auto diff = [&](int i, int j, int di, int dj, int al) {
    // derivative along (di, dj) at node (i, j)
    const int pos = di ? i : j;
    if (g.periodic() || (pos > 0 && pos < p - 1))
      return (u(g.node(i + di, j + dj), al) - u(g.node(i - di, j - dj), al)) / (2 * h);
    if (pos == 0)
      return (-3 * u(g.node(i, j), al) + 4 * u(g.node(i + di, j + dj), al) - u(g.node(i + 2 * di, j + 2 * dj), al)) /
             (2 * h);
    return (3 * u(g.node(i, j), al) - 4 * u(g.node(i - di, j - dj), al) + u(g.node(i - 2 * di, j - 2 * dj), al)) /
           (2 * h);
  };
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < p; ++i) {
      const int a = g.node(i, j);
      for (int al = 0; al < m; ++al) {
        out(a, al) = diff(i, j, 1, 0, al);
        out(a, m + al) = diff(i, j, 0, 1, al);
      }
    }
  return out;
}

Field recover_hessian(const Field& u) { return recover_gradient(recover_gradient(u)); }

BoundaryField arc_derivative(const BoundaryField& f) {
  const DomainMesh& mesh = *f.mesh;
  BoundaryField out(f.mesh, f.m);
  const double h = mesh.h();
  for (int b = 0; b < f.size(); ++b) {
    if (mesh.boundary_node(b).corner) continue;
    const int p = mesh.boundary_prev(b), q = mesh.boundary_next(b);
    for (int al = 0; al < f.m; ++al) out(b, al) = (f(q, al) - f(p, al)) / (2 * h);
  }
  return out;
}

BoundaryField tangential_derivative(const BoundaryField& f, int i, int j) {
  require(i >= 0 && i < 2 && j >= 0 && j < 2, "tangential_derivative: index out of range");
  BoundaryField ds = arc_derivative(f);
  for (int b = 0; b < f.size(); ++b) {
    const Point n = f.mesh->boundary_node(b).normal;
    const Point t{-n[1], n[0]};
    const double c = n[static_cast<std::size_t>(i)] * t[static_cast<std::size_t>(j)] -
                     n[static_cast<std::size_t>(j)] * t[static_cast<std::size_t>(i)];
    for (int al = 0; al < f.m; ++al) ds(b, al) *= c;
  }
  return ds;
}

double norm(const Field& u, NormKind kind, double p) {
  require(p >= 1.0, "norm: p must be >= 1");
  check_finite(u.values);
  const int m = u.m;
  const bool inf = std::isinf(p);
  const Grid& g = *u.grid;

  switch (kind) {
    case NormKind::lp_boundary:
    case NormKind::h1_boundary:
      return norm(trace(u), kind, p);
    case NormKind::lp: {
      if (inf) return sup_over(u, [](int) { return true; });
      double acc = 0.0;
      for_each_quad_point(g, [&](const QuadPoint& q) {
        double s = 0.0;
        for (int al = 0; al < m; ++al) {
          double v = 0.0;
          for (int a = 0; a < 4; ++a) v += q.phi[static_cast<std::size_t>(a)] * u(q.nodes[static_cast<std::size_t>(a)], al);
          s += v * v;
        }
        acc += q.weight * std::pow(s, p / 2);
      });
      return std::pow(acc, 1.0 / p);
    }
    case NormKind::grad_lp:
    case NormKind::weighted_grad: {
      if (kind == NormKind::weighted_grad) p = 2.0;
      if (inf) {
        double best = 0.0;
        const double h = g.h();
        for (int ey = 0; ey < g.n(); ++ey)
          for (int ex = 0; ex < g.n(); ++ex) {
            const auto nd = g.element_nodes(ex, ey);
            for (int c = 0; c < 4; ++c) {
              const double xi = (c == 1 || c == 2) ? 1.0 : 0.0, eta = (c >= 2) ? 1.0 : 0.0;
              double s = 0.0;
              for (int al = 0; al < m; ++al) {
                const double u0 = u(nd[0], al), u1 = u(nd[1], al), u2 = u(nd[2], al), u3 = u(nd[3], al);
                const double gx = ((1 - eta) * (u1 - u0) + eta * (u2 - u3)) / h;
                const double gy = ((1 - xi) * (u3 - u0) + xi * (u2 - u1)) / h;
                s += gx * gx + gy * gy;
              }
              best = std::max(best, std::sqrt(s));
            }
          }
        return best;
      }
      double acc = 0.0;
      for_each_quad_point(g, [&](const QuadPoint& q) {
        double s = 0.0;
        for (int al = 0; al < m; ++al)
          for (int k = 0; k < 2; ++k) {
            double v = 0.0;
            for (int a = 0; a < 4; ++a)
              v += q.dphi[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)] * u(q.nodes[static_cast<std::size_t>(a)], al);
            s += v * v;
          }
        const double w = (kind == NormKind::weighted_grad) ? DomainMesh::dist(q.x) : 1.0;
        acc += q.weight * w * std::pow(s, p / 2);
      });
      return std::pow(acc, 1.0 / p);
    }
    case NormKind::w1p: {
      const double a = norm(u, NormKind::lp, p), b = norm(u, NormKind::grad_lp, p);
      if (inf) return std::max(a, b);
      return std::pow(std::pow(a, p) + std::pow(b, p), 1.0 / p);
    }
  }
  return 0.0;
}

double norm(const BoundaryField& g, NormKind kind, double p) {
  require(p >= 1.0, "norm: p must be >= 1");
  check_finite(g.values);
  const DomainMesh& mesh = *g.mesh;
  const int m = g.m;
  auto mag2 = [&](int b) {
    double s = 0.0;
    for (int al = 0; al < m; ++al) s += g(b, al) * g(b, al);
    return s;
  };
  if (kind == NormKind::lp_boundary) {
    if (std::isinf(p)) return sup_over(g, [&](int b) { return !mesh.boundary_node(b).corner; });
    double acc = 0.0;
    for (int b = 0; b < g.size(); ++b) {
      const BoundaryNode& bn = mesh.boundary_node(b);
      if (!bn.corner) acc += bn.weight * std::pow(mag2(b), p / 2);
    }
    return std::pow(acc, 1.0 / p);
  }
  require(kind == NormKind::h1_boundary, "norm: only boundary kinds apply to boundary fields");
  const double h = mesh.h();
  double acc = 0.0;
  for (int b = 0; b < g.size(); ++b) {
    const int q = mesh.boundary_next(b);
    for (int al = 0; al < m; ++al) {
      const double x = g(b, al), y = g(q, al);
      acc += h / 3.0 * (x * x + x * y + y * y) + (y - x) * (y - x) / h;
    }
  }
  return std::sqrt(acc);
}

double h_half_proxy(const Field& u) {
  return std::sqrt(norm(u, NormKind::lp, 2.0) * norm(u, NormKind::w1p, 2.0));
}

double sup_over(const Field& u, const std::function<bool(int node)>& keep) {
  double best = 0.0;
  for (int a = 0; a < u.node_count(); ++a) {
    if (!keep(a)) continue;
    double s = 0.0;
    for (int al = 0; al < u.m; ++al) s += u(a, al) * u(a, al);
    best = std::max(best, std::sqrt(s));
  }
  return best;
}

double sup_over(const BoundaryField& g, const std::function<bool(int b)>& keep) {
  double best = 0.0;
  for (int b = 0; b < g.size(); ++b) {
    if (!keep(b)) continue;
    double s = 0.0;
    for (int al = 0; al < g.m; ++al) s += g(b, al) * g(b, al);
    best = std::max(best, std::sqrt(s));
  }
  return best;
}

}  // namespace homoglab
