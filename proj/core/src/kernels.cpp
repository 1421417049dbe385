#include "homoglab/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "homoglab/error.hpp"

namespace homoglab {

namespace {

MeshPtr domain_of(const AssembledOperator& op, const char* who) {
  auto mesh = std::dynamic_pointer_cast<const DomainMesh>(op.grid_ptr());
  require(mesh != nullptr, std::string(who) + ": operator is not on a DomainMesh");
  return mesh;
}

BoundaryField nodal_from_moments(const MeshPtr& mesh, int m, const Eigen::VectorXd& moments) {
  BoundaryField out(mesh, m);
  for (int b = 0; b < mesh->boundary_count(); ++b)
    for (int al = 0; al < m; ++al) out(b, al) = moments[b * m + al] / mesh->boundary_node(b).weight;
  for (int b = 0; b < mesh->boundary_count(); ++b) {
    if (!mesh->boundary_node(b).corner) continue;
    const int p = mesh->boundary_prev(b), q = mesh->boundary_next(b);
    for (int al = 0; al < m; ++al) out(b, al) = 0.5 * (out(p, al) + out(q, al));
  }
  return out;
}

}  // namespace

Field green(const AssembledOperator& dirichlet, int y_node, int beta) {
  require(dirichlet.mode() == ConstraintMode::dirichlet, "green: operator not in Dirichlet mode");
  MeshPtr mesh = domain_of(dirichlet, "green");
  require(y_node >= 0 && y_node < mesh->node_count(), "green: source node out of range");
  require(!mesh->on_boundary(y_node), "green: source must be an interior node");
  require(beta >= 0 && beta < dirichlet.components(), "green: beta out of range");
  return solve_dirichlet(dirichlet, point_load(mesh, dirichlet.components(), y_node, beta));
}

Field neumann_fn(const AssembledOperator& neumann, int y_node, int beta) {
  require(neumann.mode() == ConstraintMode::neumann, "neumann_fn: operator not in Neumann mode");
  require(neumann.symmetric(), "neumann_fn: the Neumann function needs a symmetric coefficient");
  MeshPtr mesh = domain_of(neumann, "neumann_fn");
  require(y_node >= 0 && y_node < mesh->node_count(), "neumann_fn: source node out of range");
  require(!mesh->on_boundary(y_node), "neumann_fn: source must be an interior node");
  const int m = neumann.components();
  require(beta >= 0 && beta < m, "neumann_fn: beta out of range");
  Load load = point_load(mesh, m, y_node, beta);
  BoundaryField flux(mesh, m);
  for (int b = 0; b < mesh->boundary_count(); ++b) flux(b, beta) = -0.25;
  add_boundary_flux(load, flux);
  return solve_neumann(neumann, load);
}

Field poisson_kernel(const AssembledOperator& dirichlet, int b, int beta) {
  require(dirichlet.mode() == ConstraintMode::dirichlet, "poisson_kernel: operator not in Dirichlet mode");
  MeshPtr mesh = domain_of(dirichlet, "poisson_kernel");
  require(b >= 0 && b < mesh->boundary_count(), "poisson_kernel: boundary index out of range");
  require(!mesh->boundary_node(b).corner, "poisson_kernel: corner nodes carry no kernel");
  const int m = dirichlet.components();
  require(beta >= 0 && beta < m, "poisson_kernel: beta out of range");
  BoundaryField g(mesh, m);
  g(b, beta) = 1.0 / mesh->boundary_node(b).weight;
  return solve_dirichlet(dirichlet, Load(mesh, m), g);
}

std::string_view to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::green: return "green";
    case KernelKind::neumann_fn: return "neumann-fn";
    default: return "poisson";
  }
}

KernelTable kernel_table(KernelKind kind, const AssembledOperator& op, const std::vector<int>& sources, int beta) {
  KernelTable t;
  t.kind = kind;
  t.epsilon = op.epsilon();
  t.mesh = domain_of(op, "kernel_table");
  t.sources = sources;
  t.beta = beta;
  for (int s : sources) {
    switch (kind) {
      case KernelKind::green: t.columns.push_back(green(op, s, beta)); break;
      case KernelKind::neumann_fn: t.columns.push_back(neumann_fn(op, s, beta)); break;
      case KernelKind::poisson: t.columns.push_back(poisson_kernel(op, s, beta)); break;
    }
  }
  return t;
}

bool kernel_trusted(const DomainMesh& mesh, const Point& x, const Point& y) {
  return std::hypot(x[0] - y[0], x[1] - y[1]) >= std::max(4.0 * mesh.h(), 0.02) * (1.0 - 1e-12);
}

OmegaTable omega(const ScaledCoefficient& coeff, const Tensor4& hat_a, const CorrectorSet& set,
                 const AssembledOperator& adjoint) {
  const int m = set.m;
  require(coeff.components() == m && hat_a.components() == m, "omega: component mismatch");
  require(set.phi_star.size() == static_cast<std::size_t>(2 * m), "omega: corrector set has no adjoint correctors");
  require(adjoint.grid_ptr() == set.mesh, "omega: adjoint operator on a different mesh");
  const MeshPtr& mesh = set.mesh;
  const Load zero(mesh, m);
  // flux[k·m + σ] is the conormal of Φ*_k^{·σ} under A*.
  std::vector<BoundaryField> flux;
  for (const Field& col : set.phi_star) flux.push_back(conormal(col, adjoint, zero).nodal);

  OmegaTable t{BoundaryField(mesh, m * m), BoundaryField(mesh, m * m), m};
  Tensor4 a(2, m);
  for (int b = 0; b < mesh->boundary_count(); ++b) {
    const BoundaryNode& bn = mesh->boundary_node(b);
    if (bn.corner) continue;
    const Point x = mesh->point(bn.node);
    coeff.evaluate(x, a);
    const Eigen::MatrixXd nn = a.normal_block(bn.normal);
    const Eigen::MatrixXd n0 = hat_a.normal_block(bn.normal);
    require(std::abs(n0.determinant()) > 1e-14, "omega: singular normal block of the homogenized tensor");
    const Eigen::MatrixXd h = n0.inverse();
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(m, m);
    for (int k = 0; k < 2; ++k)
      for (int sg = 0; sg < m; ++sg)
        for (int rho = 0; rho < m; ++rho)
          c(rho, sg) += bn.normal[static_cast<std::size_t>(k)] * flux[static_cast<std::size_t>(k * m + sg)](b, rho);
    const Eigen::MatrixXd d = nn.transpose().partialPivLu().solve(c);
    const Eigen::MatrixXd w = h * d.transpose() * nn;
    for (int g = 0; g < m; ++g)
      for (int be = 0; be < m; ++be) {
        t.omega(b, g * m + be) = w(g, be);
        t.h(b, g * m + be) = h(g, be);
      }
  }
  for (int b = 0; b < mesh->boundary_count(); ++b) {
    if (!mesh->boundary_node(b).corner) continue;
    const int p = mesh->boundary_prev(b), q = mesh->boundary_next(b);
    for (int c = 0; c < m * m; ++c) {
      t.omega(b, c) = 0.5 * (t.omega(p, c) + t.omega(q, c));
      t.h(b, c) = 0.5 * (t.h(p, c) + t.h(q, c));
    }
  }
  return t;
}

BoundaryField apply_dtn(const AssembledOperator& dirichlet, const BoundaryField& f) {
  require(dirichlet.mode() == ConstraintMode::dirichlet, "apply_dtn: operator not in Dirichlet mode");
  MeshPtr mesh = domain_of(dirichlet, "apply_dtn");
  require(f.m == dirichlet.components() && f.values.size() == mesh->boundary_count() * f.m, "apply_dtn: data shape");
  const Load zero(mesh, f.m);
  return conormal(solve_dirichlet(dirichlet, zero, f), dirichlet, zero).nodal;
}

BoundaryField DtNMatrix::apply(const BoundaryField& f) const {
  require(f.m == m && f.values.size() == moments.cols(), "DtNMatrix::apply: data shape");
  return nodal_from_moments(mesh, m, moments * f.values);
}

DtNMatrix dtn(const AssembledOperator& dirichlet) {
  require(dirichlet.mode() == ConstraintMode::dirichlet, "dtn: operator not in Dirichlet mode");
  DtNMatrix t;
  t.mesh = domain_of(dirichlet, "dtn");
  t.epsilon = dirichlet.epsilon();
  t.m = dirichlet.components();
  const int size = t.mesh->boundary_count() * t.m;
  t.moments.resize(size, size);
  const Load zero(t.mesh, t.m);
  for (int c = 0; c < size; ++c) {
    BoundaryField g(t.mesh, t.m);
    g.values[c] = 1.0;
    t.moments.col(c) = conormal(solve_dirichlet(dirichlet, zero, g), dirichlet, zero).moments;
  }
  return t;
}

BoundaryField times(const BoundaryField& f, const BoundaryField& g) {
  require(f.m == 1 && g.m == 1 && f.mesh == g.mesh, "times: scalar fields on the same mesh expected");
  BoundaryField out(f.mesh, 1);
  out.values = f.values.cwiseProduct(g.values);
  return out;
}

BoundaryField product_commutator(const DtNApply& dtn, const BoundaryField& f, const BoundaryField& g) {
  BoundaryField out = dtn(times(f, g));
  out.values -= f.values.cwiseProduct(dtn(g).values);
  return out;
}

BoundaryField coordinate_commutator(const DtNApply& dtn, const BoundaryField& f, int i) {
  require(i == 0 || i == 1, "coordinate_commutator: i must be 0 or 1");
  const BoundaryField xi = boundary_interpolate(f.mesh, [i](const Point& x) { return x[static_cast<std::size_t>(i)]; });
  return product_commutator(dtn, xi, f);
}

Commutators leibniz_commutators(const DtNApply& dtn, const BoundaryField& f, const BoundaryField& g, int i) {
  return {product_commutator(dtn, f, g), coordinate_commutator(dtn, f, i)};
}

}  // namespace homoglab
