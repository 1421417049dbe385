#include "homoglab/correctors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "homoglab/calculus.hpp"
#include "homoglab/error.hpp"

namespace homoglab {

namespace {

MeshPtr domain_of(const AssembledOperator& op, const char* who) {
  auto mesh = std::dynamic_pointer_cast<const DomainMesh>(op.grid_ptr());
  require(mesh != nullptr, std::string(who) + ": operator is not on a DomainMesh");
  return mesh;
}

bool away_from_corners(const DomainMesh& mesh, int node) {
  return DomainMesh::corner_dist(mesh.point(node)) >= 4.0 * mesh.h() * (1.0 - 1e-12);
}

}  // namespace

Field linear_monomial(GridPtr grid, int m, int j, int beta) {
  require(j == 0 || j == 1, "linear_monomial: j must be 0 or 1");
  require(beta >= 0 && beta < m, "linear_monomial: beta out of range");
  Field p(std::move(grid), m);
  for (int a = 0; a < p.node_count(); ++a) p(a, beta) = p.grid->point(a)[static_cast<std::size_t>(j)];
  return p;
}

int default_pin(const DomainMesh& mesh) { return mesh.nearest_node({0.5, 0.5}); }

std::vector<Field> dirichlet_correctors(const AssembledOperator& op) {
  require(op.mode() == ConstraintMode::dirichlet, "dirichlet_correctors: operator not in Dirichlet mode");
  MeshPtr mesh = domain_of(op, "dirichlet_correctors");
  const int m = op.components();
  const Load zero(mesh, m);
  std::vector<Field> out;
  for (int j = 0; j < 2; ++j)
    for (int beta = 0; beta < m; ++beta) {
      BoundaryField g(mesh, m);
      for (int b = 0; b < mesh->boundary_count(); ++b)
        g(b, beta) = mesh->point(mesh->boundary_node(b).node)[static_cast<std::size_t>(j)];
      out.push_back(solve_dirichlet(op, zero, g));
    }
  return out;
}

std::vector<Field> neumann_correctors(const AssembledOperator& op, const Tensor4& hat_a, int pin_node) {
  require(op.mode() == ConstraintMode::neumann, "neumann_correctors: operator not in Neumann mode");
  MeshPtr mesh = domain_of(op, "neumann_correctors");
  const int m = op.components();
  require(hat_a.dim() == 2 && hat_a.components() == m, "neumann_correctors: hat_a shape");
  require(pin_node >= 0 && pin_node < mesh->node_count() && !mesh->on_boundary(pin_node),
          "neumann_correctors: pin must be an interior node");
  const Point x0 = mesh->point(pin_node);
  std::vector<Field> out;
  for (int j = 0; j < 2; ++j)
    for (int beta = 0; beta < m; ++beta) {
      Load load(mesh, m);
      add_boundary_flux(load, [&](const Point&, const Point& n, std::span<double> g) {
        for (int al = 0; al < m; ++al) g[al] = n[0] * hat_a(0, j, al, beta) + n[1] * hat_a(1, j, al, beta);
      });
      Field psi = solve_neumann(op, load);
      for (int al = 0; al < m; ++al) {
        const double target = al == beta ? x0[static_cast<std::size_t>(j)] : 0.0;
        const double shift = target - psi(pin_node, al);
        for (int a = 0; a < psi.node_count(); ++a) psi(a, al) += shift;
        psi(pin_node, al) = target;
      }
      out.push_back(std::move(psi));
    }
  return out;
}

CorrectorSet corrector_set(const AssembledOperator& dirichlet, const AssembledOperator& adjoint,
                           const AssembledOperator* neumann, const Tensor4& hat_a, int pin_node) {
  CorrectorSet set;
  set.mesh = domain_of(dirichlet, "corrector_set");
  require(adjoint.grid_ptr() == dirichlet.grid_ptr(), "corrector_set: operators on different meshes");
  set.epsilon = dirichlet.epsilon();
  set.m = dirichlet.components();
  set.phi = dirichlet_correctors(dirichlet);
  set.phi_star = &adjoint == &dirichlet ? set.phi : dirichlet_correctors(adjoint);
  if (neumann != nullptr) {
    require(neumann->symmetric(), "corrector_set: Neumann correctors need a symmetric coefficient");
    require(neumann->grid_ptr() == dirichlet.grid_ptr(), "corrector_set: operators on different meshes");
    set.pin_node = pin_node >= 0 ? pin_node : default_pin(*set.mesh);
    set.psi = neumann_correctors(*neumann, hat_a, set.pin_node);
  }
  return set;
}

CorrectorSet corrector_set(const ScaledCoefficient& coeff, const Tensor4& hat_a, MeshPtr mesh, bool with_neumann,
                           SolverOptions options) {
  require(!with_neumann || coeff.symmetric(), "corrector_set: Neumann correctors need a symmetric coefficient");
  auto op = assemble(coeff, mesh, ConstraintMode::dirichlet, options);
  OperatorPtr adj = coeff.symmetric() ? op : assemble(coeff.adjoint(), mesh, ConstraintMode::dirichlet, options);
  OperatorPtr neu = with_neumann ? assemble(coeff, mesh, ConstraintMode::neumann, options) : nullptr;
  return corrector_set(*op, *adj, neu.get(), hat_a, -1);
}

CorrectorFamilyBounds family_bounds(const std::vector<Field>& v, const std::vector<Field>& eps_chi, double epsilon) {
  CorrectorFamilyBounds out;
  if (v.empty()) return out;
  auto mesh = std::dynamic_pointer_cast<const DomainMesh>(v.front().grid);
  require(mesh != nullptr, "family_bounds: fields must live on a DomainMesh");
  const int m = v.front().m;
  const bool with_chi = !eps_chi.empty();
  if (!with_chi) {
    out.first_order_sup = std::numeric_limits<double>::quiet_NaN();
    out.layer_sup = std::numeric_limits<double>::quiet_NaN();
  } else {
    require(eps_chi.size() == v.size(), "family_bounds: cell table has the wrong number of columns");
  }
  auto interior = [&](int a) { return DomainMesh::dist(mesh->point(a)) >= 0.1 - 1e-12; };
  auto uncornered = [&](int a) { return away_from_corners(*mesh, a); };
  for (std::size_t c = 0; c < v.size(); ++c) {
    const int j = static_cast<int>(c) / m, beta = static_cast<int>(c) % m;
    const Field p = linear_monomial(mesh, m, j, beta);
    Field dev = v[c];
    dev.values -= p.values;
    out.grad_sup = std::max(out.grad_sup, sup_over(recover_gradient(v[c]), interior));
    out.deviation_sup = std::max(out.deviation_sup, sup_over(dev, uncornered));
    if (!with_chi) continue;
    dev.values -= eps_chi[c].values;
    const Field g = recover_gradient(dev);
    out.first_order_sup = std::max(out.first_order_sup, sup_over(g, interior));
    for (int a = 0; a < g.node_count(); ++a) {
      if (!uncornered(a)) continue;
      double s = 0.0;
      for (int k = 0; k < g.m; ++k) s += g(a, k) * g(a, k);
      const double weight = std::max(1.0, DomainMesh::dist(mesh->point(a)) / epsilon);
      out.layer_sup = std::max(out.layer_sup, std::sqrt(s) * weight);
    }
  }
  return out;
}

CorrectorReport corrector_report(const CorrectorSet& set, const CellSolution& cell, const CellSolution* adjoint_cell) {
  require(set.m == cell.m, "corrector_report: component mismatch");
  require(set.epsilon > 0.0 || cell.coeff->family() == Family::constant,
          "corrector_report: corrector set has no period length");
  const double eps = set.epsilon > 0.0 ? set.epsilon : 1.0;
  CorrectorReport r;
  r.epsilon = set.epsilon;
  const auto chi = scaled_correctors(cell, set.mesh, eps);
  r.phi = family_bounds(set.phi, chi, eps);
  if (adjoint_cell == nullptr && cell.coeff->symmetric()) adjoint_cell = &cell;
  r.phi_star = adjoint_cell != nullptr ? family_bounds(set.phi_star, scaled_correctors(*adjoint_cell, set.mesh, eps), eps)
                                       : family_bounds(set.phi_star, {}, eps);
  if (!set.psi.empty()) {
    r.has_psi = true;
    r.psi = family_bounds(set.psi, chi, eps);
  }
  return r;
}

}  // namespace homoglab
