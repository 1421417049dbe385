#include "homoglab/expand.hpp"

#include <algorithm>
#include <cmath>

#include "homoglab/calculus.hpp"
#include "homoglab/error.hpp"

namespace homoglab {

namespace {

MeshPtr domain_of(const GridPtr& grid, const char* who) {
  auto mesh = std::dynamic_pointer_cast<const DomainMesh>(grid);
  require(mesh != nullptr, std::string(who) + ": field is not on a DomainMesh");
  return mesh;
}

double node_norm(const BoundaryField& g, int b) {
  double s = 0.0;
  for (int al = 0; al < g.m; ++al) s += g(b, al) * g(b, al);
  return std::sqrt(s);
}

BoundaryField coordinate_trace(MeshPtr mesh, int j) {
  return boundary_interpolate(std::move(mesh), [j](const Point& x) { return x[static_cast<std::size_t>(j)]; });
}

}  // namespace

std::string_view to_string(CorrectorFamily family) {
  switch (family) {
    case CorrectorFamily::chi: return "chi";
    case CorrectorFamily::dirichlet: return "dirichlet";
    default: return "neumann";
  }
}

CorrectorFamily corrector_family_from_string(std::string_view tag) {
  if (tag == "chi") return CorrectorFamily::chi;
  if (tag == "dirichlet") return CorrectorFamily::dirichlet;
  if (tag == "neumann") return CorrectorFamily::neumann;
  throw InvalidArgument("unknown corrector family '" + std::string(tag) + "' (expected chi, dirichlet or neumann)");
}

std::vector<Field> family_columns(CorrectorFamily family, const CorrectorSet* set, const CellSolution* cell,
                                  MeshPtr mesh, double epsilon) {
  require(mesh != nullptr, "family_columns: null mesh");
  if (family == CorrectorFamily::chi) {
    require(cell != nullptr, "family_columns: the chi family needs a cell solution");
    require(epsilon > 0.0, "family_columns: epsilon must be positive");
    return scaled_correctors(*cell, mesh, epsilon);
  }
  require(set != nullptr, "family_columns: corrector family needs a corrector set");
  require(set->mesh == mesh, "family_columns: corrector set lives on another mesh");
  const auto& v = family == CorrectorFamily::dirichlet ? set->phi : set->psi;
  require(!v.empty(), "family_columns: corrector set has no " + std::string(to_string(family)) + " correctors");
  std::vector<Field> out;
  for (std::size_t c = 0; c < v.size(); ++c) {
    Field d = v[c];
    d.values -= linear_monomial(mesh, set->m, static_cast<int>(c) / set->m, static_cast<int>(c) % set->m).values;
    out.push_back(std::move(d));
  }
  return out;
}

Field compose_w(const Field& u_eps, const Field& u0, const std::vector<Field>& v_minus_p, const Field& grad_u0) {
  const int m = u0.m;
  require(u_eps.m == m && u_eps.values.size() == u0.values.size(), "compose_w: u_eps and u0 differ in shape");
  require(v_minus_p.size() == static_cast<std::size_t>(2 * m), "compose_w: expected 2m corrector columns");
  Field w = u_eps;
  w.values -= u0.values;
  for (int a = 0; a < w.node_count(); ++a)
    for (int k = 0; k < 2; ++k)
      for (int g = 0; g < m; ++g) {
        const Field& v = v_minus_p[static_cast<std::size_t>(k * m + g)];
        const double du = grad_u0(a, k * m + g);
        for (int al = 0; al < m; ++al) w(a, al) -= v(a, al) * du;
      }
  return w;
}

Expansion build_expansion(const Field& u_eps, const Field& u0, CorrectorFamily family,
                          std::vector<Field> v_minus_p, double epsilon) {
  domain_of(u0.grid, "build_expansion");
  require(u_eps.grid == u0.grid, "build_expansion: u_eps and u0 on different meshes");
  const int m = u0.m;
  Expansion e;
  e.u_eps = u_eps;
  e.u0 = u0;
  e.family = family;
  e.epsilon = epsilon;
  e.v_minus_p = std::move(v_minus_p);
  for (const Field& v : e.v_minus_p) require(v.grid == u0.grid && v.m == m, "build_expansion: corrector shape");
  e.grad_u0 = recover_gradient(u0);
  e.w = compose_w(u_eps, u0, e.v_minus_p, e.grad_u0);

  const Field gu = recover_gradient(u_eps);
  std::vector<Field> gv;
  for (const Field& v : e.v_minus_p) gv.push_back(recover_gradient(v));
  e.gradient_comparison = gu;
  for (int a = 0; a < gu.node_count(); ++a)
    for (int i = 0; i < 2; ++i)
      for (int al = 0; al < m; ++al) {
        double s = 0.0;
        for (int k = 0; k < 2; ++k)
          for (int g = 0; g < m; ++g) {
            const double dv = gv[static_cast<std::size_t>(k * m + g)](a, i * m + al) + (i == k && al == g ? 1.0 : 0.0);
            s += dv * e.grad_u0(a, k * m + g);
          }
        e.gradient_comparison(a, i * m + al) -= s;
      }
  return e;
}

IdentityResidual residual_identity_check(const Expansion& e, const AssembledOperator& op,
                                         const ScaledCoefficient& coeff, const CellSolution& cell,
                                         IdentityTerms terms, double margin) {
  MeshPtr mesh = domain_of(e.u0.grid, "residual_identity_check");
  require(op.grid_ptr() == e.u0.grid, "residual_identity_check: operator on another mesh");
  const int m = e.u0.m;
  require(cell.m == m && coeff.components() == m && op.components() == m, "residual_identity_check: components");
  const double eps = coeff.epsilon();
  const Field hess = recover_hessian(e.u0);
  const auto eps_chi = scaled_correctors(cell, mesh, eps);
  std::vector<Field> d;
  for (std::size_t c = 0; c < e.v_minus_p.size(); ++c) {
    Field x = e.v_minus_p[c];
    x.values -= eps_chi[c].values;
    d.push_back(std::move(x));
  }

  Load rhs(mesh, m);
  Tensor4 a(2, m);
  std::vector<double> hq(static_cast<std::size_t>(4 * m)), vq(static_cast<std::size_t>(2 * m * m)),
      gd(static_cast<std::size_t>(4 * m * m)), h(static_cast<std::size_t>(2 * m)), s(static_cast<std::size_t>(m));
  for_each_quad_point(*mesh, [&](const QuadPoint& q) {
    coeff.evaluate(q.x, a);
    std::fill(hq.begin(), hq.end(), 0.0);
    std::fill(vq.begin(), vq.end(), 0.0);
    std::fill(gd.begin(), gd.end(), 0.0);
    for (int n = 0; n < 4; ++n) {
      const int node = q.nodes[static_cast<std::size_t>(n)];
      const double p = q.phi[static_cast<std::size_t>(n)];
      const auto& dp = q.dphi[static_cast<std::size_t>(n)];
      for (int c = 0; c < 4 * m; ++c) hq[static_cast<std::size_t>(c)] += p * hess(node, c);
      for (int c = 0; c < 2 * m; ++c)
        for (int be = 0; be < m; ++be) {
          vq[static_cast<std::size_t>(c * m + be)] += p * e.v_minus_p[static_cast<std::size_t>(c)](node, be);
          for (int j = 0; j < 2; ++j)
            gd[static_cast<std::size_t>((c * 2 + j) * m + be)] += dp[static_cast<std::size_t>(j)] * d[static_cast<std::size_t>(c)](node, be);
        }
    }
    auto hs = [&](int l, int k, int g) { return hq[static_cast<std::size_t>(hessian_index(l, k, g, m))]; };
    const Point y{q.x[0] / eps, q.x[1] / eps};
    std::fill(h.begin(), h.end(), 0.0);
    std::fill(s.begin(), s.end(), 0.0);
    for (int i = 0; i < 2; ++i)
      for (int al = 0; al < m; ++al) {
        double hi = 0.0;
        for (int j = 0; j < 2; ++j)
          for (int k = 0; k < 2; ++k)
            for (int g = 0; g < m; ++g) {
              if (terms.flux) hi += eps * cell.F_at(y, j, i, k, al, g) * hs(j, k, g);
              if (terms.divergence)
                for (int be = 0; be < m; ++be)
                  hi += a(i, j, al, be) * vq[static_cast<std::size_t>((k * m + g) * m + be)] * hs(j, k, g);
              if (terms.volume)
                for (int be = 0; be < m; ++be)
                  s[static_cast<std::size_t>(al)] +=
                      a(i, j, al, be) * gd[static_cast<std::size_t>(((k * m + g) * 2 + j) * m + be)] * hs(i, k, g);
            }
        h[static_cast<std::size_t>(i * m + al)] = hi;
      }
    for (int n = 0; n < 4; ++n) {
      const int node = q.nodes[static_cast<std::size_t>(n)];
      const auto& dp = q.dphi[static_cast<std::size_t>(n)];
      for (int al = 0; al < m; ++al)
        rhs.values[node * m + al] +=
            q.weight * (-(h[static_cast<std::size_t>(al)] * dp[0] + h[static_cast<std::size_t>(m + al)] * dp[1]) +
                        s[static_cast<std::size_t>(al)] * q.phi[static_cast<std::size_t>(n)]);
    }
  });

  IdentityResidual out;
  out.residual = op.stiffness() * e.w.values - rhs.values;
  const double mass = mesh->h() * mesh->h();
  for (int node = 0; node < mesh->node_count(); ++node) {
    const bool boundary = mesh->on_boundary(node);
    const bool trusted = !boundary && DomainMesh::dist(mesh->point(node)) >= margin - 1e-12;
    for (int al = 0; al < m; ++al) {
      if (boundary) out.residual[node * m + al] = 0.0;
      if (!trusted) continue;
      out.max_scaled = std::max(out.max_scaled, std::abs(out.residual[node * m + al]) / mass);
      out.rhs_scaled = std::max(out.rhs_scaled, std::abs(rhs.values[node * m + al]) / mass);
    }
  }
  return out;
}

BoundaryResidual conormal_identity_check(const Expansion& e, const ScaledCoefficient& coeff, const Tensor4& hat_a) {
  MeshPtr mesh = domain_of(e.u0.grid, "conormal_identity_check");
  require(e.family == CorrectorFamily::neumann, "conormal_identity_check: needs the Neumann corrector family");
  const int m = e.u0.m;
  const Field gw = recover_gradient(e.w);
  const Field gu = recover_gradient(e.u_eps);
  const Field hess = recover_hessian(e.u0);
  BoundaryResidual out{BoundaryField(mesh, m), 0.0, 0.0};
  Tensor4 a(2, m);
  for (int b = 0; b < mesh->boundary_count(); ++b) {
    const BoundaryNode& bn = mesh->boundary_node(b);
    if (bn.corner) continue;
    const int node = bn.node;
    coeff.evaluate(mesh->point(node), a);
    for (int al = 0; al < m; ++al) {
      double r = 0.0;
      for (int i = 0; i < 2; ++i) {
        const double ni = bn.normal[static_cast<std::size_t>(i)];
        if (ni == 0.0) continue;
        for (int j = 0; j < 2; ++j)
          for (int be = 0; be < m; ++be) {
            r += ni * a(i, j, al, be) * (gw(node, j * m + be) - gu(node, j * m + be));
            r += ni * hat_a(i, j, al, be) * e.grad_u0(node, j * m + be);
            for (int k = 0; k < 2; ++k)
              for (int g = 0; g < m; ++g)
                r += ni * a(i, j, al, be) * e.v_minus_p[static_cast<std::size_t>(k * m + g)](node, be) *
                     hess(node, hessian_index(k, j, g, m));
          }
      }
      out.residual(b, al) = r;
    }
    out.max = std::max(out.max, node_norm(out.residual, b));
  }
  out.l2 = norm(out.residual, NormKind::lp_boundary, 2.0);
  return out;
}

Approximation poisson_approx(const AssembledOperator& op_eps, const AssembledOperator& op0, const OmegaTable& omega,
                             const BoundaryField& f) {
  MeshPtr mesh = domain_of(op_eps.grid_ptr(), "poisson_approx");
  require(op0.grid_ptr() == op_eps.grid_ptr() && omega.omega.mesh == mesh && f.mesh == mesh,
          "poisson_approx: mesh mismatch");
  const int m = op_eps.components();
  require(f.m == m && omega.m == m, "poisson_approx: component mismatch");
  BoundaryField wf(mesh, m);
  for (int b = 0; b < mesh->boundary_count(); ++b)
    for (int g = 0; g < m; ++g) {
      double s = 0.0;
      for (int be = 0; be < m; ++be) s += omega(b, g, be) * f(b, be);
      wf(b, g) = s;
    }
  const Load zero(mesh, m);
  Approximation out;
  out.u_eps = solve_dirichlet(op_eps, zero, f);
  out.v_eps = solve_dirichlet(op0, zero, wf);
  Field diff = out.u_eps;
  diff.values -= out.v_eps.values;
  out.l1 = norm(diff, NormKind::lp, 1.0);
  out.l2 = norm(diff, NormKind::lp, 2.0);
  return out;
}

Approximation divergence_data_approx(const AssembledOperator& op_eps, const AssembledOperator& op0,
                                     const CorrectorSet& set, const Field& f) {
  MeshPtr mesh = domain_of(op_eps.grid_ptr(), "divergence_data_approx");
  require(op0.grid_ptr() == op_eps.grid_ptr() && set.mesh == mesh && f.grid == op_eps.grid_ptr(),
          "divergence_data_approx: mesh mismatch");
  const int m = set.m;
  require(f.m == 2 * m, "divergence_data_approx: f needs 2m components");
  std::vector<Field> gs;
  for (const Field& col : set.phi_star) gs.push_back(recover_gradient(col));
  Field big_f(mesh, 2 * m);
  for (int a = 0; a < mesh->node_count(); ++a)
    for (int i = 0; i < 2; ++i)
      for (int al = 0; al < m; ++al) {
        double s = 0.0;
        for (int j = 0; j < 2; ++j)
          for (int be = 0; be < m; ++be) s += f(a, j * m + be) * gs[static_cast<std::size_t>(i * m + al)](a, j * m + be);
        big_f(a, i * m + al) = s;
      }
  Approximation out;
  out.u_eps = solve_dirichlet(op_eps, divergence_load(f));
  out.v_eps = solve_dirichlet(op0, divergence_load(big_f));
  Field diff = out.u_eps;
  diff.values -= out.v_eps.values;
  out.l1 = norm(diff, NormKind::lp, 1.0);
  out.l2 = norm(diff, NormKind::lp, 2.0);
  return out;
}

Field s_epsilon(const AssembledOperator& op_eps, const AssembledOperator& op0, const CorrectorSet& set,
                const Field& g, int i, int j) {
  MeshPtr mesh = domain_of(op_eps.grid_ptr(), "s_epsilon");
  require(set.m == 1 && g.m == 1, "s_epsilon: scalar equations only");
  require(op0.grid_ptr() == op_eps.grid_ptr() && set.mesh == mesh && g.grid == op_eps.grid_ptr(),
          "s_epsilon: mesh mismatch");
  require((i == 0 || i == 1) && (j == 0 || j == 1), "s_epsilon: i, j must be 0 or 1");
  const int nodes = mesh->node_count();

  Field hg(mesh, 2);
  for (int a = 0; a < nodes; ++a) hg(a, j) = g(a, 0);
  const Field t = recover_gradient(solve_dirichlet(op_eps, divergence_load(hg)));

  std::array<Field, 2> gphi{recover_gradient(set.phi[0]), recover_gradient(set.phi[1])};
  std::array<Field, 2> gstar{recover_gradient(set.phi_star[0]), recover_gradient(set.phi_star[1])};
  Field ha(mesh, 2), hb(mesh, 2);
  for (int a = 0; a < nodes; ++a)
    for (int l = 0; l < 2; ++l) {
      hb(a, l) = gstar[static_cast<std::size_t>(l)](a, j);
      ha(a, l) = hb(a, l) * g(a, 0);
    }
  const Field va = recover_gradient(solve_dirichlet(op0, divergence_load(ha)));
  const Field vb = recover_gradient(solve_dirichlet(op0, divergence_load(hb)));

  Field s(mesh, 1);
  for (int a = 0; a < nodes; ++a) {
    double x = t(a, i);
    for (int k = 0; k < 2; ++k) {
      const double dphi = gphi[static_cast<std::size_t>(k)](a, i);
      x -= dphi * va(a, k);
      x += dphi * vb(a, k) * g(a, 0);
    }
    s(a, 0) = x;
  }
  return s;
}

BoundaryField dtn_defect(const AssembledOperator& op_eps, const AssembledOperator& op0, const OmegaTable& omega,
                         const BoundaryField& f) {
  MeshPtr mesh = domain_of(op_eps.grid_ptr(), "dtn_defect");
  require(op_eps.components() == 1 && f.m == 1 && omega.m == 1, "dtn_defect: scalar equations only");
  require(op_eps.symmetric(), "dtn_defect: needs a symmetric coefficient");
  require(op0.grid_ptr() == op_eps.grid_ptr() && f.mesh == mesh, "dtn_defect: mesh mismatch");
  BoundaryField w(mesh, 1);
  w.values = omega.omega.values;
  const std::array<BoundaryField, 2> x{coordinate_trace(mesh, 0), coordinate_trace(mesh, 1)};

  // n_i ∂f/∂t_ij for j = 0, 1.
  std::array<BoundaryField, 2> tf{BoundaryField(mesh, 1), BoundaryField(mesh, 1)};
  for (int jj = 0; jj < 2; ++jj)
    for (int ii = 0; ii < 2; ++ii) {
      const BoundaryField dt = tangential_derivative(f, ii, jj);
      for (int b = 0; b < mesh->boundary_count(); ++b)
        tf[static_cast<std::size_t>(jj)].values[b] +=
            mesh->boundary_node(b).normal[static_cast<std::size_t>(ii)] * dt.values[b];
    }

  const BoundaryField lf = apply_dtn(op_eps, f);
  const BoundaryField l0w = apply_dtn(op0, w);
  const BoundaryField l0wf = apply_dtn(op0, times(w, f));
  BoundaryField out = lf;
  out.values += w.values.cwiseProduct(f.values.cwiseProduct(l0w.values) - l0wf.values);
  for (int jj = 0; jj < 2; ++jj) {
    const auto& xj = x[static_cast<std::size_t>(jj)];
    const auto& tj = tf[static_cast<std::size_t>(jj)];
    const BoundaryField lx = apply_dtn(op_eps, xj);
    const BoundaryField l0wx = apply_dtn(op0, times(w, xj));
    out.values -= tj.values.cwiseProduct(lx.values);
    out.values += w.values.cwiseProduct(tj.values).cwiseProduct(l0wx.values - xj.values.cwiseProduct(l0w.values));
  }
  return out;
}

double MixedKernel::defect() const {
  double d = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      d = std::max(d, std::abs(exact[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -
                               expansion[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]));
  return d;
}

MixedKernel mixed_kernel(const AssembledOperator& op_eps, const AssembledOperator& op0, const CorrectorSet& set,
                         int x_node, int y_node) {
  MeshPtr mesh = domain_of(op_eps.grid_ptr(), "mixed_kernel");
  require(set.m == 1 && op_eps.components() == 1, "mixed_kernel: scalar equations only");
  require(op0.grid_ptr() == op_eps.grid_ptr() && set.mesh == mesh, "mixed_kernel: mesh mismatch");
  const int yi = mesh->node_i(y_node), yj = mesh->node_j(y_node);
  require(yi > 1 && yj > 1 && yi < mesh->n() - 1 && yj < mesh->n() - 1,
          "mixed_kernel: y needs interior neighbours on both sides");
  const double h = mesh->h();
  // ∂/∂y_l of the Green column at y, then its recovered x-gradient at x.
  auto mixed = [&](const AssembledOperator& op) {
    std::array<std::array<double, 2>, 2> out{};
    for (int l = 0; l < 2; ++l) {
      const int plus = l == 0 ? mesh->node(yi + 1, yj) : mesh->node(yi, yj + 1);
      const int minus = l == 0 ? mesh->node(yi - 1, yj) : mesh->node(yi, yj - 1);
      Field d = green(op, plus);
      d.values -= green(op, minus).values;
      d.values /= 2.0 * h;
      const Field g = recover_gradient(d);
      for (int k = 0; k < 2; ++k) out[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)] = g(x_node, k);
    }
    return out;
  };
  MixedKernel r;
  r.exact = mixed(op_eps);
  const auto m0 = mixed(op0);
  const std::array<Field, 2> gphi{recover_gradient(set.phi[0]), recover_gradient(set.phi[1])};
  const std::array<Field, 2> gstar{recover_gradient(set.phi_star[0]), recover_gradient(set.phi_star[1])};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      double s = 0.0;
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          s += gphi[static_cast<std::size_t>(k)](x_node, i) * m0[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)] *
               gstar[static_cast<std::size_t>(l)](y_node, j);
      r.expansion[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = s;
    }
  return r;
}

}  // namespace homoglab
