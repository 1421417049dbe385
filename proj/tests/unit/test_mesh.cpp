#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "homoglab/assembly.hpp"
#include "homoglab/calculus.hpp"
#include "homoglab/error.hpp"

using namespace homoglab;

namespace {

constexpr double kPi = std::numbers::pi;

Tensor4 diag2(double a, double b) {
  Tensor4 t(2, 1);
  t(0, 0, 0, 0) = a;
  t(1, 1, 0, 0) = b;
  return t;
}

double max_asymmetry(const SparseMatrix& k) {
  const SparseMatrix d = k - SparseMatrix(k.transpose());
  double worst = 0.0;
  for (Eigen::Index c = 0; c < d.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(d, c); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return worst;
}

double slope(double e_coarse, double e_fine) { return std::log2(e_coarse / e_fine); }

}  // namespace

TEST(Grid, NodeCountsAndBoundaryStructure) {
  TorusGrid t(4);
  EXPECT_EQ(t.node_count(), 16);
  const auto nd = t.element_nodes(3, 3);
  EXPECT_EQ(nd[2], t.node(0, 0));
  DomainMesh m(8);
  EXPECT_EQ(m.node_count(), 81);
  EXPECT_EQ(m.boundary_count(), 32);
  double total = 0.0;
  int corners = 0;
  for (const auto& b : m.boundary()) {
    total += b.weight;
    const Point x = m.point(b.node);
    EXPECT_EQ(DomainMesh::dist(x), 0.0);
    if (b.corner) {
      ++corners;
    } else {
      EXPECT_DOUBLE_EQ(std::hypot(b.normal[0], b.normal[1]), 1.0);
    }
  }
  EXPECT_DOUBLE_EQ(total, 4.0);
  EXPECT_EQ(corners, 4);
  EXPECT_THROW(TorusGrid(0), InvalidArgument);
}

TEST(Assemble, TorusIdentityAnnihilatesConstants) {
  auto grid = std::make_shared<TorusGrid>(2);
  auto op = assemble(Tensor4::identity(2, 1), grid, ConstraintMode::neumann);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(grid->node_count());
  EXPECT_LE((op->stiffness() * ones).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Assemble, SymmetricCoefficientGivesExactlySymmetricMatrix) {
  auto mesh = std::make_shared<DomainMesh>(32);
  auto op = assemble(rescale(builtin(CheckerboardParams{}), 0.25), mesh, ConstraintMode::dirichlet);
  EXPECT_EQ(max_asymmetry(op->stiffness()), 0.0);
  auto sys = assemble(rescale(builtin(LayeredParams{2.0, 1.0, 0, 2}), 0.25), mesh, ConstraintMode::dirichlet);
  EXPECT_EQ(max_asymmetry(sys->stiffness()), 0.0);
}

TEST(Assemble, HomogenizedTensorFactorizes) {
  auto mesh = std::make_shared<DomainMesh>(16);
  auto op = assemble(diag2(std::sqrt(3.0), 2.0), mesh, ConstraintMode::dirichlet);
  EXPECT_NO_THROW(op->solver());
  EXPECT_TRUE(op->warnings().empty());
}

TEST(Assemble, WarnsWhenUnderResolved) {
  auto mesh = std::make_shared<DomainMesh>(16);
  auto op = assemble(rescale(builtin(LayeredParams{}), 0.25), mesh, ConstraintMode::dirichlet);
  EXPECT_EQ(op->warnings().size(), 1u);
  auto ok = assemble(rescale(builtin(LayeredParams{}), 0.5), mesh, ConstraintMode::dirichlet);
  EXPECT_TRUE(ok->warnings().empty());
}

TEST(SolveDirichlet, AffineDataIsReproducedExactly) {
  auto mesh = std::make_shared<DomainMesh>(16);
  auto op = assemble(Tensor4::identity(2, 1), mesh, ConstraintMode::dirichlet);
  const Field u = solve_dirichlet(*op, Load(mesh, 1), boundary_interpolate(mesh, [](const Point& x) { return x[0]; }));
  for (int a = 0; a < mesh->node_count(); ++a) EXPECT_NEAR(u(a, 0), mesh->point(a)[0], 1e-13);
}

TEST(SolveDirichlet, ZeroDataGivesZero) {
  auto mesh = std::make_shared<DomainMesh>(16);
  auto op = assemble(rescale(builtin(TrigonometricParams{}), 0.25), mesh, ConstraintMode::dirichlet);
  const Field u = solve_dirichlet(*op, Load(mesh, 1));
  EXPECT_EQ(u.values.cwiseAbs().maxCoeff(), 0.0);
}

TEST(SolveDirichlet, ManufacturedSolutionConverges) {
  auto exact = [](const Point& x) { return std::sin(kPi * x[0]) * std::sin(kPi * x[1]); };
  auto exact_grad = [](const Point& x) {
    return std::array<double, 2>{kPi * std::cos(kPi * x[0]) * std::sin(kPi * x[1]),
                                 kPi * std::sin(kPi * x[0]) * std::cos(kPi * x[1])};
  };
  std::vector<double> l2, h1, nodal;
  for (int n : {16, 32, 64, 128}) {
    auto mesh = std::make_shared<DomainMesh>(n);
    auto op = assemble(Tensor4::identity(2, 1), mesh, ConstraintMode::dirichlet);
    const Load f = volume_load(mesh, [](const Point& x) { return 2 * kPi * kPi * std::sin(kPi * x[0]) * std::sin(kPi * x[1]); });
    const Field u = solve_dirichlet(*op, f);
    double e0 = 0.0, e1 = 0.0, emax = 0.0;
    for_each_quad_point(*mesh, [&](const QuadPoint& q) {
      double v = 0.0, gx = 0.0, gy = 0.0;
      for (int a = 0; a < 4; ++a) {
        v += q.phi[a] * u(q.nodes[a], 0);
        gx += q.dphi[a][0] * u(q.nodes[a], 0);
        gy += q.dphi[a][1] * u(q.nodes[a], 0);
      }
      const auto g = exact_grad(q.x);
      e0 += q.weight * std::pow(v - exact(q.x), 2);
      e1 += q.weight * (std::pow(gx - g[0], 2) + std::pow(gy - g[1], 2));
    });
    for (int a = 0; a < mesh->node_count(); ++a) emax = std::max(emax, std::abs(u(a, 0) - exact(mesh->point(a))));
    l2.push_back(std::sqrt(e0));
    h1.push_back(std::sqrt(e0 + e1));
    nodal.push_back(emax);
  }
  for (std::size_t k = 0; k + 1 < l2.size(); ++k) {
    EXPECT_GE(slope(l2[k], l2[k + 1]), 1.9);
    EXPECT_GE(slope(h1[k], h1[k + 1]), 0.95);
    EXPECT_NEAR(nodal[k] / nodal[k + 1], 4.0, 0.4);
  }
}

TEST(SolveNeumann, ZeroDataGivesZero) {
  auto mesh = std::make_shared<DomainMesh>(16);
  auto op = assemble(Tensor4::identity(2, 1), mesh, ConstraintMode::neumann);
  const Field u = solve_neumann(*op, Load(mesh, 1));
  EXPECT_EQ(u.values.cwiseAbs().maxCoeff(), 0.0);
}

TEST(SolveNeumann, PointLoadMinusMeanSatisfiesPin) {
  auto mesh = std::make_shared<DomainMesh>(32);
  auto op = assemble(Tensor4::identity(2, 1), mesh, ConstraintMode::neumann);
  Load load = point_load(mesh, 1, mesh->nearest_node({0.3, 0.6}), 0);
  add_boundary_flux(load, [](const Point&, const Point&, std::span<double> g) { g[0] = -0.25; });
  const Field u = solve_neumann(*op, load);
  double pin = 0.0;
  for (const auto& b : mesh->boundary()) pin += b.weight * u(b.node, 0);
  EXPECT_LE(std::abs(pin), 1e-10);
  EXPECT_LE(weak_residual(*op, u, load).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SolveNeumann, RejectsIncompatibleData) {
  auto mesh = std::make_shared<DomainMesh>(16);
  auto op = assemble(Tensor4::identity(2, 1), mesh, ConstraintMode::neumann);
  Load load = volume_load(mesh, [](const Point&) { return 1.0; });
  add_boundary_flux(load, [](const Point&, const Point&, std::span<double> g) { g[0] = -0.25 * 0.9; });
  EXPECT_THROW(solve_neumann(*op, load), InvalidArgument);
  auto dir = assemble(Tensor4::identity(2, 1), mesh, ConstraintMode::dirichlet);
  EXPECT_THROW(solve_neumann(*dir, Load(mesh, 1)), InvalidArgument);
}

TEST(SolveNeumann, ReproducesDirichletSolutionFromItsFlux) {
  auto mesh = std::make_shared<DomainMesh>(32);
  const auto coeff = rescale(builtin(TrigonometricParams{}), 0.25);
  auto dir = assemble(coeff, mesh, ConstraintMode::dirichlet);
  auto neu = assemble(coeff, mesh, ConstraintMode::neumann);
  const Load f = volume_load(mesh, [](const Point& x) { return 1.0 + x[0] * x[1]; });
  const Field u = solve_dirichlet(*dir, f, boundary_interpolate(mesh, [](const Point& x) { return x[0] - x[1] * x[1]; }));
  const BoundaryFlux q = conormal(u, *dir, f);
  Load load = f;
  for (int b = 0; b < mesh->boundary_count(); ++b) load.values[mesh->boundary_node(b).node] += q.moments[b];
  const Field v = solve_neumann(*neu, load);
  const double shift = v(0, 0) - u(0, 0);
  for (int a = 0; a < mesh->node_count(); ++a) EXPECT_NEAR(v(a, 0) - shift, u(a, 0), 1e-8);
}

TEST(Conormal, IdentityOfAffineField) {
  auto mesh = std::make_shared<DomainMesh>(16);
  auto op = assemble(Tensor4::identity(2, 1), mesh, ConstraintMode::dirichlet);
  const Field u = interpolate(mesh, [](const Point& x) { return x[0]; });
  const BoundaryFlux q = conormal(u, *op, Load(mesh, 1));
  for (int b = 0; b < mesh->boundary_count(); ++b) {
    const auto& bn = mesh->boundary_node(b);
    if (bn.corner) continue;
    EXPECT_NEAR(q.nodal(b, 0), bn.normal[0], 1e-12);
  }
}

TEST(Conormal, HomogenizedTensorOnVerticalAffineField) {
  auto mesh = std::make_shared<DomainMesh>(16);
  auto op = assemble(diag2(std::sqrt(3.0), 2.0), mesh, ConstraintMode::dirichlet);
  const Field u = interpolate(mesh, [](const Point& x) { return x[1]; });
  const BoundaryFlux q = conormal(u, *op, Load(mesh, 1));
  for (int b = 0; b < mesh->boundary_count(); ++b) {
    const auto& bn = mesh->boundary_node(b);
    if (bn.corner) continue;
    EXPECT_NEAR(q.nodal(b, 0), 2.0 * bn.normal[1], 1e-12);
  }
}

TEST(Conormal, GreenColumnHasUnitOutflux) {
  auto mesh = std::make_shared<DomainMesh>(64);
  auto op = assemble(rescale(builtin(LayeredParams{}), 0.125), mesh, ConstraintMode::dirichlet);
  const Load delta = point_load(mesh, 1, mesh->nearest_node({0.4, 0.55}), 0);
  const Field g = solve_dirichlet(*op, delta);
  EXPECT_NEAR(conormal(g, *op, delta).total(0), -1.0, 1e-6);
}

TEST(Conormal, DivergenceTheoremForSmoothSource) {
  auto mesh = std::make_shared<DomainMesh>(48);
  auto op = assemble(rescale(builtin(CheckerboardParams{}), 0.25), mesh, ConstraintMode::dirichlet);
  const Load f = volume_load(mesh, [](const Point& x) { return std::exp(x[0]) * (1 + x[1]); });
  const Field u = solve_dirichlet(*op, f, boundary_interpolate(mesh, [](const Point& x) { return std::sin(3 * x[0] + x[1]); }));
  EXPECT_NEAR(conormal(u, *op, f).total(0), -f.values.sum(), 1e-8 * std::abs(f.values.sum()));
}

TEST(Norm, Examples) {
  auto mesh = std::make_shared<DomainMesh>(64);
  const Field one = interpolate(mesh, [](const Point&) { return 1.0; });
  EXPECT_NEAR(norm(one, NormKind::lp, 2.0), 1.0, 1e-14);
  const Field x1 = interpolate(mesh, [](const Point& x) { return x[0]; });
  EXPECT_NEAR(norm(x1, NormKind::grad_lp, 2.0), 1.0, 1e-14);
  EXPECT_NEAR(norm(x1, NormKind::weighted_grad), std::sqrt(1.0 / 6.0), 1e-4);
  EXPECT_NEAR(norm(x1, NormKind::lp, INFINITY), 1.0, 0.0);
  EXPECT_NEAR(norm(x1, NormKind::grad_lp, INFINITY), 1.0, 1e-14);
  EXPECT_NEAR(norm(one, NormKind::h1_boundary), 2.0, 1e-14);
  EXPECT_NEAR(norm(x1, NormKind::w1p, 2.0), std::sqrt(1.0 / 3.0 + 1.0), 1e-12);
  Field bad = one;
  bad.values[3] = std::nan("");
  EXPECT_THROW(norm(bad, NormKind::lp), InvalidArgument);
  EXPECT_THROW(norm(one, NormKind::lp, 0.5), InvalidArgument);
}

TEST(TangentialDerivative, Examples) {
  auto mesh = std::make_shared<DomainMesh>(32);
  const BoundaryField c = boundary_interpolate(mesh, [](const Point&) { return 3.0; });
  EXPECT_EQ(tangential_derivative(c, 0, 1).values.cwiseAbs().maxCoeff(), 0.0);
  const BoundaryField y = boundary_interpolate(mesh, [](const Point& x) { return x[1]; });
  const BoundaryField d = tangential_derivative(y, 0, 1);
  for (int b = 0; b < mesh->boundary_count(); ++b) {
    const auto& bn = mesh->boundary_node(b);
    if (!bn.corner && bn.normal[0] == -1.0) EXPECT_NEAR(d(b, 0), -1.0, 1e-12);
  }
}

TEST(TangentialDerivative, SecondOrderOnArcLengthSine) {
  std::vector<double> err;
  for (int n : {32, 64}) {
    auto mesh = std::make_shared<DomainMesh>(n);
    BoundaryField f(mesh, 1);
    for (int b = 0; b < mesh->boundary_count(); ++b) f(b, 0) = std::sin(2 * kPi * mesh->boundary_node(b).s);
    const BoundaryField d = arc_derivative(f);
    double e = 0.0;
    for (int b = 0; b < mesh->boundary_count(); ++b) {
      const auto& bn = mesh->boundary_node(b);
      if (!bn.corner) e = std::max(e, std::abs(d(b, 0) - 2 * kPi * std::cos(2 * kPi * bn.s)));
    }
    err.push_back(e);
  }
  EXPECT_NEAR(err[0] / err[1], 4.0, 0.3);
}

TEST(RecoverGradient, ConvergesOnSmoothField) {
  std::vector<double> err;
  for (int n : {32, 64}) {
    auto mesh = std::make_shared<DomainMesh>(n);
    const Field u = interpolate(mesh, [](const Point& x) { return x[0] + std::sin(2 * kPi * x[1]) * x[0]; });
    const Field g = recover_gradient(u);
    double e = 0.0;
    for (int a = 0; a < mesh->node_count(); ++a) {
      const Point x = mesh->point(a);
      e = std::max(e, std::abs(g(a, 0) - (1 + std::sin(2 * kPi * x[1]))));
      e = std::max(e, std::abs(g(a, 1) - 2 * kPi * x[0] * std::cos(2 * kPi * x[1])));
    }
    err.push_back(e);
  }
  EXPECT_GE(slope(err[0], err[1]), 0.95);
}
