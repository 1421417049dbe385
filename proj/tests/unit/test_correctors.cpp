#include <cmath>

#include <gtest/gtest.h>

#include "homoglab/calculus.hpp"
#include "homoglab/correctors.hpp"
#include "homoglab/error.hpp"

using namespace homoglab;

namespace {

double max_diff(const Field& a, const Field& b) { return (a.values - b.values).lpNorm<Eigen::Infinity>(); }

CoefficientPtr layered() { return builtin(LayeredParams{}); }

}  // namespace

TEST(Correctors, LinearMonomialLayout) {
  auto mesh = std::make_shared<DomainMesh>(4);
  const Field p = linear_monomial(mesh, 2, 1, 1);
  const int a = mesh->node(1, 3);
  EXPECT_EQ(p(a, 0), 0.0);
  EXPECT_DOUBLE_EQ(p(a, 1), 0.75);
  EXPECT_THROW(linear_monomial(mesh, 2, 2, 0), InvalidArgument);
}

TEST(Correctors, ConstantCoefficientGivesMonomials) {
  const Tensor4 a = Tensor4::from_matrix(2, 1, (Eigen::Matrix2d() << 2.0, 0.3, 0.3, 1.5).finished());
  auto mesh = std::make_shared<DomainMesh>(16);
  const auto set = corrector_set(rescale(constant_field(a), 0.125), a, mesh, true);
  for (int j = 0; j < 2; ++j) {
    const Field p = linear_monomial(mesh, 1, j, 0);
    EXPECT_LE(max_diff(set.phi_column(j, 0), p), 1e-12);
    EXPECT_LE(max_diff(set.phi_star_column(j, 0), p), 1e-12);
    EXPECT_LE(max_diff(set.psi_column(j, 0), p), 1e-10);
  }
}

TEST(Correctors, ConstantSystemGivesMonomials) {
  Eigen::MatrixXd block = Eigen::MatrixXd::Identity(4, 4) * 2.0;
  block(0, 3) = block(3, 0) = 0.4;
  block(1, 2) = block(2, 1) = -0.3;
  const Tensor4 a = Tensor4::from_matrix(2, 2, block);
  auto mesh = std::make_shared<DomainMesh>(8);
  const auto set = corrector_set(rescale(constant_field(a), 1.0), a, mesh, true);
  for (int j = 0; j < 2; ++j)
    for (int beta = 0; beta < 2; ++beta) {
      const Field p = linear_monomial(mesh, 2, j, beta);
      EXPECT_LE(max_diff(set.phi_column(j, beta), p), 1e-12);
      EXPECT_LE(max_diff(set.psi_column(j, beta), p), 1e-10);
    }
}

TEST(Correctors, DirichletBoundaryAndNeumannPinAreExact) {
  auto cell = cell_solution(layered(), 32);
  auto mesh = std::make_shared<DomainMesh>(64);
  const auto set = corrector_set(rescale(layered(), 0.25), cell->hat_a, mesh, true);
  EXPECT_EQ(set.pin_node, mesh->node(32, 32));
  for (int j = 0; j < 2; ++j) {
    const Field p = linear_monomial(mesh, 1, j, 0);
    for (const auto& bn : mesh->boundary()) EXPECT_EQ(set.phi_column(j, 0)(bn.node, 0), p(bn.node, 0));
    EXPECT_EQ(set.psi_column(j, 0)(set.pin_node, 0), p(set.pin_node, 0));
  }
}

TEST(Correctors, ColumnsSolveTheirEquations) {
  auto cell = cell_solution(layered(), 32);
  auto mesh = std::make_shared<DomainMesh>(64);
  const auto coeff = rescale(layered(), 0.25);
  auto dir = assemble(coeff, mesh, ConstraintMode::dirichlet);
  auto neu = assemble(coeff, mesh, ConstraintMode::neumann);
  const auto set = corrector_set(*dir, *dir, neu.get(), cell->hat_a);
  const Load zero(mesh, 1);
  for (int j = 0; j < 2; ++j) {
    const Eigen::VectorXd r = weak_residual(*dir, set.phi_column(j, 0), zero);
    double worst = 0.0;
    for (int a = 0; a < mesh->node_count(); ++a)
      if (!mesh->on_boundary(a)) worst = std::max(worst, std::abs(r[a]));
    EXPECT_LE(worst, 1e-10);
    // Conormal flux of Ψ_j equals n_i â_ij.
    const auto flux = conormal(set.psi_column(j, 0), *neu, zero);
    for (int b = 0; b < mesh->boundary_count(); ++b) {
      const auto& bn = mesh->boundary_node(b);
      if (bn.corner) continue;
      const double expect = bn.normal[0] * cell->hat_a(0, j, 0, 0) + bn.normal[1] * cell->hat_a(1, j, 0, 0);
      EXPECT_NEAR(flux.nodal(b, 0), expect, 1e-8);
    }
  }
}

TEST(Correctors, SymmetricAdjointCoincides) {
  auto coeff = builtin(TrigonometricParams{});
  auto cell = cell_solution(coeff, 32);
  auto mesh = std::make_shared<DomainMesh>(64);
  const ScaledCoefficient scaled = rescale(coeff, 0.25);
  auto op = assemble(scaled, mesh, ConstraintMode::dirichlet);
  auto adj = assemble(scaled.adjoint(), mesh, ConstraintMode::dirichlet);
  const auto set = corrector_set(*op, *adj, nullptr, cell->hat_a);
  for (std::size_t c = 0; c < set.phi.size(); ++c) EXPECT_LE(max_diff(set.phi[c], set.phi_star[c]), 1e-10);
}

TEST(Correctors, NonSymmetricAdjointDiffers) {
  auto coeff = builtin(UserParams{1, {"2 + 0.5*cos(2*pi*y1)", "0.4*sin(2*pi*(y1+y2))", "-0.4*sin(2*pi*(y1+y2))",
                                      "2 + 0.5*sin(2*pi*y2)"}});
  auto cell = cell_solution(coeff, 32);
  auto mesh = std::make_shared<DomainMesh>(64);
  const auto set = corrector_set(rescale(coeff, 0.25), cell->hat_a, mesh, false);
  EXPECT_TRUE(set.psi.empty());
  EXPECT_GT(max_diff(set.phi[0], set.phi_star[0]), 1e-4);
  EXPECT_THROW(corrector_set(rescale(coeff, 0.25), cell->hat_a, mesh, true), InvalidArgument);
}

TEST(Correctors, LayeredDirichletDeviationHalvesWithEpsilon) {
  auto cell = cell_solution(layered(), 16);
  std::vector<double> dev;
  for (double eps : {1.0 / 8, 1.0 / 16, 1.0 / 32}) {
    auto mesh = std::make_shared<DomainMesh>(static_cast<int>(std::lround(16 / eps)));
    const auto set = corrector_set(rescale(layered(), eps), cell->hat_a, mesh, false);
    const auto rep = corrector_report(set, *cell);
    dev.push_back(rep.phi.deviation_sup);
  }
  for (std::size_t k = 1; k < dev.size(); ++k) EXPECT_NEAR(dev[k] / dev[k - 1], 0.5, 0.15) << k;
}

TEST(Correctors, ReportVanishesForConstantCoefficient) {
  const Tensor4 a = Tensor4::isotropic(2, 1, 3.0);
  auto cell = cell_solution(constant_field(a), 8);
  auto mesh = std::make_shared<DomainMesh>(32);
  const auto set = corrector_set(rescale(constant_field(a), 0.25), a, mesh, true);
  const auto rep = corrector_report(set, *cell);
  EXPECT_LE(rep.phi.deviation_sup, 1e-12);
  EXPECT_LE(rep.phi.first_order_sup, 1e-10);
  EXPECT_LE(rep.psi.deviation_sup, 1e-10);
  EXPECT_LE(rep.psi.layer_sup, 1e-8);
  EXPECT_NEAR(rep.phi.grad_sup, 1.0, 1e-10);
}

TEST(Correctors, LayeredGradientBoundStable) {
  auto cell = cell_solution(layered(), 16);
  std::vector<CorrectorReport> reps;
  for (double eps : {1.0 / 8, 1.0 / 16}) {
    auto mesh = std::make_shared<DomainMesh>(static_cast<int>(std::lround(16 / eps)));
    reps.push_back(corrector_report(corrector_set(rescale(layered(), eps), cell->hat_a, mesh, true), *cell));
  }
  EXPECT_NEAR(reps[1].phi.grad_sup / reps[0].phi.grad_sup, 1.0, 0.2);
  EXPECT_TRUE(std::isfinite(reps[1].psi.grad_sup));
  EXPECT_LE(reps[1].phi.layer_sup, 3.0 * reps[0].phi.layer_sup);
}

TEST(Correctors, GradientRecoveryIsFirstOrderInMaxNorm) {
  auto exact = [](const Point& x) { return 0.3 * x[0] - x[1] + std::sin(3.0 * x[0] + 2.0 * x[1]); };
  std::vector<double> err;
  for (int n : {16, 32, 64}) {
    auto mesh = std::make_shared<DomainMesh>(n);
    const Field g = recover_gradient(interpolate(mesh, exact));
    double e = 0.0;
    for (int a = 0; a < mesh->node_count(); ++a) {
      const Point x = mesh->point(a);
      const double c = std::cos(3.0 * x[0] + 2.0 * x[1]);
      e = std::max({e, std::abs(g(a, 0) - (0.3 + 3 * c)), std::abs(g(a, 1) - (-1.0 + 2 * c))});
    }
    err.push_back(e);
  }
  EXPECT_LE(err[2] / err[1], 0.6);
  EXPECT_LE(err[1] / err[0], 0.6);
}
