#include "homoglab/cell.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "homoglab/assembly.hpp"
#include "homoglab/calculus.hpp"
#include "homoglab/error.hpp"

namespace homoglab {

namespace {

void check_columns(const CoefficientField& coeff, const CellCorrectors& chi) {
  require(coeff.dim() == 2, "cell: only d = 2 torus grids are implemented");
  const int m = coeff.components();
  require(static_cast<int>(chi.size()) == 2 * m, "cell: expected d*m corrector columns");
  for (const Field& c : chi) {
    require(c.m == m && c.grid == chi.front().grid, "cell: corrector columns have inconsistent shape");
    require(c.grid->periodic(), "cell: correctors must live on a torus grid");
  }
}

}  // namespace

CellCorrectors solve_cell(const CoefficientField& coeff, int n, SolverOptions options) {
  require(n >= 8, "solve_cell: need n >= 8");
  require(coeff.dim() == 2, "solve_cell: only d = 2 is implemented");
  const int m = coeff.components();
  auto grid = std::make_shared<TorusGrid>(n);
  auto base = std::shared_ptr<const CoefficientField>(std::shared_ptr<const CoefficientField>{}, &coeff);
  const ScaledCoefficient unit(base, 1.0);
  auto op = assemble(unit, grid, ConstraintMode::neumann, options);

  CellCorrectors chi;
  Tensor4 a(2, m);
  for (int j = 0; j < 2; ++j)
    for (int beta = 0; beta < m; ++beta) {
      // −L₁P_j^β has weak form −∫ a_ij^{αβ} ∂_i φ^α, i.e. div of H_i^α = a_ij^{αβ}.
      const Load load = divergence_load(grid, m, [&](const QuadPoint& q, std::span<double> hx) {
        coeff.evaluate(q.x, a);
        for (int i = 0; i < 2; ++i)
          for (int al = 0; al < m; ++al) hx[static_cast<std::size_t>(i * m + al)] = a(i, j, al, beta);
      });
      chi.push_back(solve_neumann(*op, load));
    }
  return chi;
}

Tensor4 homogenize(const CoefficientField& coeff, const CellCorrectors& chi) {
  check_columns(coeff, chi);
  const int m = coeff.components();
  const Grid& grid = *chi.front().grid;
  Tensor4 hat(2, m);
  Tensor4 a(2, m);
  std::vector<double> grad(static_cast<std::size_t>(2 * m * 2 * m));  // ∂_k χ_j^{γβ}
  for_each_quad_point(grid, [&](const QuadPoint& q) {
    coeff.evaluate(q.x, a);
    for (int j = 0; j < 2; ++j)
      for (int beta = 0; beta < m; ++beta) {
        const Field& c = chi[static_cast<std::size_t>(j * m + beta)];
        for (int k = 0; k < 2; ++k)
          for (int ga = 0; ga < m; ++ga) {
            double v = 0.0;
            for (int l = 0; l < 4; ++l)
              v += q.dphi[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)] * c(q.nodes[static_cast<std::size_t>(l)], ga);
            grad[static_cast<std::size_t>(tensor_index(k, j, ga, beta, m))] = v;
          }
      }
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int al = 0; al < m; ++al)
          for (int beta = 0; beta < m; ++beta) {
            double v = a(i, j, al, beta);
            for (int k = 0; k < 2; ++k)
              for (int ga = 0; ga < m; ++ga) v += a(i, k, al, ga) * grad[static_cast<std::size_t>(tensor_index(k, j, ga, beta, m))];
            hat(i, j, al, beta) += q.weight * v;
          }
  });
  // Â inherits the symmetry of A; drop the solver-level asymmetry.
  if (coeff.symmetric())
    for (int i = 0; i < 2; ++i)
      for (int j = i; j < 2; ++j)
        for (int al = 0; al < m; ++al)
          for (int beta = 0; beta < m; ++beta) {
            if (i == j && beta < al) continue;
            const double v = 0.5 * (hat(i, j, al, beta) + hat(j, i, beta, al));
            hat(i, j, al, beta) = v;
            hat(j, i, beta, al) = v;
          }
  return hat;
}

Field discrepancy(const CoefficientField& coeff, const CellCorrectors& chi, const Tensor4& hat_a, double* mean_defect) {
  check_columns(coeff, chi);
  const int m = coeff.components();
  const GridPtr grid = chi.front().grid;
  const int s = 2 * m;
  // Element means of the flux σ_ij = a_ij + a_ik ∂_k χ_j, averaged to nodes.
  Field sigma(grid, s * s);
  Tensor4 a(2, m);
  std::vector<double> elem(static_cast<std::size_t>(s * s));
  int current = -1;
  std::array<int, 4> nodes{};
  auto flush = [&] {
    if (current < 0) return;
    for (int l = 0; l < 4; ++l)
      for (int c = 0; c < s * s; ++c) sigma(nodes[static_cast<std::size_t>(l)], c) += 0.25 * elem[static_cast<std::size_t>(c)];
  };
  const double w_elem = 1.0 / (grid->h() * grid->h());
  for_each_quad_point(*grid, [&](const QuadPoint& q) {
    if (q.element != current) {
      flush();
      current = q.element;
      nodes = q.nodes;
      std::fill(elem.begin(), elem.end(), 0.0);
    }
    coeff.evaluate(q.x, a);
    for (int j = 0; j < 2; ++j)
      for (int beta = 0; beta < m; ++beta) {
        const Field& c = chi[static_cast<std::size_t>(j * m + beta)];
        double g[2][8] = {};
        for (int k = 0; k < 2; ++k)
          for (int ga = 0; ga < m; ++ga)
            for (int l = 0; l < 4; ++l)
              g[k][ga] += q.dphi[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)] * c(q.nodes[static_cast<std::size_t>(l)], ga);
        for (int i = 0; i < 2; ++i)
          for (int al = 0; al < m; ++al) {
            double v = a(i, j, al, beta);
            for (int k = 0; k < 2; ++k)
              for (int ga = 0; ga < m; ++ga) v += a(i, k, al, ga) * g[k][ga];
            elem[static_cast<std::size_t>(tensor_index(i, j, al, beta, m))] += q.weight * w_elem * v;
          }
      }
  });
  flush();
  Field b(grid, s * s);
  const int count = grid->node_count();
  for (int node = 0; node < count; ++node)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int al = 0; al < m; ++al)
          for (int beta = 0; beta < m; ++beta) {
            const int c = tensor_index(i, j, al, beta, m);
            b(node, c) = hat_a(i, j, al, beta) - sigma(node, c);
          }
  if (mean_defect) {
    double worst = 0.0;
    for (int c = 0; c < b.m; ++c) {
      double mean = 0.0;
      for (int node = 0; node < count; ++node) mean += b(node, c);
      worst = std::max(worst, std::abs(mean / count));
    }
    *mean_defect = worst;
  }
  return b;
}

FluxCorrector flux_corrector(const Field& b, SolverOptions options) {
  require(b.grid->periodic(), "flux_corrector: b must live on a torus grid");
  const int mm = b.m / 4;
  const int m = static_cast<int>(std::lround(std::sqrt(static_cast<double>(mm))));
  require(m >= 1 && 4 * m * m == b.m, "flux_corrector: b must have (2m)^2 components");
  const int nodes = b.node_count();
  for (int c = 0; c < b.m; ++c) {
    double mean = 0.0, scale = 0.0;
    for (int node = 0; node < nodes; ++node) {
      mean += b(node, c);
      scale = std::max(scale, std::abs(b(node, c)));
    }
    mean /= nodes;
    if (std::abs(mean) > 1e-6)
      throw InvalidArgument("flux_corrector: b has nonzero mean " + std::to_string(mean) + " in entry " +
                            std::to_string(c));
  }
  // Δf = b is L f = −b with L = −Δ.
  auto op = assemble(Tensor4::identity(2, 1), b.grid, ConstraintMode::neumann, options);
  Field f(b.grid, b.m);
  for (int c = 0; c < b.m; ++c) {
    Field bc(b.grid, 1);
    for (int node = 0; node < nodes; ++node) bc(node, 0) = -b(node, c);
    const Field fc = solve_neumann(*op, volume_load(bc));
    for (int node = 0; node < nodes; ++node) f(node, c) = fc(node, 0);
  }
  const Field grad = recover_gradient(f);  // component k·b.m + c
  Field F(b.grid, 2 * b.m);
  for (int node = 0; node < nodes; ++node)
    for (int j = 0; j < 2; ++j)
      for (int al = 0; al < m; ++al)
        for (int beta = 0; beta < m; ++beta)
          for (int k = 0; k < 2; ++k)
            for (int i = k + 1; i < 2; ++i) {
              const double v = grad(node, k * b.m + tensor_index(i, j, al, beta, m)) -
                               grad(node, i * b.m + tensor_index(k, j, al, beta, m));
              F(node, flux_index(k, i, j, al, beta, m)) = v;
              F(node, flux_index(i, k, j, al, beta, m)) = -v;
            }
  return {std::move(f), std::move(F)};
}

double flux_residual(const Field& b, const Field& F) {
  require(b.grid == F.grid && F.m == 2 * b.m, "flux_residual: shape mismatch");
  const int m = static_cast<int>(std::lround(std::sqrt(b.m / 4.0)));
  const Grid& grid = *b.grid;
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(grid.node_count(), b.m);
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(grid.node_count());
  for_each_quad_point(grid, [&](const QuadPoint& q) {
    for (int c = 0; c < b.m; ++c) {
      double bv = 0.0, fk[2] = {0.0, 0.0};
      for (int l = 0; l < 4; ++l) {
        const int node = q.nodes[static_cast<std::size_t>(l)];
        bv += q.phi[static_cast<std::size_t>(l)] * b(node, c);
        for (int k = 0; k < 2; ++k) fk[k] += q.phi[static_cast<std::size_t>(l)] * F(node, k * 4 * m * m + c);
      }
      for (int l = 0; l < 4; ++l) {
        const auto& dp = q.dphi[static_cast<std::size_t>(l)];
        r(q.nodes[static_cast<std::size_t>(l)], c) +=
            q.weight * (bv * q.phi[static_cast<std::size_t>(l)] + fk[0] * dp[0] + fk[1] * dp[1]);
      }
    }
    for (int l = 0; l < 4; ++l) mass[q.nodes[static_cast<std::size_t>(l)]] += q.weight * q.phi[static_cast<std::size_t>(l)];
  });
  double worst = 0.0;
  for (int node = 0; node < grid.node_count(); ++node)
    worst = std::max(worst, r.row(node).cwiseAbs().maxCoeff() / mass[node]);
  return worst;
}

double discrepancy_divergence(const CoefficientField& coeff, const CellCorrectors& chi, const Tensor4& hat_a) {
  check_columns(coeff, chi);
  const int m = coeff.components();
  const Grid& grid = *chi.front().grid;
  const int s = 2 * m;
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(grid.node_count() * m, s);
  Eigen::MatrixXd load = Eigen::MatrixXd::Zero(grid.node_count() * m, s);
  Tensor4 a(2, m);
  for_each_quad_point(grid, [&](const QuadPoint& q) {
    coeff.evaluate(q.x, a);
    for (int j = 0; j < 2; ++j)
      for (int beta = 0; beta < m; ++beta) {
        const Field& c = chi[static_cast<std::size_t>(j * m + beta)];
        double g[2][8] = {};
        for (int k = 0; k < 2; ++k)
          for (int ga = 0; ga < m; ++ga)
            for (int l = 0; l < 4; ++l)
              g[k][ga] += q.dphi[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)] * c(q.nodes[static_cast<std::size_t>(l)], ga);
        for (int i = 0; i < 2; ++i)
          for (int al = 0; al < m; ++al) {
            double bv = hat_a(i, j, al, beta) - a(i, j, al, beta);
            for (int k = 0; k < 2; ++k)
              for (int ga = 0; ga < m; ++ga) bv -= a(i, k, al, ga) * g[k][ga];
            for (int l = 0; l < 4; ++l) {
              const double dp = q.dphi[static_cast<std::size_t>(l)][static_cast<std::size_t>(i)];
              const int row = q.nodes[static_cast<std::size_t>(l)] * m + al;
              r(row, j * m + beta) += q.weight * bv * dp;
              load(row, j * m + beta) += q.weight * a(i, j, al, beta) * dp;
            }
          }
      }
  });
  const double scale = load.cwiseAbs().maxCoeff();
  return scale > 0.0 ? r.cwiseAbs().maxCoeff() / scale : r.cwiseAbs().maxCoeff();
}

double CellSolution::chi_at(const Point& y, int j, int alpha, int beta) const {
  return chi_column(j, beta).interpolate(y, alpha);
}

double CellSolution::b_at(const Point& y, int i, int j, int alpha, int beta) const {
  return b.interpolate(y, tensor_index(i, j, alpha, beta, m));
}

double CellSolution::F_at(const Point& y, int k, int i, int j, int alpha, int beta) const {
  return F.interpolate(y, flux_index(k, i, j, alpha, beta, m));
}

CellPtr cell_solution(CoefficientPtr coeff, int n, SolverOptions options) {
  require(coeff != nullptr, "cell_solution: null coefficient");
  auto out = std::make_shared<CellSolution>();
  out->coeff = coeff;
  out->m = coeff->components();
  out->chi = solve_cell(*coeff, n, options);
  out->grid = std::static_pointer_cast<const TorusGrid>(out->chi.front().grid);
  out->hat_a = homogenize(*coeff, out->chi);
  out->b = discrepancy(*coeff, out->chi, out->hat_a, &out->b_mean_defect);
  FluxCorrector fc = flux_corrector(out->b, options);
  out->f = std::move(fc.f);
  out->F = std::move(fc.F);
  out->flux_residual = flux_residual(out->b, out->F);
  out->divergence_residual = discrepancy_divergence(*coeff, out->chi, out->hat_a);
  return out;
}

Field periodic_extension(const Field& cell_field, GridPtr domain, double epsilon) {
  require(cell_field.grid->periodic(), "periodic_extension: source must be a torus field");
  require(epsilon > 0.0, "periodic_extension: epsilon must be positive");
  Field out(domain, cell_field.m);
  for (int node = 0; node < domain->node_count(); ++node) {
    const Point x = domain->point(node);
    const Point y{x[0] / epsilon, x[1] / epsilon};
    for (int c = 0; c < cell_field.m; ++c) out(node, c) = cell_field.interpolate(y, c);
  }
  return out;
}

std::vector<Field> scaled_correctors(const CellSolution& cell, GridPtr domain, double epsilon) {
  std::vector<Field> out;
  for (const Field& c : cell.chi) {
    Field e = periodic_extension(c, domain, epsilon);
    e.values *= epsilon;
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace homoglab
