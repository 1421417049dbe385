#include "homoglab/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "homoglab/error.hpp"

namespace homoglab {

namespace {

constexpr double kGaussLo = 0.5 - 0.28867513459481287;  // 1/2 − 1/(2√3)
constexpr double kGaussHi = 0.5 + 0.28867513459481287;

struct RefPoint {
  double xi, eta;
  std::array<double, 4> phi;
  std::array<std::array<double, 2>, 4> dref;
};

std::array<RefPoint, 4> make_reference() {
  std::array<RefPoint, 4> out{};
  const double g[2] = {kGaussLo, kGaussHi};
  int q = 0;
  for (int b = 0; b < 2; ++b)
    for (int a = 0; a < 2; ++a) {
      RefPoint& r = out[static_cast<std::size_t>(q++)];
      const double xi = g[a], eta = g[b];
      r.xi = xi;
      r.eta = eta;
      r.phi = {(1 - xi) * (1 - eta), xi * (1 - eta), xi * eta, (1 - xi) * eta};
      r.dref = {{{-(1 - eta), -(1 - xi)}, {(1 - eta), -xi}, {eta, xi}, {-eta, (1 - xi)}}};
    }
  return out;
}

const std::array<RefPoint, 4>& reference() {
  static const std::array<RefPoint, 4> ref = make_reference();
  return ref;
}

SparseMatrix build_pattern(const Grid& grid, int m) {
  const int nodes = grid.node_count();
  const int p = grid.nodes_per_axis();
  const Eigen::Index ndof = static_cast<Eigen::Index>(nodes) * m;
  std::vector<std::vector<int>> nbrs(static_cast<std::size_t>(nodes));
  Eigen::VectorXi sizes(ndof);
  for (int a = 0; a < nodes; ++a) {
    const int i = grid.node_i(a), j = grid.node_j(a);
    auto& list = nbrs[static_cast<std::size_t>(a)];
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        const int ii = i + di, jj = j + dj;
        if (!grid.periodic() && (ii < 0 || jj < 0 || ii >= p || jj >= p)) continue;
        list.push_back(grid.node(ii, jj));
      }
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    for (int beta = 0; beta < m; ++beta) sizes[a * m + beta] = static_cast<int>(list.size()) * m;
  }
  SparseMatrix k(ndof, ndof);
  k.reserve(sizes);
  for (int a = 0; a < nodes; ++a)
    for (int beta = 0; beta < m; ++beta) {
      const int col = a * m + beta;
      for (int nb : nbrs[static_cast<std::size_t>(a)])
        for (int alpha = 0; alpha < m; ++alpha) k.insert(nb * m + alpha, col) = 0.0;
    }
  k.makeCompressed();
  return k;
}

using TensorAt = std::function<void(const Point&, Tensor4&)>;

SparseMatrix assemble_stiffness(const Grid& grid, int m, int d, bool symmetric, const TensorAt& tensor_at) {
  SparseMatrix k = build_pattern(grid, m);
  const int s = 4 * m;
  Eigen::MatrixXd ke(s, s);
  Tensor4 a(d, m);
  const auto& ref = reference();
  const double h = grid.h();
  for (int ey = 0; ey < grid.n(); ++ey)
    for (int ex = 0; ex < grid.n(); ++ex) {
      const auto nd = grid.element_nodes(ex, ey);
      ke.setZero();
      for (const RefPoint& q : ref) {
        const Point x{(ex + q.xi) * h, (ey + q.eta) * h};
        tensor_at(x, a);
        // Physical weight h²/4 times (1/h)² from the two gradients.
        const double w = 0.25;
        for (int la = 0; la < 4; ++la)
          for (int al = 0; al < m; ++al)
            for (int lb = (symmetric ? la : 0); lb < 4; ++lb)
              for (int be = ((symmetric && lb == la) ? al : 0); be < m; ++be) {
                double v = 0.0;
                for (int i = 0; i < 2; ++i)
                  for (int j = 0; j < 2; ++j) v += a(i, j, al, be) * q.dref[la][i] * q.dref[lb][j];
                ke(la * m + al, lb * m + be) += w * v;
              }
      }
      if (symmetric)
        for (int r = 0; r < s; ++r)
          for (int c = 0; c < r; ++c) ke(r, c) = ke(c, r);
      for (int lb = 0; lb < 4; ++lb)
        for (int be = 0; be < m; ++be) {
          const int col = nd[static_cast<std::size_t>(lb)] * m + be;
          for (int la = 0; la < 4; ++la)
            for (int al = 0; al < m; ++al)
              k.coeffRef(nd[static_cast<std::size_t>(la)] * m + al, col) += ke(la * m + al, lb * m + be);
        }
    }
  return k;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void for_each_quad_point(const Grid& grid, const std::function<void(const QuadPoint&)>& visit) {
  const auto& ref = reference();
  const double h = grid.h();
  QuadPoint qp;
  qp.weight = 0.25 * h * h;
  for (int ey = 0; ey < grid.n(); ++ey)
    for (int ex = 0; ex < grid.n(); ++ex) {
      qp.element = ey * grid.n() + ex;
      qp.nodes = grid.element_nodes(ex, ey);
      for (const RefPoint& q : ref) {
        qp.x = {(ex + q.xi) * h, (ey + q.eta) * h};
        qp.phi = q.phi;
        for (int a = 0; a < 4; ++a)
          for (int i = 0; i < 2; ++i)
            qp.dphi[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)] =
                q.dref[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)] / h;
        visit(qp);
      }
    }
}

Load::Load(GridPtr g, int components) : grid(std::move(g)), m(components) {
  require(grid != nullptr && m >= 1, "Load: null grid or no components");
  values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid->node_count()) * m);
}

Load& Load::operator+=(const Load& other) {
  require(other.values.size() == values.size() && other.m == m, "Load: shape mismatch");
  values += other.values;
  return *this;
}

Load& Load::operator*=(double s) {
  values *= s;
  return *this;
}

Load volume_load(GridPtr grid, int components, const std::function<void(const Point&, std::span<double>)>& f) {
  Load load(grid, components);
  std::vector<double> fx(static_cast<std::size_t>(components));
  for_each_quad_point(*grid, [&](const QuadPoint& q) {
    f(q.x, fx);
    for (int a = 0; a < 4; ++a)
      for (int al = 0; al < components; ++al)
        load.values[q.nodes[static_cast<std::size_t>(a)] * components + al] +=
            q.weight * fx[static_cast<std::size_t>(al)] * q.phi[static_cast<std::size_t>(a)];
  });
  return load;
}

Load volume_load(GridPtr grid, const std::function<double(const Point&)>& f) {
  return volume_load(std::move(grid), 1, [&](const Point& x, std::span<double> out) { out[0] = f(x); });
}

Load volume_load(const Field& f) {
  Load load(f.grid, f.m);
  const int m = f.m;
  for_each_quad_point(*f.grid, [&](const QuadPoint& q) {
    for (int al = 0; al < m; ++al) {
      double v = 0.0;
      for (int a = 0; a < 4; ++a) v += q.phi[static_cast<std::size_t>(a)] * f(q.nodes[static_cast<std::size_t>(a)], al);
      for (int a = 0; a < 4; ++a)
        load.values[q.nodes[static_cast<std::size_t>(a)] * m + al] += q.weight * v * q.phi[static_cast<std::size_t>(a)];
    }
  });
  return load;
}

Load divergence_load(GridPtr grid, int components,
                     const std::function<void(const QuadPoint&, std::span<double>)>& h) {
  Load load(grid, components);
  const int m = components;
  std::vector<double> hx(static_cast<std::size_t>(2 * m));
  for_each_quad_point(*grid, [&](const QuadPoint& q) {
    h(q, hx);
    for (int a = 0; a < 4; ++a)
      for (int al = 0; al < m; ++al) {
        const double v = hx[static_cast<std::size_t>(al)] * q.dphi[static_cast<std::size_t>(a)][0] +
                         hx[static_cast<std::size_t>(m + al)] * q.dphi[static_cast<std::size_t>(a)][1];
        load.values[q.nodes[static_cast<std::size_t>(a)] * m + al] -= q.weight * v;
      }
  });
  return load;
}

Load divergence_load(const Field& hfield) {
  require(hfield.m % 2 == 0, "divergence_load: nodal data needs 2m components");
  const int m = hfield.m / 2;
  return divergence_load(hfield.grid, m, [&](const QuadPoint& q, std::span<double> out) {
    for (int c = 0; c < 2 * m; ++c) {
      double v = 0.0;
      for (int a = 0; a < 4; ++a) v += q.phi[static_cast<std::size_t>(a)] * hfield(q.nodes[static_cast<std::size_t>(a)], c);
      out[static_cast<std::size_t>(c)] = v;
    }
  });
}

Load point_load(GridPtr grid, int components, int node, int alpha, double value) {
  Load load(grid, components);
  require(node >= 0 && node < grid->node_count() && alpha >= 0 && alpha < components, "point_load: bad node or component");
  load.values[node * components + alpha] = value;
  return load;
}

void add_boundary_flux(Load& load, const BoundaryField& g) {
  require(g.m == load.m && g.mesh.get() == load.grid.get(), "add_boundary_flux: field/load mismatch");
  for (int b = 0; b < g.size(); ++b) {
    const BoundaryNode& bn = g.mesh->boundary_node(b);
    for (int al = 0; al < g.m; ++al) load.values[bn.node * g.m + al] += bn.weight * g(b, al);
  }
}

void add_boundary_flux(Load& load, const std::function<void(const Point&, const Point&, std::span<double>)>& g) {
  auto mesh = std::dynamic_pointer_cast<const DomainMesh>(load.grid);
  require(mesh != nullptr, "add_boundary_flux: load does not live on a DomainMesh");
  const int m = load.m;
  const int nb = mesh->boundary_count();
  std::vector<double> gx(static_cast<std::size_t>(m));
  const double h = mesh->h();
  for (int b = 0; b < nb; ++b) {
    const int a0 = mesh->boundary_node(b).node;
    const int a1 = mesh->boundary_node(mesh->boundary_next(b)).node;
    const Point p0 = mesh->point(a0), p1 = mesh->point(a1);
    // Outward normal of the segment from the counterclockwise tangent.
    const Point t{(p1[0] - p0[0]) / h, (p1[1] - p0[1]) / h};
    const Point n{t[1], -t[0]};
    for (double s : {kGaussLo, kGaussHi}) {
      const Point x{p0[0] + s * (p1[0] - p0[0]), p0[1] + s * (p1[1] - p0[1])};
      g(x, n, gx);
      for (int al = 0; al < m; ++al) {
        load.values[a0 * m + al] += 0.5 * h * (1 - s) * gx[static_cast<std::size_t>(al)];
        load.values[a1 * m + al] += 0.5 * h * s * gx[static_cast<std::size_t>(al)];
      }
    }
  }
}

AssembledOperator::AssembledOperator(GridPtr grid, int components, ConstraintMode mode, bool symmetric,
                                     SparseMatrix stiffness, SolverOptions options, double epsilon, std::string key)
    : grid_(std::move(grid)),
      m_(components),
      mode_(mode),
      symmetric_(symmetric),
      stiffness_(std::move(stiffness)),
      options_(options),
      epsilon_(epsilon),
      key_(std::move(key)) {
  const int nodes = grid_->node_count();
  pin_weights_ = Eigen::VectorXd::Zero(nodes);
  auto mesh = std::dynamic_pointer_cast<const DomainMesh>(grid_);
  if (mode_ == ConstraintMode::dirichlet) {
    require(mesh != nullptr, "assemble: Dirichlet mode needs a bounded DomainMesh");
    for (const BoundaryNode& b : mesh->boundary())
      for (int al = 0; al < m_; ++al) constrained_.push_back(b.node * m_ + al);
    std::sort(constrained_.begin(), constrained_.end());
  } else {
    // Ground node 0; the pin is restored afterwards by a constant shift.
    for (int al = 0; al < m_; ++al) constrained_.push_back(al);
    if (mesh)
      for (const BoundaryNode& b : mesh->boundary()) pin_weights_[b.node] = b.weight;
    else
      pin_weights_.setConstant(1.0 / nodes);
  }
}

const LinearSolver& AssembledOperator::solver() const {
  std::lock_guard lock(factor_mutex_);
  if (!solver_) {
    SparseMatrix kc = stiffness_;
    std::vector<char> fixed(static_cast<std::size_t>(kc.rows()), 0);
    for (int c : constrained_) fixed[static_cast<std::size_t>(c)] = 1;
    for (Eigen::Index c = 0; c < kc.outerSize(); ++c)
      for (SparseMatrix::InnerIterator it(kc, c); it; ++it) {
        const bool rc = fixed[static_cast<std::size_t>(it.row())], cc = fixed[static_cast<std::size_t>(c)];
        if (rc || cc) it.valueRef() = (it.row() == c) ? 1.0 : 0.0;
      }
    kc.prune(0.0);
    solver_ = std::make_unique<LinearSolver>(std::move(kc), symmetric_, options_);
  }
  return *solver_;
}

OperatorPtr assemble(const ScaledCoefficient& coeff, GridPtr grid, ConstraintMode mode, SolverOptions options) {
  require(grid != nullptr, "assemble: null grid");
  require(coeff.dim() == 2, "assemble: grids are two-dimensional");
  require(!grid->periodic() || grid->n() >= 2, "assemble: torus grids need n >= 2");
  const int m = coeff.components();
  TensorAt at = [&coeff](const Point& x, Tensor4& out) { coeff.evaluate(x, out); };
  SparseMatrix k = assemble_stiffness(*grid, m, 2, coeff.symmetric(), at);
  const bool oscillates = coeff.base().family() != Family::constant;
  auto op = std::make_shared<AssembledOperator>(grid, m, mode, coeff.symmetric(), std::move(k), options,
                                                oscillates ? coeff.epsilon() : 0.0, coeff.key());
  if (oscillates && grid->h() > coeff.epsilon() / 8.0 * (1.0 + 1e-12))
    op->add_warning("under-resolved: h = " + fmt(grid->h()) + " > epsilon/8 = " + fmt(coeff.epsilon() / 8.0));
  return op;
}

OperatorPtr assemble(const Tensor4& tensor, GridPtr grid, ConstraintMode mode, SolverOptions options) {
  require(grid != nullptr, "assemble: null grid");
  require(tensor.dim() == 2, "assemble: grids are two-dimensional");
  require(!grid->periodic() || grid->n() >= 2, "assemble: torus grids need n >= 2");
  TensorAt at = [&tensor](const Point&, Tensor4& out) { out = tensor; };
  const bool sym = tensor.is_symmetric();
  SparseMatrix k = assemble_stiffness(*grid, tensor.components(), 2, sym, at);
  std::string key = "tensor(";
  for (double v : tensor.data()) key += fmt(v) + ",";
  key += "m=" + std::to_string(tensor.components()) + ")";
  return std::make_shared<AssembledOperator>(grid, tensor.components(), mode, sym, std::move(k), options, 0.0,
                                             std::move(key));
}

Field solve_dirichlet(const AssembledOperator& op, const Load& load, const BoundaryField& bdata) {
  require(op.mode() == ConstraintMode::dirichlet, "solve_dirichlet: operator not assembled in Dirichlet mode");
  require(load.m == op.components() && load.values.size() == op.stiffness().rows(), "solve_dirichlet: load shape");
  require(bdata.m == op.components() && bdata.mesh.get() == op.grid_ptr().get(), "solve_dirichlet: boundary data shape");
  const int m = op.components();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(load.values.size());
  for (int b = 0; b < bdata.size(); ++b)
    for (int al = 0; al < m; ++al) g[bdata.mesh->boundary_node(b).node * m + al] = bdata(b, al);
  Eigen::VectorXd rhs = load.values - op.stiffness() * g;
  for (int c : op.constrained_dofs()) rhs[c] = g[c];
  Eigen::VectorXd x = op.solver().solve(rhs);
  for (int c : op.constrained_dofs()) x[c] = g[c];
  return Field(op.grid_ptr(), m, std::move(x));
}

Field solve_dirichlet(const AssembledOperator& op, const Load& load) {
  auto mesh = std::dynamic_pointer_cast<const DomainMesh>(op.grid_ptr());
  require(mesh != nullptr, "solve_dirichlet: operator has no DomainMesh");
  return solve_dirichlet(op, load, BoundaryField(mesh, op.components()));
}

Field solve_neumann(const AssembledOperator& op, const Load& load) {
  require(op.mode() == ConstraintMode::neumann, "solve_neumann: operator not assembled in Neumann mode");
  require(load.m == op.components() && load.values.size() == op.stiffness().rows(), "solve_neumann: load shape");
  const int m = op.components();
  const int nodes = op.grid().node_count();
  const double area = nodes * op.grid().h() * op.grid().h();
  for (int al = 0; al < m; ++al) {
    double total = 0.0, scale = 0.0;
    for (int a = 0; a < nodes; ++a) {
      total += load.values[a * m + al];
      scale += std::abs(load.values[a * m + al]);
    }
    if (std::abs(total) > 1e-8 * scale + 1e-10 * area)
      throw InvalidArgument("solve_neumann: incompatible data, total source + flux = " + fmt(total) +
                            " for component " + std::to_string(al));
  }
  Eigen::VectorXd rhs = load.values;
  for (int c : op.constrained_dofs()) rhs[c] = 0.0;
  Eigen::VectorXd x = op.solver().solve(rhs);
  const Eigen::VectorXd& w = op.pin_weights();
  const double wsum = w.sum();
  for (int al = 0; al < m; ++al) {
    double mean = 0.0;
    for (int a = 0; a < nodes; ++a) mean += w[a] * x[a * m + al];
    mean /= wsum;
    for (int a = 0; a < nodes; ++a) x[a * m + al] -= mean;
  }
  return Field(op.grid_ptr(), m, std::move(x));
}

Field solve_neumann(const AssembledOperator& op, const Load& source, const BoundaryField& flux) {
  Load load = source;
  add_boundary_flux(load, flux);
  return solve_neumann(op, load);
}

Eigen::VectorXd weak_residual(const AssembledOperator& op, const Field& u, const Load& load) {
  require(u.values.size() == op.stiffness().rows() && load.values.size() == u.values.size(), "weak_residual: shape");
  return op.stiffness() * u.values - load.values;
}

double BoundaryFlux::total(int alpha) const {
  double t = 0.0;
  for (int b = 0; b < nodal.size(); ++b) t += moments[b * nodal.m + alpha];
  return t;
}

BoundaryFlux conormal(const Field& u, const AssembledOperator& op, const Load& source) {
  auto mesh = std::dynamic_pointer_cast<const DomainMesh>(op.grid_ptr());
  require(mesh != nullptr, "conormal: operator has no DomainMesh");
  const Eigen::VectorXd r = weak_residual(op, u, source);
  const int m = op.components();
  BoundaryFlux out{BoundaryField(mesh, m), Eigen::VectorXd::Zero(mesh->boundary_count() * m)};
  for (int b = 0; b < mesh->boundary_count(); ++b) {
    const BoundaryNode& bn = mesh->boundary_node(b);
    for (int al = 0; al < m; ++al) {
      out.moments[b * m + al] = r[bn.node * m + al];
      out.nodal(b, al) = r[bn.node * m + al] / bn.weight;
    }
  }
  for (int b = 0; b < mesh->boundary_count(); ++b) {
    if (!mesh->boundary_node(b).corner) continue;
    const int p = mesh->boundary_prev(b), q = mesh->boundary_next(b);
    for (int al = 0; al < m; ++al) out.nodal(b, al) = 0.5 * (out.nodal(p, al) + out.nodal(q, al));
  }
  return out;
}

}  // namespace homoglab
