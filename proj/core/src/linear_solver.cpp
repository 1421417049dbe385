#include "homoglab/linear_solver.hpp"

#include <atomic>
#include <chrono>
#include <variant>

#include <Eigen/CholmodSupport>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <Eigen/UmfPackSupport>

#include "homoglab/error.hpp"

namespace homoglab {

namespace {

// Set once a BLAS-backed factorization has produced a bad factor; some
// BLAS builds misdetect the CPU and break it for the rest of the process.
std::atomic<bool> g_supernodal_unusable{false};
std::atomic<bool> g_umfpack_unusable{false};

using Supernodal = Eigen::CholmodSupernodalLLT<SparseMatrix, Eigen::Lower>;
using Simplicial = Eigen::CholmodSimplicialLLT<SparseMatrix, Eigen::Lower>;
using LU = Eigen::UmfPackLU<SparseMatrix>;
using PlainLU = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;
using CG = Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>>;
using BiCG = Eigen::BiCGSTAB<SparseMatrix, Eigen::DiagonalPreconditioner<double>>;

double relative_residual(const SparseMatrix& a, const Eigen::VectorXd& x, const Eigen::VectorXd& b) {
  const double nb = b.norm();
  if (nb == 0.0) return x.norm();
  return (a * x - b).norm() / nb;
}

// Nested dissection gives much less fill than AMD on grid matrices.
template <class Solver>
void configure(Solver& s) {
  s.cholmod().print = 0;
  s.cholmod().nmethods = 1;
  s.cholmod().method[0].ordering = CHOLMOD_METIS;
  s.cholmod().postorder = 1;
}

template <class Solver>
bool probe(const Solver& s, const SparseMatrix& a, double tol) {
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(a.rows());
  const Eigen::VectorXd b = a * ones;
  const Eigen::VectorXd x = s.solve(b);
  return x.allFinite() && relative_residual(a, x, b) <= tol;
}

}  // namespace

std::string_view to_string(SolverKind kind) { return kind == SolverKind::direct ? "direct" : "cg"; }

SolverKind solver_kind_from_string(std::string_view tag) {
  if (tag == "direct") return SolverKind::direct;
  if (tag == "cg") return SolverKind::cg;
  throw InvalidArgument("unknown solver kind '" + std::string(tag) + "' (expected direct or cg)");
}

struct LinearSolver::Impl {
  std::variant<std::unique_ptr<Supernodal>, std::unique_ptr<Simplicial>, std::unique_ptr<LU>, std::unique_ptr<CG>,
               std::unique_ptr<BiCG>, std::unique_ptr<PlainLU>>
      backend;
};

LinearSolver::LinearSolver(SparseMatrix matrix, bool symmetric, SolverOptions options)
    : matrix_(std::move(matrix)), symmetric_(symmetric), options_(options), impl_(std::make_unique<Impl>()) {
  require(matrix_.rows() == matrix_.cols(), "LinearSolver: matrix must be square");
  require(options_.tol > 0.0, "LinearSolver: tolerance must be positive");
  matrix_.makeCompressed();
  factor();
}

LinearSolver::~LinearSolver() = default;

void LinearSolver::factor() {
  const auto t0 = std::chrono::steady_clock::now();
  if (options_.kind == SolverKind::cg) {
    const int cap = options_.max_iterations > 0 ? options_.max_iterations : static_cast<int>(10 * matrix_.rows());
    if (symmetric_) {
      auto s = std::make_unique<CG>();
      s->setTolerance(options_.tol * 0.1);
      s->setMaxIterations(cap);
      s->compute(matrix_);
      impl_->backend = std::move(s);
    } else {
      auto s = std::make_unique<BiCG>();
      s->setTolerance(options_.tol * 0.1);
      s->setMaxIterations(cap);
      s->compute(matrix_);
      impl_->backend = std::move(s);
    }
  } else if (!symmetric_) {
    bool done = false;
    if (!g_umfpack_unusable.load()) {
      auto s = std::make_unique<LU>();
      s->compute(matrix_);
      if (s->info() == Eigen::Success && probe(*s, matrix_, options_.tol)) {
        impl_->backend = std::move(s);
        done = true;
      } else {
        g_umfpack_unusable.store(true);
      }
    }
    if (!done) {
      auto s = std::make_unique<PlainLU>();
      s->compute(matrix_);
      if (s->info() != Eigen::Success) throw SolverError("sparse LU factorization failed: " + s->lastErrorMessage(), 1.0);
      impl_->backend = std::move(s);
    }
  } else {
    bool done = false;
    if (!g_supernodal_unusable.load()) {
      auto s = std::make_unique<Supernodal>();
      configure(*s);
      s->compute(matrix_);
      // Probe with a known solution; a broken BLAS shows up here.
      if (s->info() == Eigen::Success && probe(*s, matrix_, options_.tol)) {
        impl_->backend = std::move(s);
        done = true;
      }
      if (!done) g_supernodal_unusable.store(true);
    }
    if (!done) {
      auto s = std::make_unique<Simplicial>();
      configure(*s);
      s->compute(matrix_);
      if (s->info() != Eigen::Success) throw SolverError("Cholesky factorization failed (matrix not SPD?)", 1.0);
      impl_->backend = std::move(s);
    }
  }
  factor_seconds_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string_view LinearSolver::backend() const {
  switch (impl_->backend.index()) {
    case 0: return "cholmod-supernodal";
    case 1: return "cholmod-simplicial";
    case 2: return "umfpack-lu";
    case 3: return "cg";
    case 4: return "bicgstab";
    default: return "sparse-lu";
  }
}

Eigen::VectorXd LinearSolver::solve(const Eigen::VectorXd& rhs) const {
  require(rhs.size() == matrix_.rows(), "LinearSolver::solve: right-hand side has wrong size");
  std::lock_guard lock(mutex_);
  if (rhs.squaredNorm() == 0.0) return Eigen::VectorXd::Zero(rhs.size());
  auto run = [&](const Eigen::VectorXd& b) -> Eigen::VectorXd {
    return std::visit([&](auto& s) -> Eigen::VectorXd { return s->solve(b); }, impl_->backend);
  };
  Eigen::VectorXd x = run(rhs);
  double res = x.allFinite() ? relative_residual(matrix_, x, rhs) : 1.0;
  if (res > options_.tol && x.allFinite() && options_.kind == SolverKind::direct) {
    x += run(rhs - matrix_ * x);
    res = relative_residual(matrix_, x, rhs);
  }
  if (!(res <= options_.tol)) throw SolverError("linear solve (" + std::string(backend()) + ") did not converge", res);
  return x;
}

}  // namespace homoglab
