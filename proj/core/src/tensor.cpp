#include "homoglab/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "homoglab/error.hpp"

namespace homoglab {

Tensor4::Tensor4(int dim, int components) : d_(dim), m_(components) {
  require(dim >= 1 && components >= 1, "Tensor4: dim and components must be >= 1");
  a_.assign(static_cast<std::size_t>(size() * size()), 0.0);
}

Tensor4 Tensor4::identity(int dim, int components) { return isotropic(dim, components, 1.0); }

Tensor4 Tensor4::isotropic(int dim, int components, double s) {
  Tensor4 t(dim, components);
  for (int i = 0; i < dim; ++i)
    for (int a = 0; a < components; ++a) t(i, i, a, a) = s;
  return t;
}

Tensor4 Tensor4::from_matrix(int dim, int components, const Eigen::MatrixXd& block) {
  Tensor4 t(dim, components);
  require(block.rows() == t.size() && block.cols() == t.size(),
          "Tensor4::from_matrix: block must be (d*m)x(d*m)");
  for (int r = 0; r < t.size(); ++r)
    for (int c = 0; c < t.size(); ++c) t.a_[static_cast<std::size_t>(r * t.size() + c)] = block(r, c);
  return t;
}

Tensor4 Tensor4::adjoint() const {
  Tensor4 t(d_, m_);
  const int s = size();
  for (int r = 0; r < s; ++r)
    for (int c = 0; c < s; ++c)
      t.a_[static_cast<std::size_t>(r * s + c)] = a_[static_cast<std::size_t>(c * s + r)];
  return t;
}

bool Tensor4::is_symmetric() const {
  const int s = size();
  for (int r = 0; r < s; ++r)
    for (int c = r + 1; c < s; ++c)
      if (a_[static_cast<std::size_t>(r * s + c)] != a_[static_cast<std::size_t>(c * s + r)]) return false;
  return true;
}

double Tensor4::max_abs() const {
  double v = 0.0;
  for (double x : a_) v = std::max(v, std::abs(x));
  return v;
}

double Tensor4::max_abs_diff(const Tensor4& other) const {
  require(other.d_ == d_ && other.m_ == m_, "Tensor4::max_abs_diff: shape mismatch");
  double v = 0.0;
  for (std::size_t k = 0; k < a_.size(); ++k) v = std::max(v, std::abs(a_[k] - other.a_[k]));
  return v;
}

Eigen::MatrixXd Tensor4::matrix() const {
  const int s = size();
  Eigen::MatrixXd out(s, s);
  for (int r = 0; r < s; ++r)
    for (int c = 0; c < s; ++c) out(r, c) = a_[static_cast<std::size_t>(r * s + c)];
  return out;
}

Eigen::MatrixXd Tensor4::normal_block(std::span<const double> n) const {
  require(static_cast<int>(n.size()) == d_, "Tensor4::normal_block: normal has wrong dimension");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m_, m_);
  for (int i = 0; i < d_; ++i)
    for (int j = 0; j < d_; ++j)
      for (int a = 0; a < m_; ++a)
        for (int b = 0; b < m_; ++b) out(a, b) += n[i] * n[j] * (*this)(i, j, a, b);
  return out;
}

std::pair<double, double> Tensor4::rayleigh_bounds() const {
  const Eigen::MatrixXd a = matrix();
  const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
  return {eig.eigenvalues().minCoeff(), eig.eigenvalues().maxCoeff()};
}

}  // namespace homoglab
