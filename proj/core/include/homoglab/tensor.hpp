#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace homoglab {

/// Coefficient tensor a_ij^{αβ} for d space dimensions and m components.
///
/// Stored as a (d·m)×(d·m) block matrix with row (i, α) = i·m + α and column
/// (j, β) = j·m + β, so the quadratic form a_ij^{αβ} ξ_i^α ξ_j^β is ξᵀ A ξ and
/// the adjoint a_ji^{βα} is the plain transpose.
class Tensor4 {
 public:
  Tensor4() = default;
  Tensor4(int dim, int components);

  static Tensor4 identity(int dim, int components);
  /// δ_ij δ^{αβ} s
  static Tensor4 isotropic(int dim, int components, double s);
  static Tensor4 from_matrix(int dim, int components, const Eigen::MatrixXd& block);

  int dim() const { return d_; }
  int components() const { return m_; }
  int size() const { return d_ * m_; }

  double& operator()(int i, int j, int alpha, int beta) {
    return a_[static_cast<std::size_t>((i * m_ + alpha) * size() + j * m_ + beta)];
  }
  double operator()(int i, int j, int alpha, int beta) const {
    return a_[static_cast<std::size_t>((i * m_ + alpha) * size() + j * m_ + beta)];
  }

  std::span<double> data() { return a_; }
  std::span<const double> data() const { return a_; }

  Tensor4 adjoint() const;
  bool is_symmetric() const;
  double max_abs() const;
  double max_abs_diff(const Tensor4& other) const;

  Eigen::MatrixXd matrix() const;
  /// (n_i n_j a_ij^{αβ}) as an m×m matrix.
  Eigen::MatrixXd normal_block(std::span<const double> n) const;
  /// Extremes of ξᵀAξ/|ξ|² over all ξ (symmetric part eigenvalues).
  std::pair<double, double> rayleigh_bounds() const;

 private:
  int d_ = 0;
  int m_ = 0;
  std::vector<double> a_;
};

}  // namespace homoglab
