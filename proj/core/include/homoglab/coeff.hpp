#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "homoglab/tensor.hpp"

namespace homoglab {

enum class Family { constant, layered, trigonometric, smoothed_checkerboard, user };

std::string_view to_string(Family family);
Family family_from_string(std::string_view tag);

struct HolderPair {
  double exponent = 1.0;  // λ in (0, 1]
  double seminorm = 0.0;  // τ
};

/// Periodic coefficient tensor A(y) = (a_ij^{αβ}(y)) on R^d.
///
/// Immutable after construction; the evaluator must be a pure function of y.
class CoefficientField {
 public:
  /// Receives y already reduced to [0, 1)^d and fills `out`.
  using Evaluator = std::function<void(std::span<const double> y, Tensor4& out)>;

  CoefficientField(int dim, int components, Evaluator evaluator, Family family, double mu,
                   HolderPair holder, bool symmetric, std::string key);

  int dim() const { return dim_; }
  int components() const { return components_; }
  Family family() const { return family_; }
  double mu() const { return mu_; }
  const HolderPair& holder() const { return holder_; }
  bool symmetric() const { return symmetric_; }
  /// Stable identity used for caching and reports.
  const std::string& key() const { return key_; }

  /// a_ij^{αβ}(y); y is reduced modulo Z^d first, so integer shifts of a
  /// representable y give bitwise-identical tensors.
  void evaluate(std::span<const double> y, Tensor4& out) const;
  Tensor4 operator()(std::span<const double> y) const;

  /// A*(y) with a*_ij^{αβ} = a_ji^{βα}.
  std::shared_ptr<const CoefficientField> adjoint() const;

 private:
  int dim_;
  int components_;
  Evaluator evaluator_;
  Family family_;
  double mu_;
  HolderPair holder_;
  bool symmetric_;
  std::string key_;
};

using CoefficientPtr = std::shared_ptr<const CoefficientField>;

struct ValidationReport {
  double min_rayleigh = 0.0;
  double max_rayleigh = 0.0;
  double periodicity_residual = 0.0;
  double holder_quotient = 0.0;
  /// μ implied by the measured quotients: min(min_rayleigh, 1 / max_rayleigh).
  double measured_mu = 0.0;
  int samples_per_axis = 0;
};

/// Samples the field on a dyadic lattice with at least `samples` points per
/// axis. Throws on non-finite values or a non-positive lower quotient.
ValidationReport validate(const CoefficientField& field, int samples);

/// A(x/ε) on the physical domain.
class ScaledCoefficient {
 public:
  ScaledCoefficient(CoefficientPtr base, double epsilon);

  const CoefficientField& base() const { return *base_; }
  const CoefficientPtr& base_ptr() const { return base_; }
  double epsilon() const { return epsilon_; }
  int dim() const { return base_->dim(); }
  int components() const { return base_->components(); }
  bool symmetric() const { return base_->symmetric(); }
  std::string key() const;

  void evaluate(std::span<const double> x, Tensor4& out) const;
  Tensor4 operator()(std::span<const double> x) const;

  ScaledCoefficient adjoint() const { return {base_->adjoint(), epsilon_}; }

 private:
  CoefficientPtr base_;
  double epsilon_;
};

ScaledCoefficient rescale(CoefficientPtr field, double epsilon);
/// Composition: rescale(rescale(A, ε₁), ε₂)(x) = A(x / (ε₁ε₂)).
ScaledCoefficient rescale(const ScaledCoefficient& scaled, double epsilon);

struct ConstantParams {
  Tensor4 tensor;
};
/// a(y) = mean + amplitude·sin(2π y_axis), isotropic.
struct LayeredParams {
  double mean = 2.0;
  double amplitude = 1.0;
  int axis = 0;
  int components = 1;
};
/// a(y) = mean + amplitude·cos(2π y₁)·cos(2π y₂), isotropic.
struct TrigonometricParams {
  double mean = 2.0;
  double amplitude = 0.5;
  int components = 1;
};
/// Checkerboard with values 1 and `contrast`, mollified over a band of
/// half-width about `width` around the cell lines.
struct CheckerboardParams {
  double contrast = 10.0;
  double width = 1.0 / 16.0;
  int components = 1;
};
/// Either one expression (isotropic a(y)δ_ij δ^{αβ}) or (2m)² expressions
/// for the block matrix, row-major in (i, α) × (j, β).
struct UserParams {
  int components = 1;
  std::vector<std::string> entries;
};

using BuiltinParams =
    std::variant<ConstantParams, LayeredParams, TrigonometricParams, CheckerboardParams, UserParams>;

CoefficientPtr builtin(const BuiltinParams& params);
CoefficientPtr constant_field(const Tensor4& tensor);

}  // namespace homoglab
