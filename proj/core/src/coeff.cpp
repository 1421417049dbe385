#include "homoglab/coeff.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "homoglab/error.hpp"
#include "homoglab/expression.hpp"

namespace homoglab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void fill_isotropic(Tensor4& out, double s) {
  auto data = out.data();
  std::fill(data.begin(), data.end(), 0.0);
  for (int i = 0; i < out.dim(); ++i)
    for (int a = 0; a < out.components(); ++a) out(i, i, a, a) = s;
}

double smooth_step(double t, double width) { return 0.5 * (1.0 + std::tanh(t / width)); }

CoefficientPtr make_isotropic(int components, std::function<double(double, double)> a, Family family,
                              double a_min, double a_max, double lipschitz, std::string key) {
  require(a_min > 0.0, "builtin " + std::string(to_string(family)) +
                           ": parameters give a non-elliptic coefficient (min value " + fmt(a_min) + ")");
  const double mu = std::min(a_min, 1.0 / a_max);
  auto eval = [a = std::move(a)](std::span<const double> y, Tensor4& out) { fill_isotropic(out, a(y[0], y[1])); };
  return std::make_shared<CoefficientField>(2, components, std::move(eval), family, mu,
                                            HolderPair{1.0, lipschitz}, true, std::move(key));
}

}  // namespace

std::string_view to_string(Family family) {
  switch (family) {
    case Family::constant: return "constant";
    case Family::layered: return "layered";
    case Family::trigonometric: return "trigonometric";
    case Family::smoothed_checkerboard: return "smoothed-checkerboard";
    case Family::user: return "user";
  }
  return "unknown";
}

Family family_from_string(std::string_view tag) {
  for (Family f : {Family::constant, Family::layered, Family::trigonometric, Family::smoothed_checkerboard,
                   Family::user})
    if (to_string(f) == tag) return f;
  throw InvalidArgument("unknown coefficient family '" + std::string(tag) + "'");
}

CoefficientField::CoefficientField(int dim, int components, Evaluator evaluator, Family family, double mu,
                                   HolderPair holder, bool symmetric, std::string key)
    : dim_(dim),
      components_(components),
      evaluator_(std::move(evaluator)),
      family_(family),
      mu_(mu),
      holder_(holder),
      symmetric_(symmetric),
      key_(std::move(key)) {
  require(dim >= 1 && components >= 1, "CoefficientField: dim and components must be >= 1");
  require(mu > 0.0, "CoefficientField: declared ellipticity must be positive");
  require(holder.exponent > 0.0 && holder.exponent <= 1.0, "CoefficientField: Hölder exponent must lie in (0, 1]");
  require(static_cast<bool>(evaluator_), "CoefficientField: empty evaluator");
}

void CoefficientField::evaluate(std::span<const double> y, Tensor4& out) const {
  if (out.dim() != dim_ || out.components() != components_) out = Tensor4(dim_, components_);
  double reduced[8];
  require(static_cast<int>(y.size()) == dim_ && dim_ <= 8, "CoefficientField::evaluate: point has wrong dimension");
  for (int k = 0; k < dim_; ++k) reduced[k] = y[k] - std::floor(y[k]);
  evaluator_(std::span<const double>(reduced, static_cast<std::size_t>(dim_)), out);
}

Tensor4 CoefficientField::operator()(std::span<const double> y) const {
  Tensor4 out(dim_, components_);
  evaluate(y, out);
  return out;
}

std::shared_ptr<const CoefficientField> CoefficientField::adjoint() const {
  if (symmetric_) return std::make_shared<CoefficientField>(*this);
  auto eval = [inner = evaluator_](std::span<const double> y, Tensor4& out) {
    Tensor4 tmp(out.dim(), out.components());
    inner(y, tmp);
    out = tmp.adjoint();
  };
  return std::make_shared<CoefficientField>(dim_, components_, std::move(eval), family_, mu_, holder_, false,
                                            key_ + "^T");
}

ValidationReport validate(const CoefficientField& field, int samples) {
  require(samples >= 2, "validate: need at least 2 samples per axis");
  require(field.dim() == 2, "validate: only d = 2 sampling is implemented");
  // Dyadic lattice: y + e_k is exactly representable, so the periodicity
  // residual measures the evaluator and not rounding in the shift.
  const int n = static_cast<int>(std::bit_ceil(static_cast<unsigned>(samples)));
  const double step = 1.0 / n;
  const double lambda = field.holder().exponent;

  ValidationReport report;
  report.samples_per_axis = n;
  report.min_rayleigh = std::numeric_limits<double>::infinity();
  report.max_rayleigh = -std::numeric_limits<double>::infinity();

  Tensor4 a(field.dim(), field.components());
  Tensor4 shifted(field.dim(), field.components());
  std::vector<Tensor4> row_prev;
  std::vector<Tensor4> row_cur(static_cast<std::size_t>(n));

  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double y[2] = {i * step, j * step};
      field.evaluate(y, a);
      for (double v : a.data())
        if (!std::isfinite(v)) throw InvalidArgument("validate: evaluator returned a non-finite value");
      const auto [lo, hi] = a.rayleigh_bounds();
      report.min_rayleigh = std::min(report.min_rayleigh, lo);
      report.max_rayleigh = std::max(report.max_rayleigh, hi);

      for (int k = 0; k < 2; ++k) {
        double ys[2] = {y[0], y[1]};
        ys[k] += 1.0;
        field.evaluate(ys, shifted);
        report.periodicity_residual = std::max(report.periodicity_residual, a.max_abs_diff(shifted));
      }
      row_cur[static_cast<std::size_t>(i)] = a;
      const double scale = std::pow(step, lambda);
      if (i > 0)
        report.holder_quotient =
            std::max(report.holder_quotient, a.max_abs_diff(row_cur[static_cast<std::size_t>(i - 1)]) / scale);
      if (j > 0)
        report.holder_quotient =
            std::max(report.holder_quotient, a.max_abs_diff(row_prev[static_cast<std::size_t>(i)]) / scale);
    }
    row_prev = row_cur;
  }
  if (!(report.min_rayleigh > 0.0))
    throw InvalidArgument("validate: coefficient is not elliptic (lower Rayleigh quotient " +
                          fmt(report.min_rayleigh) + ")");
  report.measured_mu = std::min(report.min_rayleigh, 1.0 / report.max_rayleigh);
  return report;
}

ScaledCoefficient::ScaledCoefficient(CoefficientPtr base, double epsilon) : base_(std::move(base)), epsilon_(epsilon) {
  require(base_ != nullptr, "ScaledCoefficient: null base field");
  require(epsilon > 0.0 && std::isfinite(epsilon), "rescale: epsilon must be positive");
}

std::string ScaledCoefficient::key() const { return base_->key() + "@eps=" + fmt(epsilon_); }

void ScaledCoefficient::evaluate(std::span<const double> x, Tensor4& out) const {
  double y[8];
  const int d = base_->dim();
  for (int k = 0; k < d; ++k) y[k] = x[k] / epsilon_;
  base_->evaluate(std::span<const double>(y, static_cast<std::size_t>(d)), out);
}

Tensor4 ScaledCoefficient::operator()(std::span<const double> x) const {
  Tensor4 out(dim(), components());
  evaluate(x, out);
  return out;
}

ScaledCoefficient rescale(CoefficientPtr field, double epsilon) { return {std::move(field), epsilon}; }

ScaledCoefficient rescale(const ScaledCoefficient& scaled, double epsilon) {
  require(epsilon > 0.0, "rescale: epsilon must be positive");
  return {scaled.base_ptr(), scaled.epsilon() * epsilon};
}

CoefficientPtr constant_field(const Tensor4& tensor) {
  const auto [lo, hi] = tensor.rayleigh_bounds();
  require(lo > 0.0, "builtin constant: tensor is not elliptic");
  std::string key = "constant(d=" + std::to_string(tensor.dim()) + ",m=" + std::to_string(tensor.components());
  for (double v : tensor.data()) key += "," + fmt(v);
  key += ")";
  auto eval = [tensor](std::span<const double>, Tensor4& out) { out = tensor; };
  return std::make_shared<CoefficientField>(tensor.dim(), tensor.components(), std::move(eval), Family::constant,
                                            std::min(lo, 1.0 / hi), HolderPair{1.0, 0.0}, tensor.is_symmetric(),
                                            std::move(key));
}

namespace {

CoefficientPtr build(const ConstantParams& p) { return constant_field(p.tensor); }

CoefficientPtr build(const LayeredParams& p) {
  require(p.axis == 0 || p.axis == 1, "builtin layered: axis must be 0 or 1");
  require(p.components >= 1, "builtin layered: components must be >= 1");
  const int axis = p.axis;
  const double mean = p.mean, amp = p.amplitude;
  auto a = [=](double y1, double y2) { return mean + amp * std::sin(kTwoPi * (axis == 0 ? y1 : y2)); };
  std::string key = "layered(mean=" + fmt(mean) + ",amp=" + fmt(amp) + ",axis=" + std::to_string(axis) +
                    ",m=" + std::to_string(p.components) + ")";
  return make_isotropic(p.components, a, Family::layered, mean - std::abs(amp), mean + std::abs(amp),
                        kTwoPi * std::abs(amp), std::move(key));
}

CoefficientPtr build(const TrigonometricParams& p) {
  const double mean = p.mean, amp = p.amplitude;
  auto a = [=](double y1, double y2) { return mean + amp * std::cos(kTwoPi * y1) * std::cos(kTwoPi * y2); };
  std::string key = "trigonometric(mean=" + fmt(mean) + ",amp=" + fmt(amp) + ",m=" + std::to_string(p.components) + ")";
  return make_isotropic(p.components, a, Family::trigonometric, mean - std::abs(amp), mean + std::abs(amp),
                        kTwoPi * std::abs(amp) * std::numbers::sqrt2, std::move(key));
}

CoefficientPtr build(const CheckerboardParams& p) {
  require(p.contrast > 0.0, "builtin smoothed-checkerboard: contrast must be positive");
  require(p.width > 0.0, "builtin smoothed-checkerboard: smoothing width must be positive");
  const double contrast = p.contrast, width = p.width;
  auto a = [=](double y1, double y2) {
    // sin(2πt)/(2π) behaves like the signed distance to the nearest cell line.
    const double h1 = smooth_step(std::sin(kTwoPi * y1) / kTwoPi, width);
    const double h2 = smooth_step(std::sin(kTwoPi * y2) / kTwoPi, width);
    const double s = h1 * h2 + (1.0 - h1) * (1.0 - h2);
    return 1.0 + (contrast - 1.0) * s;
  };
  std::string key = "smoothed-checkerboard(contrast=" + fmt(contrast) + ",width=" + fmt(width) +
                    ",m=" + std::to_string(p.components) + ")";
  const double lo = std::min(1.0, contrast), hi = std::max(1.0, contrast);
  return make_isotropic(p.components, a, Family::smoothed_checkerboard, lo, hi,
                        std::abs(contrast - 1.0) / (2.0 * width) * std::numbers::sqrt2, std::move(key));
}

CoefficientPtr build(const UserParams& p) {
  require(p.components >= 1, "builtin user: components must be >= 1");
  const int m = p.components;
  const int s = 2 * m;
  std::vector<Expression> exprs;
  for (const auto& e : p.entries) exprs.push_back(Expression::parse(e));
  std::string key = "user(m=" + std::to_string(m);
  for (const auto& e : p.entries) key += ";" + e;
  key += ")";

  CoefficientField::Evaluator eval;
  bool symmetric = true;
  if (exprs.size() == 1) {
    eval = [e = exprs[0]](std::span<const double> y, Tensor4& out) { fill_isotropic(out, e(y[0], y[1])); };
  } else {
    require(static_cast<int>(exprs.size()) == s * s,
            "builtin user: expected 1 or (2m)^2 = " + std::to_string(s * s) + " expressions");
    for (int r = 0; r < s && symmetric; ++r)
      for (int c = r + 1; c < s; ++c)
        if (p.entries[static_cast<std::size_t>(r * s + c)] != p.entries[static_cast<std::size_t>(c * s + r)]) {
          symmetric = false;
          break;
        }
    eval = [exprs, s](std::span<const double> y, Tensor4& out) {
      auto data = out.data();
      for (int k = 0; k < s * s; ++k) data[static_cast<std::size_t>(k)] = exprs[static_cast<std::size_t>(k)](y[0], y[1]);
    };
  }
  // Declared μ comes from a dense sampling pass.
  CoefficientField probe(2, m, eval, Family::user, 1.0, HolderPair{}, symmetric, key);
  const ValidationReport r = validate(probe, 64);
  return std::make_shared<CoefficientField>(2, m, std::move(eval), Family::user, r.measured_mu,
                                            HolderPair{1.0, r.holder_quotient}, symmetric, std::move(key));
}

}  // namespace

CoefficientPtr builtin(const BuiltinParams& params) {
  return std::visit([](const auto& p) { return build(p); }, params);
}

}  // namespace homoglab
