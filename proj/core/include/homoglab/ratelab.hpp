#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <list>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "homoglab/assembly.hpp"
#include "homoglab/cell.hpp"
#include "homoglab/coeff.hpp"
#include "homoglab/correctors.hpp"

namespace homoglab {

struct ExperimentConfig {
  std::string experiment;
  /// Empty selects the experiment's default coefficient.
  std::optional<BuiltinParams> coefficient;
  /// Strictly decreasing. Empty selects the experiment's default grid.
  std::vector<double> epsilons;
  int cells_per_period = 16;
  Point x{0.25, 0.25};
  Point y{0.75, 0.5};
  std::uint64_t seed = 20240601;
  SolverOptions solver;
};

/// Checks the invariants of a resolved config (ε list non-empty and strictly
/// decreasing, cells per period ≥ 8, every grid at most 2048 cells per axis).
void validate(const ExperimentConfig& config);

/// Domain cells per axis for a given ε.
int grid_size(double epsilon, int cells_per_period);

struct RateRow {
  std::string experiment;
  double epsilon = 0.0;
  double h = 0.0;
  std::string quantity;
  double value = 0.0;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  /// Sum of squared log residuals of the power fit c·ε^s.
  double power_residual = 0.0;
  /// c and log residual of the fit c·ε·ln(1/ε + 2).
  double alt_coefficient = 0.0;
  double alt_residual = 0.0;
};

/// Least squares on (ln ε, ln value). Needs ≥ 3 points and positive values.
RateFit fit_rate(const std::vector<double>& epsilons, const std::vector<double>& values);

struct QuantityFit {
  std::string quantity;
  RateFit fit;
};

struct RateReport {
  std::string experiment;
  std::string description;
  std::vector<RateRow> rows;
  std::vector<QuantityFit> fits;
  /// Every value ≤ 1e-9: no fit, counts as a pass.
  bool degenerate = false;
  bool pass = false;
  /// What was compared against which threshold.
  std::vector<std::string> checks;

  std::vector<double> values(std::string_view quantity) const;
  std::vector<double> epsilons(std::string_view quantity) const;
  const RateFit* fit(std::string_view quantity) const;
  std::string status() const;
};

/// Memoized meshes, cell solutions, operators and correctors shared by the
/// experiments of one run. Operators are evicted least recently used once
/// their total dof count exceeds the budget.
class Session {
 public:
  explicit Session(std::size_t dof_budget = 3'300'000);

  MeshPtr mesh(int n);
  CellPtr cell(CoefficientPtr base, int n, SolverOptions options = {});
  OperatorPtr op(const ScaledCoefficient& coeff, MeshPtr mesh, ConstraintMode mode, SolverOptions options = {});
  /// Operator of a constant tensor (L₀).
  OperatorPtr op(const Tensor4& tensor, MeshPtr mesh, ConstraintMode mode, SolverOptions options = {});
  /// Dirichlet correctors Φ (and Φ* = Φ for symmetric fields).
  std::shared_ptr<const CorrectorSet> dirichlet_set(const ScaledCoefficient& coeff, const Tensor4& hat_a,
                                                    MeshPtr mesh, SolverOptions options = {});
  /// Neumann correctors Ψ, pinned at the centre node.
  std::shared_ptr<const std::vector<Field>> psi(const ScaledCoefficient& coeff, const Tensor4& hat_a, MeshPtr mesh,
                                                SolverOptions options = {});

  std::size_t cached_dofs() const { return dofs_; }

 private:
  struct Entry {
    std::string key;
    OperatorPtr op;
  };
  OperatorPtr lookup(const std::string& key, const std::function<OperatorPtr()>& make);

  std::size_t budget_;
  std::size_t dofs_ = 0;
  std::list<Entry> lru_;
  std::map<int, MeshPtr> meshes_;
  std::map<std::string, CellPtr> cells_;
  std::map<std::string, std::shared_ptr<const CorrectorSet>> sets_;
  std::map<std::string, std::shared_ptr<const std::vector<Field>>> psi_;
};

struct ExperimentInfo {
  std::string id;
  std::string description;
  std::vector<double> default_epsilons;
  BuiltinParams default_coefficient = LayeredParams{};
};

/// Every registered experiment, in registry order.
const std::vector<ExperimentInfo>& experiments();
std::vector<std::string> experiment_ids();
/// Throws RegistryError listing the known ids when `id` is not registered.
const ExperimentInfo& experiment(std::string_view id);

/// Fills in the default ε grid and coefficient when none is given.
ExperimentConfig resolve(ExperimentConfig config);

RateReport run(const ExperimentConfig& config, Session& session);
RateReport run(const ExperimentConfig& config);
std::vector<RateReport> run_many(const std::vector<ExperimentConfig>& configs, Session& session);

enum class ReportFormat { csv, json };
ReportFormat report_format_from_string(std::string_view tag);

std::string to_csv(const std::vector<RateReport>& reports);
std::string to_json(const std::vector<RateReport>& reports);
/// Writes the reports; I/O failures throw with the path in the message.
void emit(const std::vector<RateReport>& reports, ReportFormat format, const std::filesystem::path& path);

}  // namespace homoglab
