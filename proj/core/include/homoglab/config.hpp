#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "homoglab/ratelab.hpp"

namespace homoglab {

/// A run document:
///
///   {
///     "coefficient": {"family": "layered", "mean": 2, "amplitude": 1, "axis": 0},
///     "mesh": {"cells_per_period": 16},
///     "solver": {"kind": "direct", "tol": 1e-10},
///     "experiments": ["thmA-green-size", {"id": "lp-dirichlet", "epsilons": ["1/8", 0.0625, "1/32"]}]
///   }
///
/// Every key is optional. Experiment entries inherit the top-level
/// coefficient, mesh and solver settings unless they override them.
struct RunConfig {
  std::optional<BuiltinParams> coefficient;
  int cells_per_period = 16;
  SolverOptions solver;
  std::vector<double> epsilons;
  std::vector<ExperimentConfig> experiments;
};

/// Families: constant {"tensor": [(2m)² values] | "value": s, "components"},
/// layered {mean, amplitude, axis, components}, trigonometric {mean,
/// amplitude, components}, smoothed-checkerboard {contrast, width,
/// components}, user {"expression": "..."} or {"entries": [...], "components"}.
BuiltinParams parse_coefficient(const nlohmann::json& j);
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

/// "1/8,1/16,0.03125" → {0.125, 0.0625, 0.03125}.
std::vector<double> parse_epsilons(std::string_view list);
double parse_epsilon(std::string_view token);

}  // namespace homoglab
