#include "homoglab/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "homoglab/error.hpp"

namespace homoglab {

namespace {

using nlohmann::json;

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: bad value for '") + key + "': " + e.what());
  }
}

double epsilon_value(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return parse_epsilon(j.get<std::string>());
  throw InvalidArgument("config: epsilon must be a number or a fraction string");
}

std::vector<double> epsilon_list(const json& j) {
  if (j.is_string()) return parse_epsilons(j.get<std::string>());
  require(j.is_array(), "config: 'epsilons' must be an array or a comma list");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(epsilon_value(v));
  return out;
}

SolverOptions parse_solver(const json& j, SolverOptions base) {
  require(j.is_object(), "config: 'solver' must be an object");
  if (j.contains("kind")) base.kind = solver_kind_from_string(j.at("kind").get<std::string>());
  base.tol = get_or(j, "tol", base.tol);
  base.max_iterations = get_or(j, "max_iterations", base.max_iterations);
  return base;
}

Point parse_point(const json& j) {
  require(j.is_array() && j.size() == 2, "config: points are [x1, x2] arrays");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

double parse_epsilon(std::string_view token) {
  while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
  while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
  auto number = [&](std::string_view s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    require(ec == std::errc() && ptr == s.data() + s.size(), "bad epsilon '" + std::string(token) + "'");
    return v;
  };
  const auto slash = token.find('/');
  const double v = slash == std::string_view::npos ? number(token)
                                                   : number(token.substr(0, slash)) / number(token.substr(slash + 1));
  require(std::isfinite(v) && v > 0.0, "epsilon must be positive: '" + std::string(token) + "'");
  return v;
}

std::vector<double> parse_epsilons(std::string_view list) {
  std::vector<double> out;
  while (!list.empty()) {
    const auto comma = list.find(',');
    out.push_back(parse_epsilon(list.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    list.remove_prefix(comma + 1);
  }
  require(!out.empty(), "empty epsilon list");
  return out;
}

BuiltinParams parse_coefficient(const json& j) {
  require(j.is_object(), "config: 'coefficient' must be an object");
  const Family family = family_from_string(get_or<std::string>(j, "family", "layered"));
  const int m = get_or(j, "components", 1);
  switch (family) {
    case Family::constant: {
      if (j.contains("tensor")) {
        const auto v = j.at("tensor").get<std::vector<double>>();
        const std::size_t s = static_cast<std::size_t>(2 * m);
        require(v.size() == s * s, "config: constant tensor needs (2m)^2 entries");
        Eigen::MatrixXd block(s, s);
        for (std::size_t r = 0; r < s; ++r)
          for (std::size_t c = 0; c < s; ++c) block(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v[r * s + c];
        return ConstantParams{Tensor4::from_matrix(2, m, block)};
      }
      return ConstantParams{Tensor4::isotropic(2, m, get_or(j, "value", 1.0))};
    }
    case Family::layered: {
      LayeredParams p;
      p.mean = get_or(j, "mean", p.mean);
      p.amplitude = get_or(j, "amplitude", p.amplitude);
      p.axis = get_or(j, "axis", p.axis);
      p.components = m;
      return p;
    }
    case Family::trigonometric: {
      TrigonometricParams p;
      p.mean = get_or(j, "mean", p.mean);
      p.amplitude = get_or(j, "amplitude", p.amplitude);
      p.components = m;
      return p;
    }
    case Family::smoothed_checkerboard: {
      CheckerboardParams p;
      p.contrast = get_or(j, "contrast", p.contrast);
      p.width = get_or(j, "width", p.width);
      p.components = m;
      return p;
    }
    case Family::user: {
      UserParams p;
      p.components = m;
      if (j.contains("expression"))
        p.entries = {j.at("expression").get<std::string>()};
      else
        p.entries = get_or(j, "entries", std::vector<std::string>{});
      require(!p.entries.empty(), "config: user coefficient needs 'expression' or 'entries'");
      return p;
    }
  }
  throw InvalidArgument("config: unhandled coefficient family");
}

RunConfig parse_run_config(const json& j) {
  require(j.is_object(), "config: top level must be an object");
  RunConfig rc;
  if (j.contains("coefficient")) rc.coefficient = parse_coefficient(j.at("coefficient"));
  if (j.contains("mesh")) rc.cells_per_period = get_or(j.at("mesh"), "cells_per_period", rc.cells_per_period);
  if (j.contains("solver")) rc.solver = parse_solver(j.at("solver"), rc.solver);
  if (j.contains("epsilons")) rc.epsilons = epsilon_list(j.at("epsilons"));
  if (!j.contains("experiments")) return rc;
  require(j.at("experiments").is_array(), "config: 'experiments' must be an array");
  for (const auto& e : j.at("experiments")) {
    ExperimentConfig c;
    c.coefficient = rc.coefficient;
    c.cells_per_period = rc.cells_per_period;
    c.solver = rc.solver;
    c.epsilons = rc.epsilons;
    if (e.is_string()) {
      c.experiment = e.get<std::string>();
    } else {
      require(e.is_object() && e.contains("id"), "config: experiment entries are ids or objects with 'id'");
      c.experiment = e.at("id").get<std::string>();
      if (e.contains("coefficient")) c.coefficient = parse_coefficient(e.at("coefficient"));
      if (e.contains("epsilons")) c.epsilons = epsilon_list(e.at("epsilons"));
      c.cells_per_period = get_or(e, "cells_per_period", c.cells_per_period);
      if (e.contains("x")) c.x = parse_point(e.at("x"));
      if (e.contains("y")) c.y = parse_point(e.at("y"));
      c.seed = get_or(e, "seed", c.seed);
      if (e.contains("solver")) c.solver = parse_solver(e.at("solver"), c.solver);
    }
    experiment(c.experiment);
    rc.experiments.push_back(std::move(c));
  }
  return rc;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path);
  try {
    return parse_run_config(json::parse(in));
  } catch (const json::parse_error& e) {
    throw InvalidArgument("config " + path + ": " + e.what());
  }
}

}  // namespace homoglab
