#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "homoglab/calculus.hpp"
#include "homoglab/config.hpp"
#include "homoglab/error.hpp"
#include "homoglab/expand.hpp"
#include "homoglab/ratelab.hpp"

using namespace homoglab;

namespace {

struct Options {
  std::string config_path;
  std::string out_dir = ".";
  std::string eps;
  int cells_per_period = 0;
  std::string format = "csv";
  std::vector<std::string> experiments;
  std::string family = "dirichlet";
  std::string check;
  std::string expand_experiment;
  bool quiet = false;
};

RunConfig base_config(const Options& o) {
  RunConfig rc = o.config_path.empty() ? RunConfig{} : load_run_config(o.config_path);
  if (!o.eps.empty()) rc.epsilons = parse_epsilons(o.eps);
  if (o.cells_per_period > 0) rc.cells_per_period = o.cells_per_period;
  return rc;
}

ExperimentConfig experiment_config(const RunConfig& rc, const std::string& id) {
  for (const auto& e : rc.experiments)
    if (e.experiment == id) return e;
  ExperimentConfig c;
  c.experiment = id;
  c.coefficient = rc.coefficient;
  c.cells_per_period = rc.cells_per_period;
  c.epsilons = rc.epsilons;
  c.solver = rc.solver;
  return c;
}

/// Command-line overrides win over per-experiment settings from the file.
ExperimentConfig with_overrides(ExperimentConfig c, const Options& o, const RunConfig& rc) {
  if (!o.eps.empty()) c.epsilons = rc.epsilons;
  if (o.cells_per_period > 0) c.cells_per_period = o.cells_per_period;
  return c;
}

std::vector<RateReport> run_ids(const std::vector<std::string>& ids, const Options& o) {
  const RunConfig rc = base_config(o);
  Session session;
  std::vector<RateReport> out;
  for (const auto& id : ids) {
    out.push_back(run(with_overrides(experiment_config(rc, id), o, rc), session));
    if (!o.quiet) {
      const auto& r = out.back();
      std::printf("%-22s %s\n", r.experiment.c_str(), r.status().c_str());
      for (const auto& c : r.checks) std::printf("    %s\n", c.c_str());
      std::fflush(stdout);
    }
  }
  return out;
}

/// Identity checks of the expansion for one corrector family over the ε list.
std::vector<RateReport> run_identity_check(const Options& o) {
  const RunConfig rc = base_config(o);
  const CorrectorFamily family = corrector_family_from_string(o.family);
  require(o.check == "residual" || o.check == "conormal", "--check must be residual or conormal");
  const bool conormal = o.check == "conormal";
  require(!conormal || family == CorrectorFamily::neumann, "--check conormal needs --family neumann");
  const auto eps_list = rc.epsilons.empty() ? std::vector<double>{1.0 / 8, 1.0 / 16} : rc.epsilons;
  const CoefficientPtr base = builtin(rc.coefficient.value_or(LayeredParams{}));
  Session session;
  RateReport r;
  r.experiment = "expand-" + o.check;
  r.description = "identity check for the " + o.family + " family";
  r.pass = true;
  const CellPtr cell = session.cell(base, rc.cells_per_period, rc.solver);
  for (double eps : eps_list) {
    MeshPtr mesh = session.mesh(grid_size(eps, rc.cells_per_period));
    const ScaledCoefficient coeff = rescale(base, eps);
    const ConstraintMode mode = family == CorrectorFamily::neumann ? ConstraintMode::neumann : ConstraintMode::dirichlet;
    auto op = session.op(coeff, mesh, mode, rc.solver);
    auto op0 = session.op(cell->hat_a, mesh, mode, rc.solver);
    const Load src = volume_load(mesh, op->components(), [](const Point&, std::span<double> v) {
      for (double& x : v) x = 1.0;
    });
    Field ue, u0;
    std::vector<Field> cols;
    if (mode == ConstraintMode::neumann) {
      BoundaryField flux(mesh, op->components());
      flux.values.setConstant(-0.25);
      ue = solve_neumann(*op, src, flux);
      u0 = solve_neumann(*op0, src, flux);
      const auto psi = session.psi(coeff, cell->hat_a, mesh, rc.solver);
      for (std::size_t k = 0; k < psi->size(); ++k) {
        Field col = (*psi)[k];
        col.values -= linear_monomial(mesh, col.m, static_cast<int>(k) / col.m, static_cast<int>(k) % col.m).values;
        cols.push_back(std::move(col));
      }
    } else {
      ue = solve_dirichlet(*op, src);
      u0 = solve_dirichlet(*op0, src);
      const auto set = session.dirichlet_set(coeff, cell->hat_a, mesh, rc.solver);
      cols = family_columns(family, set.get(), cell.get(), mesh, eps);
    }
    const Expansion e = build_expansion(ue, u0, family, std::move(cols), eps);
    const double value = conormal ? conormal_identity_check(e, coeff, cell->hat_a).max
                                  : residual_identity_check(e, *op, coeff, *cell).max_scaled;
    r.rows.push_back({r.experiment, eps, mesh->h(), conormal ? "conormal-residual" : "weak-residual", value});
    r.rows.push_back({r.experiment, eps, mesh->h(), "w-w12", norm(e.w, NormKind::w1p, 2.0)});
  }
  if (!o.quiet)
    for (const auto& row : r.rows) std::printf("%-20s eps=%-10.6g %.6g\n", row.quantity.c_str(), row.epsilon, row.value);
  return {r};
}

int finish(const std::vector<RateReport>& reports, const Options& o, const std::string& name) {
  const ReportFormat format = report_format_from_string(o.format);
  std::filesystem::create_directories(o.out_dir);
  const auto path = std::filesystem::path(o.out_dir) / (name + (format == ReportFormat::csv ? ".csv" : ".json"));
  emit(reports, format, path);
  bool ok = true;
  for (const auto& r : reports) ok = ok && r.pass;
  if (!o.quiet) std::printf("wrote %s\n", path.string().c_str());
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Periodic homogenization laboratory"};
  app.require_subcommand(1);
  Options o;
  auto common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON run document")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out_dir, "Output directory");
    sub->add_option("--eps", o.eps, "Comma separated epsilon list, e.g. 1/8,1/16,1/32");
    sub->add_option("--cells-per-period", o.cells_per_period, "Mesh cells per period")->check(CLI::PositiveNumber);
    sub->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_flag("--quiet", o.quiet, "Only write the report");
  };

  struct Group {
    const char* name;
    const char* help;
    std::vector<std::string> ids;
  };
  const std::vector<Group> groups{
      {"cell", "Cell problem: correctors, homogenized tensor, flux corrector", {"cell-oracle"}},
      {"correctors", "Dirichlet and Neumann corrector bounds", {"corrector-bounds"}},
      {"green", "Green function comparisons", {"thmA-green-size", "thmA-green-grad", "second-deriv-kernel"}},
      {"neumann-fn", "Neumann function comparisons", {"thmB-neumann-size", "thmB-neumann-grad"}},
      {"poisson", "Poisson kernel and boundary data approximation", {"poisson-remainder", "poisson-approx"}},
      {"dtn", "Dirichlet-to-Neumann expansion and Leibniz rules", {"dtn-expansion", "leibniz-1", "leibniz-2"}},
  };
  std::vector<CLI::App*> group_cmds;
  for (const auto& g : groups) {
    auto* sub = app.add_subcommand(g.name, g.help);
    common(sub);
    group_cmds.push_back(sub);
  }

  auto* expand = app.add_subcommand("expand", "First-order expansion checks and approximation experiments");
  common(expand);
  expand->add_option("--family", o.family, "Corrector family")->check(CLI::IsMember({"chi", "dirichlet", "neumann"}));
  auto* check = expand->add_option("--check", o.check, "Identity check")->check(CLI::IsMember({"residual", "conormal"}));
  auto* exp = expand->add_option("--experiment", o.expand_experiment, "Approximation experiment")
                  ->check(CLI::IsMember({"poisson-approx", "div-approx", "s-epsilon"}));
  check->excludes(exp);

  auto* rates = app.add_subcommand("rates", "Run registered experiments (from --config or --experiment)");
  common(rates);
  rates->add_option("--experiment", o.experiments, "Experiment id (repeatable)");
  rates->add_flag_callback("--list", [] {
    for (const auto& e : experiments()) std::printf("%-22s %s\n", e.id.c_str(), e.description.c_str());
    std::exit(0);
  }, "List experiment ids and exit");

  auto* all = app.add_subcommand("all", "Run every registered experiment");
  common(all);

  CLI11_PARSE(app, argc, argv);

  try {
    for (std::size_t i = 0; i < groups.size(); ++i)
      if (group_cmds[i]->parsed()) return finish(run_ids(groups[i].ids, o), o, groups[i].name);
    if (expand->parsed()) {
      if (!o.check.empty()) return finish(run_identity_check(o), o, "expand");
      const std::string id = o.expand_experiment.empty() ? "poisson-approx" : o.expand_experiment;
      return finish(run_ids({id}, o), o, "expand");
    }
    if (rates->parsed()) {
      std::vector<std::string> ids = o.experiments;
      if (ids.empty() && !o.config_path.empty())
        for (const auto& e : load_run_config(o.config_path).experiments) ids.push_back(e.experiment);
      require(!ids.empty(), "rates: give --experiment ids or a --config with experiments");
      return finish(run_ids(ids, o), o, "rates");
    }
    if (all->parsed()) return finish(run_ids(experiment_ids(), o), o, "all");
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
