#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "homoglab/error.hpp"
#include "homoglab/ratelab.hpp"

using namespace homoglab;

namespace {

const std::vector<double> kGrid{1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};

std::vector<double> map(const std::vector<double>& eps, double (*f)(double)) {
  std::vector<double> out;
  for (double e : eps) out.push_back(f(e));
  return out;
}

ExperimentConfig small(std::string id, std::optional<BuiltinParams> coeff = std::nullopt) {
  ExperimentConfig c;
  c.experiment = std::move(id);
  c.coefficient = std::move(coeff);
  c.epsilons = {1.0 / 4, 1.0 / 8, 1.0 / 16};
  c.cells_per_period = 8;
  return c;
}

int line_count(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(FitRate, PowerLaws) {
  const RateFit one = fit_rate(kGrid, kGrid);
  EXPECT_NEAR(one.slope, 1.0, 1e-12);
  EXPECT_NEAR(one.r2, 1.0, 1e-12);
  const RateFit half = fit_rate(kGrid, map(kGrid, [](double e) { return 3.0 * std::sqrt(e); }));
  EXPECT_NEAR(half.slope, 0.5, 1e-12);
  EXPECT_NEAR(half.r2, 1.0, 1e-12);
  EXPECT_NEAR(std::exp(half.intercept), 3.0, 1e-10);
}

TEST(FitRate, LogCorrectedDataPrefersAlternateModel) {
  const auto v = map(kGrid, [](double e) { return e * std::log(1.0 / e); });
  const RateFit f = fit_rate(kGrid, v);
  // The local log-slope of ε ln(1/ε) is 1 − 1/ln(1/ε); any least-squares
  // slope lies between its extremes on the grid.
  EXPECT_GE(f.slope, 1.0 - 1.0 / std::log(8.0));
  EXPECT_LE(f.slope, 1.0 - 1.0 / std::log(64.0));
  const RateFit exact = fit_rate(kGrid, map(kGrid, [](double e) { return 2.0 * e * std::log(1.0 / e + 2.0); }));
  EXPECT_NEAR(exact.alt_coefficient, 2.0, 1e-12);
  EXPECT_NEAR(exact.alt_residual, 0.0, 1e-20);
  EXPECT_LT(exact.alt_residual, exact.power_residual);
}

TEST(FitRate, RSquaredStaysInUnitInterval) {
  const RateFit f = fit_rate(kGrid, {1.0, 0.01, 1.0, 0.01});
  EXPECT_GE(f.r2, 0.0);
  EXPECT_LE(f.r2, 1.0);
  const RateFit flat = fit_rate(kGrid, {2.0, 2.0, 2.0, 2.0});
  EXPECT_EQ(flat.slope, 0.0);
  EXPECT_EQ(flat.r2, 1.0);
}

TEST(FitRate, RejectsBadInput) {
  EXPECT_THROW(fit_rate({0.5, 0.25}, {1.0, 0.5}), InvalidArgument);
  EXPECT_THROW(fit_rate(kGrid, {1.0, 0.0, 0.5, 0.1}), InvalidArgument);
  EXPECT_THROW(fit_rate(kGrid, {1.0, -1.0, 0.5, 0.1}), InvalidArgument);
  EXPECT_THROW(fit_rate(kGrid, {1.0, 0.5}), InvalidArgument);
}

TEST(Config, Validation) {
  ExperimentConfig c = small("lp-dirichlet");
  EXPECT_NO_THROW(validate(c));
  c.epsilons = {1.0 / 8, 1.0 / 8, 1.0 / 16};
  EXPECT_THROW(validate(c), InvalidArgument);
  c.epsilons = {1.0 / 16, 1.0 / 8};
  EXPECT_THROW(validate(c), InvalidArgument);
  c.epsilons = {};
  EXPECT_THROW(validate(c), InvalidArgument);
  c = small("lp-dirichlet");
  c.cells_per_period = 7;
  EXPECT_THROW(validate(c), InvalidArgument);
  EXPECT_THROW(run(c), InvalidArgument);
  c.cells_per_period = 16;
  c.epsilons = {1.0 / 64, 1.0 / 256};
  EXPECT_THROW(validate(c), InvalidArgument);
  EXPECT_EQ(grid_size(1.0 / 64, 16), 1024);
}

TEST(Registry, ListsEveryExperiment) {
  const std::vector<std::string> expected{
      "thmA-green-size", "thmA-green-grad",  "thmB-neumann-size", "thmB-neumann-grad",   "w1p-dirichlet",
      "w1p-neumann",     "weighted-h1",      "lp-dirichlet",      "linf-dirichlet",      "lp-neumann",
      "poisson-remainder", "poisson-approx", "div-approx",        "second-deriv-kernel", "s-epsilon",
      "dtn-expansion",   "leibniz-1",        "leibniz-2",         "cell-oracle",         "prop21-residual",
      "prop24-conormal", "corrector-bounds"};
  auto ids = experiment_ids();
  auto sorted_expected = expected;
  std::sort(ids.begin(), ids.end());
  std::sort(sorted_expected.begin(), sorted_expected.end());
  EXPECT_EQ(ids, sorted_expected);
  for (const auto& e : experiments()) EXPECT_FALSE(e.description.empty()) << e.id;
}

TEST(Registry, UnknownIdListsAvailableIds) {
  try {
    experiment("thmC");
    FAIL() << "expected RegistryError";
  } catch (const RegistryError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("thmC"), std::string::npos);
    for (const auto& id : experiment_ids()) EXPECT_NE(what.find(id), std::string::npos) << id;
  }
  ExperimentConfig c;
  c.experiment = "nope";
  EXPECT_THROW(run(c), RegistryError);
}

TEST(Registry, ResolveFillsDefaults) {
  ExperimentConfig c;
  c.experiment = "thmA-green-size";
  const ExperimentConfig r = resolve(c);
  EXPECT_EQ(r.epsilons, kGrid);
  ASSERT_TRUE(r.coefficient.has_value());
  EXPECT_TRUE(std::holds_alternative<LayeredParams>(*r.coefficient));
  c.experiment = "w1p-dirichlet";
  EXPECT_TRUE(std::holds_alternative<UserParams>(*resolve(c).coefficient));
  c.epsilons = {0.5, 0.25, 0.125};
  EXPECT_EQ(resolve(c).epsilons, c.epsilons);
}

TEST(Run, ConstantCoefficientIsDegeneratePass) {
  const BuiltinParams constant = ConstantParams{Tensor4::isotropic(2, 1, 1.5)};
  Session session;
  for (const char* id : {"thmA-green-size", "thmB-neumann-size", "lp-dirichlet"}) {
    const RateReport r = run(small(id, constant), session);
    EXPECT_TRUE(r.degenerate) << id;
    EXPECT_TRUE(r.pass) << id;
    EXPECT_EQ(r.status(), "degenerate-pass");
    EXPECT_TRUE(r.fits.empty());
    ASSERT_EQ(r.rows.size(), 3u);
    for (const auto& row : r.rows) EXPECT_LE(row.value, 1e-10) << id;
  }
}

TEST(Run, LayeredGreenDifferenceDecays) {
  ExperimentConfig c = small("thmA-green-size");
  c.cells_per_period = 16;
  const RateReport r = run(c);
  EXPECT_TRUE(r.pass) << r.checks.front();
  ASSERT_NE(r.fit("green-difference"), nullptr);
  EXPECT_GE(r.fit("green-difference")->slope, 0.8);
  EXPECT_FALSE(r.degenerate);
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    EXPECT_EQ(r.rows[i].epsilon, c.epsilons[i]);
    EXPECT_EQ(r.rows[i].h, 1.0 / grid_size(c.epsilons[i], 16));
  }
}

TEST(Run, FitsChangeLittleWhenCellsPerPeriodDouble) {
  Session session;
  ExperimentConfig c = small("lp-dirichlet");
  const RateReport coarse = run(c, session);
  c.cells_per_period = 16;
  const RateReport fine = run(c, session);
  EXPECT_LE(std::abs(coarse.fit("l2-difference")->slope - fine.fit("l2-difference")->slope), 0.1);
}

TEST(Run, NeumannExperimentsNeedSymmetry) {
  const BuiltinParams skew = UserParams{1, {"2 + sin(2*pi*y1)", "0.5", "-0.5", "2"}};
  EXPECT_THROW(run(small("thmB-neumann-size", skew)), InvalidArgument);
}

TEST(Emit, CsvLayout) {
  EXPECT_EQ(to_csv({}), "experiment,epsilon,h,quantity,value\n");
  RateReport r;
  r.experiment = "x";
  for (int i = 0; i < 4; ++i) r.rows.push_back({"x", kGrid[static_cast<std::size_t>(i)], 0.01, "q", 0.1 * (i + 1)});
  const std::string csv = to_csv({r});
  EXPECT_EQ(line_count(csv), 5);
  EXPECT_NE(csv.find("x,0.125,0.01,q,0.10000000000000001\n"), std::string::npos);
}

TEST(Emit, FilesAreByteIdenticalAcrossRuns) {
  const auto dir = std::filesystem::temp_directory_path() / "homoglab_emit_test";
  std::filesystem::create_directories(dir);
  std::string texts[2][2];
  for (int k = 0; k < 2; ++k) {
    Session session;
    const std::vector<RateReport> reports{run(small("lp-dirichlet"), session), run(small("leibniz-1"), session)};
    for (int f = 0; f < 2; ++f) {
      const auto path = dir / ("out" + std::to_string(k) + (f ? ".json" : ".csv"));
      emit(reports, f ? ReportFormat::json : ReportFormat::csv, path);
      std::ifstream in(path, std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      texts[k][f] = ss.str();
    }
  }
  EXPECT_EQ(texts[0][0], texts[1][0]);
  EXPECT_EQ(texts[0][1], texts[1][1]);
  const auto doc = nlohmann::json::parse(texts[0][1]);
  ASSERT_EQ(doc.size(), 2u);
  EXPECT_EQ(doc[0]["experiment"], "lp-dirichlet");
  EXPECT_EQ(doc[0]["rows"].size(), 3u);
  EXPECT_TRUE(doc[0]["fits"][0].contains("slope"));
  EXPECT_TRUE(doc[0]["fits"][0].contains("alt_residual"));
  EXPECT_EQ(doc[1]["status"], "pass");
  std::filesystem::remove_all(dir);
}

TEST(Emit, UnwritablePathNamesThePath) {
  const std::filesystem::path bad = "/nonexistent-dir/report.csv";
  try {
    emit({}, ReportFormat::csv, bad);
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find(bad.string()), std::string::npos);
  }
  EXPECT_EQ(report_format_from_string("json"), ReportFormat::json);
  EXPECT_THROW(report_format_from_string("xml"), InvalidArgument);
}

TEST(Session, CachesAndEvicts) {
  Session session(2 * 33 * 33);
  auto mesh = session.mesh(32);
  EXPECT_EQ(mesh, session.mesh(32));
  const ScaledCoefficient a = rescale(builtin(LayeredParams{}), 0.25);
  auto op = session.op(a, mesh, ConstraintMode::dirichlet);
  EXPECT_EQ(op, session.op(a, mesh, ConstraintMode::dirichlet));
  EXPECT_NE(op, session.op(a, mesh, ConstraintMode::neumann));
  EXPECT_EQ(session.cached_dofs(), 2u * 33 * 33);
  session.op(Tensor4::identity(2, 1), mesh, ConstraintMode::dirichlet);
  EXPECT_EQ(session.cached_dofs(), 2u * 33 * 33);
  // The Dirichlet operator was least recently used and is rebuilt.
  EXPECT_NE(op, session.op(a, mesh, ConstraintMode::dirichlet));
  auto cell = session.cell(builtin(LayeredParams{}), 16);
  EXPECT_EQ(cell, session.cell(builtin(LayeredParams{}), 16));
}
