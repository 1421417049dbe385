#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "homoglab/config.hpp"
#include "homoglab/error.hpp"

using namespace homoglab;
using nlohmann::json;

TEST(ParseEpsilon, FractionsAndDecimals) {
  EXPECT_DOUBLE_EQ(parse_epsilon("1/8"), 0.125);
  EXPECT_DOUBLE_EQ(parse_epsilon(" 0.0625 "), 0.0625);
  EXPECT_DOUBLE_EQ(parse_epsilon("3/64"), 3.0 / 64);
  const auto list = parse_epsilons("1/8,1/16, 1/32");
  ASSERT_EQ(list.size(), 3u);
  EXPECT_DOUBLE_EQ(list[2], 1.0 / 32);
}

TEST(ParseEpsilon, RejectsGarbage) {
  EXPECT_THROW(parse_epsilon("abc"), InvalidArgument);
  EXPECT_THROW(parse_epsilon("1/0"), InvalidArgument);
  EXPECT_THROW(parse_epsilon("-0.1"), InvalidArgument);
  EXPECT_THROW(parse_epsilon("1/8x"), InvalidArgument);
  EXPECT_THROW(parse_epsilons(""), InvalidArgument);
}

TEST(ParseCoefficient, Families) {
  const auto layered = parse_coefficient(json{{"family", "layered"}, {"mean", 3}, {"amplitude", 0.5}, {"axis", 1}});
  const auto& l = std::get<LayeredParams>(layered);
  EXPECT_EQ(l.mean, 3.0);
  EXPECT_EQ(l.amplitude, 0.5);
  EXPECT_EQ(l.axis, 1);

  const auto trig = parse_coefficient(json{{"family", "trigonometric"}, {"amplitude", 0.25}});
  EXPECT_EQ(std::get<TrigonometricParams>(trig).amplitude, 0.25);

  const auto cb = parse_coefficient(json{{"family", "smoothed-checkerboard"}, {"contrast", 4}});
  EXPECT_EQ(std::get<CheckerboardParams>(cb).contrast, 4.0);

  const auto user = parse_coefficient(json{{"family", "user"}, {"expression", "2 + sin(2*pi*y1)"}});
  ASSERT_EQ(std::get<UserParams>(user).entries.size(), 1u);
}

TEST(ParseCoefficient, ConstantTensorIsRowMajor) {
  const auto c = parse_coefficient(json{{"family", "constant"}, {"tensor", {2.0, 0.5, 0.25, 3.0}}});
  const Tensor4& t = std::get<ConstantParams>(c).tensor;
  EXPECT_EQ(t(0, 0, 0, 0), 2.0);
  EXPECT_EQ(t(0, 1, 0, 0), 0.5);
  EXPECT_EQ(t(1, 0, 0, 0), 0.25);
  EXPECT_EQ(t(1, 1, 0, 0), 3.0);
  const auto iso = parse_coefficient(json{{"family", "constant"}, {"value", 5.0}});
  EXPECT_EQ(std::get<ConstantParams>(iso).tensor(1, 1, 0, 0), 5.0);
  EXPECT_EQ(std::get<ConstantParams>(iso).tensor(0, 1, 0, 0), 0.0);
}

TEST(ParseCoefficient, RejectsBadInput) {
  EXPECT_THROW(parse_coefficient(json{{"family", "marble"}}), InvalidArgument);
  EXPECT_THROW(parse_coefficient(json{{"family", "constant"}, {"tensor", {1.0, 2.0}}}), InvalidArgument);
  EXPECT_THROW(parse_coefficient(json{{"family", "user"}}), InvalidArgument);
  EXPECT_THROW(parse_coefficient(json{{"family", "layered"}, {"mean", "two"}}), InvalidArgument);
  EXPECT_THROW(parse_coefficient(json::array()), InvalidArgument);
}

TEST(ParseRunConfig, ExperimentsInheritAndOverride) {
  const json doc = json::parse(R"({
    "coefficient": {"family": "trigonometric"},
    "mesh": {"cells_per_period": 12},
    "solver": {"kind": "cg", "tol": 1e-9},
    "epsilons": "1/4,1/8",
    "experiments": ["lp-dirichlet",
                    {"id": "thmA-green-size", "epsilons": ["1/8", 0.0625], "cells_per_period": 20,
                     "x": [0.3, 0.3], "seed": 7}]
  })");
  const RunConfig rc = parse_run_config(doc);
  EXPECT_EQ(rc.cells_per_period, 12);
  EXPECT_EQ(rc.solver.kind, SolverKind::cg);
  EXPECT_EQ(rc.solver.tol, 1e-9);
  ASSERT_EQ(rc.experiments.size(), 2u);
  const auto& a = rc.experiments[0];
  EXPECT_EQ(a.experiment, "lp-dirichlet");
  EXPECT_EQ(a.cells_per_period, 12);
  EXPECT_EQ(a.epsilons, (std::vector<double>{0.25, 0.125}));
  EXPECT_TRUE(std::holds_alternative<TrigonometricParams>(*a.coefficient));
  EXPECT_EQ(a.solver.kind, SolverKind::cg);
  const auto& b = rc.experiments[1];
  EXPECT_EQ(b.cells_per_period, 20);
  EXPECT_EQ(b.epsilons, (std::vector<double>{0.125, 0.0625}));
  EXPECT_EQ(b.x[0], 0.3);
  EXPECT_EQ(b.seed, 7u);
}

TEST(ParseRunConfig, UnknownExperimentIsRejected) {
  EXPECT_THROW(parse_run_config(json{{"experiments", {"no-such-id"}}}), RegistryError);
  EXPECT_THROW(parse_run_config(json{{"experiments", {json{{"epsilons", "1/8"}}}}}), InvalidArgument);
}

TEST(LoadRunConfig, FileErrors) {
  EXPECT_THROW(load_run_config("/nonexistent/run.json"), IoError);
  const auto path = std::filesystem::temp_directory_path() / "homoglab_bad_config.json";
  {
    std::ofstream out(path);
    out << "{ not json";
  }
  EXPECT_THROW(load_run_config(path.string()), InvalidArgument);
  {
    std::ofstream out(path);
    out << R"({"epsilons": [0.125]})";
  }
  EXPECT_EQ(load_run_config(path.string()).epsilons, std::vector<double>{0.125});
  std::filesystem::remove(path);
}
