#include <gtest/gtest.h>

#include <sstream>

#include "tracemono/io.hpp"

using namespace tracemono;
using io::Json;

namespace {

std::string config_error(const Json& j) {
  try {
    io::wegner_config_from_json(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Num, RoundTripsDoubles) {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, -2.5e17}) EXPECT_EQ(std::stod(io::num(x)), x);
}

TEST(MeasureJson, RoundTripsEveryKind) {
  LaplaceMeasure m;
  m.atoms = {{0.5, 2.0}, {1.0, 0.25}};
  m.density = PowerLawDensity{{PowerLawTerm{-0.5, 1.2, 0.3}}};
  const LaplaceMeasure back = io::measure_from_json(io::to_json(m));
  const ClassLFunction g(m, "g"), h(back, "h");
  for (double s : {0.2, 1.0, 4.0}) EXPECT_EQ(g.eval_scalar(s), h.eval_scalar(s));

  LaplaceMeasure sum;
  sum.density = PowerLawDensity{{PowerLawTerm{0.0, 1.0, 1.0}, PowerLawTerm{1.0, 2.0, 0.0}}};
  EXPECT_EQ(io::to_json(sum)["density"]["kind"], "power-law-sum");
  EXPECT_EQ(io::to_json(io::measure_from_json(io::to_json(sum))), io::to_json(sum));

  LaplaceMeasure tab;
  tab.density = TabulatedDensity{{0.0, 1.0, 2.0}, {1.0, 0.5, 0.0}};
  EXPECT_EQ(io::to_json(io::measure_from_json(io::to_json(tab))), io::to_json(tab));
}

TEST(MeasureJson, ErrorsNameTheLocation) {
  auto what = [](const Json& j) -> std::string {
    try {
      io::measure_from_json(j);
    } catch (const ConfigError& e) {
      return e.what();
    }
    return "";
  };
  EXPECT_NE(what(Json::parse(R"({"atoms": [[1, 2], [3]]})")).find("measure.atoms[1]"), std::string::npos);
  EXPECT_NE(what(Json::parse(R"({"density": {"kind": "gaussian"}})")).find("measure.density.kind"), std::string::npos);
  EXPECT_NE(what(Json::parse(R"({"density": {"kind": "power-law"}})")).find("alpha"), std::string::npos);
  EXPECT_NE(what(Json::parse(R"({"atoms": [[1, -2]]})")).find("nonnegative"), std::string::npos);
}

TEST(FunctionSpec, Constructors) {
  const io::FunctionSpec p = io::function_spec_from_json(Json::parse(R"({"constructor": "power", "beta": 2})"));
  EXPECT_NEAR(p.function(2.0), 0.25, 1e-14);
  EXPECT_TRUE(p.class_l.has_value());
  EXPECT_EQ(p.direction, Direction::decreasing);
  const io::FunctionSpec h =
      io::function_spec_from_json(Json::parse(R"({"constructor": "hansen", "atoms": [[1, 0.3], [2, 0.7]]})"));
  EXPECT_NEAR(h.function(2.0), 0.62, 1e-8);
  const io::FunctionSpec t =
      io::function_spec_from_json(Json::parse(R"({"constructor": "hansen_tilde", "atoms": [[1, 1]]})"));
  EXPECT_EQ(t.direction, Direction::increasing);
  EXPECT_FALSE(t.class_l.has_value());
  const io::FunctionSpec m = io::function_spec_from_json(
      Json::parse(R"({"measure": {"atoms": [[1, 1]]}, "label": "e1", "direction": "decreasing"})"));
  EXPECT_EQ(m.function.label, "e1");
  EXPECT_THROW(io::function_spec_from_json(Json::parse(R"({"constructor": "sine"})")), ConfigError);
  EXPECT_THROW(io::function_spec_from_json(Json::parse(R"({"constructor": "power", "beta": -1})")), ConfigError);
  EXPECT_THROW(io::function_spec_from_json(Json::parse(R"({"constructor": "power", "beta": 1, "direction": "up"})")),
               ConfigError);
}

TEST(WegnerConfig, ParsesAndValidates) {
  const io::WegnerConfig c = io::wegner_config_from_json(Json::parse(
      R"({"L": [8, 16], "mesh_per_cell": 6, "coupling": 2, "intervals": [[1, 2]], "eta_pad": 0.2, "trials": 3, "master_seed": 9})"));
  EXPECT_EQ(c.box_sizes, (std::vector<int>{8, 16}));
  EXPECT_EQ(c.mesh_per_cell, 6);
  EXPECT_EQ(c.intervals[0].eta_pad, 0.2);
  EXPECT_EQ(c.master_seed, 9u);
  EXPECT_EQ(io::wegner_config_from_json(io::to_json(c)).box_sizes, c.box_sizes);

  EXPECT_NE(config_error(Json::parse(R"({"L": 8, "intervals": [[1, 2]], "trials": 0})")).find("config.trials"),
            std::string::npos);
  EXPECT_NE(config_error(Json::parse(R"({"L": 8, "intervals": [[2, 1]], "trials": 1})")).find("config.intervals"),
            std::string::npos);
  EXPECT_NE(config_error(Json::parse(R"({"L": "big", "intervals": [[1, 2]], "trials": 1})")).find("config.L"),
            std::string::npos);
  EXPECT_NE(config_error(Json::parse(R"({"intervals": [[1, 2]], "trials": 1})")).find("missing field 'L'"),
            std::string::npos);
  EXPECT_NE(config_error(Json::parse(R"([1, 2])")).find("config"), std::string::npos);
}

TEST(Csv, ResultRows) {
  std::ostringstream out;
  io::write_results_csv_header(out);
  InequalityResult r = make_result("kato", 0.0, 0.125, 1e-9, 1.0);
  r.seed = 3;
  io::write_result_csv(out, r);
  EXPECT_EQ(out.str(), "suite,seed,n_or_beta_or_t,lhs,rhs,slack,pass\nkato,3,1,0,0.125,0.125,1\n");
}
