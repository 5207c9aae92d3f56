#include "test_support.hpp"

#include <cstdlib>

#include "weyl/report.hpp"

using namespace weyl;
using nlohmann::json;

namespace {

AnalysisConfig config_for(const json& model, int points = 0) {
  json doc = {{"model", model}, {"samples", 16}};
  AnalysisConfig c = parse_config(doc);
  if (points > 0) {
    const MetricChart chart = build_chart(c);
    c.points = default_points(chart, points, 3);
  }
  return c;
}

std::string config_error_key(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<none>";
}

}  // namespace

TEST(Config, UnknownKeysAreNamed) {
  EXPECT_EQ(config_error_key(R"({"model":"flat","smaples":3})"), "smaples");
  EXPECT_EQ(config_error_key(R"({"model":{"name":"flat","m":3,"r":2}})"), "model.r");
  EXPECT_EQ(config_error_key(R"({"model":{"name":"sphere","m":3}})"), "<none>");
  EXPECT_EQ(config_error_key(R"({"model":"flat","spec_tol":-1})"), "spec_tol");
  EXPECT_EQ(config_error_key(R"({"model":"flat","format":"xml"})"), "format");
  EXPECT_EQ(config_error_key(R"({"points":[[0,0]]})"), "model");
  EXPECT_EQ(config_error_key(R"({"model":"flat",)"), "<document>");
  EXPECT_EQ(config_error_key(R"([1,2])"), "<root>");
}

TEST(Config, UnknownModelAndMissingParameters) {
  EXPECT_EQ(config_error_key(R"({"model":"torus"})"), "model.name");
  EXPECT_EQ(config_error_key(R"({"model":{"name":"fubini_study"}})"), "model.n");
  EXPECT_EQ(config_error_key(R"({"model":{"name":"fubini_study","n":0}})"), "model");
  EXPECT_EQ(config_error_key(R"({"model":{"name":"perturbed_flat","m":6,"epsilon":80}})"), "model");
}

TEST(Config, RoundtripThroughJson) {
  const AnalysisConfig c = parse_config_text(
      R"({"model":{"name":"perturbed_flat","m":4,"epsilon":0.1,"seed":7},"points":[[0.1,0.2,0.3,0.4]],
          "samples":12,"seed":5,"fd_step":2e-4,"derivative_mode":"finite_difference","spec_tol":1e-5,
          "cluster_tol":2e-3,"degeneracy_tol":1e-7,"format":"text","conformal_exponent":[0.3,0,0,0]})");
  const json once = config_to_json(c);
  const json twice = config_to_json(parse_config(once));
  EXPECT_EQ(once, twice);
  EXPECT_EQ(c.derivative_mode, DerivativeMode::FiniteDifference);
  EXPECT_EQ(c.format, OutputFormat::Text);
  EXPECT_DOUBLE_EQ(*c.spec_tol, 1e-5);
}

TEST(Config, PolynomialModel) {
  const AnalysisConfig c = parse_config_text(
      R"({"model":{"name":"polynomial","dim":2,"constant":[[1,0],[0,1]],
          "linear":[[[0,0],[0,0.5]],[[0,0.2],[0.2,0]]]},"points":[[0.1,0.1]]})");
  const MetricChart chart = build_chart(c);
  EXPECT_EQ(chart.dim(), 2);
  EXPECT_EQ(chart.mode(), DerivativeMode::Analytic);
}

TEST(Config, ToleranceTierFollowsDerivativeMode) {
  AnalysisConfig c = config_for({{"name", "flat"}, {"m", 3}});
  EXPECT_DOUBLE_EQ(classifier_options(c).spec_tol, ClassifierOptions::algebraic().spec_tol);
  c.derivative_mode = DerivativeMode::FiniteDifference;
  EXPECT_DOUBLE_EQ(classifier_options(c).spec_tol, ClassifierOptions::finite_difference().spec_tol);
  c.spec_tol = 3e-3;
  EXPECT_DOUBLE_EQ(classifier_options(c).spec_tol, 3e-3);
}

TEST(DefaultPoints, InteriorAndDeterministic) {
  for (const json& model : {json{{"name", "hyperbolic"}, {"m", 4}}, json{{"name", "complex_hyperbolic"}, {"n", 3}}}) {
    AnalysisConfig c = config_for(model);
    c.derivative_mode = DerivativeMode::FiniteDifference;
    const MetricChart chart = build_chart(c);
    const auto pts = default_points(chart, 6, 1);
    EXPECT_EQ(pts, default_points(chart, 6, 1));
    for (const Vector& p : pts) EXPECT_NO_THROW(chart.require_interior(p, chart.reach_nabla_riemann()));
  }
}

TEST(Analyze, FubiniStudyThreePointsAreCCSF) {
  const json r = cmd_analyze(config_for({{"name", "fubini_study"}, {"n", 4}}, 3));
  ASSERT_EQ(r.at("points").size(), 3u);
  for (const json& p : r.at("points")) {
    EXPECT_EQ(p.at("verdict").at("kind"), "ConformallyComplexSpaceForm");
    EXPECT_EQ(p.at("verdict").at("model_type"), "CPn");
    EXPECT_LE(p.at("bianchi_residual").get<double>(), 1e-7);
  }
  EXPECT_EQ(r.at("summary").at("ConformallyComplexSpaceForm"), 3);
  EXPECT_EQ(r.at("schema_version"), kReportSchemaVersion);
}

TEST(Analyze, FlatIsConformallyFlat) {
  const json r = cmd_analyze(config_for({{"name", "flat"}, {"m", 5}}));
  for (const json& p : r.at("points")) {
    EXPECT_EQ(p.at("verdict").at("kind"), "ConformallyFlat");
    EXPECT_EQ(p.at("weyl_norm").get<double>(), 0.0);
  }
}

TEST(Analyze, PointOutsideDomainIsDomainViolation) {
  AnalysisConfig c = config_for({{"name", "hyperbolic"}, {"m", 2}});
  c.points = {Vector::Constant(2, 0.7)};
  EXPECT_EQ(test::thrown_code([&] { cmd_analyze(c); }), ErrorCode::DomainViolation);
}

TEST(Verify, SphereAllPass) {
  const VerifyResult v = cmd_verify(config_for({{"name", "sphere"}, {"m", 4}}));
  EXPECT_TRUE(v.all_pass);
}

TEST(Verify, FubiniStudyFiniteDifferencePasses) {
  AnalysisConfig c = config_for({{"name", "fubini_study"}, {"n", 2}});
  c.derivative_mode = DerivativeMode::FiniteDifference;
  const VerifyResult v = cmd_verify(c);
  EXPECT_TRUE(v.all_pass);
  std::set<std::string> names;
  for (const json& chk : v.report.at("points")[0].at("checks")) names.insert(chk.at("name").get<std::string>());
  for (const char* n : {"second_bianchi", "weyl_conformal_invariance", "weyl_trace", "kahler_nabla_phi",
                        "phi_anticommutator", "model_oracle"})
    EXPECT_TRUE(names.contains(n)) << n;
}

TEST(Verify, CorruptedTensorFails) {
  AnalysisConfig c = config_for({{"name", "sphere"}, {"m", 4}});
  c.debug_corrupt_tensor = true;
  const VerifyResult v = cmd_verify(c);
  EXPECT_FALSE(v.all_pass);
  EXPECT_FALSE(v.report.at("all_pass").get<bool>());
}

TEST(Spectrum, CP4RowsAreConstant) {
  const json r = cmd_spectrum(config_for({{"name", "fubini_study"}, {"n", 4}}, 1));
  const json& rows = r.at("points")[0].at("rows");
  ASSERT_GT(rows.size(), 16u);
  for (const json& row : rows) {
    const auto ev = row.at("eigenvalues").get<std::vector<double>>();
    ASSERT_EQ(ev.size(), 7u);
    for (int k = 0; k < 6; ++k) EXPECT_NEAR(ev[k], -3.0 / 7.0, 1e-9);
    EXPECT_NEAR(ev[6], 18.0 / 7.0, 1e-9);
  }
}

TEST(Spectrum, FlatRowsAreZeroAndPerturbedRowsVary) {
  const json flat = cmd_spectrum(config_for({{"name", "flat"}, {"m", 4}}, 1));
  for (const json& row : flat.at("points")[0].at("rows"))
    for (double e : row.at("eigenvalues").get<std::vector<double>>()) EXPECT_EQ(e, 0.0);
  const json pert = cmd_spectrum(config_for({{"name", "perturbed_flat"}, {"m", 6}, {"epsilon", 0.1}, {"seed", 42}}, 1));
  const json& rows = pert.at("points")[0].at("rows");
  const auto first = rows[0].at("eigenvalues").get<std::vector<double>>();
  double spread = 0.0;
  for (const json& row : rows) {
    const auto ev = row.at("eigenvalues").get<std::vector<double>>();
    for (std::size_t k = 0; k < ev.size(); ++k) spread = std::max(spread, std::abs(ev[k] - first[k]));
  }
  EXPECT_GT(spread, 1e-2);
}

TEST(Render, TextAndJsonCarrySameNumbers) {
  const json r = cmd_analyze(config_for({{"name", "sphere"}, {"m", 3}}, 1));
  const std::string text = render(r, OutputFormat::Text);
  const double tau = r.at("points")[0].at("tau").get<double>();
  EXPECT_NE(text.find("points[0].tau = " + format_number(tau) + "\n"), std::string::npos);
  EXPECT_NE(render(r, OutputFormat::Json).find(format_number(tau)), std::string::npos);
  EXPECT_EQ(json::parse(render(r, OutputFormat::Json)), r);
}

TEST(Render, NumbersRoundTripExactly) {
  for (double v : {1.0 / 3.0, -3.0 / 7.0, 2.220446049250313e-16, 12345.678901234567})
    EXPECT_EQ(std::stod(format_number(v)), v);
}

TEST(Determinism, ThreadCountDoesNotChangeReport) {
  const AnalysisConfig c = config_for({{"name", "perturbed_flat"}, {"m", 6}, {"epsilon", 0.1}, {"seed", 42}}, 4);
  setenv("WEYL_MAX_THREADS", "1", 1);
  const std::string one = render(cmd_analyze(c), OutputFormat::Json) + render(cmd_verify(c).report, OutputFormat::Json);
  setenv("WEYL_MAX_THREADS", "4", 1);
  const std::string four = render(cmd_analyze(c), OutputFormat::Json) + render(cmd_verify(c).report, OutputFormat::Json);
  unsetenv("WEYL_MAX_THREADS");
  EXPECT_EQ(one, four);
}
