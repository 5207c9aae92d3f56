#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "weyl/chart.hpp"
#include "weyl/classifier.hpp"

namespace weyl {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kVersion = "0.1.0";

/// Malformed configuration; `key` names the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error("config key '" + key + "': " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

enum class OutputFormat { Text, Json };

struct ModelSpec {
  std::string name;
  nlohmann::json parameters = nlohmann::json::object();  // everything except "name"
};

struct AnalysisConfig {
  ModelSpec model;
  std::vector<Vector> points;  // empty: deterministic default points
  int samples = 64;
  std::uint64_t seed = 0;
  double fd_step = 1e-4;
  DerivativeMode derivative_mode = DerivativeMode::Analytic;
  std::optional<double> spec_tol;  // default by tier
  double cluster_tol = 1e-3;
  double degeneracy_tol = 1e-6;
  OutputFormat format = OutputFormat::Json;
  std::optional<std::string> out;
  std::optional<Vector> conformal_exponent;  // α(u) = exp(c·u) for verify
  bool debug_corrupt_tensor = false;
};

/// Parses a JSON config document; unknown keys are rejected.
AnalysisConfig parse_config(const nlohmann::json& doc);
AnalysisConfig parse_config_text(const std::string& text);
nlohmann::json config_to_json(const AnalysisConfig& config);

/// Builds the chart named by the model spec (derivative mode and step applied).
MetricChart build_chart(const AnalysisConfig& config);

/// Deterministic evaluation points: a small offset from the origin followed
/// by seeded interior samples, all inside the domain margin with room for
/// finite-difference stencils.
std::vector<Vector> default_points(const MetricChart& chart, int count, std::uint64_t seed);

/// Classifier tolerances for the chart's derivative tier, with overrides.
ClassifierOptions classifier_options(const AnalysisConfig& config);

/// Worker count: hardware concurrency capped by WEYL_MAX_THREADS.
int worker_count();

nlohmann::json cmd_analyze(const AnalysisConfig& config);

struct VerifyResult {
  nlohmann::json report;
  bool all_pass = false;
};
VerifyResult cmd_verify(const AnalysisConfig& config);

nlohmann::json cmd_spectrum(const AnalysisConfig& config);

/// Serialization used for both output formats.
std::string render(const nlohmann::json& report, OutputFormat format);

/// Shortest round-trip decimal form of a double, as used in every report.
std::string format_number(double v);

nlohmann::json to_json(const Vector& v);
nlohmann::json to_json(const Matrix& m);
nlohmann::json to_json(const SpectralProfile& p);
nlohmann::json to_json(const OssermanReport& r);
nlohmann::json to_json(const Verdict& v);

}  // namespace weyl
