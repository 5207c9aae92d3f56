// Command-line front end: analyze, verify and spectrum subcommands.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "weyl/error.hpp"
#include "weyl/report.hpp"

namespace {

using nlohmann::json;

// "name" or "name:k=v,k=v"; values are parsed as JSON scalars.
json parse_model_flag(const std::string& text) {
  const auto colon = text.find(':');
  json model = {{"name", text.substr(0, colon)}};
  if (colon == std::string::npos) return model;
  std::stringstream rest(text.substr(colon + 1));
  std::string item;
  while (std::getline(rest, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw weyl::ConfigError("model", "expected k=v, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    try {
      model[key] = json::parse(value);
    } catch (const json::parse_error&) {
      model[key] = value;
    }
  }
  return model;
}

json parse_point_flag(const std::string& text) {
  json pt = json::array();
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      pt.push_back(v);
    } catch (const std::exception&) {
      throw weyl::ConfigError("points", "cannot parse coordinate '" + item + "'");
    }
  }
  return pt;
}

struct Flags {
  std::string config_path;
  std::string model;
  std::vector<std::string> points;
  std::optional<int> samples;
  std::optional<std::uint64_t> seed;
  std::optional<double> fd_step, spec_tol, cluster_tol;
  std::optional<std::string> format, out, derivative_mode;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file");
  cmd->add_option("--model", f.model, "model name, optionally name:k=v,...");
  cmd->add_option("--point", f.points, "comma-separated chart coordinates (repeatable)");
  cmd->add_option("--samples", f.samples, "random unit directions per point");
  cmd->add_option("--seed", f.seed, "sampling seed");
  cmd->add_option("--fd-step", f.fd_step, "finite-difference step");
  cmd->add_option("--derivative-mode", f.derivative_mode, "analytic or finite_difference");
  cmd->add_option("--spec-tol", f.spec_tol, "spectral tolerance");
  cmd->add_option("--cluster-tol", f.cluster_tol, "eigenvalue clustering tolerance");
  cmd->add_option("--format", f.format, "text or json");
  cmd->add_option("--out", f.out, "write the report to this file");
}

weyl::AnalysisConfig resolve(const Flags& f) {
  json doc = json::object();
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) throw weyl::ConfigError("--config", "cannot open '" + f.config_path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    try {
      doc = json::parse(buf.str());
    } catch (const json::parse_error& e) {
      throw weyl::ConfigError("<document>", std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw weyl::ConfigError("<root>", "config must be a JSON object");
  }
  if (!f.model.empty()) doc["model"] = parse_model_flag(f.model);
  if (!f.points.empty()) {
    doc["points"] = json::array();
    for (const auto& p : f.points) doc["points"].push_back(parse_point_flag(p));
  }
  if (f.samples) doc["samples"] = *f.samples;
  if (f.seed) doc["seed"] = *f.seed;
  if (f.fd_step) doc["fd_step"] = *f.fd_step;
  if (f.derivative_mode) doc["derivative_mode"] = *f.derivative_mode;
  if (f.spec_tol) doc["spec_tol"] = *f.spec_tol;
  if (f.cluster_tol) doc["cluster_tol"] = *f.cluster_tol;
  if (f.format) doc["format"] = *f.format;
  if (f.out) doc["out"] = *f.out;
  return weyl::parse_config(doc);
}

void emit(const weyl::AnalysisConfig& config, const json& report) {
  const std::string text = weyl::render(report, config.format);
  if (config.out) {
    std::ofstream out(*config.out, std::ios::binary);
    if (!out) throw weyl::ConfigError("out", "cannot write '" + *config.out + "'");
    out << text;
  } else {
    std::cout << text;
  }
}

int exit_code_for(weyl::ErrorCode code) {
  switch (code) {
    case weyl::ErrorCode::DomainViolation:
    case weyl::ErrorCode::NotPositiveDefinite:
      return 3;
    case weyl::ErrorCode::InvalidArgument:
    case weyl::ErrorCode::DimensionMismatch:
      return 2;
    default:
      return 4;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weyl curvature analysis of Riemannian metric charts"};
  app.set_version_flag("--version", weyl::kVersion);
  app.require_subcommand(1);
  Flags flags;
  auto* analyze = app.add_subcommand("analyze", "classify the conformal curvature at each point");
  auto* verify = app.add_subcommand("verify", "check geometric identities; exit 1 if any fails");
  auto* spectrum = app.add_subcommand("spectrum", "print reduced conformal Jacobi spectra per direction");
  for (auto* cmd : {analyze, verify, spectrum}) add_flags(cmd, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const weyl::AnalysisConfig config = resolve(flags);
    if (analyze->parsed()) {
      emit(config, weyl::cmd_analyze(config));
      return 0;
    }
    if (verify->parsed()) {
      const weyl::VerifyResult result = weyl::cmd_verify(config);
      emit(config, result.report);
      return result.all_pass ? 0 : 1;
    }
    emit(config, weyl::cmd_spectrum(config));
    return 0;
  } catch (const weyl::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const weyl::Error& e) {
    std::cerr << "error (" << weyl::to_string(e.code()) << "): " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
