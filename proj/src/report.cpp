#include "weyl/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "weyl/curvature_algebra.hpp"
#include "weyl/error.hpp"
#include "weyl/models.hpp"
#include "weyl/spectral.hpp"

namespace weyl {

using nlohmann::json;

namespace {

const std::set<std::string> kConfigKeys = {
    "model",          "points", "samples", "seed",   "fd_step",           "derivative_mode",      "spec_tol",
    "cluster_tol",    "degeneracy_tol",    "format", "out",               "conformal_exponent", "debug_corrupt_tensor"};

double get_positive(const json& doc, const std::string& key) {
  const json& v = doc.at(key);
  if (!v.is_number()) throw ConfigError(key, "expected a number");
  const double d = v.get<double>();
  if (!(d > 0.0) || !std::isfinite(d)) throw ConfigError(key, "must be positive and finite");
  return d;
}

int get_int(const json& doc, const std::string& key, const std::string& path) {
  const json& v = doc.at(key);
  if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
  return v.get<int>();
}

Vector parse_vector(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ConfigError(path, "expected an array of numbers");
    out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
  }
  return out;
}

Matrix parse_matrix(const json& v, int m, const std::string& path) {
  if (!v.is_array() || static_cast<int>(v.size()) != m) throw ConfigError(path, "expected an m x m array");
  Matrix out(m, m);
  for (int i = 0; i < m; ++i) {
    const Vector row = parse_vector(v[i], path);
    if (row.size() != m) throw ConfigError(path, "expected an m x m array");
    out.row(i) = row.transpose();
  }
  return out;
}

void check_model_keys(const ModelSpec& spec, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : spec.parameters.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ConfigError("model." + key, "unknown parameter for model '" + spec.name + "'");
    }
  }
}

int model_int(const ModelSpec& spec, const char* key, std::optional<int> fallback = std::nullopt) {
  if (!spec.parameters.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError(std::string("model.") + key, "missing required parameter");
  }
  return get_int(spec.parameters, key, std::string("model.") + key);
}

double model_double(const ModelSpec& spec, const char* key, std::optional<double> fallback = std::nullopt) {
  if (!spec.parameters.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError(std::string("model.") + key, "missing required parameter");
  }
  const json& v = spec.parameters.at(key);
  if (!v.is_number()) throw ConfigError(std::string("model.") + key, "expected a number");
  return v.get<double>();
}

MetricChart build_model(const ModelSpec& spec) {
  const std::string& n = spec.name;
  try {
    if (n == "flat") {
      check_model_keys(spec, {"m"});
      return flat_chart(model_int(spec, "m"));
    }
    if (n == "sphere") {
      check_model_keys(spec, {"m", "r"});
      return sphere_chart(model_int(spec, "m"), model_double(spec, "r", 1.0));
    }
    if (n == "hyperbolic") {
      check_model_keys(spec, {"m"});
      return hyperbolic_chart(model_int(spec, "m"));
    }
    if (n == "fubini_study") {
      check_model_keys(spec, {"n"});
      return fubini_study_chart(model_int(spec, "n"));
    }
    if (n == "complex_hyperbolic") {
      check_model_keys(spec, {"n"});
      return complex_hyperbolic_chart(model_int(spec, "n"));
    }
    if (n == "perturbed_flat") {
      check_model_keys(spec, {"m", "epsilon", "seed"});
      return perturbed_flat_chart(model_int(spec, "m"), model_double(spec, "epsilon"),
                                  static_cast<std::uint64_t>(model_int(spec, "seed", 0)));
    }
    if (n == "polynomial") {
      check_model_keys(spec, {"dim", "constant", "linear", "quadratic", "extent", "margin"});
      PolynomialMetric p;
      p.dim = model_int(spec, "dim");
      if (p.dim < 2) throw ConfigError("model.dim", "must be at least 2");
      if (!spec.parameters.contains("constant")) throw ConfigError("model.constant", "missing required parameter");
      p.constant = parse_matrix(spec.parameters.at("constant"), p.dim, "model.constant");
      if (spec.parameters.contains("linear")) {
        const json& lin = spec.parameters.at("linear");
        if (!lin.is_array()) throw ConfigError("model.linear", "expected an array of matrices");
        for (const json& a : lin) p.linear.push_back(parse_matrix(a, p.dim, "model.linear"));
      }
      if (spec.parameters.contains("quadratic")) {
        const json& quad = spec.parameters.at("quadratic");
        if (!quad.is_array()) throw ConfigError("model.quadratic", "expected an array of matrices");
        for (const json& a : quad) p.quadratic.push_back(parse_matrix(a, p.dim, "model.quadratic"));
      }
      p.extent = model_double(spec, "extent", 1.0);
      p.margin = model_double(spec, "margin", 0.1);
      return polynomial_chart(p);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument || e.code() == ErrorCode::DimensionMismatch) {
      throw ConfigError("model", e.what());
    }
    throw;
  }
  throw ConfigError("model.name", "unknown model '" + n + "'");
}

// Closed-form curvature of the named model at metric g, when one exists.
std::optional<CurvatureTensor> model_oracle(const ModelSpec& spec, const InnerProduct& g) {
  const int m = g.dim();
  if (spec.name == "flat") return CurvatureTensor::zero(g);
  if (spec.name == "sphere") {
    const double r = model_double(spec, "r", 1.0);
    return (1.0 / (r * r)) * r0(g);
  }
  if (spec.name == "hyperbolic") return -1.0 * r0(g);
  if (spec.name == "fubini_study") return r0(g) + a_phi(standard_phi_matrix(m), g);
  if (spec.name == "complex_hyperbolic") return -1.0 * (r0(g) + a_phi(standard_phi_matrix(m), g));
  return std::nullopt;
}

bool is_kahler_model(const ModelSpec& spec) {
  return spec.name == "fubini_study" || spec.name == "complex_hyperbolic";
}

json check_entry(const std::string& name, double residual, double tolerance) {
  return {{"name", name}, {"residual", residual}, {"tolerance", tolerance}, {"pass", residual <= tolerance}};
}

void render_text(const json& node, const std::string& path, std::ostringstream& out) {
  if (node.is_object()) {
    for (const auto& [key, value] : node.items()) render_text(value, path.empty() ? key : path + "." + key, out);
  } else if (node.is_array()) {
    const bool flat = std::all_of(node.begin(), node.end(), [](const json& e) { return e.is_primitive(); });
    if (flat) {
      out << path << " = [";
      for (std::size_t i = 0; i < node.size(); ++i) out << (i ? ", " : "") << node[i].dump();
      out << "]\n";
    } else {
      for (std::size_t i = 0; i < node.size(); ++i) render_text(node[i], path + "[" + std::to_string(i) + "]", out);
    }
  } else {
    out << path << " = " << node.dump() << "\n";
  }
}

json report_header(const AnalysisConfig& config, const char* command, const MetricChart& chart) {
  return {{"schema_version", kReportSchemaVersion},
          {"version", kVersion},
          {"command", command},
          {"config", config_to_json(config)},
          {"chart", {{"name", chart.name()}, {"dim", chart.dim()}, {"derivative_mode", to_string(chart.mode())}}}};
}

std::vector<Vector> resolve_points(const AnalysisConfig& config, const MetricChart& chart) {
  std::vector<Vector> pts = config.points.empty() ? default_points(chart, 5, config.seed) : config.points;
  for (const Vector& p : pts) {
    if (p.size() != chart.dim()) {
      throw ConfigError("points", "point has " + std::to_string(p.size()) + " coordinates, chart dimension is " +
                                      std::to_string(chart.dim()));
    }
  }
  return pts;
}

}  // namespace

AnalysisConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("<root>", "config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!kConfigKeys.contains(key)) throw ConfigError(key, "unknown key");
  }
  AnalysisConfig c;
  if (!doc.contains("model")) throw ConfigError("model", "missing required key");
  const json& model = doc.at("model");
  if (model.is_string()) {
    c.model.name = model.get<std::string>();
  } else if (model.is_object()) {
    if (!model.contains("name") || !model.at("name").is_string()) throw ConfigError("model.name", "missing model name");
    c.model.name = model.at("name").get<std::string>();
    c.model.parameters = model;
    c.model.parameters.erase("name");
  } else {
    throw ConfigError("model", "expected a model name or object");
  }
  if (doc.contains("points")) {
    const json& pts = doc.at("points");
    if (!pts.is_array()) throw ConfigError("points", "expected an array of points");
    for (const json& p : pts) c.points.push_back(parse_vector(p, "points"));
  }
  if (doc.contains("samples")) {
    c.samples = get_int(doc, "samples", "samples");
    if (c.samples < 2) throw ConfigError("samples", "must be at least 2");
  }
  if (doc.contains("seed")) {
    const json& s = doc.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
      throw ConfigError("seed", "expected a non-negative integer");
    }
    c.seed = s.get<std::uint64_t>();
  }
  if (doc.contains("fd_step")) c.fd_step = get_positive(doc, "fd_step");
  if (doc.contains("derivative_mode")) {
    const json& d = doc.at("derivative_mode");
    const std::string s = d.is_string() ? d.get<std::string>() : "";
    if (s == "analytic") {
      c.derivative_mode = DerivativeMode::Analytic;
    } else if (s == "finite_difference" || s == "fd") {
      c.derivative_mode = DerivativeMode::FiniteDifference;
    } else {
      throw ConfigError("derivative_mode", "expected 'analytic' or 'finite_difference'");
    }
  }
  if (doc.contains("spec_tol")) c.spec_tol = get_positive(doc, "spec_tol");
  if (doc.contains("cluster_tol")) c.cluster_tol = get_positive(doc, "cluster_tol");
  if (doc.contains("degeneracy_tol")) c.degeneracy_tol = get_positive(doc, "degeneracy_tol");
  if (doc.contains("format")) {
    const json& f = doc.at("format");
    const std::string s = f.is_string() ? f.get<std::string>() : "";
    if (s == "json") {
      c.format = OutputFormat::Json;
    } else if (s == "text") {
      c.format = OutputFormat::Text;
    } else {
      throw ConfigError("format", "expected 'text' or 'json'");
    }
  }
  if (doc.contains("out")) {
    if (!doc.at("out").is_string()) throw ConfigError("out", "expected a file path");
    c.out = doc.at("out").get<std::string>();
  }
  if (doc.contains("conformal_exponent")) c.conformal_exponent = parse_vector(doc.at("conformal_exponent"), "conformal_exponent");
  if (doc.contains("debug_corrupt_tensor")) {
    if (!doc.at("debug_corrupt_tensor").is_boolean()) throw ConfigError("debug_corrupt_tensor", "expected a boolean");
    c.debug_corrupt_tensor = doc.at("debug_corrupt_tensor").get<bool>();
  }
  (void)build_model(c.model);  // rejects unknown models and bad parameters up front
  return c;
}

AnalysisConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc);
}

json config_to_json(const AnalysisConfig& c) {
  json model = c.model.parameters;
  model["name"] = c.model.name;
  json doc = {{"model", model},
              {"samples", c.samples},
              {"seed", c.seed},
              {"fd_step", c.fd_step},
              {"derivative_mode", to_string(c.derivative_mode)},
              {"cluster_tol", c.cluster_tol},
              {"degeneracy_tol", c.degeneracy_tol},
              {"format", c.format == OutputFormat::Json ? "json" : "text"},
              {"debug_corrupt_tensor", c.debug_corrupt_tensor}};
  json pts = json::array();
  for (const Vector& p : c.points) pts.push_back(to_json(p));
  doc["points"] = pts;
  if (c.spec_tol) doc["spec_tol"] = *c.spec_tol;
  if (c.out) doc["out"] = *c.out;
  if (c.conformal_exponent) doc["conformal_exponent"] = to_json(*c.conformal_exponent);
  return doc;
}

MetricChart build_chart(const AnalysisConfig& config) {
  MetricChart chart = build_model(config.model).with_fd_step(config.fd_step);
  if (config.derivative_mode == DerivativeMode::Analytic && chart.has_analytic()) {
    return chart.with_mode(DerivativeMode::Analytic);
  }
  return chart.with_mode(DerivativeMode::FiniteDifference);
}

std::vector<Vector> default_points(const MetricChart& chart, int count, std::uint64_t seed) {
  const int m = chart.dim();
  const ChartDomain& d = chart.domain();
  const double usable = d.extent - std::max(d.margin, chart.reach_nabla_riemann());
  std::vector<Vector> pts;
  Vector offset(m);
  for (int i = 0; i < m; ++i) offset[i] = (i % 2 == 0 ? 0.1 : -0.1) * (i + 1) / m;
  pts.push_back(offset * std::min(1.0, usable));
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double half = d.shape == ChartDomain::Shape::Ball ? 0.6 * usable / std::sqrt(static_cast<double>(m))
                                                          : 0.6 * usable;
  while (static_cast<int>(pts.size()) < count) {
    Vector v(m);
    for (int i = 0; i < m; ++i) v[i] = half * unit(rng);
    pts.push_back(v);
  }
  return pts;
}

ClassifierOptions classifier_options(const AnalysisConfig& config) {
  ClassifierOptions o = config.derivative_mode == DerivativeMode::Analytic ? ClassifierOptions::algebraic()
                                                                           : ClassifierOptions::finite_difference();
  if (config.spec_tol) o.spec_tol = *config.spec_tol;
  o.cluster_tol = config.cluster_tol;
  o.degeneracy_tol = config.degeneracy_tol;
  return o;
}

int worker_count() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  if (const char* cap = std::getenv("WEYL_MAX_THREADS")) {
    const int c = std::atoi(cap);
    if (c > 0) n = std::min(n, c);
  }
  return n;
}

json to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json to_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(to_json(Vector(m.row(i).transpose())));
  return out;
}

json to_json(const SpectralProfile& p) {
  json clusters = json::array();
  for (const EigenCluster& c : p.clusters) clusters.push_back({{"value", c.value}, {"multiplicity", c.multiplicity}});
  return {{"clusters", clusters}, {"spread", p.spread}, {"source_dim", p.source_dim}};
}

json to_json(const OssermanReport& r) {
  return {{"is_constant", r.is_constant},
          {"max_profile_distance", r.max_profile_distance},
          {"sample_count", r.sample_count},
          {"random_samples", r.random_samples},
          {"seed", r.seed},
          {"tolerance", r.tolerance}};
}

json to_json(const Verdict& v) {
  json out = {{"kind", to_string(v.kind)},
              {"weyl_norm", v.weyl_norm},
              {"near_degenerate", v.near_degenerate},
              {"below_rigidity_threshold", v.below_rigidity_threshold},
              {"profile", to_json(v.profile)},
              {"warnings", v.warnings}};
  out["lambda0"] = v.lambda0 ? json(*v.lambda0) : json(nullptr);
  out["lambda1"] = v.lambda1 ? json(*v.lambda1) : json(nullptr);
  out["model_type"] = v.model_type();
  out["phi"] = v.phi ? to_json(*v.phi) : json(nullptr);
  out["relation_residual"] = v.relation_residual ? json(*v.relation_residual) : json(nullptr);
  out["reconstruction_residual"] = v.reconstruction_residual ? json(*v.reconstruction_residual) : json(nullptr);
  return out;
}

json cmd_analyze(const AnalysisConfig& config) {
  const MetricChart chart = build_chart(config);
  const std::vector<Vector> pts = resolve_points(config, chart);
  ChartOptions opts;
  opts.classifier = classifier_options(config);
  opts.samples = config.samples;
  opts.seed = config.seed;
  opts.bianchi = true;
  opts.threads = worker_count();
  const ChartClassification cc = classify_chart(chart, pts, opts);
  json report = report_header(config, "analyze", chart);
  json points = json::array();
  for (std::size_t i = 0; i < cc.points.size(); ++i) {
    const PointAnalysis& pa = cc.points[i];
    points.push_back({{"index", i},
                      {"point", to_json(pa.point)},
                      {"metric", to_json(pa.metric)},
                      {"tau", pa.tau},
                      {"weyl_norm", pa.weyl_norm},
                      {"osserman", to_json(pa.osserman)},
                      {"verdict", to_json(pa.verdict)},
                      {"bianchi_residual", pa.bianchi_residual ? json(*pa.bianchi_residual) : json(nullptr)}});
  }
  report["points"] = points;
  const ChartSummary& s = cc.summary;
  report["summary"] = {{"ConformallyFlat", s.flat},
                       {"ConformallyComplexSpaceForm", s.ccsf},
                       {"OssermanOther", s.osserman_other},
                       {"NotConformallyOsserman", s.not_osserman},
                       {"ccsf_cpn_type", s.ccsf_cpn},
                       {"ccsf_dual_cpn_type", s.ccsf_dual_cpn},
                       {"phi_consistency", s.phi_consistency ? json(*s.phi_consistency) : json(nullptr)}};
  return report;
}

VerifyResult cmd_verify(const AnalysisConfig& config) {
  const MetricChart chart = build_chart(config);
  const std::vector<Vector> pts = resolve_points(config, chart);
  const bool fd = chart.mode() == DerivativeMode::FiniteDifference;
  const int m = chart.dim();
  Vector exponent = Vector::Zero(m);
  exponent[0] = 0.3;
  if (config.conformal_exponent) {
    if (config.conformal_exponent->size() != m) throw ConfigError("conformal_exponent", "length must equal the dimension");
    exponent = *config.conformal_exponent;
  }
  const ConformalFactor alpha = ConformalFactor::exp_linear(exponent);
  // Rescaled charts are always differenced numerically for this check.
  const MetricChart base_fd = chart.with_mode(DerivativeMode::FiniteDifference);

  std::vector<json> per_point(pts.size());
  std::vector<int> ok(pts.size(), 1);
  std::vector<std::exception_ptr> errors(pts.size());
  const int workers = std::clamp(worker_count(), 1, std::max<int>(1, static_cast<int>(pts.size())));
  auto work = [&](std::size_t i) {
    const Vector& u = pts[i];
    json checks = json::array();
    CovariantDerivativeR nabla = covariant_derivative_riemann(chart, u);
    const CurvatureTensor& r = nabla.riemann;
    const double rscale = std::max(1.0, to_orthonormal(r).tensor.max_abs());
    checks.push_back(check_entry("symmetry_residual", symmetry_residual(r) / rscale, fd ? 1e-6 : 1e-10));
    const CurvatureDecomposition dec = weyl_decompose(r);
    checks.push_back(check_entry("reconstruction_residual", dec.reconstruction_residual() / rscale, 1e-10));
    const CurvatureTensor w = to_orthonormal(dec.w).tensor;
    checks.push_back(check_entry("weyl_trace", trace_check(w, 100, config.seed), fd ? 1e-5 : 1e-9));
    if (config.debug_corrupt_tensor) nabla.components(0, 1, 0, 1, 2) += 0.1;
    checks.push_back(check_entry("second_bianchi", second_bianchi_residual(nabla.components), fd ? 1e-4 : 1e-7));
    checks.push_back(check_entry("weyl_conformal_invariance", conformal_invariance_residual(base_fd, alpha, u), 1e-5));
    if (const auto oracle = model_oracle(config.model, r.metric())) {
      checks.push_back(check_entry("model_oracle", (r - *oracle).max_abs(), fd ? 1e-5 : 1e-9));
    }
    if (is_kahler_model(config.model)) {
      const Matrix phi = standard_phi_matrix(m);
      const std::vector<Matrix> nphi = covariant_derivative_endo(chart, coordinate_complex_structure(m), u);
      double worst = 0.0;
      for (const Matrix& d : nphi) worst = std::max(worst, max_abs(d));
      checks.push_back(check_entry("kahler_nabla_phi", worst, fd ? 1e-3 : 1e-8));
      checks.push_back(check_entry("phi_anticommutator", anticommutator_residual(nphi, phi), fd ? 1e-3 : 1e-8));
    }
    bool pass = true;
    for (const json& c : checks) pass = pass && c.at("pass").get<bool>();
    ok[i] = pass ? 1 : 0;
    per_point[i] = {{"index", i}, {"point", to_json(u)}, {"checks", checks}, {"pass", pass}};
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < pts.size(); i += workers) {
        try {
          work(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  VerifyResult out;
  out.report = report_header(config, "verify", chart);
  out.report["conformal_factor"] = alpha.description;
  out.report["points"] = per_point;
  out.all_pass = std::all_of(ok.begin(), ok.end(), [](int v) { return v == 1; });
  out.report["all_pass"] = out.all_pass;
  return out;
}

json cmd_spectrum(const AnalysisConfig& config) {
  const MetricChart chart = build_chart(config);
  const std::vector<Vector> pts = resolve_points(config, chart);
  json report = report_header(config, "spectrum", chart);
  json points = json::array();
  const std::vector<Vector> dirs = osserman_directions(chart.dim(), config.samples, config.seed);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const CurvatureTensor w = to_orthonormal(weyl_decompose(riemann_at(chart, pts[i])).w).tensor;
    const std::vector<Vector> spectra = sampled_spectra(w, config.samples, config.seed, worker_count());
    json rows = json::array();
    for (std::size_t k = 0; k < spectra.size(); ++k) {
      rows.push_back({{"direction", to_json(dirs[k])}, {"eigenvalues", to_json(spectra[k])}});
    }
    points.push_back({{"index", i}, {"point", to_json(pts[i])}, {"rows", rows}});
  }
  report["points"] = points;
  return report;
}

std::string format_number(double v) { return json(v).dump(); }

std::string render(const json& report, OutputFormat format) {
  if (format == OutputFormat::Json) return report.dump(2) + "\n";
  std::ostringstream out;
  render_text(report, "", out);
  return out.str();
}

}  // namespace weyl
