#include "weyl/models.hpp"

#include <random>
#include <string>

#include "weyl/error.hpp"

namespace weyl {

namespace {

template <class T>
T squared_norm(std::span<const T> u) {
  T s(0.0);
  for (const T& x : u) s = s + x * x;
  return s;
}

template <class T>
void conformally_flat(std::span<T> g, std::size_t m, const T& factor) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) g[i * m + j] = i == j ? factor : T(0.0);
}

// ds² = [(1 + s|z|²)|dz|² − s|z̄·dz|²] / (1 + s|z|²)² with s = +1 (FS) or −1.
// Real basis vector e_{2k} ↦ 1 at slot k, e_{2k+1} ↦ i at slot k; the pairing
// z̄_k c has real/imaginary parts (x, −y) for c = 1 and (y, x) for c = i.
template <class T>
void kahler_model(std::span<const T> u, std::span<T> g, double sign) {
  const std::size_t m = u.size();
  const T q = 1.0 + sign * squared_norm(u);
  const T inv = 1.0 / (q * q);
  std::vector<T> re(m), im(m);
  for (std::size_t k = 0; k + 1 < m; k += 2) {
    const T& x = u[k];
    const T& y = u[k + 1];
    re[k] = x;
    im[k] = -y;
    re[k + 1] = y;
    im[k + 1] = x;
  }
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) {
      T v = -sign * (re[a] * re[b] + im[a] * im[b]);
      if (a == b) v = v + q;
      g[a * m + b] = v * inv;
    }
}

void require_positive_dim(int m) {
  if (m < 2) throw Error(ErrorCode::InvalidArgument, "model dimension must be at least 2");
}

}  // namespace

Matrix standard_phi_matrix(int m) {
  if (m % 2 != 0 || m < 2) throw Error(ErrorCode::InvalidArgument, "standard_phi needs a positive even dimension");
  Matrix phi = Matrix::Zero(m, m);
  for (int k = 0; k < m; k += 2) {
    phi(k + 1, k) = 1.0;
    phi(k, k + 1) = -1.0;
  }
  return phi;
}

HermitianStructure standard_phi(int m) { return HermitianStructure(standard_phi_matrix(m), InnerProduct::identity(m), 0.0); }

MetricChart sphere_chart(int m, double r) {
  require_positive_dim(m);
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "sphere radius must be positive");
  const double r2 = r * r;
  const double c = 4.0 * r2 * r2;
  auto f = [c, r2](auto u, auto g) {
    using T = std::remove_cv_t<typename decltype(u)::element_type>;
    const T d = r2 + squared_norm(u);
    conformally_flat(g, u.size(), T(c) / (d * d));
  };
  return MetricChart::analytic("sphere(m=" + std::to_string(m) + ",r=" + std::to_string(r) + ")", m,
                               {ChartDomain::Shape::Box, 3.0 * r, 0.1}, f);
}

MetricChart hyperbolic_chart(int m) {
  require_positive_dim(m);
  auto f = [](auto u, auto g) {
    using T = std::remove_cv_t<typename decltype(u)::element_type>;
    const T d = 1.0 - squared_norm(u);
    conformally_flat(g, u.size(), T(4.0) / (d * d));
  };
  return MetricChart::analytic("hyperbolic(m=" + std::to_string(m) + ")", m, {ChartDomain::Shape::Ball, 1.0, 0.1}, f);
}

MetricChart flat_chart(int m) {
  require_positive_dim(m);
  auto f = [](auto u, auto g) {
    using T = std::remove_cv_t<typename decltype(u)::element_type>;
    conformally_flat(g, u.size(), T(1.0));
  };
  return MetricChart::analytic("flat(m=" + std::to_string(m) + ")", m, {ChartDomain::Shape::Box, 1.0, 0.1}, f);
}

MetricChart fubini_study_chart(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "complex dimension must be positive");
  auto f = [](auto u, auto g) { kahler_model(u, g, 1.0); };
  return MetricChart::analytic("fubini_study(n=" + std::to_string(n) + ")", 2 * n,
                               {ChartDomain::Shape::Box, 2.0, 0.1}, f);
}

MetricChart complex_hyperbolic_chart(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "complex dimension must be positive");
  auto f = [](auto u, auto g) { kahler_model(u, g, -1.0); };
  return MetricChart::analytic("complex_hyperbolic(n=" + std::to_string(n) + ")", 2 * n,
                               {ChartDomain::Shape::Ball, 1.0, 0.1}, f);
}

MetricChart polynomial_chart(const PolynomialMetric& spec) {
  const int m = spec.dim;
  require_positive_dim(m);
  auto check = [m](const Matrix& a, const char* what) {
    if (a.rows() != m || a.cols() != m) {
      throw Error(ErrorCode::DimensionMismatch, std::string(what) + " coefficient has the wrong shape");
    }
    if (max_abs(a - a.transpose()) > 1e-12 * std::max(1.0, max_abs(a))) {
      throw Error(ErrorCode::InvalidArgument, std::string(what) + " coefficient is not symmetric");
    }
  };
  check(spec.constant, "constant");
  if (!spec.linear.empty() && static_cast<int>(spec.linear.size()) != m) {
    throw Error(ErrorCode::DimensionMismatch, "linear part needs one matrix per coordinate");
  }
  if (!spec.quadratic.empty() && static_cast<int>(spec.quadratic.size()) != m * m) {
    throw Error(ErrorCode::DimensionMismatch, "quadratic part needs m*m matrices");
  }
  for (const Matrix& a : spec.linear) check(a, "linear");
  for (const Matrix& a : spec.quadratic) check(a, "quadratic");
  auto f = [spec](auto u, auto g) {
    using T = std::remove_cv_t<typename decltype(u)::element_type>;
    const int dim = spec.dim;
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) {
        T v(spec.constant(i, j));
        for (std::size_t a = 0; a < spec.linear.size(); ++a) v = v + spec.linear[a](i, j) * u[a];
        for (std::size_t ab = 0; ab < spec.quadratic.size(); ++ab) {
          const double c = spec.quadratic[ab](i, j);
          if (c != 0.0) v = v + c * (u[ab / dim] * u[ab % dim]);
        }
        g[i * dim + j] = v;
      }
  };
  MetricChart chart = MetricChart::analytic("polynomial(m=" + std::to_string(m) + ")", m,
                                            {ChartDomain::Shape::Box, spec.extent, spec.margin}, f);
  for (const Vector& p : chart.domain().sample_points(m, 0x5eed, 32)) {
    try {
      (void)chart.metric_at(p);
    } catch (const Error& e) {
      throw Error(ErrorCode::InvalidArgument, std::string("metric is not positive definite on the domain: ") + e.what());
    }
  }
  return chart;
}

MetricChart perturbed_flat_chart(int m, double epsilon, std::uint64_t seed) {
  require_positive_dim(m);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto sym = [&](double scale) {
    Matrix x(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) x(i, j) = unit(rng);
    return Matrix(0.5 * scale * (x + x.transpose()));
  };
  PolynomialMetric spec;
  spec.dim = m;
  spec.extent = 0.5;
  spec.margin = 0.1;
  spec.constant = Matrix::Identity(m, m) + epsilon * sym(1.0);
  for (int a = 0; a < m; ++a) spec.linear.push_back(epsilon * sym(1.0));
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) spec.quadratic.push_back(b < a ? spec.quadratic[b * m + a] : Matrix(epsilon * sym(1.0)));
  MetricChart chart = polynomial_chart(spec);
  return MetricChart(
      "perturbed_flat(m=" + std::to_string(m) + ",eps=" + std::to_string(epsilon) + ",seed=" + std::to_string(seed) + ")",
      m, chart.domain(), chart.evaluators(), DerivativeMode::Analytic, chart.fd_step());
}

EndoField coordinate_complex_structure(int m) {
  const Matrix phi = standard_phi_matrix(m);
  return [phi](const Vector&) { return phi; };
}

}  // namespace weyl
