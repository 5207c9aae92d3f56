#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "weyl/dual.hpp"
#include "weyl/tensor.hpp"

namespace weyl {

using D1 = Dual<double>;
using D2 = Dual<D1>;
using D3 = Dual<D2>;

/// Writes the row-major m×m metric at coordinates u into g.
template <class T>
using MetricFn = std::function<void(std::span<const T> u, std::span<T> g)>;

template <class T>
using ScalarFn = std::function<T(std::span<const T> u)>;

/// One evaluator per scalar type. Only `value` is required; the dual
/// instantiations enable exact (forward-mode) derivatives up to third order.
struct MetricEvaluators {
  MetricFn<double> value;
  MetricFn<D1> first;
  MetricFn<D2> second;
  MetricFn<D3> third;

  bool analytic() const { return first && second && third; }

  /// Instantiates a generic functor `f(std::span<const T>, std::span<T>)` for
  /// every scalar type.
  template <class F>
  static MetricEvaluators from_generic(F f) {
    return {[f](std::span<const double> u, std::span<double> g) { f(u, g); },
            [f](std::span<const D1> u, std::span<D1> g) { f(u, g); },
            [f](std::span<const D2> u, std::span<D2> g) { f(u, g); },
            [f](std::span<const D3> u, std::span<D3> g) { f(u, g); }};
  }
};

struct ScalarEvaluators {
  ScalarFn<double> value;
  ScalarFn<D1> first;
  ScalarFn<D2> second;
  ScalarFn<D3> third;

  bool analytic() const { return first && second && third; }

  template <class F>
  static ScalarEvaluators from_generic(F f) {
    return {[f](std::span<const double> u) { return f(u); }, [f](std::span<const D1> u) { return f(u); },
            [f](std::span<const D2> u) { return f(u); }, [f](std::span<const D3> u) { return f(u); }};
  }
};

enum class DerivativeMode { Analytic, FiniteDifference };

const char* to_string(DerivativeMode mode) noexcept;

/// Box |u_i| ≤ extent or ball |u| < extent in chart coordinates. Points
/// closer than `margin` to the boundary are rejected.
struct ChartDomain {
  enum class Shape { Box, Ball };
  Shape shape = Shape::Box;
  double extent = 1.0;
  double margin = 0.1;

  double distance_to_boundary(const Vector& u) const;
  /// Origin, points along each axis and seeded interior points, all at least
  /// `margin` from the boundary.
  std::vector<Vector> sample_points(int m, std::uint64_t seed, int random_count) const;
};

/// Metric and its partial derivatives at a point. Index layouts:
/// g[i*m+j], dg[(a*m+i)*m+j], d2g[((a*m+b)*m+i)*m+j], d3g[(((a*m+b)*m+c)*m+i)*m+j].
struct MetricJet {
  int m = 0;
  int order = 0;
  std::vector<double> g, dg, d2g, d3g;
};

/// A Riemannian metric on a single coordinate domain.
class MetricChart {
 public:
  MetricChart(std::string name, int dim, ChartDomain domain, MetricEvaluators eval,
              DerivativeMode mode = DerivativeMode::Analytic, double fd_step = 1e-4);

  /// Chart whose metric is a generic functor; derivatives are exact.
  template <class F>
  static MetricChart analytic(std::string name, int dim, ChartDomain domain, F f) {
    return MetricChart(std::move(name), dim, domain, MetricEvaluators::from_generic(std::move(f)),
                       DerivativeMode::Analytic);
  }

  /// Chart from a plain point → matrix map; derivatives by finite differences.
  static MetricChart from_function(std::string name, int dim, ChartDomain domain,
                                   std::function<Matrix(const Vector&)> metric, double fd_step = 1e-4);

  const std::string& name() const noexcept { return name_; }
  int dim() const noexcept { return dim_; }
  const ChartDomain& domain() const noexcept { return domain_; }
  DerivativeMode mode() const noexcept { return mode_; }
  bool has_analytic() const { return eval_.analytic(); }
  const MetricEvaluators& evaluators() const noexcept { return eval_; }

  /// Step for first derivatives of g.
  double fd_step() const noexcept { return fd_step_; }
  /// Step for the nested (outer) difference of Γ and R, 10·h.
  double outer_step() const noexcept;

  MetricChart with_mode(DerivativeMode mode) const;
  MetricChart with_fd_step(double h) const;

  /// Metric at u. Rejects points outside the domain margin and non-SPD values.
  InnerProduct metric_at(const Vector& u) const;
  /// Raw metric evaluation without domain or SPD checks (stencil points).
  Matrix raw_metric(const Vector& u) const;
  /// Exact derivatives of g up to `order` (≤ 3); requires analytic evaluators.
  MetricJet jet(const Vector& u, int order) const;

  /// Throws DomainViolation unless u is at least max(margin, reach) inside.
  void require_interior(const Vector& u, double reach) const;

  /// Stencil reach of each derivative level in the current mode.
  double reach_christoffel() const;
  double reach_riemann() const;
  double reach_nabla_riemann() const;

 private:
  std::string name_;
  int dim_;
  ChartDomain domain_;
  MetricEvaluators eval_;
  DerivativeMode mode_;
  double fd_step_;
};

/// Christoffel symbols of the second kind, Γ^k_{ij}.
class Christoffel {
 public:
  Christoffel() = default;
  Christoffel(int m, std::vector<double> values) : m_(m), v_(std::move(values)) {}

  int dim() const noexcept { return m_; }
  double operator()(int k, int i, int j) const { return v_[(static_cast<std::size_t>(k) * m_ + i) * m_ + j]; }
  /// (Γ_a)^k_j = Γ^k_{aj}, the connection matrix in direction a.
  Matrix connection_matrix(int a) const;
  double max_abs() const;
  /// max |Γ^k_ij − Γ^k_ji|.
  double symmetry_defect() const;

 private:
  int m_ = 0;
  std::vector<double> v_;
};

Christoffel christoffel(const MetricChart& chart, const Vector& u);

/// Fully covariant Riemann tensor R_{ijkl} = g(R(∂_i,∂_j)∂_k, ∂_l) with
/// R(x,y) = ∇_x∇_y − ∇_y∇_x − ∇_[x,y]; the unit sphere gives R = +R0.
CurvatureTensor riemann_at(const MetricChart& chart, const Vector& u);

struct CovariantDerivativeR {
  Tensor5 components;  // (∇_n R)_{ijkl} stored at (i, j, k, l, n)
  CurvatureTensor riemann;
};

CovariantDerivativeR covariant_derivative_riemann(const MetricChart& chart, const Vector& u);

/// max |∇_a R_{bcde} + ∇_b R_{cade} + ∇_c R_{abde}|.
double second_bianchi_residual(const Tensor5& nabla_r);
double second_bianchi_residual(const MetricChart& chart, const Vector& u);

using EndoField = std::function<Matrix(const Vector&)>;

/// (∇_a Φ) = ∂_a Φ + [Γ_a, Φ] for each coordinate direction a.
std::vector<Matrix> covariant_derivative_endo(const MetricChart& chart, const EndoField& phi, const Vector& u);

/// max_a ‖(∇_aΦ)Φ + Φ(∇_aΦ)‖∞.
double anticommutator_residual(std::span<const Matrix> nabla_phi, const Matrix& phi);

/// Positive conformal factor α. Analytic when all dual evaluators exist.
struct ConformalFactor {
  std::string description;
  ScalarEvaluators eval;

  /// α(u) = exp(c·u).
  static ConformalFactor exp_linear(const Vector& c);
  static ConformalFactor constant(double c);
  static ConformalFactor from_function(std::string description, std::function<double(const Vector&)> alpha);
};

/// Chart with metric α(u)·g(u). Stays analytic only if both chart and α are.
MetricChart conformal_rescale(const MetricChart& chart, const ConformalFactor& alpha, std::uint64_t seed = 0);

/// Weyl operator with the last index raised, W_{ijk}^l, at u.
Tensor4 weyl_operator_at(const MetricChart& chart, const Vector& u);

/// max |W_{ijk}^l(g) − W_{ijk}^l(α·g)| at u.
double conformal_invariance_residual(const MetricChart& chart, const ConformalFactor& alpha, const Vector& u);

}  // namespace weyl
