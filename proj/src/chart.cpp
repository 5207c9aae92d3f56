#include "weyl/chart.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "weyl/curvature_algebra.hpp"
#include "weyl/error.hpp"

namespace weyl {

namespace {

constexpr double kStencil[4] = {1.0, -8.0, 8.0, -1.0};  // offsets −2, −1, +1, +2; divide by 12h
constexpr int kOffsets[4] = {-2, -1, 1, 2};

std::size_t idx3(int m, int a, int b, int c) { return (static_cast<std::size_t>(a) * m + b) * m + c; }

std::size_t idx4(int m, int a, int b, int c, int d) {
  return ((static_cast<std::size_t>(a) * m + b) * m + c) * m + d;
}

// Gauss–Jordan inverse without pivoting; valid for SPD input.
template <class T>
std::vector<T> invert_spd(const std::vector<T>& a, int m) {
  std::vector<T> w = a;
  std::vector<T> inv(static_cast<std::size_t>(m) * m, T(0.0));
  for (int i = 0; i < m; ++i) inv[i * m + i] = T(1.0);
  for (int c = 0; c < m; ++c) {
    const T pivot_inv = T(1.0) / w[c * m + c];
    for (int j = 0; j < m; ++j) {
      w[c * m + j] = w[c * m + j] * pivot_inv;
      inv[c * m + j] = inv[c * m + j] * pivot_inv;
    }
    for (int r = 0; r < m; ++r) {
      if (r == c) continue;
      const T f = w[r * m + c];
      for (int j = 0; j < m; ++j) {
        w[r * m + j] = w[r * m + j] - f * w[c * m + j];
        inv[r * m + j] = inv[r * m + j] - f * inv[c * m + j];
      }
    }
  }
  return inv;
}

template <class T>
struct LeviCivita {
  int m = 0;
  std::vector<T> g, ginv;
  std::vector<T> gamma;   // [k][i][j]
  std::vector<T> dgamma;  // [a][k][i][j]
};

// Γ^k_ij = ½ g^{kl}(∂_i g_jl + ∂_j g_il − ∂_l g_ij) and, when d2g is given,
// ∂_aΓ^k_ij = −g^{kp} ∂_a g_pq Γ^q_ij + g^{kl} ∂_aΓ_{l,ij}.
template <class T>
LeviCivita<T> levi_civita(int m, const std::vector<T>& g, const std::vector<T>& dg, const std::vector<T>* d2g) {
  LeviCivita<T> lc;
  lc.m = m;
  lc.g = g;
  lc.ginv = invert_spd(g, m);
  const std::size_t m3 = static_cast<std::size_t>(m) * m * m;
  std::vector<T> first_kind(m3, T(0.0));  // [l][i][j]
  for (int l = 0; l < m; ++l)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        first_kind[idx3(m, l, i, j)] =
            0.5 * (dg[idx3(m, i, j, l)] + dg[idx3(m, j, i, l)] - dg[idx3(m, l, i, j)]);
  lc.gamma.assign(m3, T(0.0));
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        T s(0.0);
        for (int l = 0; l < m; ++l) s = s + lc.ginv[k * m + l] * first_kind[idx3(m, l, i, j)];
        lc.gamma[idx3(m, k, i, j)] = s;
      }
  if (d2g == nullptr) return lc;
  const std::vector<T>& h = *d2g;
  lc.dgamma.assign(m3 * m, T(0.0));
  std::vector<T> dfirst(m3, T(0.0));
  std::vector<T> tmp(m3, T(0.0));
  for (int a = 0; a < m; ++a) {
    for (int l = 0; l < m; ++l)
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
          dfirst[idx3(m, l, i, j)] = 0.5 * (h[idx4(m, a, i, j, l)] + h[idx4(m, a, j, i, l)] - h[idx4(m, a, l, i, j)]);
    // tmp[p][i][j] = Σ_q ∂_a g_pq Γ^q_ij
    for (int p = 0; p < m; ++p)
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          T s(0.0);
          for (int q = 0; q < m; ++q) s = s + dg[idx3(m, a, p, q)] * lc.gamma[idx3(m, q, i, j)];
          tmp[idx3(m, p, i, j)] = dfirst[idx3(m, p, i, j)] - s;
        }
    for (int k = 0; k < m; ++k)
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          T s(0.0);
          for (int p = 0; p < m; ++p) s = s + lc.ginv[k * m + p] * tmp[idx3(m, p, i, j)];
          lc.dgamma[idx4(m, a, k, i, j)] = s;
        }
  }
  return lc;
}

// R_{ijkl} = g_{lp}(∂_iΓ^p_jk − ∂_jΓ^p_ik + Γ^p_iq Γ^q_jk − Γ^p_jq Γ^q_ik).
template <class T>
std::vector<T> riemann_lowered(const LeviCivita<T>& lc) {
  const int m = lc.m;
  const std::size_t m4 = static_cast<std::size_t>(m) * m * m * m;
  std::vector<T> up(m4, T(0.0));  // [p][i][j][k]
  for (int p = 0; p < m; ++p)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        if (j < i) continue;  // antisymmetric in (i, j)
        for (int k = 0; k < m; ++k) {
          T s = lc.dgamma[idx4(m, i, p, j, k)] - lc.dgamma[idx4(m, j, p, i, k)];
          for (int q = 0; q < m; ++q)
            s = s + lc.gamma[idx3(m, p, i, q)] * lc.gamma[idx3(m, q, j, k)] -
                lc.gamma[idx3(m, p, j, q)] * lc.gamma[idx3(m, q, i, k)];
          up[idx4(m, p, i, j, k)] = s;
          up[idx4(m, p, j, i, k)] = -s;
        }
      }
  std::vector<T> low(m4, T(0.0));  // [i][j][k][l]
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) {
          T s(0.0);
          for (int p = 0; p < m; ++p) s = s + lc.g[l * m + p] * up[idx4(m, p, i, j, k)];
          low[idx4(m, i, j, k, l)] = s;
        }
  return low;
}

std::vector<double> flatten(const Matrix& g) {
  const int m = static_cast<int>(g.rows());
  std::vector<double> out(static_cast<std::size_t>(m) * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) out[i * m + j] = g(i, j);
  return out;
}

Vector shifted(const Vector& u, int axis, double delta) {
  Vector v = u;
  v[axis] += delta;
  return v;
}

// ∂_a g_ij by the five-point central stencil.
std::vector<double> fd_metric_gradient(const MetricChart& chart, const Vector& u) {
  const int m = chart.dim();
  const double h = chart.fd_step();
  std::vector<double> dg(static_cast<std::size_t>(m) * m * m, 0.0);
  for (int a = 0; a < m; ++a) {
    Matrix acc = Matrix::Zero(m, m);
    for (int s = 0; s < 4; ++s) acc += kStencil[s] * chart.raw_metric(shifted(u, a, kOffsets[s] * h));
    acc /= 12.0 * h;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) dg[idx3(m, a, i, j)] = 0.5 * (acc(i, j) + acc(j, i));
  }
  return dg;
}

LeviCivita<double> fd_levi_civita_first(const MetricChart& chart, const Vector& u) {
  return levi_civita<double>(chart.dim(), flatten(chart.raw_metric(u)), fd_metric_gradient(chart, u), nullptr);
}

// Connection with ∂Γ from nested differences: Γ with step h, then ∂Γ with step 10h.
LeviCivita<double> fd_levi_civita(const MetricChart& chart, const Vector& u) {
  const int m = chart.dim();
  const double ho = chart.outer_step();
  LeviCivita<double> lc = fd_levi_civita_first(chart, u);
  const std::size_t m3 = static_cast<std::size_t>(m) * m * m;
  lc.dgamma.assign(m3 * m, 0.0);
  for (int a = 0; a < m; ++a) {
    for (int s = 0; s < 4; ++s) {
      const LeviCivita<double> side = fd_levi_civita_first(chart, shifted(u, a, kOffsets[s] * ho));
      for (std::size_t t = 0; t < m3; ++t) lc.dgamma[a * m3 + t] += kStencil[s] * side.gamma[t];
    }
    for (std::size_t t = 0; t < m3; ++t) lc.dgamma[a * m3 + t] /= 12.0 * ho;
  }
  return lc;
}

LeviCivita<double> analytic_levi_civita(const MetricChart& chart, const Vector& u, bool with_derivative) {
  const MetricJet jet = chart.jet(u, with_derivative ? 2 : 1);
  return levi_civita(jet.m, jet.g, jet.dg, with_derivative ? &jet.d2g : nullptr);
}

Tensor4 to_tensor4(int m, const std::vector<double>& flat) {
  Tensor4 t(m);
  t.data() = flat;
  return t;
}

CurvatureTensor riemann_unchecked(const MetricChart& chart, const Vector& u) {
  const int m = chart.dim();
  const LeviCivita<double> lc = chart.mode() == DerivativeMode::Analytic ? analytic_levi_civita(chart, u, true)
                                                                         : fd_levi_civita(chart, u);
  Matrix g(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) g(i, j) = lc.g[i * m + j];
  return {to_tensor4(m, riemann_lowered(lc)), InnerProduct(g)};
}

// ∂_n R_{ijkl}, stored at [i][j][k][l][n].
Tensor5 analytic_riemann_gradient(const MetricChart& chart, const Vector& u) {
  const int m = chart.dim();
  const MetricJet jet = chart.jet(u, 3);
  const std::size_t m2 = static_cast<std::size_t>(m) * m;
  Tensor5 out(m);
  std::vector<D1> g(m2), dg(m2 * m), d2g(m2 * m * m);
  for (int n = 0; n < m; ++n) {
    for (std::size_t t = 0; t < m2; ++t) g[t] = D1(jet.g[t], jet.dg[n * m2 + t]);
    for (int a = 0; a < m; ++a)
      for (std::size_t t = 0; t < m2; ++t) {
        dg[a * m2 + t] = D1(jet.dg[a * m2 + t], jet.d2g[(static_cast<std::size_t>(n) * m + a) * m2 + t]);
      }
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        for (std::size_t t = 0; t < m2; ++t) {
          const std::size_t ab = (static_cast<std::size_t>(a) * m + b) * m2 + t;
          const std::size_t nab = ((static_cast<std::size_t>(n) * m + a) * m + b) * m2 + t;
          d2g[ab] = D1(jet.d2g[ab], jet.d3g[nab]);
        }
    const LeviCivita<D1> lc = levi_civita(m, g, dg, &d2g);
    const std::vector<D1> r = riemann_lowered(lc);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k)
          for (int l = 0; l < m; ++l) out(i, j, k, l, n) = r[idx4(m, i, j, k, l)].d;
  }
  return out;
}

Tensor5 fd_riemann_gradient(const MetricChart& chart, const Vector& u) {
  const int m = chart.dim();
  const double ho = chart.outer_step();
  Tensor5 out(m);
  for (int n = 0; n < m; ++n) {
    Tensor4 acc(m);
    for (int s = 0; s < 4; ++s) {
      acc += kStencil[s] * riemann_unchecked(chart, shifted(u, n, kOffsets[s] * ho)).components();
    }
    acc *= 1.0 / (12.0 * ho);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k)
          for (int l = 0; l < m; ++l) out(i, j, k, l, n) = acc(i, j, k, l);
  }
  return out;
}

template <class T>
void fill_metric(const MetricFn<T>& fn, const std::vector<T>& u, std::vector<T>& g) {
  fn(std::span<const T>(u), std::span<T>(g));
}

}  // namespace

const char* to_string(DerivativeMode mode) noexcept {
  return mode == DerivativeMode::Analytic ? "analytic" : "finite_difference";
}

double ChartDomain::distance_to_boundary(const Vector& u) const {
  if (shape == Shape::Ball) return extent - u.norm();
  return extent - (u.size() == 0 ? 0.0 : u.cwiseAbs().maxCoeff());
}

std::vector<Vector> ChartDomain::sample_points(int m, std::uint64_t seed, int random_count) const {
  std::vector<Vector> pts;
  const double reach = std::max(0.0, extent - margin) * 0.999;
  pts.push_back(Vector::Zero(m));
  for (int a = 0; a < m; ++a) {
    pts.push_back(shifted(Vector::Zero(m), a, reach));
    pts.push_back(shifted(Vector::Zero(m), a, -reach));
  }
  if (shape == Shape::Box) {
    pts.push_back(Vector::Constant(m, reach));
    pts.push_back(Vector::Constant(m, -reach));
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int n = 0; n < random_count; ++n) {
    Vector v(m);
    for (int i = 0; i < m; ++i) v[i] = unit(rng);
    if (shape == Shape::Ball) {
      const double norm = v.norm();
      if (norm > 1.0) v /= norm;
    }
    pts.push_back(reach * v);
  }
  return pts;
}

MetricChart::MetricChart(std::string name, int dim, ChartDomain domain, MetricEvaluators eval,
                         DerivativeMode mode, double fd_step)
    : name_(std::move(name)), dim_(dim), domain_(domain), eval_(std::move(eval)), mode_(mode), fd_step_(fd_step) {
  if (dim_ < 2) throw Error(ErrorCode::InvalidArgument, "chart dimension must be at least 2");
  if (!eval_.value) throw Error(ErrorCode::InvalidArgument, "chart needs a metric evaluator");
  if (!(fd_step_ > 0.0)) throw Error(ErrorCode::InvalidArgument, "finite-difference step must be positive");
  if (mode_ == DerivativeMode::Analytic && !eval_.analytic()) mode_ = DerivativeMode::FiniteDifference;
}

MetricChart MetricChart::from_function(std::string name, int dim, ChartDomain domain,
                                       std::function<Matrix(const Vector&)> metric, double fd_step) {
  MetricEvaluators eval;
  eval.value = [metric = std::move(metric), dim](std::span<const double> u, std::span<double> g) {
    const Vector uv = Eigen::Map<const Vector>(u.data(), dim);
    const Matrix gm = metric(uv);
    if (gm.rows() != dim || gm.cols() != dim) {
      throw Error(ErrorCode::DimensionMismatch, "metric function returned a matrix of the wrong shape");
    }
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) g[i * dim + j] = gm(i, j);
  };
  return MetricChart(std::move(name), dim, domain, std::move(eval), DerivativeMode::FiniteDifference, fd_step);
}

double MetricChart::outer_step() const noexcept { return 10.0 * fd_step_; }

MetricChart MetricChart::with_mode(DerivativeMode mode) const {
  if (mode == DerivativeMode::Analytic && !eval_.analytic()) {
    throw Error(ErrorCode::InvalidArgument, "chart '" + name_ + "' has no analytic derivatives");
  }
  MetricChart out = *this;
  out.mode_ = mode;
  return out;
}

MetricChart MetricChart::with_fd_step(double h) const {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "finite-difference step must be positive");
  MetricChart out = *this;
  out.fd_step_ = h;
  return out;
}

Matrix MetricChart::raw_metric(const Vector& u) const {
  if (u.size() != dim_) throw Error(ErrorCode::DimensionMismatch, "point has the wrong number of coordinates");
  std::vector<double> uv(u.data(), u.data() + dim_);
  std::vector<double> g(static_cast<std::size_t>(dim_) * dim_, 0.0);
  fill_metric(eval_.value, uv, g);
  Matrix out(dim_, dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) out(i, j) = g[i * dim_ + j];
  return out;
}

InnerProduct MetricChart::metric_at(const Vector& u) const {
  require_interior(u, 0.0);
  return InnerProduct(raw_metric(u));
}

void MetricChart::require_interior(const Vector& u, double reach) const {
  if (u.size() != dim_) throw Error(ErrorCode::DimensionMismatch, "point has the wrong number of coordinates");
  if (!u.allFinite()) throw Error(ErrorCode::DomainViolation, "point has non-finite coordinates");
  const double need = std::max(domain_.margin, reach);
  const double have = domain_.distance_to_boundary(u);
  if (have < need) {
    throw Error(ErrorCode::DomainViolation, "point is " + std::to_string(have) + " from the boundary of chart '" +
                                                name_ + "' but " + std::to_string(need) + " is required");
  }
}

double MetricChart::reach_christoffel() const { return mode_ == DerivativeMode::Analytic ? 0.0 : 2.0 * fd_step_; }

double MetricChart::reach_riemann() const {
  return mode_ == DerivativeMode::Analytic ? 0.0 : 2.0 * outer_step() + 2.0 * fd_step_;
}

double MetricChart::reach_nabla_riemann() const {
  return mode_ == DerivativeMode::Analytic ? 0.0 : 4.0 * outer_step() + 2.0 * fd_step_;
}

MetricJet MetricChart::jet(const Vector& u, int order) const {
  if (!eval_.analytic()) throw Error(ErrorCode::InvalidArgument, "chart '" + name_ + "' has no analytic derivatives");
  if (order < 0 || order > 3) throw Error(ErrorCode::InvalidArgument, "jet order must be in [0, 3]");
  if (u.size() != dim_) throw Error(ErrorCode::DimensionMismatch, "point has the wrong number of coordinates");
  const int m = dim_;
  const std::size_t m2 = static_cast<std::size_t>(m) * m;
  MetricJet jet;
  jet.m = m;
  jet.order = order;
  jet.g.assign(m2, 0.0);
  {
    std::vector<double> uv(u.data(), u.data() + m);
    fill_metric(eval_.value, uv, jet.g);
  }
  if (order == 0) return jet;
  jet.dg.assign(m2 * m, 0.0);
  if (order == 1) {
    std::vector<D1> uv(m), g(m2);
    for (int a = 0; a < m; ++a) {
      for (int k = 0; k < m; ++k) uv[k] = D1(u[k], k == a ? 1.0 : 0.0);
      fill_metric(eval_.first, uv, g);
      for (std::size_t t = 0; t < m2; ++t) jet.dg[a * m2 + t] = g[t].d;
    }
    return jet;
  }
  jet.d2g.assign(m2 * m * m, 0.0);
  {
    std::vector<D2> uv(m), g(m2);
    for (int a = 0; a < m; ++a)
      for (int b = a; b < m; ++b) {
        for (int k = 0; k < m; ++k) uv[k] = D2(D1(u[k], k == b ? 1.0 : 0.0), D1(k == a ? 1.0 : 0.0, 0.0));
        fill_metric(eval_.second, uv, g);
        for (std::size_t t = 0; t < m2; ++t) {
          if (b == a) jet.dg[a * m2 + t] = g[t].d.v;
          jet.d2g[(static_cast<std::size_t>(a) * m + b) * m2 + t] = g[t].d.d;
          jet.d2g[(static_cast<std::size_t>(b) * m + a) * m2 + t] = g[t].d.d;
        }
      }
  }
  if (order == 2) return jet;
  jet.d3g.assign(m2 * m * m * m, 0.0);
  {
    std::vector<D3> uv(m), g(m2);
    for (int a = 0; a < m; ++a)
      for (int b = a; b < m; ++b)
        for (int c = b; c < m; ++c) {
          for (int k = 0; k < m; ++k) {
            const D2 inner(D1(u[k], k == c ? 1.0 : 0.0), D1(k == b ? 1.0 : 0.0, 0.0));
            uv[k] = D3(inner, D2(D1(k == a ? 1.0 : 0.0, 0.0), D1(0.0, 0.0)));
          }
          fill_metric(eval_.third, uv, g);
          const int perm[6][3] = {{a, b, c}, {a, c, b}, {b, a, c}, {b, c, a}, {c, a, b}, {c, b, a}};
          for (std::size_t t = 0; t < m2; ++t) {
            const double v = g[t].d.d.d;
            for (const auto& p : perm) jet.d3g[((static_cast<std::size_t>(p[0]) * m + p[1]) * m + p[2]) * m2 + t] = v;
          }
        }
  }
  return jet;
}

Matrix Christoffel::connection_matrix(int a) const {
  Matrix out(m_, m_);
  for (int k = 0; k < m_; ++k)
    for (int j = 0; j < m_; ++j) out(k, j) = (*this)(k, a, j);
  return out;
}

double Christoffel::max_abs() const {
  double out = 0.0;
  for (double v : v_) out = std::max(out, std::abs(v));
  return out;
}

double Christoffel::symmetry_defect() const {
  double out = 0.0;
  for (int k = 0; k < m_; ++k)
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < m_; ++j) out = std::max(out, std::abs((*this)(k, i, j) - (*this)(k, j, i)));
  return out;
}

Christoffel christoffel(const MetricChart& chart, const Vector& u) {
  chart.require_interior(u, chart.reach_christoffel());
  (void)chart.metric_at(u);
  const LeviCivita<double> lc = chart.mode() == DerivativeMode::Analytic ? analytic_levi_civita(chart, u, false)
                                                                         : fd_levi_civita_first(chart, u);
  return {chart.dim(), lc.gamma};
}

CurvatureTensor riemann_at(const MetricChart& chart, const Vector& u) {
  chart.require_interior(u, chart.reach_riemann());
  (void)chart.metric_at(u);
  return riemann_unchecked(chart, u);
}

CovariantDerivativeR covariant_derivative_riemann(const MetricChart& chart, const Vector& u) {
  chart.require_interior(u, chart.reach_nabla_riemann());
  const int m = chart.dim();
  CurvatureTensor r = riemann_at(chart, u);
  const Christoffel gamma = christoffel(chart, u);
  const Tensor5 dr =
      chart.mode() == DerivativeMode::Analytic ? analytic_riemann_gradient(chart, u) : fd_riemann_gradient(chart, u);
  Tensor5 out(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l)
          for (int n = 0; n < m; ++n) {
            double s = dr(i, j, k, l, n);
            for (int p = 0; p < m; ++p) {
              s -= gamma(p, n, i) * r(p, j, k, l) + gamma(p, n, j) * r(i, p, k, l) + gamma(p, n, k) * r(i, j, p, l) +
                   gamma(p, n, l) * r(i, j, k, p);
            }
            out(i, j, k, l, n) = s;
          }
  return {std::move(out), std::move(r)};
}

double second_bianchi_residual(const Tensor5& nr) {
  const int m = nr.dim();
  double worst = 0.0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c)
        for (int d = 0; d < m; ++d)
          for (int e = 0; e < m; ++e) {
            const double s = nr(b, c, d, e, a) + nr(c, a, d, e, b) + nr(a, b, d, e, c);
            worst = std::max(worst, std::abs(s));
          }
  return worst;
}

double second_bianchi_residual(const MetricChart& chart, const Vector& u) {
  return second_bianchi_residual(covariant_derivative_riemann(chart, u).components);
}

std::vector<Matrix> covariant_derivative_endo(const MetricChart& chart, const EndoField& phi, const Vector& u) {
  const int m = chart.dim();
  const double h = chart.fd_step();
  chart.require_interior(u, std::max(chart.reach_christoffel(), 2.0 * h));
  const Christoffel gamma = christoffel(chart, u);
  const Matrix p0 = phi(u);
  if (p0.rows() != m || p0.cols() != m) throw Error(ErrorCode::DimensionMismatch, "endomorphism field has wrong shape");
  std::vector<Matrix> out;
  out.reserve(m);
  for (int a = 0; a < m; ++a) {
    Matrix d = Matrix::Zero(m, m);
    for (int s = 0; s < 4; ++s) d += kStencil[s] * phi(shifted(u, a, kOffsets[s] * h));
    d /= 12.0 * h;
    const Matrix ga = gamma.connection_matrix(a);
    out.push_back(d + ga * p0 - p0 * ga);
  }
  return out;
}

double anticommutator_residual(std::span<const Matrix> nabla_phi, const Matrix& phi) {
  double worst = 0.0;
  for (const Matrix& d : nabla_phi) worst = std::max(worst, max_abs(d * phi + phi * d));
  return worst;
}

ConformalFactor ConformalFactor::exp_linear(const Vector& c) {
  std::vector<double> coeff(c.data(), c.data() + c.size());
  auto f = [coeff](auto u) {
    using T = std::remove_cv_t<typename decltype(u)::element_type>;
    T s(0.0);
    for (std::size_t i = 0; i < coeff.size() && i < u.size(); ++i) s = s + coeff[i] * u[i];
    using std::exp;
    return exp(s);
  };
  std::string desc = "exp(";
  for (std::size_t i = 0; i < coeff.size(); ++i) {
    if (coeff[i] == 0.0) continue;
    if (desc.size() > 4) desc += " + ";
    desc += std::to_string(coeff[i]) + "*u" + std::to_string(i + 1);
  }
  desc += ")";
  return {desc, ScalarEvaluators::from_generic(f)};
}

ConformalFactor ConformalFactor::constant(double c) {
  auto f = [c](auto u) {
    using T = std::remove_cv_t<typename decltype(u)::element_type>;
    return T(c);
  };
  return {"constant " + std::to_string(c), ScalarEvaluators::from_generic(f)};
}

ConformalFactor ConformalFactor::from_function(std::string description, std::function<double(const Vector&)> alpha) {
  ScalarEvaluators eval;
  eval.value = [alpha = std::move(alpha)](std::span<const double> u) {
    return alpha(Eigen::Map<const Vector>(u.data(), static_cast<Eigen::Index>(u.size())));
  };
  return {std::move(description), std::move(eval)};
}

namespace {

template <class T>
MetricFn<T> scaled(MetricFn<T> metric, ScalarFn<T> alpha) {
  return [metric = std::move(metric), alpha = std::move(alpha)](std::span<const T> u, std::span<T> g) {
    metric(u, g);
    const T a = alpha(u);
    if (!(primal(a) > 0.0)) throw Error(ErrorCode::DomainViolation, "conformal factor is not positive");
    for (T& v : g) v = a * v;
  };
}

}  // namespace

MetricChart conformal_rescale(const MetricChart& chart, const ConformalFactor& alpha, std::uint64_t seed) {
  if (!alpha.eval.value) throw Error(ErrorCode::InvalidArgument, "conformal factor has no evaluator");
  const int m = chart.dim();
  for (const Vector& p : chart.domain().sample_points(m, seed, 16)) {
    const double v = alpha.eval.value(std::span<const double>(p.data(), static_cast<std::size_t>(m)));
    if (!(v > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "conformal factor " + alpha.description + " is not positive on the domain");
    }
  }
  const MetricEvaluators& src = chart.evaluators();
  MetricEvaluators eval;
  eval.value = scaled(src.value, alpha.eval.value);
  const bool analytic = src.analytic() && alpha.eval.analytic();
  if (analytic) {
    eval.first = scaled(src.first, alpha.eval.first);
    eval.second = scaled(src.second, alpha.eval.second);
    eval.third = scaled(src.third, alpha.eval.third);
  }
  const DerivativeMode mode =
      analytic && chart.mode() == DerivativeMode::Analytic ? DerivativeMode::Analytic : DerivativeMode::FiniteDifference;
  return MetricChart(chart.name() + " * " + alpha.description, m, chart.domain(), std::move(eval), mode,
                     chart.fd_step());
}

Tensor4 weyl_operator_at(const MetricChart& chart, const Vector& u) {
  return raise_last(weyl_decompose(riemann_at(chart, u)).w);
}

double conformal_invariance_residual(const MetricChart& chart, const ConformalFactor& alpha, const Vector& u) {
  const MetricChart rescaled = conformal_rescale(chart, alpha);
  return (weyl_operator_at(chart, u) - weyl_operator_at(rescaled, u)).max_abs();
}

}  // namespace weyl
