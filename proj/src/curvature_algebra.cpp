#include "weyl/curvature_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "weyl/error.hpp"

namespace weyl {

namespace {

void require_dim(const Matrix& m, const InnerProduct& g, const char* what) {
  if (m.rows() != g.dim() || m.cols() != g.dim()) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + " does not match inner product dimension");
  }
}

// Lowered form S_ab = g(M e_a, e_b).
Matrix lowered(const Matrix& endo, const InnerProduct& g) { return endo.transpose() * g.matrix(); }

}  // namespace

double weyl_c1(int m) {
  if (m < 3) throw Error(ErrorCode::InvalidArgument, "c1(m) is undefined for m < 3");
  return -1.0 / (static_cast<double>(m - 1) * (m - 2));
}

double weyl_c2(int m) {
  if (m < 3) throw Error(ErrorCode::InvalidArgument, "c2(m) is undefined for m < 3");
  return 1.0 / static_cast<double>(m - 2);
}

CurvatureTensor r0(const InnerProduct& g) {
  const int m = g.dim();
  const Matrix& gm = g.matrix();
  Tensor4 t(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) t(i, j, k, l) = gm(j, k) * gm(i, l) - gm(i, k) * gm(j, l);
  return {std::move(t), g};
}

RicciScalar ricci_scalar(const CurvatureTensor& a, double max_symmetry_residual) {
  if (std::isfinite(max_symmetry_residual)) {
    const double res = symmetry_residual(a);
    if (res > max_symmetry_residual * std::max(1.0, a.max_abs())) {
      throw Error(ErrorCode::InvalidArgument,
                  "tensor violates curvature symmetries (residual " + std::to_string(res) + ")");
    }
  }
  const int m = a.dim();
  const FramedTensor framed = to_orthonormal(a);
  const Tensor4& t = framed.tensor.components();
  Matrix rho_frame = Matrix::Zero(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      double s = 0.0;
      for (int k = 0; k < m; ++k) s += t(i, k, k, j);
      rho_frame(i, j) = s;
    }
  rho_frame = 0.5 * (rho_frame + rho_frame.transpose());
  // Covariant components transform with B⁻¹ = Lᵀ = Bᵀ g.
  const Matrix binv = framed.frame.transpose() * a.metric().matrix();
  Matrix rho = binv.transpose() * rho_frame * binv;
  rho = 0.5 * (rho + rho.transpose());
  return {std::move(rho), rho_frame.trace()};
}

CurvatureTensor l_tensor(const Matrix& ricci, const InnerProduct& g) {
  require_dim(ricci, g, "Ricci tensor");
  const int m = g.dim();
  const Matrix& gm = g.matrix();
  Tensor4 t(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) {
          t(i, j, k, l) = ricci(j, k) * gm(i, l) - ricci(i, k) * gm(j, l) + gm(j, k) * ricci(i, l) -
                          gm(i, k) * ricci(j, l);
        }
  return {std::move(t), g};
}

double CurvatureDecomposition::reconstruction_residual() const {
  CurvatureTensor rebuilt = w + (c1 * tau) * r0(r.metric()) + c2 * l;
  return (r - rebuilt).max_abs();
}

CurvatureDecomposition weyl_decompose(const CurvatureTensor& a) {
  const int m = a.dim();
  if (m < 3) throw Error(ErrorCode::InvalidArgument, "Weyl decomposition requires m >= 3");
  RicciScalar rs = ricci_scalar(a, std::numeric_limits<double>::infinity());
  const double c1 = weyl_c1(m);
  const double c2 = weyl_c2(m);
  CurvatureTensor l = l_tensor(rs.ricci, a.metric());
  CurvatureTensor w = a - (c1 * rs.tau) * r0(a.metric()) - c2 * l;
  return {a, std::move(rs.ricci), rs.tau, std::move(l), std::move(w), c1, c2};
}

CurvatureTensor a_psi(const Matrix& psi, const InnerProduct& g) {
  return a_psi(SelfAdjointEndo(psi, g), g);
}

CurvatureTensor a_psi(const SelfAdjointEndo& psi, const InnerProduct& g) {
  require_dim(psi.matrix(), g, "endomorphism");
  const int m = g.dim();
  Matrix s = lowered(psi.matrix(), g);
  s = 0.5 * (s + s.transpose());
  Tensor4 t(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) t(i, j, k, l) = s(i, l) * s(j, k) - s(i, k) * s(j, l);
  return {std::move(t), g};
}

CurvatureTensor a_phi(const Matrix& phi, const InnerProduct& g) {
  require_dim(phi, g, "endomorphism");
  const int m = g.dim();
  Matrix w = lowered(phi, g);
  if (max_abs(w + w.transpose()) > 1e-10 * std::max(1.0, max_abs(w))) {
    throw Error(ErrorCode::InvalidArgument, "endomorphism is not skew-adjoint");
  }
  w = 0.5 * (w - w.transpose());
  Tensor4 t(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l)
          t(i, j, k, l) = w(i, l) * w(j, k) - w(i, k) * w(j, l) - 2.0 * w(i, j) * w(k, l);
  return {std::move(t), g};
}

CurvatureTensor a_phi(const HermitianStructure& phi, const InnerProduct& g) { return a_phi(phi.matrix(), g); }

CurvatureTensor act_from_generators(std::span<const double> coefficients, std::span<const Matrix> psis,
                                    const InnerProduct& g) {
  if (coefficients.size() != psis.size()) {
    throw Error(ErrorCode::DimensionMismatch, "one coefficient per generator is required");
  }
  CurvatureTensor out = CurvatureTensor::zero(g);
  for (std::size_t i = 0; i < psis.size(); ++i) out += coefficients[i] * a_psi(psis[i], g);
  return out;
}

CurvatureTensor random_act(std::uint64_t seed, int m, int k) {
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
  if (k <= 0) k = m;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<double> coefficients;
  std::vector<Matrix> psis;
  for (int n = 0; n < k; ++n) {
    Matrix x(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) x(i, j) = unit(rng);
    psis.emplace_back(0.5 * (x + x.transpose()));
    coefficients.push_back(unit(rng));
  }
  return act_from_generators(coefficients, psis, InnerProduct::identity(m));
}

ComplexSpaceForm complex_space_form_act(double lambda0, double lambda1, const HermitianStructure& phi,
                                        const InnerProduct& g) {
  if (g.dim() % 2 != 0) throw Error(ErrorCode::InvalidArgument, "complex space forms need even dimension");
  CurvatureTensor t = lambda0 * r0(g) + lambda1 * a_phi(phi, g);
  return {std::move(t), lambda1 == 0.0};
}

}  // namespace weyl
