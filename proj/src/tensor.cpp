#include "weyl/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "weyl/error.hpp"

namespace weyl {

namespace {

double symmetric_scale(const Matrix& g) { return std::max(1.0, max_abs(g)); }

}  // namespace

InnerProduct::InnerProduct(Matrix g) : g_(std::move(g)) {
  if (g_.rows() != g_.cols() || g_.rows() < 1) {
    throw Error(ErrorCode::DimensionMismatch, "inner product must be a non-empty square matrix");
  }
  if (!g_.allFinite()) {
    throw Error(ErrorCode::NumericalFailure, "inner product has non-finite entries");
  }
  if (max_abs(g_ - g_.transpose()) > 1e-10 * symmetric_scale(g_)) {
    throw Error(ErrorCode::InvalidArgument, "inner product is not symmetric");
  }
  g_ = 0.5 * (g_ + g_.transpose());
  Eigen::LLT<Matrix> llt(g_);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "inner product is not positive definite");
  }
  inv_ = llt.solve(Matrix::Identity(g_.rows(), g_.cols()));
  inv_ = 0.5 * (inv_ + inv_.transpose());
}

InnerProduct InnerProduct::identity(int m) { return InnerProduct(Matrix::Identity(m, m)); }

bool InnerProduct::is_identity(double tol) const {
  return max_abs(g_ - Matrix::Identity(dim(), dim())) <= tol;
}

SelfAdjointEndo::SelfAdjointEndo(Matrix psi, const InnerProduct& g, double tol) : psi_(std::move(psi)) {
  if (psi_.rows() != g.dim() || psi_.cols() != g.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "endomorphism and inner product disagree in dimension");
  }
  const Matrix gp = g.matrix() * psi_;
  if (max_abs(gp - gp.transpose()) > tol * std::max(1.0, max_abs(gp))) {
    throw Error(ErrorCode::InvalidArgument, "endomorphism is not self-adjoint");
  }
}

HermitianStructure::Residuals HermitianStructure::residuals(const Matrix& phi, const InnerProduct& g) {
  const int m = g.dim();
  const Matrix& gm = g.matrix();
  return {
      max_abs(phi * phi + Matrix::Identity(m, m)),
      max_abs(gm * phi + phi.transpose() * gm),
      max_abs(phi.transpose() * gm * phi - gm),
  };
}

HermitianStructure::HermitianStructure(Matrix phi, const InnerProduct& g, double tol) : phi_(std::move(phi)) {
  if (phi_.rows() != g.dim() || phi_.cols() != g.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "structure and inner product disagree in dimension");
  }
  if (g.dim() % 2 != 0) {
    throw Error(ErrorCode::InvalidArgument, "no almost complex structure exists in odd dimension");
  }
  const Residuals r = residuals(phi_, g);
  if (r.square > tol || r.skew > tol || r.orthogonal > tol) {
    throw Error(ErrorCode::InvalidArgument,
                "not a Hermitian structure (|Phi^2+I|=" + std::to_string(r.square) +
                    ", skew=" + std::to_string(r.skew) + ", orth=" + std::to_string(r.orthogonal) + ")");
  }
}

double Tensor4::max_abs() const {
  double out = 0.0;
  for (double v : data_) out = std::max(out, std::abs(v));
  return out;
}

Tensor4& Tensor4::operator+=(const Tensor4& o) {
  if (o.m_ != m_) throw Error(ErrorCode::DimensionMismatch, "tensor dimensions differ");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

Tensor4& Tensor4::operator-=(const Tensor4& o) {
  if (o.m_ != m_) throw Error(ErrorCode::DimensionMismatch, "tensor dimensions differ");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

Tensor4& Tensor4::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

double Tensor5::max_abs() const {
  double out = 0.0;
  for (double v : data_) out = std::max(out, std::abs(v));
  return out;
}

CurvatureTensor::CurvatureTensor(Tensor4 components, InnerProduct g) : a_(std::move(components)), g_(std::move(g)) {
  if (a_.dim() != g_.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "tensor has dimension " + std::to_string(a_.dim()) +
                                                  " but inner product has dimension " + std::to_string(g_.dim()));
  }
}

double CurvatureTensor::evaluate(const Vector& x, const Vector& y, const Vector& z, const Vector& w) const {
  const int m = dim();
  double out = 0.0;
  for (int i = 0; i < m; ++i) {
    if (x[i] == 0.0) continue;
    for (int j = 0; j < m; ++j) {
      if (y[j] == 0.0) continue;
      for (int k = 0; k < m; ++k) {
        if (z[k] == 0.0) continue;
        const double c = x[i] * y[j] * z[k];
        for (int l = 0; l < m; ++l) out += c * a_(i, j, k, l) * w[l];
      }
    }
  }
  return out;
}

CurvatureTensor& CurvatureTensor::operator+=(const CurvatureTensor& o) {
  a_ += o.a_;
  return *this;
}

CurvatureTensor& CurvatureTensor::operator-=(const CurvatureTensor& o) {
  a_ -= o.a_;
  return *this;
}

CurvatureTensor& CurvatureTensor::operator*=(double s) {
  a_ *= s;
  return *this;
}

double symmetry_residual(const CurvatureTensor& a) {
  const int m = a.dim();
  const Tensor4& t = a.components();
  double worst = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) {
          const double v = t(i, j, k, l);
          worst = std::max(worst, std::abs(v + t(j, i, k, l)));
          worst = std::max(worst, std::abs(v - t(k, l, i, j)));
          worst = std::max(worst, std::abs(v + t(j, k, i, l) + t(k, i, j, l)));
        }
  return worst;
}

Matrix orthonormal_frame(const InnerProduct& g) {
  Eigen::LLT<Matrix> llt(g.matrix());
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "cannot build an orthonormal frame");
  }
  const int m = g.dim();
  // L⁻ᵀ: solve Lᵀ B = I.
  Matrix b = llt.matrixU().solve(Matrix::Identity(m, m));
  return b;
}

Tensor4 transform_components(const Tensor4& a, const Matrix& b) {
  const int m = a.dim();
  if (b.rows() != m || b.cols() != m) {
    throw Error(ErrorCode::DimensionMismatch, "basis transform does not match tensor dimension");
  }
  // Contract one slot at a time: four passes of O(m^5).
  Tensor4 cur = a;
  Tensor4 next(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) {
          double s = 0.0;
          for (int p = 0; p < m; ++p) s += cur(i, j, k, p) * b(p, l);
          next(i, j, k, l) = s;
        }
  std::swap(cur, next);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) {
          double s = 0.0;
          for (int p = 0; p < m; ++p) s += cur(i, j, p, l) * b(p, k);
          next(i, j, k, l) = s;
        }
  std::swap(cur, next);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) {
          double s = 0.0;
          for (int p = 0; p < m; ++p) s += cur(i, p, k, l) * b(p, j);
          next(i, j, k, l) = s;
        }
  std::swap(cur, next);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) {
          double s = 0.0;
          for (int p = 0; p < m; ++p) s += cur(p, j, k, l) * b(p, i);
          next(i, j, k, l) = s;
        }
  return next;
}

CurvatureTensor transform_tensor(const CurvatureTensor& a, const Matrix& b) {
  Matrix pulled = b.transpose() * a.metric().matrix() * b;
  pulled = 0.5 * (pulled + pulled.transpose());
  return {transform_components(a.components(), b), InnerProduct(std::move(pulled))};
}

FramedTensor to_orthonormal(const CurvatureTensor& a) {
  Matrix b = orthonormal_frame(a.metric());
  return {CurvatureTensor(transform_components(a.components(), b), InnerProduct::identity(a.dim())), std::move(b)};
}

Tensor4 raise_last(const CurvatureTensor& a) {
  const int m = a.dim();
  const Matrix& ginv = a.metric().inverse();
  Tensor4 out(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) {
          double s = 0.0;
          for (int p = 0; p < m; ++p) s += a(i, j, k, p) * ginv(p, l);
          out(i, j, k, l) = s;
        }
  return out;
}

}  // namespace weyl
