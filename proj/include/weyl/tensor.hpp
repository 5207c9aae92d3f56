#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace weyl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using TangentVector = Eigen::VectorXd;

/// Positive definite symmetric bilinear form on R^m.
class InnerProduct {
 public:
  /// Validates symmetry and positive definiteness; throws Error otherwise.
  explicit InnerProduct(Matrix g);

  static InnerProduct identity(int m);

  int dim() const noexcept { return static_cast<int>(g_.rows()); }
  const Matrix& matrix() const noexcept { return g_; }
  const Matrix& inverse() const noexcept { return inv_; }
  double operator()(const Vector& x, const Vector& y) const { return x.dot(g_ * y); }
  bool is_identity(double tol = 1e-12) const;

 private:
  Matrix g_;
  Matrix inv_;
};

/// Endomorphism Ψ with g·Ψ = Ψᵀ·g.
class SelfAdjointEndo {
 public:
  SelfAdjointEndo(Matrix psi, const InnerProduct& g, double tol = 1e-10);
  const Matrix& matrix() const noexcept { return psi_; }

 private:
  Matrix psi_;
};

/// Almost complex structure compatible with g: Φ² = −I, g·Φ = −Φᵀ·g.
class HermitianStructure {
 public:
  HermitianStructure(Matrix phi, const InnerProduct& g, double tol = 1e-10);
  const Matrix& matrix() const noexcept { return phi_; }

  struct Residuals {
    double square;      // ‖Φ² + I‖∞
    double skew;        // ‖gΦ + Φᵀg‖∞
    double orthogonal;  // ‖Φᵀ g Φ − g‖∞
  };
  static Residuals residuals(const Matrix& phi, const InnerProduct& g);

 private:
  Matrix phi_;
};

/// Dense rank-4 array, row-major in (i, j, k, l).
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(int m) : m_(m), data_(static_cast<std::size_t>(m) * m * m * m, 0.0) {}

  int dim() const noexcept { return m_; }
  double& operator()(int i, int j, int k, int l) { return data_[index(i, j, k, l)]; }
  double operator()(int i, int j, int k, int l) const { return data_[index(i, j, k, l)]; }
  const std::vector<double>& data() const noexcept { return data_; }
  std::vector<double>& data() noexcept { return data_; }

  double max_abs() const;

  Tensor4& operator+=(const Tensor4& o);
  Tensor4& operator-=(const Tensor4& o);
  Tensor4& operator*=(double s);
  friend Tensor4 operator+(Tensor4 a, const Tensor4& b) { return a += b; }
  friend Tensor4 operator-(Tensor4 a, const Tensor4& b) { return a -= b; }
  friend Tensor4 operator*(double s, Tensor4 a) { return a *= s; }

 private:
  std::size_t index(int i, int j, int k, int l) const noexcept {
    return ((static_cast<std::size_t>(i) * m_ + j) * m_ + k) * m_ + l;
  }

  int m_ = 0;
  std::vector<double> data_;
};

/// Fully covariant tensor A(x,y,z,w) together with the inner product at the
/// evaluation point. Components are in the same basis as the inner product.
class CurvatureTensor {
 public:
  CurvatureTensor(Tensor4 components, InnerProduct g);
  static CurvatureTensor zero(const InnerProduct& g) { return {Tensor4(g.dim()), g}; }

  int dim() const noexcept { return a_.dim(); }
  const Tensor4& components() const noexcept { return a_; }
  const InnerProduct& metric() const noexcept { return g_; }
  double operator()(int i, int j, int k, int l) const { return a_(i, j, k, l); }

  /// A(x, y, z, w) for arbitrary vectors.
  double evaluate(const Vector& x, const Vector& y, const Vector& z, const Vector& w) const;

  /// Max absolute component; meaningful as a norm only in an orthonormal frame.
  double max_abs() const { return a_.max_abs(); }

  CurvatureTensor& operator+=(const CurvatureTensor& o);
  CurvatureTensor& operator-=(const CurvatureTensor& o);
  CurvatureTensor& operator*=(double s);
  friend CurvatureTensor operator+(CurvatureTensor a, const CurvatureTensor& b) { return a += b; }
  friend CurvatureTensor operator-(CurvatureTensor a, const CurvatureTensor& b) { return a -= b; }
  friend CurvatureTensor operator*(double s, CurvatureTensor a) { return a *= s; }

 private:
  Tensor4 a_;
  InnerProduct g_;
};

/// Worst violation of antisymmetry, pair symmetry and the first Bianchi
/// identity, as a max-norm over components.
double symmetry_residual(const CurvatureTensor& a);

/// B with Bᵀ g B = I, via Cholesky g = L Lᵀ and B = L⁻ᵀ.
Matrix orthonormal_frame(const InnerProduct& g);

/// A'(x,y,z,w) = A(Bx,By,Bz,Bw); the inner product becomes Bᵀ g B.
CurvatureTensor transform_tensor(const CurvatureTensor& a, const Matrix& b);

/// Tensor components contracted with the same matrix in every slot.
Tensor4 transform_components(const Tensor4& a, const Matrix& b);

/// Expresses A in the orthonormal frame of its own inner product.
struct FramedTensor {
  CurvatureTensor tensor;  // metric is the identity
  Matrix frame;            // B, columns are the frame vectors in original coordinates
};
FramedTensor to_orthonormal(const CurvatureTensor& a);

/// Index-raised form A_{ijk}^l = Σ_p A_{ijkp} g^{pl} (last slot raised).
Tensor4 raise_last(const CurvatureTensor& a);

/// Dense rank-5 array used for ∇R, with the derivative index last.
class Tensor5 {
 public:
  Tensor5() = default;
  explicit Tensor5(int m) : m_(m), data_(static_cast<std::size_t>(m) * m * m * m * m, 0.0) {}

  int dim() const noexcept { return m_; }
  double& operator()(int i, int j, int k, int l, int n) { return data_[index(i, j, k, l, n)]; }
  double operator()(int i, int j, int k, int l, int n) const { return data_[index(i, j, k, l, n)]; }
  double max_abs() const;

 private:
  std::size_t index(int i, int j, int k, int l, int n) const noexcept {
    return (((static_cast<std::size_t>(i) * m_ + j) * m_ + k) * m_ + l) * m_ + n;
  }

  int m_ = 0;
  std::vector<double> data_;
};

/// ‖M‖∞ as the maximum absolute entry.
inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace weyl
