#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "weyl/tensor.hpp"

namespace weyl {

/// c1(m) = −1/((m−1)(m−2)).
double weyl_c1(int m);
/// c2(m) = 1/(m−2).
double weyl_c2(int m);

/// The canonical constant-curvature tensor: R0_{ijkl} = g_jk g_il − g_ik g_jl.
CurvatureTensor r0(const InnerProduct& g);

struct RicciScalar {
  Matrix ricci;  // covariant ρ_ij in the input basis
  double tau = 0.0;
};

/// Ricci tensor ρ_ij = Σ_k A_ikkj and scalar curvature, contracted in an
/// orthonormal frame and mapped back to the input basis. When
/// `max_symmetry_residual` is finite, inputs violating the curvature
/// symmetries beyond it are rejected.
RicciScalar ricci_scalar(const CurvatureTensor& a, double max_symmetry_residual = 1e-6);

/// L(x,y,z,w) = g(ρy,z)g(x,w) − g(ρx,z)g(y,w) + g(y,z)ρ(x,w) − g(x,z)ρ(y,w),
/// where ρ is given as a covariant (lowered) symmetric matrix.
CurvatureTensor l_tensor(const Matrix& ricci, const InnerProduct& g);

struct CurvatureDecomposition {
  CurvatureTensor r;
  Matrix ricci;
  double tau = 0.0;
  CurvatureTensor l;
  CurvatureTensor w;
  double c1 = 0.0;
  double c2 = 0.0;

  /// ‖R − (W + c1 τ R0 + c2 L)‖∞.
  double reconstruction_residual() const;
};

/// W := R − c1·τ·R0 − c2·L. Requires m ≥ 3.
CurvatureDecomposition weyl_decompose(const CurvatureTensor& a);

/// A_Ψ(x,y,z,w) = g(Ψx,w)g(Ψy,z) − g(Ψx,z)g(Ψy,w).
CurvatureTensor a_psi(const SelfAdjointEndo& psi, const InnerProduct& g);
CurvatureTensor a_psi(const Matrix& psi, const InnerProduct& g);

/// A_Φ(x,y,z,w) = g(Φx,w)g(Φy,z) − g(Φx,z)g(Φy,w) − 2g(Φx,y)g(Φz,w)
/// for g-skew-adjoint Φ. Equals R_Φ when Φ is Hermitian.
CurvatureTensor a_phi(const Matrix& phi, const InnerProduct& g);
CurvatureTensor a_phi(const HermitianStructure& phi, const InnerProduct& g);

/// Σ cᵢ A_{Ψᵢ}.
CurvatureTensor act_from_generators(std::span<const double> coefficients, std::span<const Matrix> psis,
                                    const InnerProduct& g);

/// Seeded element of the span of the A_Ψ generators on (R^m, identity):
/// Ψ entries uniform in [−1,1] then symmetrized, coefficients uniform in
/// [−1,1]. k ≤ 0 selects k = m.
CurvatureTensor random_act(std::uint64_t seed, int m, int k = 0);

struct ComplexSpaceForm {
  CurvatureTensor tensor;
  bool degenerate_space_form = false;  // λ1 == 0
};

/// λ0·R0 + λ1·R_Φ.
ComplexSpaceForm complex_space_form_act(double lambda0, double lambda1, const HermitianStructure& phi,
                                        const InnerProduct& g);

}  // namespace weyl
