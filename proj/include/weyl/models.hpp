#pragma once

#include <cstdint>
#include <string>

#include "weyl/chart.hpp"
#include "weyl/tensor.hpp"

namespace weyl {

/// Block-diagonal complex structure with 2×2 blocks [[0,−1],[1,0]].
Matrix standard_phi_matrix(int m);
HermitianStructure standard_phi(int m);

/// Stereographic chart of the radius-r sphere: g = 4r⁴/(r²+|u|²)² δ.
MetricChart sphere_chart(int m, double r = 1.0);
/// Poincaré ball: g = 4/(1−|u|²)² δ on |u| < 1.
MetricChart hyperbolic_chart(int m);
MetricChart flat_chart(int m);

/// Fubini–Study metric on CPⁿ in inhomogeneous coordinates z_j = u_{2j−1} + i u_{2j},
/// normalized to holomorphic sectional curvature 4 and g(0) = I.
MetricChart fubini_study_chart(int n);
/// Negative-curvature dual on the unit ball, holomorphic sectional curvature −4.
MetricChart complex_hyperbolic_chart(int n);

/// g = δ + ε S(u) with S a seeded symmetric quadratic polynomial on [−½, ½]^m.
MetricChart perturbed_flat_chart(int m, double epsilon, std::uint64_t seed);

/// g(u) = G0 + Σ_a u_a G1_a + Σ_{a,b} u_a u_b G2_{ab} (all symmetric).
struct PolynomialMetric {
  int dim = 0;
  Matrix constant;
  std::vector<Matrix> linear;     // m entries, or empty
  std::vector<Matrix> quadratic;  // m*m entries, index a*m+b, or empty
  double extent = 1.0;
  double margin = 0.1;
};
MetricChart polynomial_chart(const PolynomialMetric& spec);

/// The complex structure of the FS / complex-hyperbolic coordinates: multiplication
/// by i, which is the constant matrix standard_phi in these charts.
EndoField coordinate_complex_structure(int m);

}  // namespace weyl
