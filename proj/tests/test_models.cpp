#include "test_support.hpp"

#include "weyl/models.hpp"
#include "weyl/spectral.hpp"

using namespace weyl;
using weyl::test::thrown_code;

TEST(Models, SphereOriginMetric) {
  EXPECT_LE(max_abs(sphere_chart(4, 1.0).metric_at(Vector::Zero(4)).matrix() - 4.0 * Matrix::Identity(4, 4)), 0.0);
}

TEST(Models, SphereRadiusScalesCurvature) {
  const MetricChart s = sphere_chart(3, 2.0);
  const Vector u = Vector::Constant(3, 0.4);
  const CurvatureTensor r = riemann_at(s, u);
  EXPECT_LE((r - 0.25 * r0(r.metric())).max_abs(), 1e-9);
}

TEST(Models, KahlerModelsAreIdentityAtOrigin) {
  for (int n : {2, 3}) {
    EXPECT_EQ(max_abs(fubini_study_chart(n).metric_at(Vector::Zero(2 * n)).matrix() - Matrix::Identity(2 * n, 2 * n)),
              0.0);
    EXPECT_EQ(max_abs(complex_hyperbolic_chart(n).metric_at(Vector::Zero(2 * n)).matrix() -
                      Matrix::Identity(2 * n, 2 * n)),
              0.0);
  }
}

TEST(Models, FubiniStudyReducedSpectrum) {
  const MetricChart fs = fubini_study_chart(3);
  Vector u(6);
  u << 0.3, -0.1, 0.2, 0.4, -0.3, 0.1;
  const CurvatureTensor r = to_orthonormal(riemann_at(fs, u)).tensor;
  for (const Vector& x : structured_directions(6)) {
    const Vector ev = symmetric_eigenvalues(reduced_jacobi(r, x));
    EXPECT_NEAR(ev[0], 1.0, 1e-9);
    EXPECT_NEAR(ev[3], 1.0, 1e-9);
    EXPECT_NEAR(ev[4], 4.0, 1e-9);
  }
}

TEST(Models, ComplexHyperbolicReducedSpectrum) {
  const MetricChart ch = complex_hyperbolic_chart(2);
  Vector u(4);
  u << 0.2, -0.3, 0.1, 0.25;
  const CurvatureTensor r = to_orthonormal(riemann_at(ch, u)).tensor;
  const Vector ev = symmetric_eigenvalues(reduced_jacobi(r, random_direction(4, 3, 0)));
  EXPECT_NEAR(ev[0], -4.0, 1e-9);
  EXPECT_NEAR(ev[1], -1.0, 1e-9);
  EXPECT_NEAR(ev[2], -1.0, 1e-9);
}

TEST(Models, PerturbedFlatWithZeroEpsilonIsFlat) {
  const MetricChart p = perturbed_flat_chart(4, 0.0, 42);
  Vector u = Vector::Constant(4, 0.1);
  EXPECT_EQ(max_abs(p.metric_at(u).matrix() - Matrix::Identity(4, 4)), 0.0);
  EXPECT_EQ(riemann_at(p, u).max_abs(), 0.0);
}

TEST(Models, PerturbedFlatIsDeterministic) {
  const Vector u = Vector::Constant(5, 0.2);
  const Matrix a = perturbed_flat_chart(5, 0.1, 42).metric_at(u).matrix();
  const Matrix b = perturbed_flat_chart(5, 0.1, 42).metric_at(u).matrix();
  EXPECT_EQ(max_abs(a - b), 0.0);
  EXPECT_GT(max_abs(a - perturbed_flat_chart(5, 0.1, 43).metric_at(u).matrix()), 0.0);
}

TEST(Models, PerturbedFlatRejectsLargeEpsilon) {
  EXPECT_EQ(thrown_code([] { perturbed_flat_chart(6, 50.0, 42); }), ErrorCode::InvalidArgument);
}

TEST(Models, StandardPhi) {
  Matrix expected(2, 2);
  expected << 0, -1, 1, 0;
  EXPECT_EQ(max_abs(standard_phi_matrix(2) - expected), 0.0);
  const Matrix p = standard_phi_matrix(8);
  EXPECT_EQ(max_abs(p * p + Matrix::Identity(8, 8)), 0.0);
  EXPECT_EQ(max_abs(p.transpose() * p - Matrix::Identity(8, 8)), 0.0);
  EXPECT_EQ(thrown_code([] { standard_phi_matrix(5); }), ErrorCode::InvalidArgument);
}

TEST(Models, PolynomialChartMatchesHandMetric) {
  PolynomialMetric pm;
  pm.dim = 2;
  pm.constant = Matrix::Identity(2, 2);
  Matrix l0 = Matrix::Zero(2, 2), l1 = Matrix::Zero(2, 2);
  l0(1, 1) = 0.5;
  l1(0, 1) = l1(1, 0) = 0.2;
  pm.linear = {l0, l1};
  const MetricChart c = polynomial_chart(pm);
  Vector u(2);
  u << 0.4, -0.3;
  Matrix expected = Matrix::Identity(2, 2) + 0.4 * l0 - 0.3 * l1;
  EXPECT_LE(max_abs(c.metric_at(u).matrix() - expected), 1e-15);
  EXPECT_TRUE(c.has_analytic());
}

TEST(Models, PolynomialChartValidation) {
  PolynomialMetric pm;
  pm.dim = 2;
  pm.constant = Matrix::Identity(2, 2);
  pm.linear = {Matrix::Identity(2, 2)};
  EXPECT_EQ(thrown_code([&] { polynomial_chart(pm); }), ErrorCode::DimensionMismatch);
  pm.linear.clear();
  pm.constant(0, 1) = 0.3;
  EXPECT_EQ(thrown_code([&] { polynomial_chart(pm); }), ErrorCode::InvalidArgument);
}

TEST(Models, OracleAtEveryTestPoint) {
  for (const DerivativeMode mode : {DerivativeMode::Analytic, DerivativeMode::FiniteDifference}) {
    const double tol = mode == DerivativeMode::Analytic ? 1e-9 : 1e-5;
    for (int n : {2, 3}) {
      const MetricChart fs = fubini_study_chart(n).with_mode(mode);
      const MetricChart ch = complex_hyperbolic_chart(n).with_mode(mode);
      const int m = 2 * n;
      for (const Vector& u : fs.domain().sample_points(m, 5, 3)) {
        const CurvatureTensor r = riemann_at(fs, u);
        const InnerProduct& g = r.metric();
        EXPECT_LE((r - r0(g) - a_phi(standard_phi_matrix(m), g)).max_abs(), tol);
      }
      for (const Vector& u : ch.domain().sample_points(m, 5, 3)) {
        const CurvatureTensor r = riemann_at(ch, u);
        const InnerProduct& g = r.metric();
        EXPECT_LE(to_orthonormal(r + r0(g) + a_phi(standard_phi_matrix(m), g)).tensor.max_abs(), tol);
      }
    }
  }
}
