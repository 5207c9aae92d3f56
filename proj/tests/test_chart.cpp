#include "test_support.hpp"

#include <cmath>

#include "weyl/chart.hpp"
#include "weyl/models.hpp"

using namespace weyl;
using weyl::test::thrown_code;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

MetricChart fd(const MetricChart& c) { return c.with_mode(DerivativeMode::FiniteDifference); }

// Both derivative tiers, each with its own tolerance.
struct Tier {
  DerivativeMode mode;
  double riemann_tol;
  double bianchi_tol;
};
const Tier kTiers[] = {{DerivativeMode::Analytic, 1e-9, 1e-7}, {DerivativeMode::FiniteDifference, 1e-5, 1e-4}};

}  // namespace

TEST(ChartDomainTest, DistanceAndSamples) {
  ChartDomain box{ChartDomain::Shape::Box, 1.0, 0.1};
  EXPECT_NEAR(box.distance_to_boundary(vec({0.5, -0.8})), 0.2, 1e-15);
  ChartDomain ball{ChartDomain::Shape::Ball, 1.0, 0.1};
  EXPECT_NEAR(ball.distance_to_boundary(vec({0.6, 0.0})), 0.4, 1e-15);
  for (const Vector& p : ball.sample_points(3, 7, 10)) EXPECT_GE(ball.distance_to_boundary(p), 0.1);
  EXPECT_EQ(ball.sample_points(3, 7, 10).size(), ball.sample_points(3, 7, 10).size());
}

TEST(MetricChartTest, MetricAtRejectsPointsNearBoundary) {
  const MetricChart h = hyperbolic_chart(3);
  EXPECT_EQ(thrown_code([&] { h.metric_at(vec({0.95, 0, 0})); }), ErrorCode::DomainViolation);
  EXPECT_EQ(thrown_code([&] { h.metric_at(vec({0.1, 0})); }), ErrorCode::DimensionMismatch);
}

TEST(MetricChartTest, StencilReachIsEnforced) {
  const ChartDomain thin{ChartDomain::Shape::Ball, 1.0, 1e-3};
  const MetricChart c = MetricChart::from_function("thin", 2, thin, [](const Vector&) { return Matrix::Identity(2, 2); });
  const Vector u = vec({0.998, 0.0});
  EXPECT_NO_THROW(c.metric_at(u));
  EXPECT_NO_THROW(christoffel(c, u));
  EXPECT_GT(c.reach_riemann(), 2e-3);
  EXPECT_EQ(thrown_code([&] { riemann_at(c, u); }), ErrorCode::DomainViolation);
}

TEST(MetricChartTest, FromFunctionIsFiniteDifferenceOnly) {
  const MetricChart c = MetricChart::from_function("plain", 2, {}, [](const Vector&) { return Matrix::Identity(2, 2); });
  EXPECT_FALSE(c.has_analytic());
  EXPECT_EQ(c.mode(), DerivativeMode::FiniteDifference);
  EXPECT_EQ(thrown_code([&] { c.jet(vec({0, 0}), 1); }), ErrorCode::InvalidArgument);
}

TEST(MetricChartTest, NonPositiveDefiniteMetricRejected) {
  const MetricChart c = MetricChart::from_function("bad", 2, {}, [](const Vector& u) {
    Matrix g = Matrix::Identity(2, 2);
    g(1, 1) = u[0];
    return g;
  });
  EXPECT_EQ(thrown_code([&] { c.metric_at(vec({-0.5, 0})); }), ErrorCode::NotPositiveDefinite);
}

TEST(ChristoffelTest, FlatChartVanishes) {
  for (const Tier& t : kTiers) {
    const MetricChart c = flat_chart(3).with_mode(t.mode);
    EXPECT_EQ(christoffel(c, vec({0.2, -0.1, 0.4})).max_abs(), 0.0);
  }
}

TEST(ChristoffelTest, PoincareCentreVanishes) {
  for (const Tier& t : kTiers) {
    EXPECT_LE(christoffel(hyperbolic_chart(2).with_mode(t.mode), vec({0, 0})).max_abs(), 1e-10);
  }
}

TEST(ChristoffelTest, ExponentialRescaleOfFlatPlane) {
  Vector c = Vector::Zero(2);
  c[0] = 1.0;
  const MetricChart base = flat_chart(2);
  const ConformalFactor alpha = ConformalFactor::exp_linear(c);
  for (const Tier& t : kTiers) {
    const MetricChart rescaled = conformal_rescale(base.with_mode(t.mode), alpha);
    EXPECT_EQ(rescaled.mode(), t.mode);
    const Christoffel g = christoffel(rescaled, vec({0.3, -0.2}));
    const double tol = t.mode == DerivativeMode::Analytic ? 1e-14 : 1e-8;
    EXPECT_NEAR(g(0, 0, 0), 0.5, tol);
    EXPECT_NEAR(g(1, 0, 1), 0.5, tol);
    EXPECT_NEAR(g(0, 1, 1), -0.5, tol);
    EXPECT_NEAR(g(1, 1, 1), 0.0, tol);
    EXPECT_LE(g.symmetry_defect(), tol);
  }
}

TEST(RiemannAt, SignCalibrationOnUnitSphere) {
  for (const Tier& t : kTiers) {
    const MetricChart s = sphere_chart(3).with_mode(t.mode);
    for (const Vector& u : {vec({0, 0, 0}), vec({0.4, -0.7, 1.1})}) {
      const CurvatureTensor r = riemann_at(s, u);
      EXPECT_LE((r - r0(r.metric())).max_abs(), t.riemann_tol);
      EXPECT_GT(r(0, 1, 1, 0), 0.0);
    }
  }
}

TEST(RiemannAt, PoincareBallIsMinusR0) {
  for (const Tier& t : kTiers) {
    const MetricChart h = hyperbolic_chart(4).with_mode(t.mode);
    const Vector u = vec({0.2, -0.3, 0.1, 0.35});
    const CurvatureTensor r = riemann_at(h, u);
    EXPECT_LE(to_orthonormal(r + r0(r.metric())).tensor.max_abs(), t.riemann_tol);
  }
}

TEST(RiemannAt, FubiniStudyOrigin) {
  for (const Tier& t : kTiers) {
    const MetricChart fs = fubini_study_chart(2).with_mode(t.mode);
    const CurvatureTensor r = riemann_at(fs, Vector::Zero(4));
    const auto oracle = complex_space_form_act(1.0, 1.0, standard_phi(4), InnerProduct::identity(4));
    EXPECT_LE((r - oracle.tensor).max_abs(), t.riemann_tol);
  }
}

TEST(RiemannAt, SymmetriesHoldOnEveryModel) {
  const std::vector<MetricChart> charts = {sphere_chart(4), hyperbolic_chart(3), fubini_study_chart(2),
                                           complex_hyperbolic_chart(2), perturbed_flat_chart(5, 0.1, 3)};
  for (const MetricChart& c : charts) {
    for (const Tier& t : kTiers) {
      const MetricChart ct = c.with_mode(t.mode);
      for (const Vector& u : ct.domain().sample_points(ct.dim(), 1, 2)) {
        const CurvatureTensor r = riemann_at(ct, u);
        const double scale = std::max(1.0, r.max_abs());
        EXPECT_LE(symmetry_residual(r) / scale, t.mode == DerivativeMode::Analytic ? 1e-10 : 1e-6) << c.name();
        EXPECT_LE(christoffel(ct, u).symmetry_defect(), 1e-10) << c.name();
      }
    }
  }
}

TEST(CovariantDerivative, FlatChartIsZero) {
  for (const Tier& t : kTiers) {
    const auto nr = covariant_derivative_riemann(flat_chart(3).with_mode(t.mode), vec({0.1, 0.2, 0.3}));
    EXPECT_EQ(nr.components.max_abs(), 0.0);
    EXPECT_EQ(second_bianchi_residual(nr.components), 0.0);
  }
}

TEST(CovariantDerivative, LocallySymmetricModels) {
  const Vector u = vec({0.2, -0.1, 0.15, 0.3});
  for (const Tier& t : kTiers) {
    EXPECT_LE(covariant_derivative_riemann(sphere_chart(4).with_mode(t.mode), u).components.max_abs(), 1e-4);
    EXPECT_LE(covariant_derivative_riemann(fubini_study_chart(2).with_mode(t.mode), u).components.max_abs(), 1e-4);
  }
}

TEST(SecondBianchi, PerturbedFlatHoldsForAnyMetric) {
  const MetricChart p = perturbed_flat_chart(4, 0.1, 42);
  const Vector u = vec({0.1, -0.05, 0.2, 0.0});
  for (const Tier& t : kTiers) EXPECT_LE(second_bianchi_residual(p.with_mode(t.mode), u), t.bianchi_tol);
}

TEST(SecondBianchi, DetectsCorruption) {
  auto nr = covariant_derivative_riemann(sphere_chart(3), vec({0.1, 0.2, 0.3}));
  nr.components(0, 1, 0, 1, 2) += 0.1;
  EXPECT_GE(second_bianchi_residual(nr.components), 0.09);
}

TEST(CovariantDerivativeEndo, ConstantFieldOnFlatChart) {
  const auto d = covariant_derivative_endo(fd(flat_chart(4)), coordinate_complex_structure(4), vec({0.1, 0, 0, 0}));
  ASSERT_EQ(d.size(), 4u);
  for (const Matrix& m : d) EXPECT_EQ(max_abs(m), 0.0);
}

TEST(CovariantDerivativeEndo, FubiniStudyIsKahler) {
  const MetricChart fs = fubini_study_chart(3);
  const Vector u = vec({0.3, -0.2, 0.1, 0.4, -0.5, 0.2});
  for (const Tier& t : kTiers) {
    const auto d = covariant_derivative_endo(fs.with_mode(t.mode), coordinate_complex_structure(6), u);
    double worst = 0.0;
    for (const Matrix& m : d) worst = std::max(worst, max_abs(m));
    EXPECT_LE(worst, 1e-3);
    EXPECT_LE(anticommutator_residual(d, standard_phi_matrix(6)), 1e-3);
  }
}

TEST(CovariantDerivativeEndo, AnticommutatorForNonParallelStructure) {
  // A rotating complex structure on a non-Kähler chart still squares to −I.
  const MetricChart s = sphere_chart(4);
  const EndoField rotating = [](const Vector& u) {
    const double a = u[0];
    Matrix r = Matrix::Identity(4, 4);
    r(0, 0) = std::cos(a);
    r(0, 2) = -std::sin(a);
    r(2, 0) = std::sin(a);
    r(2, 2) = std::cos(a);
    return Matrix(r * standard_phi_matrix(4) * r.transpose());
  };
  const Vector u = vec({0.3, 0.1, -0.2, 0.0});
  const auto d = covariant_derivative_endo(s, rotating, u);
  double worst = 0.0;
  for (const Matrix& m : d) worst = std::max(worst, max_abs(m));
  EXPECT_GT(worst, 1e-2);
  EXPECT_LE(anticommutator_residual(d, rotating(u)), 1e-6);
}

TEST(ConformalRescale, UnitFactorLeavesChartUnchanged) {
  const MetricChart s = sphere_chart(3);
  const MetricChart same = conformal_rescale(s, ConformalFactor::constant(1.0));
  const Vector u = vec({0.2, 0.5, -0.3});
  EXPECT_EQ(max_abs(s.metric_at(u).matrix() - same.metric_at(u).matrix()), 0.0);
  EXPECT_LE((riemann_at(s, u) - riemann_at(same, u)).max_abs(), 1e-14);
}

TEST(ConformalRescale, ConstantFactorOnFlatStaysFlat) {
  const MetricChart c = conformal_rescale(flat_chart(3), ConformalFactor::constant(2.5));
  EXPECT_EQ(riemann_at(c, vec({0.1, 0.2, 0.3})).max_abs(), 0.0);
}

TEST(ConformalRescale, RejectsNonPositiveFactor) {
  const ConformalFactor neg = ConformalFactor::from_function("u0", [](const Vector& u) { return u[0]; });
  EXPECT_EQ(thrown_code([&] { conformal_rescale(flat_chart(2), neg); }), ErrorCode::InvalidArgument);
}

TEST(ConformalRescale, FunctionFactorDropsToFiniteDifferences) {
  const ConformalFactor f = ConformalFactor::from_function("1+u0^2", [](const Vector& u) { return 1.0 + u[0] * u[0]; });
  EXPECT_EQ(conformal_rescale(sphere_chart(3), f).mode(), DerivativeMode::FiniteDifference);
}

TEST(ConformalRescale, WeylOperatorInvariantOnSphere) {
  Vector c = Vector::Zero(4);
  c[0] = 0.3;
  const Vector u = vec({0.3, -0.4, 0.2, 0.1});
  EXPECT_LE(conformal_invariance_residual(fd(sphere_chart(4)), ConformalFactor::exp_linear(c), u), 1e-5);
  EXPECT_LE(conformal_invariance_residual(sphere_chart(4), ConformalFactor::exp_linear(c), u), 1e-9);
}

TEST(ConformalRescale, WeylOperatorInvariantOnPerturbedFlat) {
  // Non-trivial Weyl tensor, so the check is not comparing zeros.
  const MetricChart p = perturbed_flat_chart(5, 0.1, 7);
  const Vector u = vec({0.1, -0.1, 0.05, 0.2, 0.0});
  EXPECT_GT(to_orthonormal(weyl_decompose(riemann_at(p, u)).w).tensor.max_abs(), 1e-3);
  Vector c = Vector::Zero(5);
  c[0] = 0.3;
  c[2] = -0.2;
  EXPECT_LE(conformal_invariance_residual(p, ConformalFactor::exp_linear(c), u), 1e-9);
  EXPECT_LE(conformal_invariance_residual(fd(p), ConformalFactor::exp_linear(c), u), 1e-5);
}
