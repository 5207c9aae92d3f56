#pragma once

#include <gtest/gtest.h>

#include <cstdint>
#include <random>

#include "weyl/curvature_algebra.hpp"
#include "weyl/error.hpp"
#include "weyl/tensor.hpp"

namespace weyl::test {

inline Matrix random_orthogonal(int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix a(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) a(i, j) = n(rng);
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ();
  return q;
}

inline Matrix random_symmetric(int m, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix a(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) a(i, j) = u(rng);
  return scale * 0.5 * (a + a.transpose());
}

inline InnerProduct random_metric(int m, std::uint64_t seed) {
  const Matrix s = random_symmetric(m, seed);
  return InnerProduct(Matrix::Identity(m, m) + 0.5 * s * s.transpose());
}

inline double max_diff(const CurvatureTensor& a, const CurvatureTensor& b) { return (a - b).max_abs(); }

/// Runs `f` and reports the ErrorCode it threw, failing if nothing was thrown.
template <class F>
ErrorCode thrown_code(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected weyl::Error";
  return ErrorCode::NumericalFailure;
}

}  // namespace weyl::test
