#include "weyl/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <thread>

#include "weyl/error.hpp"

namespace weyl {

namespace {

void require_orthonormal(const CurvatureTensor& a) {
  if (!a.metric().is_identity(1e-10)) {
    throw Error(ErrorCode::InvalidArgument, "spectral operations require an orthonormal frame");
  }
}

template <class F>
void parallel_for(int count, int threads, F&& body) {
  threads = std::clamp(threads, 1, std::max(1, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (int i = t; i < count; i += threads) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

int SpectralProfile::total_multiplicity() const {
  int n = 0;
  for (const auto& c : clusters) n += c.multiplicity;
  return n;
}

Matrix jacobi_operator(const CurvatureTensor& a, const Vector& x) {
  require_orthonormal(a);
  const int m = a.dim();
  if (x.size() != m) throw Error(ErrorCode::DimensionMismatch, "direction has the wrong dimension");
  Matrix j = Matrix::Zero(m, m);
  for (int i = 0; i < m; ++i)
    for (int l = 0; l < m; ++l) {
      double s = 0.0;
      for (int p = 0; p < m; ++p) {
        if (x[p] == 0.0) continue;
        for (int q = 0; q < m; ++q) s += a(i, p, q, l) * x[p] * x[q];
      }
      j(l, i) = s;
    }
  return j;
}

Matrix orthogonal_complement(const Vector& x) {
  const int m = static_cast<int>(x.size());
  Eigen::HouseholderQR<Matrix> qr(Matrix(x.normalized()));
  const Matrix q = qr.householderQ() * Matrix::Identity(m, m);
  return q.rightCols(m - 1);
}

Matrix reduced_jacobi(const CurvatureTensor& a, const Vector& x) {
  if (std::abs(x.norm() - 1.0) > 1e-8) {
    throw Error(ErrorCode::InvalidArgument, "reduced Jacobi operator needs a unit direction");
  }
  const Matrix j = jacobi_operator(a, x);
  const Matrix basis = orthogonal_complement(x);
  Matrix r = basis.transpose() * j * basis;
  return 0.5 * (r + r.transpose());
}

Vector symmetric_eigenvalues(const Matrix& m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::DimensionMismatch, "eigenvalues need a square matrix");
  if (m.size() == 0) return Vector();
  if (max_abs(m - m.transpose()) > 1e-8 * std::max(1.0, max_abs(m))) {
    throw Error(ErrorCode::InvalidArgument, "matrix is not self-adjoint");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::NumericalFailure, "eigensolver did not converge");
  return solver.eigenvalues();
}

SpectralProfile cluster_eigenvalues(const Vector& ev, double cluster_tol, double scale, int source_dim) {
  SpectralProfile p;
  p.source_dim = source_dim;
  const double gap = cluster_tol * std::max(1.0, scale);
  int start = 0;
  const int n = static_cast<int>(ev.size());
  for (int i = 1; i <= n; ++i) {
    if (i == n || ev[i] - ev[i - 1] > gap) {
      double sum = 0.0;
      for (int k = start; k < i; ++k) sum += ev[k];
      p.clusters.push_back({sum / (i - start), i - start});
      p.spread = std::max(p.spread, ev[i - 1] - ev[start]);
      start = i;
    }
  }
  return p;
}

SpectralProfile spectral_profile(const Matrix& m, double cluster_tol, int source_dim) {
  const Vector ev = symmetric_eigenvalues(m);
  const double scale = ev.size() == 0 ? 0.0 : ev.cwiseAbs().maxCoeff();
  return cluster_eigenvalues(ev, cluster_tol, scale, source_dim == 0 ? static_cast<int>(m.rows()) + 1 : source_dim);
}

std::vector<Vector> structured_directions(int m) {
  std::vector<Vector> dirs;
  for (int i = 0; i < m; ++i) dirs.push_back(Vector::Unit(m, i));
  const double s = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      Vector plus = Vector::Zero(m);
      plus[i] = s;
      plus[j] = s;
      Vector minus = plus;
      minus[j] = -s;
      dirs.push_back(plus);
      dirs.push_back(minus);
    }
  return dirs;
}

Vector random_direction(int m, std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(m);
  double norm = 0.0;
  do {
    for (int i = 0; i < m; ++i) v[i] = normal(rng);
    norm = v.norm();
  } while (norm < 1e-8);
  return v / norm;
}

std::vector<Vector> osserman_directions(int m, int samples, std::uint64_t seed) {
  std::vector<Vector> dirs;
  dirs.reserve(samples + m * m);
  for (int i = 0; i < samples; ++i) dirs.push_back(random_direction(m, seed, static_cast<std::uint64_t>(i)));
  for (Vector& v : structured_directions(m)) dirs.push_back(std::move(v));
  return dirs;
}

double trace_check(const CurvatureTensor& a, int samples, std::uint64_t seed) {
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const Vector x = random_direction(a.dim(), seed, static_cast<std::uint64_t>(i));
    worst = std::max(worst, std::abs(jacobi_operator(a, x).trace()));
  }
  return worst;
}

std::vector<Vector> sampled_spectra(const CurvatureTensor& a, int samples, std::uint64_t seed, int threads) {
  require_orthonormal(a);
  const std::vector<Vector> dirs = osserman_directions(a.dim(), samples, seed);
  std::vector<Vector> spectra(dirs.size());
  parallel_for(static_cast<int>(dirs.size()), threads,
               [&](int i) { spectra[i] = symmetric_eigenvalues(reduced_jacobi(a, dirs[i])); });
  return spectra;
}

OssermanReport osserman_test(const CurvatureTensor& a, int samples, std::uint64_t seed, double spec_tol,
                             bool keep_spectra, int threads) {
  if (samples < 2) throw Error(ErrorCode::InvalidArgument, "Osserman test needs at least 2 samples");
  std::vector<Vector> spectra = sampled_spectra(a, samples, seed, threads);
  // Max pairwise L∞ distance equals the widest per-index range.
  const int n = a.dim() - 1;
  double dist = 0.0;
  for (int k = 0; k < n; ++k) {
    double lo = spectra.front()[k];
    double hi = lo;
    for (const Vector& s : spectra) {
      lo = std::min(lo, s[k]);
      hi = std::max(hi, s[k]);
    }
    dist = std::max(dist, hi - lo);
  }
  OssermanReport r;
  r.max_profile_distance = dist;
  r.is_constant = dist <= spec_tol;
  r.sample_count = static_cast<int>(spectra.size());
  r.random_samples = samples;
  r.seed = seed;
  r.tolerance = spec_tol;
  if (keep_spectra) r.spectra = std::move(spectra);
  return r;
}

ReferenceProfile reference_profile(const CurvatureTensor& a, double cluster_tol) {
  require_orthonormal(a);
  const int m = a.dim();
  const std::vector<Vector> dirs = structured_directions(m);
  std::vector<SpectralProfile> profiles;
  profiles.reserve(dirs.size());
  std::map<std::vector<int>, int> counts;
  for (const Vector& d : dirs) {
    profiles.push_back(spectral_profile(reduced_jacobi(a, d), cluster_tol, m));
    std::vector<int> sig;
    for (const auto& c : profiles.back().clusters) sig.push_back(c.multiplicity);
    ++counts[sig];
  }
  int best = 0;
  int best_count = -1;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    std::vector<int> sig;
    for (const auto& c : profiles[i].clusters) sig.push_back(c.multiplicity);
    const int c = counts[sig];
    if (c > best_count) {
      best_count = c;
      best = static_cast<int>(i);
    }
  }
  return {profiles[best], best, dirs[best]};
}

}  // namespace weyl
