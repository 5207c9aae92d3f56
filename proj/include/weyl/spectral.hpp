#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "weyl/tensor.hpp"

namespace weyl {

struct EigenCluster {
  double value = 0.0;  // mean of the clustered eigenvalues
  int multiplicity = 0;
};

struct SpectralProfile {
  std::vector<EigenCluster> clusters;  // ascending
  double spread = 0.0;                 // largest intra-cluster extent
  int source_dim = 0;                  // m of the ambient space

  int total_multiplicity() const;
};

/// Matrix of y ↦ A(y,x)x, i.e. J_{li} = Σ_ab A_{iabl} x_a x_b. Requires an
/// orthonormal frame (identity inner product).
Matrix jacobi_operator(const CurvatureTensor& a, const Vector& x);

/// Orthonormal basis of x⊥ as columns (m × (m−1)), deterministic in x.
Matrix orthogonal_complement(const Vector& x);

/// J_A(x) restricted to x⊥. Rejects |‖x‖ − 1| > 1e−8.
Matrix reduced_jacobi(const CurvatureTensor& a, const Vector& x);

/// Ascending eigenvalues of a symmetric matrix (rejects asymmetry above 1e−8·max(1,‖M‖)).
Vector symmetric_eigenvalues(const Matrix& m);

/// Merges consecutive sorted eigenvalues whose gap is ≤ cluster_tol·max(1, ‖M‖).
SpectralProfile spectral_profile(const Matrix& m, double cluster_tol, int source_dim = 0);
SpectralProfile cluster_eigenvalues(const Vector& ascending, double cluster_tol, double scale, int source_dim);

/// Deterministic unit directions: all basis vectors, then (eᵢ ± eⱼ)/√2 for i < j.
std::vector<Vector> structured_directions(int m);
/// Seeded Gaussian-normalized unit vectors; the i-th depends only on (seed, i).
Vector random_direction(int m, std::uint64_t seed, std::uint64_t index);

/// Directions used by osserman_test: N seeded ones, then the structured set.
std::vector<Vector> osserman_directions(int m, int samples, std::uint64_t seed);

/// max over N seeded unit directions of |Tr J_A(x)|.
double trace_check(const CurvatureTensor& a, int samples, std::uint64_t seed);

struct OssermanReport {
  bool is_constant = false;
  double max_profile_distance = 0.0;  // max pairwise L∞ distance of sorted reduced spectra
  int sample_count = 0;               // random + structured directions
  int random_samples = 0;
  std::uint64_t seed = 0;
  double tolerance = 0.0;
  std::vector<Vector> spectra;        // per direction, ascending; filled when requested
};

/// Compares sorted reduced Jacobi spectra over N seeded directions plus the
/// structured set. Per-direction work may run on `threads` workers; the
/// result does not depend on the thread count.
OssermanReport osserman_test(const CurvatureTensor& a, int samples, std::uint64_t seed, double spec_tol,
                             bool keep_spectra = false, int threads = 1);

/// Sorted reduced spectra for every direction of osserman_test, in order.
std::vector<Vector> sampled_spectra(const CurvatureTensor& a, int samples, std::uint64_t seed, int threads = 1);

struct ReferenceProfile {
  SpectralProfile profile;
  int direction_index = 0;  // into structured_directions(m)
  Vector direction;
};

/// The defining profile: the most frequent cluster signature over the
/// structured directions, taken at the first direction exhibiting it.
ReferenceProfile reference_profile(const CurvatureTensor& a, double cluster_tol);

}  // namespace weyl
