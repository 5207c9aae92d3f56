#pragma once

#include <optional>
#include <string>
#include <vector>

#include "weyl/chart.hpp"
#include "weyl/spectral.hpp"
#include "weyl/tensor.hpp"

namespace weyl {

enum class VerdictKind { ConformallyFlat, ConformallyComplexSpaceForm, OssermanOther, NotConformallyOsserman };

const char* to_string(VerdictKind kind) noexcept;

struct ClassifierOptions {
  double spec_tol = 1e-6;        // Osserman constancy (absolute L∞ spread)
  double cluster_tol = 1e-3;     // relative eigenvalue gap
  double flat_tol = 1e-8;        // ‖W‖∞ bound asserted for one-cluster verdicts
  double relation_tol = 1e-6;    // |3λ1 + (m−1)λ0| / |λ1|
  double recovery_tol = 1e-8;    // ‖a_phi(Φ̂) − B‖∞ / max(1, ‖B‖∞)
  double degeneracy_tol = 1e-6;  // smallest usable max_pq |B_pqqp|

  /// Tolerance tier for exact (algebraic or analytic-chart) inputs.
  static ClassifierOptions algebraic();
  /// Tolerance tier for finite-difference chart inputs.
  static ClassifierOptions finite_difference();
};

struct Verdict {
  VerdictKind kind = VerdictKind::NotConformallyOsserman;
  std::optional<double> lambda0;
  std::optional<double> lambda1;
  std::optional<Matrix> phi;  // in the basis of the classified tensor
  std::optional<double> relation_residual;
  std::optional<double> reconstruction_residual;
  double weyl_norm = 0.0;
  bool near_degenerate = false;
  bool below_rigidity_threshold = false;  // CCSF with m < 8
  SpectralProfile profile;
  std::vector<std::string> warnings;

  /// "CPn" for λ1 > 0, "*CPn" for λ1 < 0, empty otherwise.
  std::string model_type() const;
};

/// Decision tree over the spectral data of the Weyl tensor W (orthonormal frame).
Verdict classify_point(const CurvatureTensor& w, const SpectralProfile& profile, const OssermanReport& osserman,
                       int m, const ClassifierOptions& options = {});

struct PhiRecovery {
  Matrix phi;  // orthonormal frame, canonical sign g(Φ e_p, e_q) > 0 at the pivot
  int pivot_p = 0;
  int pivot_q = 0;
  double residual = 0.0;  // ‖a_phi(Φ) − B‖∞ / max(1, ‖B‖∞)
};

/// Recovers Φ (up to the global sign) from B = λ1⁻¹(W − λ0 R0), assumed to
/// equal A_Φ. Throws DegenerateInput or ReconstructionFailed.
PhiRecovery recover_phi(const CurvatureTensor& b, double tolerance = 1e-8, double degeneracy_tol = 1e-6);

struct EigenRelationCheck {
  bool pass = false;
  double residual = 0.0;
};

/// |3λ1 + (m−1)λ0| / |λ1| against tol.
EigenRelationCheck check_eigen_relation(double lambda0, double lambda1, int m, double tol);

/// Warnings when cluster structure contradicts the parity constraints on
/// Osserman tensors (odd m: one eigenvalue; m ≡ 2 mod 4: one eigenvalue, or
/// two with one simple).
std::vector<std::string> parity_consistency(int m, const SpectralProfile& profile, const Verdict& verdict);

struct PointAnalysis {
  Vector point;
  Matrix metric;
  double tau = 0.0;
  double weyl_norm = 0.0;  // orthonormal frame
  OssermanReport osserman;
  Verdict verdict;  // phi expressed in chart coordinates
  std::optional<double> bianchi_residual;
};

struct ChartOptions {
  ClassifierOptions classifier;
  int samples = 64;
  std::uint64_t seed = 0;
  bool bianchi = false;
  int threads = 1;
};

struct ChartSummary {
  int flat = 0;
  int ccsf = 0;
  int osserman_other = 0;
  int not_osserman = 0;
  int ccsf_cpn = 0;        // λ1 > 0
  int ccsf_dual_cpn = 0;   // λ1 < 0
  std::optional<double> phi_consistency;  // max over point pairs of min ‖Φ̂(P) ∓ Φ̂(Q)‖∞
};

struct ChartClassification {
  std::vector<PointAnalysis> points;
  ChartSummary summary;
};

/// Full pipeline at one point: Riemann → Weyl → Osserman test → verdict.
PointAnalysis analyze_point(const MetricChart& chart, const Vector& u, const ChartOptions& options);

ChartClassification classify_chart(const MetricChart& chart, const std::vector<Vector>& points,
                                   const ChartOptions& options);

}  // namespace weyl
