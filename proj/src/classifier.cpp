#include "weyl/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "weyl/curvature_algebra.hpp"
#include "weyl/error.hpp"

namespace weyl {

const char* to_string(VerdictKind kind) noexcept {
  switch (kind) {
    case VerdictKind::ConformallyFlat: return "ConformallyFlat";
    case VerdictKind::ConformallyComplexSpaceForm: return "ConformallyComplexSpaceForm";
    case VerdictKind::OssermanOther: return "OssermanOther";
    case VerdictKind::NotConformallyOsserman: return "NotConformallyOsserman";
  }
  return "Unknown";
}

ClassifierOptions ClassifierOptions::algebraic() { return {}; }

ClassifierOptions ClassifierOptions::finite_difference() {
  ClassifierOptions o;
  o.spec_tol = 1e-4;
  o.flat_tol = 1e-5;
  o.relation_tol = 1e-4;
  o.recovery_tol = 1e-5;
  return o;
}

std::string Verdict::model_type() const {
  if (kind != VerdictKind::ConformallyComplexSpaceForm || !lambda1) return {};
  return *lambda1 > 0.0 ? "CPn" : "*CPn";
}

namespace {

PhiRecovery recover_phi_orthonormal(const CurvatureTensor& b, double tolerance, double degeneracy_tol) {
  const int m = b.dim();
  if (m % 2 != 0) throw Error(ErrorCode::InvalidArgument, "complex structures need even dimension");
  int p = 0;
  int q = 1;
  double best = -1.0;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      if (b(i, j, j, i) > best) {
        best = b(i, j, j, i);
        p = i;
        q = j;
      }
  if (best <= degeneracy_tol) {
    throw Error(ErrorCode::DegenerateInput, "max B_pqqp = " + std::to_string(best) + " is below the degeneracy threshold");
  }
  // Ω_ab = g(Φ e_a, e_b); B_pqqp = 3 Ω_pq², B_iqql = −3 Ω_iq Ω_ql and
  // B_ijpq = Ω_iq Ω_jp − Ω_ip Ω_jq − 2 Ω_ij Ω_pq.
  Matrix omega = Matrix::Zero(m, m);
  const double w_pq = std::sqrt(best / 3.0);
  omega(p, q) = w_pq;
  omega(q, p) = -w_pq;
  for (int l = 0; l < m; ++l) {
    if (l == p || l == q) continue;
    omega(q, l) = -b(p, q, q, l) / (3.0 * w_pq);
    omega(p, l) = b(q, p, p, l) / (3.0 * w_pq);
    omega(l, q) = -omega(q, l);
    omega(l, p) = -omega(p, l);
  }
  for (int i = 0; i < m; ++i) {
    if (i == p || i == q) continue;
    for (int j = i + 1; j < m; ++j) {
      if (j == p || j == q) continue;
      const double v = (omega(j, p) * omega(i, q) - omega(i, p) * omega(j, q) - b(i, j, p, q)) / (2.0 * w_pq);
      omega(i, j) = v;
      omega(j, i) = -v;
    }
  }
  // Nearest orthogonal matrix; for a skew input it stays skew, so Ω² = −I.
  Eigen::JacobiSVD<Matrix> svd(omega, Eigen::ComputeFullU | Eigen::ComputeFullV);
  omega = svd.matrixU() * svd.matrixV().transpose();
  omega = 0.5 * (omega - omega.transpose());
  if (omega(p, q) < 0.0) omega = -omega;
  PhiRecovery out;
  out.phi = omega.transpose();
  out.pivot_p = p;
  out.pivot_q = q;
  const CurvatureTensor rebuilt = a_phi(out.phi, b.metric());
  out.residual = (rebuilt - b).max_abs() / std::max(1.0, b.max_abs());
  if (!(out.residual <= tolerance)) {
    throw Error(ErrorCode::ReconstructionFailed,
                "tensor is not of the form A_Phi (relative residual " + std::to_string(out.residual) + ")");
  }
  return out;
}

}  // namespace

PhiRecovery recover_phi(const CurvatureTensor& b, double tolerance, double degeneracy_tol) {
  if (b.metric().is_identity(1e-12)) return recover_phi_orthonormal(b, tolerance, degeneracy_tol);
  const FramedTensor framed = to_orthonormal(b);
  PhiRecovery r = recover_phi_orthonormal(framed.tensor, tolerance, degeneracy_tol);
  const Matrix binv = framed.frame.transpose() * b.metric().matrix();
  r.phi = framed.frame * r.phi * binv;
  return r;
}

EigenRelationCheck check_eigen_relation(double lambda0, double lambda1, int m, double tol) {
  if (lambda1 == 0.0) throw Error(ErrorCode::InvalidArgument, "eigenvalue relation needs lambda1 != 0");
  const double residual = std::abs(3.0 * lambda1 + (m - 1) * lambda0) / std::abs(lambda1);
  return {residual <= tol, residual};
}

std::vector<std::string> parity_consistency(int m, const SpectralProfile& profile, const Verdict& verdict) {
  std::vector<std::string> warnings;
  if (verdict.kind == VerdictKind::NotConformallyOsserman) return warnings;
  const auto n = profile.clusters.size();
  const bool has_simple = std::any_of(profile.clusters.begin(), profile.clusters.end(),
                                      [](const EigenCluster& c) { return c.multiplicity == 1; });
  if (m % 2 == 1 && n > 1) {
    warnings.push_back("odd dimension " + std::to_string(m) + " admits one eigenvalue only, observed " +
                       std::to_string(n) + " clusters; clustering likely failed");
  }
  if (m % 4 == 2 && n >= 2 && !(n == 2 && has_simple)) {
    warnings.push_back("dimension " + std::to_string(m) +
                       " = 2 mod 4 admits one eigenvalue or two with a simple one, observed " + std::to_string(n) +
                       " clusters; clustering likely failed");
  }
  return warnings;
}

Verdict classify_point(const CurvatureTensor& w, const SpectralProfile& profile, const OssermanReport& osserman,
                       int m, const ClassifierOptions& options) {
  if (w.dim() != m) throw Error(ErrorCode::DimensionMismatch, "Weyl tensor dimension differs from m");
  if (profile.total_multiplicity() != m - 1) {
    throw Error(ErrorCode::DimensionMismatch, "profile multiplicities sum to " +
                                                  std::to_string(profile.total_multiplicity()) + ", expected " +
                                                  std::to_string(m - 1));
  }
  if (!w.metric().is_identity(1e-10)) {
    throw Error(ErrorCode::InvalidArgument, "classification requires the Weyl tensor in an orthonormal frame");
  }
  Verdict v;
  v.profile = profile;
  v.weyl_norm = w.max_abs();
  const auto& cl = profile.clusters;
  if (!osserman.is_constant) {
    v.kind = VerdictKind::NotConformallyOsserman;
  } else if (cl.size() == 1) {
    // A single eigenvalue is forced to 0 by the trace identity, hence W = 0.
    v.kind = VerdictKind::ConformallyFlat;
    v.lambda0 = cl.front().value;
    if (v.weyl_norm > options.flat_tol) {
      v.near_degenerate = true;
      v.warnings.push_back("single eigenvalue cluster but |W| = " + std::to_string(v.weyl_norm) +
                           " exceeds the flatness tolerance");
    }
  } else if (cl.size() == 2 && m >= 4 &&
             ((cl[0].multiplicity == 1 && cl[1].multiplicity == m - 2) ||
              (cl[1].multiplicity == 1 && cl[0].multiplicity == m - 2))) {
    const EigenCluster& simple = cl[0].multiplicity == 1 && cl[1].multiplicity == m - 2 ? cl[0] : cl[1];
    const EigenCluster& bulk = &simple == &cl[0] ? cl[1] : cl[0];
    const double lambda0 = bulk.value;
    const double lambda1 = (simple.value - bulk.value) / 3.0;
    v.lambda0 = lambda0;
    v.lambda1 = lambda1;
    v.kind = VerdictKind::OssermanOther;
    try {
      if (m % 2 != 0) throw Error(ErrorCode::InvalidArgument, "odd dimension has no complex structure");
      const EigenRelationCheck eq = check_eigen_relation(lambda0, lambda1, m, options.relation_tol);
      v.relation_residual = eq.residual;
      const CurvatureTensor b = (1.0 / lambda1) * (w - lambda0 * r0(w.metric()));
      const PhiRecovery rec = recover_phi(b, options.recovery_tol, options.degeneracy_tol);
      const CurvatureTensor rebuilt = lambda0 * r0(w.metric()) + lambda1 * a_phi(rec.phi, w.metric());
      v.reconstruction_residual = (w - rebuilt).max_abs() / std::max(v.weyl_norm, 1e-300);
      v.phi = rec.phi;
      if (!eq.pass) {
        v.warnings.push_back("eigenvalue relation residual " + std::to_string(eq.residual) + " exceeds tolerance");
      } else {
        v.kind = VerdictKind::ConformallyComplexSpaceForm;
        v.below_rigidity_threshold = m < 8;
        if (v.below_rigidity_threshold) {
          v.warnings.push_back("below the rigidity dimension m>=8: the structure is not claimed rigid for m=" + std::to_string(m));
        }
      }
    } catch (const Error& e) {
      v.warnings.push_back(std::string("complex structure recovery failed: ") + e.what());
    }
  } else {
    v.kind = VerdictKind::OssermanOther;
  }
  for (std::string& s : parity_consistency(m, profile, v)) v.warnings.push_back(std::move(s));
  return v;
}

PointAnalysis analyze_point(const MetricChart& chart, const Vector& u, const ChartOptions& options) {
  const int m = chart.dim();
  PointAnalysis pa;
  pa.point = u;
  const CurvatureTensor r = riemann_at(chart, u);
  pa.metric = r.metric().matrix();
  const CurvatureDecomposition dec = weyl_decompose(r);
  pa.tau = dec.tau;
  const FramedTensor framed = to_orthonormal(dec.w);
  pa.weyl_norm = framed.tensor.max_abs();
  const ReferenceProfile ref = reference_profile(framed.tensor, options.classifier.cluster_tol);
  pa.osserman = osserman_test(framed.tensor, options.samples, options.seed, options.classifier.spec_tol, false,
                              options.threads);
  pa.verdict = classify_point(framed.tensor, ref.profile, pa.osserman, m, options.classifier);
  if (pa.verdict.phi) {
    const Matrix binv = framed.frame.transpose() * r.metric().matrix();
    pa.verdict.phi = Matrix(framed.frame * *pa.verdict.phi * binv);
  }
  if (options.bianchi) pa.bianchi_residual = second_bianchi_residual(chart, u);
  return pa;
}

ChartClassification classify_chart(const MetricChart& chart, const std::vector<Vector>& points,
                                   const ChartOptions& options) {
  ChartClassification out;
  out.points.resize(points.size());
  const int workers = std::clamp(options.threads, 1, std::max<int>(1, static_cast<int>(points.size())));
  ChartOptions per_point = options;
  per_point.threads = 1;
  if (workers == 1) {
    for (std::size_t i = 0; i < points.size(); ++i) out.points[i] = analyze_point(chart, points[i], per_point);
  } else {
    std::vector<std::exception_ptr> errors(points.size());
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < points.size(); i += workers) {
          try {
            out.points[i] = analyze_point(chart, points[i], per_point);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  ChartSummary& s = out.summary;
  std::vector<const Matrix*> phis;
  for (const PointAnalysis& pa : out.points) {
    switch (pa.verdict.kind) {
      case VerdictKind::ConformallyFlat: ++s.flat; break;
      case VerdictKind::ConformallyComplexSpaceForm:
        ++s.ccsf;
        if (*pa.verdict.lambda1 > 0.0) ++s.ccsf_cpn; else ++s.ccsf_dual_cpn;
        phis.push_back(&*pa.verdict.phi);
        break;
      case VerdictKind::OssermanOther: ++s.osserman_other; break;
      case VerdictKind::NotConformallyOsserman: ++s.not_osserman; break;
    }
  }
  if (phis.size() >= 2) {
    double worst = 0.0;
    for (std::size_t i = 0; i < phis.size(); ++i)
      for (std::size_t j = i + 1; j < phis.size(); ++j) {
        worst = std::max(worst, std::min(max_abs(*phis[i] - *phis[j]), max_abs(*phis[i] + *phis[j])));
      }
    s.phi_consistency = worst;
  }
  return out;
}

}  // namespace weyl
