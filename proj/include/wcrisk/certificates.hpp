#pragma once

#include <optional>
#include <string_view>

#include "wcrisk/linalg.hpp"
#include "wcrisk/risk.hpp"

namespace wcrisk {

/// x_{t+1} = a x_t + d v_t + e w_t with ‖v_t‖ ≤ input_bound and w_t drawn
/// i.i.d. from a member of the disturbance ambiguity set. The input channel
/// (d, input_bound) is optional.
///
/// Construction checks dimensions and reachability of (a, e); contractivity
/// (‖a‖ < 1) is recorded rather than enforced so that callers get a
/// not_contractive error from the operation that needs it.
class LinearStochasticSystem {
 public:
  LinearStochasticSystem(Matrix a, Matrix e, MomentAmbiguitySet disturbance);
  LinearStochasticSystem(Matrix a, Matrix d, Matrix e, MomentAmbiguitySet disturbance,
                         double input_bound);

  const Matrix& a() const noexcept { return a_; }
  const Matrix& e() const noexcept { return e_; }
  const std::optional<Matrix>& d() const noexcept { return d_; }
  std::optional<double> input_bound() const noexcept { return input_bound_; }
  const MomentAmbiguitySet& disturbance() const noexcept { return disturbance_; }
  bool has_input_channel() const noexcept { return d_.has_value(); }

  double level() const noexcept { return disturbance_.level(); }
  double a_norm() const noexcept { return a_norm_; }
  double d_norm() const noexcept { return d_norm_; }
  bool contractive() const noexcept { return a_norm_ < 1.0; }

  /// Solution of a P aᵀ − P + e Σ_w eᵀ = 0. Throws not_contractive.
  const Matrix& lyapunov_solution() const;
  /// (1/ε) Tr(P).
  double risk_trace() const;
  /// (1/ε) Tr(Σ_w eᵀe), the one-step worst-case CVaR of ‖e w‖².
  double noise_risk() const;

  LinearStochasticSystem with_input_bound(double bound) const;
  LinearStochasticSystem without_input() const;

 private:
  void require_contractive(const char* op) const;

  Matrix a_;
  std::optional<Matrix> d_;
  Matrix e_;
  MomentAmbiguitySet disturbance_;
  std::optional<double> input_bound_;
  double a_norm_ = 0.0;
  double d_norm_ = 0.0;
  Matrix p_;
};

/// Envelope β(‖x₀‖², t) + γ(v̄²) + c bounding the worst-case CVaR of ‖x_t‖²,
/// with β(s, t) = beta_coeff·s·λᵗ and γ(v̄²) = gamma_coeff·v̄².
struct StabilityEnvelope {
  double lambda = 0.0;  // ‖a‖²
  double beta_coeff = 0.0;
  double gamma_coeff = 0.0;
  double offset_c = 0.0;
  double alpha1 = 0.0;
  std::optional<double> alpha2;

  double value(unsigned t, double x0_norm_sq, double input_norm_sq = 0.0) const;
};

StabilityEnvelope stability_envelope(const LinearStochasticSystem& sys, double alpha1,
                                     std::optional<double> alpha2 = std::nullopt);

enum class CertificateKind {
  ultimate_bound,
  invariance,
  robust_ultimate_bound,
  robust_invariance,
};

std::string_view to_string(CertificateKind kind);

/// Verdict for the ball {‖x‖ ≤ radius}. threshold_value is in squared-radius
/// units for every kind, so margin = radius² − threshold_value.
struct RiskCertificate {
  CertificateKind kind = CertificateKind::ultimate_bound;
  double radius = 0.0;
  double threshold_value = 0.0;
  double margin = 0.0;
  bool satisfied = false;
  std::optional<double> alpha1;
  std::optional<double> alpha2;
  /// Ultimate bounds only: slack δ = r² − (1+1/α₁²)·(bound) used by the
  /// settling-time witness, and the witness itself when x₀ was supplied.
  std::optional<double> slack;
  std::optional<unsigned> settling_time;
  /// Set when the input channel degenerates (‖d‖ = 0 or bound 0) and the
  /// certificate reduces to its autonomous counterpart.
  bool degenerate_input = false;
};

/// r² > (1/ε)Tr(P). With `x0_norm_sq` the certificate also carries the
/// smallest T with (1+α₁²)λᵀ‖x₀‖² ≤ δ, for the deterministic α₁ rule
/// α₁² = clamp(10·b/(r² − b), 1, 99), b the threshold.
RiskCertificate ultimate_bound_certificate(const LinearStochasticSystem& sys, double radius,
                                           std::optional<double> x0_norm_sq = std::nullopt);

/// r² ≥ (1/(ε(1−‖a‖)²)) Tr(Σ_w eᵀe), using the α with (1+α²)‖a‖ = 1.
RiskCertificate invariance_certificate(const LinearStochasticSystem& sys, double radius);

/// Invariance check for a caller-chosen α:
///   (1/ε)Tr(Σ_w eᵀe) ≤ α²(1/(1+α²) − ‖a‖²) r².
/// Reported as the equivalent radius threshold. Throws infeasible_alpha when
/// the right-hand factor is not positive.
RiskCertificate invariance_certificate_general_alpha(const LinearStochasticSystem& sys,
                                                     double radius, double alpha);

/// r² > (‖d‖·bound/(1−‖a‖) + √((1/ε)Tr(P)))².
RiskCertificate robust_ultimate_bound_certificate(const LinearStochasticSystem& sys, double radius,
                                                  std::optional<double> x0_norm_sq = std::nullopt);

/// r² ≥ (‖d‖·bound + √((1/ε)Tr(Σ_w eᵀe)))² / (1−‖a‖)².
RiskCertificate robust_invariance_certificate(const LinearStochasticSystem& sys, double radius);

/// One-step bound on the worst-case CVaR of ‖x_{t+1}‖² given ‖x_t‖², with the
/// canonical α (and α₂ when an input channel is present):
///   ‖a‖·s + (‖d‖·bound + √((1/ε)Tr(Σ_w eᵀe)))² / (1−‖a‖).
/// The state coefficient is ‖a‖, not ‖a‖², following the invariance argument
/// verbatim; this is conservative.
double one_step_risk_map(const LinearStochasticSystem& sys, double state_norm_sq);

/// α with (1 + α²)‖a‖ = 1; +inf when ‖a‖ = 0.
double canonical_alpha(double a_norm);

}  // namespace wcrisk
