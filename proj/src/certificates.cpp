#include "wcrisk/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wcrisk/error.hpp"

namespace wcrisk {

namespace {

constexpr double kAlphaSqMin = 1.0;
constexpr double kAlphaSqMax = 99.0;  // keeps 1 + α₁² ≤ 100

[[noreturn]] void invalid(const std::string& msg) {
  throw Error(ErrorKind::invalid_input, msg);
}

void require_radius(double radius) {
  if (!(radius > 0.0) || std::isinf(radius)) {
    invalid("certificate radius must be positive and finite, got " + std::to_string(radius));
  }
}

void require_autonomous(const LinearStochasticSystem& sys, const char* op) {
  if (sys.has_input_channel()) {
    throw Error(ErrorKind::wrong_kind, std::string(op) + ": system has an input channel");
  }
}

void require_input_channel(const LinearStochasticSystem& sys, const char* op) {
  if (!sys.has_input_channel()) {
    throw Error(ErrorKind::wrong_kind, std::string(op) + ": system has no input channel");
  }
}

std::optional<unsigned> settling_time(double lambda, double beta_coeff, double x0_norm_sq,
                                      double slack) {
  if (!(slack > 0.0)) return std::nullopt;
  if (beta_coeff * x0_norm_sq <= slack) return 0U;
  if (lambda == 0.0) return 1U;
  const double ratio = slack / (beta_coeff * x0_norm_sq);
  auto t = static_cast<unsigned>(std::max(0.0, std::floor(std::log(ratio) / std::log(lambda))));
  // Correct for rounding in the logarithms.
  while (t > 0 && beta_coeff * std::pow(lambda, t - 1) * x0_norm_sq <= slack) --t;
  while (beta_coeff * std::pow(lambda, t) * x0_norm_sq > slack) ++t;
  return t;
}

// Fills alpha1, slack and settling time for an ultimate-bound style
// certificate whose threshold is `bound` = (1+1/α₁²)⁻¹-free part.
void attach_settling_witness(RiskCertificate& cert, const LinearStochasticSystem& sys,
                             double bound, std::optional<double> x0_norm_sq) {
  if (!cert.satisfied) return;
  const double r2 = cert.radius * cert.radius;
  const double alpha_sq =
      bound > 0.0 ? std::clamp(10.0 * bound / (r2 - bound), kAlphaSqMin, kAlphaSqMax) : kAlphaSqMin;
  cert.alpha1 = std::sqrt(alpha_sq);
  cert.slack = r2 - (1.0 + 1.0 / alpha_sq) * bound;
  if (x0_norm_sq) {
    if (*x0_norm_sq < 0.0) invalid("settling time: x0_norm_sq must be nonnegative");
    const double lambda = sys.a_norm() * sys.a_norm();
    cert.settling_time = settling_time(lambda, 1.0 + alpha_sq, *x0_norm_sq, *cert.slack);
  }
}

RiskCertificate make_certificate(CertificateKind kind, double radius, double threshold,
                                 bool strict) {
  RiskCertificate cert;
  cert.kind = kind;
  cert.radius = radius;
  cert.threshold_value = threshold;
  const double r2 = radius * radius;
  cert.margin = r2 - threshold;
  cert.satisfied = strict ? r2 > threshold : r2 >= threshold;
  return cert;
}

}  // namespace

LinearStochasticSystem::LinearStochasticSystem(Matrix a, Matrix e, MomentAmbiguitySet disturbance)
    : a_(std::move(a)), e_(std::move(e)), disturbance_(std::move(disturbance)) {
  if (a_.empty() || !a_.is_square()) invalid("system: a must be a non-empty square matrix");
  require_finite(a_, "system a");
  require_finite(e_, "system e");
  if (e_.rows() != a_.rows()) invalid("system: e must have as many rows as a");
  if (e_.cols() != disturbance_.dimension()) {
    invalid("system: e has " + std::to_string(e_.cols()) +
            " columns but the disturbance dimension is " +
            std::to_string(disturbance_.dimension()));
  }
  if (reachability_rank(a_, e_) != a_.rows()) invalid("system: (a, e) is not reachable");
  a_norm_ = spectral_norm(a_);
  if (contractive()) {
    p_ = solve_discrete_lyapunov(a_, e_ * disturbance_.covariance() * e_.transpose());
  }
}

LinearStochasticSystem::LinearStochasticSystem(Matrix a, Matrix d, Matrix e,
                                               MomentAmbiguitySet disturbance, double input_bound)
    : LinearStochasticSystem(std::move(a), std::move(e), std::move(disturbance)) {
  if (d.empty() || d.rows() != a_.rows()) invalid("system: d must have as many rows as a");
  require_finite(d, "system d");
  if (!(input_bound >= 0.0) || std::isinf(input_bound)) {
    invalid("system: input bound must be finite and nonnegative");
  }
  d_norm_ = spectral_norm(d);
  d_ = std::move(d);
  input_bound_ = input_bound;
}

void LinearStochasticSystem::require_contractive(const char* op) const {
  if (!contractive()) {
    throw Error(ErrorKind::not_contractive,
                std::string(op) + ": ||a|| = " + std::to_string(a_norm_) + " >= 1");
  }
}

const Matrix& LinearStochasticSystem::lyapunov_solution() const {
  require_contractive("lyapunov_solution");
  return p_;
}

double LinearStochasticSystem::risk_trace() const {
  return trace(lyapunov_solution()) / level();
}

double LinearStochasticSystem::noise_risk() const {
  return trace(disturbance_.covariance() * e_.transpose() * e_) / level();
}

LinearStochasticSystem LinearStochasticSystem::with_input_bound(double bound) const {
  require_input_channel(*this, "with_input_bound");
  if (!(bound >= 0.0) || std::isinf(bound)) {
    invalid("system: input bound must be finite and nonnegative");
  }
  LinearStochasticSystem copy = *this;
  copy.input_bound_ = bound;
  return copy;
}

LinearStochasticSystem LinearStochasticSystem::without_input() const {
  LinearStochasticSystem copy = *this;
  copy.d_.reset();
  copy.input_bound_.reset();
  copy.d_norm_ = 0.0;
  return copy;
}

double StabilityEnvelope::value(unsigned t, double x0_norm_sq, double input_norm_sq) const {
  return beta_coeff * std::pow(lambda, t) * x0_norm_sq + gamma_coeff * input_norm_sq + offset_c;
}

StabilityEnvelope stability_envelope(const LinearStochasticSystem& sys, double alpha1,
                                     std::optional<double> alpha2) {
  if (!(alpha1 > 0.0) || std::isinf(alpha1)) invalid("stability_envelope: alpha1 must be positive");
  if (sys.has_input_channel() != alpha2.has_value()) {
    invalid("stability_envelope: alpha2 must be given exactly when the system has an input channel");
  }
  if (alpha2 && (!(*alpha2 > 0.0) || std::isinf(*alpha2))) {
    invalid("stability_envelope: alpha2 must be positive");
  }
  const double a1 = alpha1 * alpha1;
  StabilityEnvelope env;
  env.lambda = sys.a_norm() * sys.a_norm();
  env.alpha1 = alpha1;
  env.beta_coeff = 1.0 + a1;
  env.offset_c = (1.0 + 1.0 / a1) * sys.risk_trace();
  if (alpha2) {
    const double a2 = *alpha2 * *alpha2;
    const double gain = sys.d_norm() / (1.0 - sys.a_norm());
    env.alpha2 = alpha2;
    env.gamma_coeff = (1.0 + 1.0 / a1) * (1.0 + a2) * gain * gain;
    env.offset_c *= 1.0 + 1.0 / a2;
  }
  return env;
}

std::string_view to_string(CertificateKind kind) {
  switch (kind) {
    case CertificateKind::ultimate_bound: return "ultimate_bound";
    case CertificateKind::invariance: return "invariance";
    case CertificateKind::robust_ultimate_bound: return "robust_ultimate_bound";
    case CertificateKind::robust_invariance: return "robust_invariance";
  }
  return "unknown";
}

double canonical_alpha(double a_norm) {
  if (a_norm == 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(1.0 / a_norm - 1.0);
}

RiskCertificate ultimate_bound_certificate(const LinearStochasticSystem& sys, double radius,
                                           std::optional<double> x0_norm_sq) {
  require_autonomous(sys, "ultimate_bound_certificate");
  require_radius(radius);
  const double bound = sys.risk_trace();
  auto cert = make_certificate(CertificateKind::ultimate_bound, radius, bound, /*strict=*/true);
  attach_settling_witness(cert, sys, bound, x0_norm_sq);
  return cert;
}

RiskCertificate invariance_certificate(const LinearStochasticSystem& sys, double radius) {
  require_autonomous(sys, "invariance_certificate");
  require_radius(radius);
  (void)sys.lyapunov_solution();  // contractivity
  const double gap = 1.0 - sys.a_norm();
  auto cert = make_certificate(CertificateKind::invariance, radius, sys.noise_risk() / (gap * gap),
                               /*strict=*/false);
  cert.alpha1 = canonical_alpha(sys.a_norm());
  return cert;
}

RiskCertificate invariance_certificate_general_alpha(const LinearStochasticSystem& sys,
                                                     double radius, double alpha) {
  require_autonomous(sys, "invariance_certificate_general_alpha");
  require_radius(radius);
  (void)sys.lyapunov_solution();
  if (!(alpha > 0.0)) invalid("invariance_certificate_general_alpha: alpha must be positive");
  const double alpha_sq = alpha * alpha;
  const double a2 = sys.a_norm() * sys.a_norm();
  // α²/(1+α²) − α²‖a‖², written to stay finite as α → ∞.
  const double factor = std::isinf(alpha_sq) ? -std::numeric_limits<double>::infinity()
                                             : alpha_sq / (1.0 + alpha_sq) - alpha_sq * a2;
  if (!(factor > 0.0)) {
    throw Error(ErrorKind::infeasible_alpha,
                "invariance_certificate_general_alpha: alpha^2 (1/(1+alpha^2) - ||a||^2) <= 0");
  }
  const double noise = sys.noise_risk();
  auto cert = make_certificate(CertificateKind::invariance, radius, noise / factor, false);
  // Evaluate the verdict in the original (unscaled) form.
  cert.satisfied = noise <= factor * radius * radius;
  cert.alpha1 = alpha;
  return cert;
}

RiskCertificate robust_ultimate_bound_certificate(const LinearStochasticSystem& sys, double radius,
                                                  std::optional<double> x0_norm_sq) {
  require_input_channel(sys, "robust_ultimate_bound_certificate");
  require_radius(radius);
  const double root = std::sqrt(sys.risk_trace());
  const double drive = sys.d_norm() * *sys.input_bound();
  const double sum = drive / (1.0 - sys.a_norm()) + root;
  const double bound = sum * sum;
  auto cert = make_certificate(CertificateKind::robust_ultimate_bound, radius, bound, true);
  if (drive > 0.0 && root > 0.0) {
    cert.alpha2 = std::sqrt((1.0 - sys.a_norm()) / drive * root);
  } else {
    cert.degenerate_input = drive == 0.0;
  }
  attach_settling_witness(cert, sys, bound, x0_norm_sq);
  return cert;
}

RiskCertificate robust_invariance_certificate(const LinearStochasticSystem& sys, double radius) {
  require_input_channel(sys, "robust_invariance_certificate");
  require_radius(radius);
  (void)sys.lyapunov_solution();
  const double gap = 1.0 - sys.a_norm();
  const double root = std::sqrt(sys.noise_risk());
  const double drive = sys.d_norm() * *sys.input_bound();
  const double sum = (drive + root) / gap;
  auto cert = make_certificate(CertificateKind::robust_invariance, radius, sum * sum, false);
  cert.alpha1 = canonical_alpha(sys.a_norm());
  if (drive > 0.0 && root > 0.0) {
    cert.alpha2 = std::sqrt(root / drive);
  } else {
    cert.degenerate_input = drive == 0.0;
  }
  return cert;
}

double one_step_risk_map(const LinearStochasticSystem& sys, double state_norm_sq) {
  if (!(state_norm_sq >= 0.0)) invalid("one_step_risk_map: state_norm_sq must be nonnegative");
  (void)sys.lyapunov_solution();
  const double root = std::sqrt(sys.noise_risk());
  const double drive = sys.has_input_channel() ? sys.d_norm() * *sys.input_bound() : 0.0;
  const double sum = drive + root;
  return sys.a_norm() * state_norm_sq + sum * sum / (1.0 - sys.a_norm());
}

}  // namespace wcrisk
