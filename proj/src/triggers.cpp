#include "wcrisk/triggers.hpp"

#include <cmath>
#include <string>

#include "wcrisk/error.hpp"

namespace wcrisk {

namespace {

[[noreturn]] void invalid(const std::string& msg) {
  throw Error(ErrorKind::invalid_input, msg);
}

Matrix closed_loop_matrix(const Matrix& a, const Matrix& b, const Matrix& k) {
  if (b.rows() != a.rows()) invalid("closed loop: b must have as many rows as a");
  if (k.rows() != b.cols() || k.cols() != a.rows()) {
    invalid("closed loop: k must be " + std::to_string(b.cols()) + "x" + std::to_string(a.rows()));
  }
  return a + b * k;
}

LinearStochasticSystem checked_autonomous(const Matrix& acl, const Matrix& e,
                                          const MomentAmbiguitySet& disturbance) {
  LinearStochasticSystem sys(acl, e, disturbance);
  if (!sys.contractive()) {
    throw Error(ErrorKind::not_contractive,
                "closed loop: ||a + b k|| = " + std::to_string(sys.a_norm()) + " >= 1");
  }
  return sys;
}

void require_radius(double radius) {
  if (!(radius > 0.0) || std::isinf(radius)) {
    invalid("trigger synthesis: radius must be positive and finite");
  }
}

[[noreturn]] void infeasible(const char* op, double radius, double needed) {
  throw Error(ErrorKind::infeasible_radius, std::string(op) + ": radius " + std::to_string(radius) +
                                                " is below the admissible minimum " +
                                                std::to_string(needed));
}

// (1−‖a+bk‖)(r − √((1/ε)Tr(P))), the ultimate-bound slack before dividing by
// the channel gain.
double ultimate_slack(const ClosedLoopSystem& cl, double radius, const char* op) {
  require_radius(radius);
  const double root = std::sqrt(cl.autonomous().risk_trace());
  if (radius < root) infeasible(op, radius, root);
  return (1.0 - cl.closed_loop_norm()) * (radius - root);
}

// (1−‖a+bk‖) r − √((1/ε)Tr(Σ_w eᵀe)).
double invariance_slack(const ClosedLoopSystem& cl, double radius, const char* op) {
  require_radius(radius);
  const double gap = 1.0 - cl.closed_loop_norm();
  const double root = std::sqrt(cl.autonomous().noise_risk());
  if (gap * radius < root) infeasible(op, radius, root / gap);
  return gap * radius - root;
}

double divide_by_gain(double slack, double gain, const char* op) {
  if (gain == 0.0) {
    invalid(std::string(op) + ": channel gain is zero, any threshold is admissible");
  }
  return slack / gain;
}

}  // namespace

ClosedLoopSystem::ClosedLoopSystem(Matrix a, Matrix b, Matrix e, Matrix k,
                                   MomentAmbiguitySet disturbance)
    : a_(std::move(a)),
      b_(std::move(b)),
      e_(std::move(e)),
      k_(std::move(k)),
      disturbance_(std::move(disturbance)),
      acl_(closed_loop_matrix(a_, b_, k_)),
      autonomous_(checked_autonomous(acl_, e_, disturbance_)),
      b_norm_(spectral_norm(b_)),
      bk_norm_(spectral_norm(b_ * k_)) {}

LinearStochasticSystem ClosedLoopSystem::with_state_error(double bound) const {
  return {acl_, b_ * k_, e_, disturbance_, bound};
}

LinearStochasticSystem ClosedLoopSystem::with_input_error(double bound) const {
  return {acl_, b_, e_, disturbance_, bound};
}

ClosedLoopSystem ClosedLoopSystem::with_level(double level) const {
  return {a_, b_, e_, k_, disturbance_.with_level(level)};
}

double sigma1_max(const ClosedLoopSystem& cl, double radius) {
  return divide_by_gain(ultimate_slack(cl, radius, "sigma1_max"), cl.bk_norm(), "sigma1_max");
}

double sigma2_max(const ClosedLoopSystem& cl, double radius) {
  return divide_by_gain(ultimate_slack(cl, radius, "sigma2_max"), cl.b_norm(), "sigma2_max");
}

double sigma3_max(const ClosedLoopSystem& cl, double radius) {
  return divide_by_gain(invariance_slack(cl, radius, "sigma3_max"), cl.bk_norm(), "sigma3_max");
}

double sigma4_max(const ClosedLoopSystem& cl, double radius) {
  return divide_by_gain(invariance_slack(cl, radius, "sigma4_max"), cl.b_norm(), "sigma4_max");
}

double sigma_max(const ClosedLoopSystem& cl, int corollary, double radius) {
  switch (corollary) {
    case 1: return sigma1_max(cl, radius);
    case 2: return sigma2_max(cl, radius);
    case 3: return sigma3_max(cl, radius);
    case 4: return sigma4_max(cl, radius);
    default: invalid("sigma_max: corollary must be 1..4, got " + std::to_string(corollary));
  }
}

std::string_view to_string(TriggerKind kind) {
  switch (kind) {
    case TriggerKind::state_error_abs: return "state_error_abs";
    case TriggerKind::input_error_abs: return "input_error_abs";
    case TriggerKind::state_error_rel: return "state_error_rel";
    case TriggerKind::input_error_rel: return "input_error_rel";
  }
  return "unknown";
}

TriggerKind parse_trigger_kind(std::string_view text) {
  for (auto kind : {TriggerKind::state_error_abs, TriggerKind::input_error_abs,
                    TriggerKind::state_error_rel, TriggerKind::input_error_rel}) {
    if (text == to_string(kind)) return kind;
  }
  invalid("unknown trigger kind '" + std::string(text) + "'");
}

TriggerKind corollary_trigger_kind(int corollary, bool relative) {
  switch (corollary) {
    case 1:
    case 3: return TriggerKind::state_error_abs;
    case 2: return TriggerKind::input_error_abs;
    case 4: return relative ? TriggerKind::input_error_rel : TriggerKind::input_error_abs;
    default: invalid("corollary must be 1..4, got " + std::to_string(corollary));
  }
}

TriggerPolicy::TriggerPolicy(TriggerKind kind, double sigma, Matrix gain_k)
    : kind_(kind), sigma_(sigma), gain_(std::move(gain_k)) {
  if (!(sigma_ >= 0.0) || std::isinf(sigma_)) {
    invalid("trigger policy: sigma must be finite and nonnegative");
  }
  const bool needs_gain = kind_ == TriggerKind::input_error_abs || kind_ == TriggerKind::input_error_rel;
  if (needs_gain && gain_.empty()) invalid("trigger policy: input-error kinds need the gain k");
  if (!gain_.empty()) require_finite(gain_, "trigger policy gain");
}

double TriggerPolicy::error_measure(std::span<const double> current_state,
                                    std::span<const double> held_state) const {
  if (current_state.size() != held_state.size()) {
    invalid("should_trigger: state and held state differ in dimension");
  }
  const Vector error = subtract(held_state, current_state);
  switch (kind_) {
    case TriggerKind::state_error_abs:
    case TriggerKind::state_error_rel: return norm(error);
    case TriggerKind::input_error_abs:
    case TriggerKind::input_error_rel: return norm(gain_ * error);
  }
  return 0.0;
}

double TriggerPolicy::threshold(std::span<const double> current_state) const {
  return relative() ? sigma_ * norm(current_state) : sigma_;
}

bool should_trigger(const TriggerPolicy& policy, std::span<const double> current_state,
                    std::span<const double> held_state) {
  return policy.error_measure(current_state, held_state) > policy.threshold(current_state);
}

}  // namespace wcrisk
