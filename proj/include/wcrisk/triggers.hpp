#pragma once

#include <span>
#include <string_view>

#include "wcrisk/certificates.hpp"
#include "wcrisk/linalg.hpp"
#include "wcrisk/risk.hpp"

namespace wcrisk {

/// x_{t+1} = a x_t + b u_t + e w_t under state feedback u = k x̂.
/// Construction requires ‖a + b k‖ < 1 (not_contractive otherwise) and
/// (a + b k, e) reachable (invalid_input otherwise).
class ClosedLoopSystem {
 public:
  ClosedLoopSystem(Matrix a, Matrix b, Matrix e, Matrix k, MomentAmbiguitySet disturbance);

  const Matrix& a() const noexcept { return a_; }
  const Matrix& b() const noexcept { return b_; }
  const Matrix& e() const noexcept { return e_; }
  const Matrix& k() const noexcept { return k_; }
  const MomentAmbiguitySet& disturbance() const noexcept { return disturbance_; }
  double level() const noexcept { return disturbance_.level(); }

  const Matrix& closed_loop() const noexcept { return acl_; }
  double closed_loop_norm() const noexcept { return autonomous_.a_norm(); }
  double b_norm() const noexcept { return b_norm_; }
  double bk_norm() const noexcept { return bk_norm_; }

  /// x_{t+1} = (a + b k) x_t + e w_t.
  const LinearStochasticSystem& autonomous() const noexcept { return autonomous_; }
  /// Closed loop with the trigger error as bounded input: d = b k (state
  /// error) with ‖e_t‖ ≤ bound.
  LinearStochasticSystem with_state_error(double bound) const;
  /// d = b with ‖k e_t‖ ≤ bound (input error).
  LinearStochasticSystem with_input_error(double bound) const;

  ClosedLoopSystem with_level(double level) const;

 private:
  Matrix a_, b_, e_, k_;
  MomentAmbiguitySet disturbance_;
  Matrix acl_;
  LinearStochasticSystem autonomous_;
  double b_norm_ = 0.0;
  double bk_norm_ = 0.0;
};

/// Largest σ₁ for the trigger ‖e_t‖ > σ₁ that keeps {‖x‖ ≤ r} an ultimate
/// bound: (1−‖a+bk‖)/‖bk‖ · (r − √((1/ε)Tr(P))). Throws infeasible_radius
/// when r is below √((1/ε)Tr(P)); exactly at it the result is 0.
double sigma1_max(const ClosedLoopSystem& cl, double radius);
/// As sigma1_max for the trigger ‖k e_t‖ > σ₂, with ‖b‖ in place of ‖bk‖.
double sigma2_max(const ClosedLoopSystem& cl, double radius);
/// Largest σ₃ for ‖e_t‖ > σ₃ keeping the ball positively invariant:
/// ((1−‖a+bk‖) r − √((1/ε)Tr(Σ_w eᵀe))) / ‖bk‖.
double sigma3_max(const ClosedLoopSystem& cl, double radius);
/// As sigma3_max with ‖b‖ in place of ‖bk‖.
double sigma4_max(const ClosedLoopSystem& cl, double radius);

/// Dispatches to sigma{1..4}_max.
double sigma_max(const ClosedLoopSystem& cl, int corollary, double radius);

enum class TriggerKind {
  state_error_abs,  // ‖x̂ − x‖ > σ
  input_error_abs,  // ‖k(x̂ − x)‖ > σ
  state_error_rel,  // ‖x̂ − x‖ > σ‖x‖
  input_error_rel,  // ‖k(x̂ − x)‖ > σ‖x‖
};

std::string_view to_string(TriggerKind kind);
TriggerKind parse_trigger_kind(std::string_view text);

/// Trigger kind that rule `corollary` (1..4) sizes its threshold for. Rule 4
/// defaults to the absolute input-error check; `relative` picks ‖k e‖ > σ‖x‖.
TriggerKind corollary_trigger_kind(int corollary, bool relative = false);

class TriggerPolicy {
 public:
  /// Throws invalid_input for σ < 0, or an input-error kind without a gain.
  TriggerPolicy(TriggerKind kind, double sigma, Matrix gain_k = {});

  TriggerKind kind() const noexcept { return kind_; }
  double sigma() const noexcept { return sigma_; }
  const Matrix& gain() const noexcept { return gain_; }
  bool relative() const noexcept {
    return kind_ == TriggerKind::state_error_rel || kind_ == TriggerKind::input_error_rel;
  }

  /// φ(x, x̂): ‖x̂ − x‖ or ‖k(x̂ − x)‖.
  double error_measure(std::span<const double> current_state,
                       std::span<const double> held_state) const;
  /// σ or σ‖x‖.
  double threshold(std::span<const double> current_state) const;

 private:
  TriggerKind kind_;
  double sigma_;
  Matrix gain_;
};

/// φ(x, x̂) > threshold (strict).
bool should_trigger(const TriggerPolicy& policy, std::span<const double> current_state,
                    std::span<const double> held_state);

}  // namespace wcrisk
