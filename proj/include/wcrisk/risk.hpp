#pragma once

#include <optional>
#include <span>

#include "wcrisk/linalg.hpp"

namespace wcrisk {

/// Family of zero-mean distributions sharing one covariance, together with
/// the CVaR level ε the analysis is carried out at.
class MomentAmbiguitySet {
 public:
  /// Throws invalid_input unless `covariance` is square, finite, symmetric
  /// (1e-12) and positive semidefinite, and 0 < level < 1.
  MomentAmbiguitySet(Matrix covariance, double level);

  std::size_t dimension() const noexcept { return covariance_.rows(); }
  const Matrix& covariance() const noexcept { return covariance_; }
  double level() const noexcept { return level_; }

  MomentAmbiguitySet with_level(double level) const { return {covariance_, level}; }

 private:
  Matrix covariance_;
  double level_;
};

/// L(ξ) = ‖a ξ + b‖² + c.
struct QuadraticLoss {
  Matrix a;
  Vector b;
  double c = 0.0;

  static QuadraticLoss pure(Matrix a) {
    Vector b(a.rows(), 0.0);
    return {std::move(a), std::move(b), 0.0};
  }
};

struct CvarBounds {
  double lower = 0.0;
  double upper = 0.0;
  std::optional<double> exact;  // present iff b = 0 and c = 0
};

/// Sandwich bounds on sup_P CVaR_ε[L] for zero-mean quadratic losses:
///   lower = c + bᵀb + Tr(Σ aᵀa)/ε,  upper = c + (Tr(Σ aᵀa) + bᵀb)/ε.
/// Both collapse to the exact worst case when b = 0 and c = 0.
CvarBounds worst_case_cvar_bounds(const MomentAmbiguitySet& set, const QuadraticLoss& loss);

/// Worst-case CVaR of ‖a ξ̄‖² where ξ̄ stacks `horizon` i.i.d. draws from the
/// set: Tr((I_m ⊗ Σ) aᵀa)/ε. Evaluated block-wise without forming the
/// Kronecker product.
double worst_case_cvar_augmented(const MomentAmbiguitySet& set, std::size_t horizon,
                                 const Matrix& a);

/// Sample CVaR: min_β β + mean((x − β)⁺)/ε, evaluated exactly over the order
/// statistics (the objective is piecewise linear with breakpoints at samples).
double empirical_cvar(std::span<const double> samples, double level);

struct CvarEstimate {
  double value = 0.0;
  double value_at_risk = 0.0;   // minimizing β
  double standard_error = 0.0;  // sd(β + (x − β)⁺/ε)/√N
};

CvarEstimate estimate_cvar(std::span<const double> samples, double level);

struct CoherenceReport {
  bool positive_homogeneity = false;
  bool translation_invariance = false;
  bool subadditivity = false;
  bool monotonicity = false;

  bool all() const {
    return positive_homogeneity && translation_invariance && subadditivity && monotonicity;
  }
};

/// Checks the four coherence axioms on the closed-form worst-case values for
/// pure quadratic losses (b = 0, c = 0). `scale` multiplies the loss value,
/// `shift` is added to it. Monotonicity is vacuously true when a₁ᵀa₁ ⪯ a₂ᵀa₂
/// does not hold.
CoherenceReport coherence_check(const MomentAmbiguitySet& set, const QuadraticLoss& l1,
                                const QuadraticLoss& l2, double scale, double shift);

}  // namespace wcrisk
