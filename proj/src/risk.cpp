#include "wcrisk/risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "wcrisk/error.hpp"

namespace wcrisk {

namespace {

constexpr double kSymmetryTolerance = 1e-12;
constexpr double kPsdTolerance = 1e-12;
constexpr double kCoherenceTolerance = 1e-9;

[[noreturn]] void invalid(const std::string& msg) {
  throw Error(ErrorKind::invalid_input, msg);
}

void require_level(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    invalid("CVaR level must lie in (0, 1), got " + std::to_string(level));
  }
}

// Tr(Σ aᵀa) = Tr(a Σ aᵀ).
double weighted_trace(const Matrix& covariance, const Matrix& a) {
  return trace(a * covariance * a.transpose());
}

bool close(double x, double y) {
  return std::abs(x - y) <= kCoherenceTolerance * (1.0 + std::max(std::abs(x), std::abs(y)));
}

}  // namespace

MomentAmbiguitySet::MomentAmbiguitySet(Matrix covariance, double level)
    : covariance_(std::move(covariance)), level_(level) {
  require_level(level_);
  if (covariance_.empty() || !covariance_.is_square()) {
    invalid("ambiguity set: covariance must be a non-empty square matrix");
  }
  require_finite(covariance_, "ambiguity set covariance");
  const double scale = std::max(1.0, frobenius_norm(covariance_));
  for (std::size_t i = 0; i < dimension(); ++i) {
    for (std::size_t j = i + 1; j < dimension(); ++j) {
      if (std::abs(covariance_(i, j) - covariance_(j, i)) > kSymmetryTolerance * scale) {
        invalid("ambiguity set: covariance is not symmetric");
      }
    }
  }
  if (symmetric_eigen(covariance_).values.front() < -kPsdTolerance * scale) {
    invalid("ambiguity set: covariance is not positive semidefinite");
  }
}

CvarBounds worst_case_cvar_bounds(const MomentAmbiguitySet& set, const QuadraticLoss& loss) {
  if (loss.a.cols() != set.dimension()) {
    invalid("worst_case_cvar_bounds: loss matrix has " + std::to_string(loss.a.cols()) +
            " columns, ambiguity set dimension is " + std::to_string(set.dimension()));
  }
  if (loss.b.size() != loss.a.rows()) {
    invalid("worst_case_cvar_bounds: offset vector length must equal loss matrix rows");
  }
  const double eps = set.level();
  const double tr = weighted_trace(set.covariance(), loss.a);
  const double btb = norm_sq(loss.b);

  CvarBounds out;
  out.lower = loss.c + btb + tr / eps;
  out.upper = loss.c + (tr + btb) / eps;
  if (btb == 0.0 && loss.c == 0.0) out.exact = tr / eps;
  return out;
}

double worst_case_cvar_augmented(const MomentAmbiguitySet& set, std::size_t horizon,
                                 const Matrix& a) {
  const std::size_t n = set.dimension();
  if (horizon == 0) invalid("worst_case_cvar_augmented: horizon must be positive");
  if (a.cols() != n * horizon) {
    invalid("worst_case_cvar_augmented: expected " + std::to_string(n * horizon) +
            " columns, got " + std::to_string(a.cols()));
  }
  // Block-diagonal covariance: only the diagonal blocks a_kᵀa_k contribute.
  const Matrix& cov = set.covariance();
  double total = 0.0;
  for (std::size_t block = 0; block < horizon; ++block) {
    const std::size_t off = block * n;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (cov(i, j) == 0.0) continue;
        double gram = 0.0;
        for (std::size_t r = 0; r < a.rows(); ++r) gram += a(r, off + j) * a(r, off + i);
        total += cov(i, j) * gram;
      }
    }
  }
  return total / set.level();
}

CvarEstimate estimate_cvar(std::span<const double> samples, double level) {
  if (samples.empty()) invalid("empirical_cvar: no samples");
  if (std::any_of(samples.begin(), samples.end(), [](double x) { return std::isnan(x); })) {
    invalid("empirical_cvar: NaN sample");
  }
  require_level(level);
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double denom = level * static_cast<double>(n);

  // Objective at β = x_(k): x_(k) + (Σ_{j>k} x_(j) − (n−1−k) x_(k)) / (ε n).
  double suffix = 0.0;
  double best = std::numeric_limits<double>::infinity();
  double best_beta = sorted.back();
  for (std::size_t k = n; k-- > 0;) {
    const double beta = sorted[k];
    const double tail = suffix - static_cast<double>(n - 1 - k) * beta;
    const double objective = beta + tail / denom;
    if (objective < best) {
      best = objective;
      best_beta = beta;
    }
    suffix += sorted[k];
  }

  CvarEstimate out{best, best_beta, 0.0};
  if (n > 1) {
    double mean = 0.0;
    for (double x : sorted) mean += best_beta + std::max(0.0, x - best_beta) / level;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double x : sorted) {
      const double psi = best_beta + std::max(0.0, x - best_beta) / level;
      var += (psi - mean) * (psi - mean);
    }
    var /= static_cast<double>(n - 1);
    out.standard_error = std::sqrt(var / static_cast<double>(n));
  }
  return out;
}

double empirical_cvar(std::span<const double> samples, double level) {
  return estimate_cvar(samples, level).value;
}

CoherenceReport coherence_check(const MomentAmbiguitySet& set, const QuadraticLoss& l1,
                                const QuadraticLoss& l2, double scale, double shift) {
  if (l1.a.cols() != set.dimension() || l2.a.cols() != set.dimension()) {
    invalid("coherence_check: loss dimension does not match ambiguity set");
  }
  if (!(scale > 0.0)) invalid("coherence_check: scale must be positive");
  if (!std::isfinite(shift)) invalid("coherence_check: shift must be finite");
  if (norm_sq(l1.b) != 0.0 || l1.c != 0.0 || norm_sq(l2.b) != 0.0 || l2.c != 0.0) {
    invalid("coherence_check: losses must have b = 0 and c = 0");
  }

  const double v1 = *worst_case_cvar_bounds(set, l1).exact;
  const double v2 = *worst_case_cvar_bounds(set, l2).exact;
  CoherenceReport report;

  // scale·‖aξ‖² = ‖√scale·aξ‖².
  const double scaled = *worst_case_cvar_bounds(set, QuadraticLoss::pure(l1.a * std::sqrt(scale))).exact;
  report.positive_homogeneity = close(scaled, scale * v1);

  QuadraticLoss shifted = QuadraticLoss::pure(l1.a);
  shifted.c = shift;
  const auto base = worst_case_cvar_bounds(set, l1);
  const auto moved = worst_case_cvar_bounds(set, shifted);
  report.translation_invariance =
      close(moved.lower, base.lower + shift) && close(moved.upper, base.upper + shift);

  // ‖[a₁; a₂]ξ‖² = ‖a₁ξ‖² + ‖a₂ξ‖² pointwise.
  const double summed = *worst_case_cvar_bounds(set, QuadraticLoss::pure(vstack({l1.a, l2.a}))).exact;
  report.subadditivity = summed <= v1 + v2 + kCoherenceTolerance * (1.0 + std::abs(v1 + v2));

  const Matrix gap = l2.a.transpose() * l2.a - l1.a.transpose() * l1.a;
  const double gap_scale = std::max(1.0, frobenius_norm(gap));
  const bool dominated = symmetric_eigen(gap).values.front() >= -1e-12 * gap_scale;
  report.monotonicity = !dominated || v1 <= v2 + kCoherenceTolerance * (1.0 + std::abs(v2));
  return report;
}

}  // namespace wcrisk
