#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "wcrisk/linalg.hpp"
#include "wcrisk/rng.hpp"
#include "wcrisk/triggers.hpp"

namespace wcrisk {

enum class SamplerKind { gaussian, student_t, scaled_uniform, two_point };

std::string_view to_string(SamplerKind kind);
/// Accepts the canonical names plus "uniform" for scaled_uniform.
SamplerKind parse_sampler_kind(std::string_view text);

/// Zero-mean disturbance with an exact target covariance Σ. Standardized
/// i.i.d. components z (unit variance) are mapped through the symmetric
/// square root, w = Σ^{1/2} z, so every kind is a member of the moment
/// ambiguity set:
///   gaussian        z ~ N(0, 1)
///   student_t       z = t_ν·√((ν−2)/ν), ν > 2 (default 5)
///   scaled_uniform  z ~ U(−√3, √3)
///   two_point       z = ±1 with probability ½
class DisturbanceSampler {
 public:
  DisturbanceSampler(SamplerKind kind, Matrix covariance, std::uint64_t seed, double dof = 5.0);

  SamplerKind kind() const noexcept { return kind_; }
  const Matrix& covariance() const noexcept { return covariance_; }
  std::uint64_t seed() const noexcept { return seed_; }
  double dof() const noexcept { return dof_; }
  std::size_t dimension() const noexcept { return covariance_.rows(); }

  DisturbanceSampler with_seed(std::uint64_t seed) const;

  Vector draw(CounterRng& rng) const;

 private:
  SamplerKind kind_;
  Matrix covariance_;
  Matrix sqrt_cov_;
  std::uint64_t seed_;
  double dof_;
};

/// Plant x_{t+1} = a x_t + b u_t + e w_t. `b` and `k` may be empty when only
/// the uncontrolled loop is simulated.
struct Plant {
  Matrix a;
  Matrix b;
  Matrix e;
  Matrix k;

  static Plant from(const ClosedLoopSystem& cl) { return {cl.a(), cl.b(), cl.e(), cl.k()}; }
};

enum class ControllerKind { none, periodic_feedback, event_triggered };

struct Controller {
  ControllerKind kind = ControllerKind::none;
  std::optional<TriggerPolicy> policy;

  static Controller none() { return {}; }
  static Controller periodic() { return {ControllerKind::periodic_feedback, std::nullopt}; }
  static Controller event_triggered(TriggerPolicy p) {
    return {ControllerKind::event_triggered, std::move(p)};
  }
};

struct TrajectoryRecord {
  std::vector<Vector> states;         // x_0 … x_H
  std::vector<Vector> inputs;         // u_0 … u_{H−1}
  std::vector<Vector> held_states;    // x̂_0 … x̂_{H−1}
  std::vector<Vector> disturbances;   // w_0 … w_{H−1}
  std::vector<unsigned> trigger_times;

  std::size_t horizon() const noexcept { return inputs.size(); }
  std::size_t update_count() const noexcept { return trigger_times.size(); }
  bool triggered_at(unsigned t) const;
};

/// Simulates `horizon` steps. Per step: observe x_t, compare with the held
/// x̂ and refresh it when the trigger fires (always at t = 0), apply
/// u_t = k x̂_t, then advance with a fresh disturbance. Periodic feedback
/// refreshes every step; `none` applies u = 0. Deterministic in the
/// sampler's seed.
TrajectoryRecord rollout(const Plant& plant, const Controller& controller, const Vector& x0,
                         unsigned horizon, const DisturbanceSampler& sampler);

struct EnsembleOptions {
  unsigned runs = 1000;
  double level = 0.3;
  unsigned workers = 1;
  /// Run i draws from CounterRng::stream_key(seed, i); false reuses the base
  /// seed for every run.
  bool distinct_streams = true;
  std::optional<double> radius_sq;
  unsigned violation_from = 0;
};

struct RiskSummary {
  double level = 0.0;
  std::vector<double> cvar;         // per t, empirical CVaR_ε of ‖x_t‖²
  std::vector<double> cvar_stderr;  // per t
  std::vector<double> mean;         // per t
  std::vector<double> max;          // per t
  std::vector<std::vector<double>> losses;  // [t][run] ‖x_t‖²
  std::vector<std::size_t> update_counts;   // per run
  double update_mean = 0.0;
  std::size_t update_min = 0;
  std::size_t update_max = 0;
  /// Per run max_{t ≥ violation_from} ‖x_t‖² and the fraction exceeding r².
  std::vector<double> run_peaks;
  std::optional<double> violation_fraction;
};

/// Independent rollouts aggregated per time step. Work is split across
/// `workers` threads; results are reduced in run order, so output is
/// bit-identical for any worker count.
RiskSummary ensemble(const Plant& plant, const Controller& controller, const Vector& x0,
                     unsigned horizon, const DisturbanceSampler& sampler,
                     const EnsembleOptions& options);

/// x_t = aᵗx₀ + G_t v̄_t + H_t w̄_t with G_t = [a^{t−1}d … d] and
/// H_t = [a^{t−1}e … e], t = disturbances.size(). `d` may be empty, in which
/// case `inputs` must be empty too.
Vector closed_form_crosscheck(const Matrix& a, const Matrix& d, const Matrix& e, const Vector& x0,
                              const std::vector<Vector>& inputs,
                              const std::vector<Vector>& disturbances);

}  // namespace wcrisk
