#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "wcrisk/linalg.hpp"
#include "wcrisk/simulation.hpp"
#include "wcrisk/triggers.hpp"

namespace wcrisk::cli {

/// Which trigger to run. corollary 1..4 picks the kind that corollary's
/// threshold is derived for; corollary 0 means an explicit kind. A missing
/// sigma means "max", the corollary's largest admissible threshold.
struct TriggerSpec {
  int corollary = 1;
  TriggerKind kind = TriggerKind::state_error_abs;
  std::optional<double> sigma;
  bool relative = false;  // corollary 4 only: ‖k e‖ > σ‖x‖

  friend bool operator==(const TriggerSpec&, const TriggerSpec&) = default;
};

struct ExperimentConfig {
  Matrix a, b, e, k, sigma_w;
  double epsilon = 0.3;
  Vector x0;
  unsigned horizon = 60;
  unsigned runs = 500;
  std::uint64_t seed = 42;
  double radius = 6.0;
  TriggerSpec trigger;
  SamplerKind sampler = SamplerKind::gaussian;
  double dof = 5.0;
  std::string output_dir = "out";
  bool baseline_periodic = false;
  unsigned workers = 1;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Built-in "paper-example" preset: two-state plant behind the reference
/// regression values, ε = 0.3, x₀ = (2, 3), 60
/// steps, corollary-1 trigger at r = 6.
ExperimentConfig reference_example();

ExperimentConfig preset(std::string_view name);

/// Parses the JSON config text. Required: system.{A,B,E,K,sigma_w}, epsilon,
/// x0. Everything else falls back to the defaults above. Throws
/// invalid_input on malformed text or values.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

nlohmann::json to_json(const ExperimentConfig& config);
std::string serialize(const ExperimentConfig& config);

/// "cor1".."cor4", "cor4-rel", or "sigma=VALUE" (keeps the configured kind).
TriggerSpec parse_trigger_flag(std::string_view text, const TriggerSpec& current);
std::string trigger_label(const TriggerSpec& spec);

/// Constructs the closed loop, checking every construction invariant.
ClosedLoopSystem build_system(const ExperimentConfig& config);

/// Resolves the configured trigger to a concrete policy. sigma "max" is
/// synthesized from the matching corollary and throws infeasible_radius
/// when the radius condition fails.
TriggerPolicy resolve_trigger(const ExperimentConfig& config, const ClosedLoopSystem& cl);

/// Bounded-input view of the closed loop under `policy` (d = b k for state
/// errors, d = b for input errors, bound σ). Empty for relative triggers,
/// whose error is not bounded by a constant.
std::optional<LinearStochasticSystem> error_channel_system(const ClosedLoopSystem& cl,
                                                           const TriggerPolicy& policy);

/// Envelope with α₁ = 1 that bounds the worst-case CVaR of ‖x_t‖² under
/// `policy`: the input-to-state envelope with α₂ from the ultimate-bound
/// rule, or the autonomous one when the channel degenerates. Empty for
/// relative triggers.
std::optional<StabilityEnvelope> trigger_envelope(const ClosedLoopSystem& cl,
                                                  const TriggerPolicy& policy);

}  // namespace wcrisk::cli
