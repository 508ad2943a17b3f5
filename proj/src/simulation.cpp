#include "wcrisk/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <thread>

#include "wcrisk/error.hpp"
#include "wcrisk/risk.hpp"

namespace wcrisk {

namespace {

[[noreturn]] void invalid(const std::string& msg) {
  throw Error(ErrorKind::invalid_input, msg);
}

void validate_plant(const Plant& plant, const Controller& controller, std::size_t state_dim,
                    std::size_t noise_dim) {
  if (plant.a.empty() || !plant.a.is_square()) invalid("rollout: a must be square");
  if (plant.a.rows() != state_dim) invalid("rollout: x0 dimension does not match a");
  if (plant.e.rows() != state_dim) invalid("rollout: e must have as many rows as a");
  if (plant.e.cols() != noise_dim) invalid("rollout: e columns do not match the sampler dimension");
  if (controller.kind == ControllerKind::none) return;
  if (plant.b.rows() != state_dim || plant.b.empty()) invalid("rollout: feedback needs b");
  if (plant.k.rows() != plant.b.cols() || plant.k.cols() != state_dim) {
    invalid("rollout: k must be (inputs x states)");
  }
  if (controller.kind == ControllerKind::event_triggered && !controller.policy) {
    invalid("rollout: event-triggered controller without a policy");
  }
}

}  // namespace

std::string_view to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::gaussian: return "gaussian";
    case SamplerKind::student_t: return "student_t";
    case SamplerKind::scaled_uniform: return "scaled_uniform";
    case SamplerKind::two_point: return "two_point";
  }
  return "unknown";
}

SamplerKind parse_sampler_kind(std::string_view text) {
  if (text == "uniform") return SamplerKind::scaled_uniform;
  for (auto kind : {SamplerKind::gaussian, SamplerKind::student_t, SamplerKind::scaled_uniform,
                    SamplerKind::two_point}) {
    if (text == to_string(kind)) return kind;
  }
  invalid("unknown sampler kind '" + std::string(text) + "'");
}

DisturbanceSampler::DisturbanceSampler(SamplerKind kind, Matrix covariance, std::uint64_t seed,
                                       double dof)
    : kind_(kind), covariance_(std::move(covariance)), seed_(seed), dof_(dof) {
  // Reuse the ambiguity-set validation (symmetric PSD); the level is unused.
  MomentAmbiguitySet check(covariance_, 0.5);
  if (kind_ == SamplerKind::student_t && !(dof_ > 2.0)) {
    invalid("student_t sampler needs dof > 2 for a finite covariance");
  }
  sqrt_cov_ = psd_sqrt(covariance_);
}

DisturbanceSampler DisturbanceSampler::with_seed(std::uint64_t seed) const {
  DisturbanceSampler copy = *this;
  copy.seed_ = seed;
  return copy;
}

Vector DisturbanceSampler::draw(CounterRng& rng) const {
  const std::size_t n = dimension();
  Vector z(n);
  switch (kind_) {
    case SamplerKind::gaussian: {
      std::normal_distribution<double> dist;
      for (double& x : z) x = dist(rng);
      break;
    }
    case SamplerKind::student_t: {
      std::student_t_distribution<double> dist(dof_);
      const double scale = std::sqrt((dof_ - 2.0) / dof_);
      for (double& x : z) x = scale * dist(rng);
      break;
    }
    case SamplerKind::scaled_uniform: {
      const double half_width = std::sqrt(3.0);
      std::uniform_real_distribution<double> dist(-half_width, half_width);
      for (double& x : z) x = dist(rng);
      break;
    }
    case SamplerKind::two_point: {
      for (double& x : z) x = (rng() >> 63U) != 0 ? 1.0 : -1.0;
      break;
    }
  }
  return sqrt_cov_ * z;
}

bool TrajectoryRecord::triggered_at(unsigned t) const {
  return std::binary_search(trigger_times.begin(), trigger_times.end(), t);
}

TrajectoryRecord rollout(const Plant& plant, const Controller& controller, const Vector& x0,
                         unsigned horizon, const DisturbanceSampler& sampler) {
  if (horizon == 0) invalid("rollout: horizon must be at least 1");
  validate_plant(plant, controller, x0.size(), sampler.dimension());

  CounterRng rng(sampler.seed());
  const std::size_t n_inputs = controller.kind == ControllerKind::none ? 0 : plant.b.cols();

  TrajectoryRecord rec;
  rec.states.reserve(horizon + 1);
  rec.inputs.reserve(horizon);
  rec.held_states.reserve(horizon);
  rec.disturbances.reserve(horizon);
  rec.states.push_back(x0);

  Vector held = x0;
  for (unsigned t = 0; t < horizon; ++t) {
    const Vector& x = rec.states.back();
    bool refresh = false;
    switch (controller.kind) {
      case ControllerKind::none: break;
      case ControllerKind::periodic_feedback: refresh = true; break;
      case ControllerKind::event_triggered:
        refresh = t == 0 || should_trigger(*controller.policy, x, held);
        break;
    }
    if (refresh) {
      held = x;
      rec.trigger_times.push_back(t);
    }

    Vector u = n_inputs == 0 ? Vector{} : plant.k * held;
    Vector w = sampler.draw(rng);
    Vector next = plant.a * x;
    if (n_inputs > 0) next = add(next, plant.b * u);
    next = add(next, plant.e * w);

    rec.held_states.push_back(controller.kind == ControllerKind::none ? x : held);
    rec.inputs.push_back(std::move(u));
    rec.disturbances.push_back(std::move(w));
    rec.states.push_back(std::move(next));
  }
  return rec;
}

RiskSummary ensemble(const Plant& plant, const Controller& controller, const Vector& x0,
                     unsigned horizon, const DisturbanceSampler& sampler,
                     const EnsembleOptions& options) {
  if (options.runs < 2) invalid("ensemble: at least two runs are required");
  if (!(options.level > 0.0 && options.level < 1.0)) invalid("ensemble: level must lie in (0, 1)");
  if (horizon == 0) invalid("ensemble: horizon must be at least 1");
  validate_plant(plant, controller, x0.size(), sampler.dimension());

  const unsigned runs = options.runs;
  std::vector<std::vector<double>> per_run(runs);
  std::vector<std::size_t> updates(runs, 0);

  auto work = [&](unsigned begin, unsigned end) {
    for (unsigned i = begin; i < end; ++i) {
      const std::uint64_t seed = options.distinct_streams
                                     ? CounterRng::stream_key(sampler.seed(), i)
                                     : sampler.seed();
      const auto rec = rollout(plant, controller, x0, horizon, sampler.with_seed(seed));
      auto& losses = per_run[i];
      losses.reserve(rec.states.size());
      for (const auto& x : rec.states) losses.push_back(norm_sq(x));
      updates[i] = rec.update_count();
    }
  };

  const unsigned workers = std::clamp(options.workers, 1U, runs);
  if (workers == 1) {
    work(0, runs);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const unsigned chunk = (runs + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const unsigned begin = std::min(runs, w * chunk);
      const unsigned end = std::min(runs, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
  }

  RiskSummary out;
  out.level = options.level;
  const std::size_t steps = static_cast<std::size_t>(horizon) + 1;
  out.losses.assign(steps, std::vector<double>(runs));
  for (unsigned i = 0; i < runs; ++i) {
    for (std::size_t t = 0; t < steps; ++t) out.losses[t][i] = per_run[i][t];
  }
  for (std::size_t t = 0; t < steps; ++t) {
    const auto& col = out.losses[t];
    const auto est = estimate_cvar(col, options.level);
    out.cvar.push_back(est.value);
    out.cvar_stderr.push_back(est.standard_error);
    out.mean.push_back(std::accumulate(col.begin(), col.end(), 0.0) / runs);
    out.max.push_back(*std::max_element(col.begin(), col.end()));
  }

  out.update_counts = std::move(updates);
  out.update_mean = static_cast<double>(std::accumulate(out.update_counts.begin(),
                                                        out.update_counts.end(), std::size_t{0})) /
                    runs;
  const auto [lo, hi] = std::minmax_element(out.update_counts.begin(), out.update_counts.end());
  out.update_min = *lo;
  out.update_max = *hi;

  const std::size_t from = std::min<std::size_t>(options.violation_from, horizon);
  out.run_peaks.resize(runs);
  for (unsigned i = 0; i < runs; ++i) {
    out.run_peaks[i] = *std::max_element(per_run[i].begin() + from, per_run[i].end());
  }
  if (options.radius_sq) {
    const auto violations = std::count_if(out.run_peaks.begin(), out.run_peaks.end(),
                                          [&](double p) { return p > *options.radius_sq; });
    out.violation_fraction = static_cast<double>(violations) / runs;
  }
  return out;
}

Vector closed_form_crosscheck(const Matrix& a, const Matrix& d, const Matrix& e, const Vector& x0,
                              const std::vector<Vector>& inputs,
                              const std::vector<Vector>& disturbances) {
  if (!a.is_square() || a.rows() != x0.size()) invalid("closed_form_crosscheck: a/x0 mismatch");
  const std::size_t t = disturbances.size();
  if (d.empty() ? !inputs.empty() : inputs.size() != t) {
    invalid("closed_form_crosscheck: input and disturbance sequences differ in length");
  }
  if (t == 0) return x0;

  // Column blocks ordered oldest first: a^{t−1}m, …, a m, m.
  auto stacked = [&](const Matrix& m) {
    std::vector<Matrix> blocks(t);
    Matrix term = m;
    for (std::size_t k = t; k-- > 0;) {
      blocks[k] = term;
      term = a * term;
    }
    return hstack(blocks);
  };
  auto concat = [](const std::vector<Vector>& seq, std::size_t width, const char* what) {
    Vector out;
    for (const auto& v : seq) {
      if (v.size() != width) invalid(std::string("closed_form_crosscheck: bad ") + what + " length");
      out.insert(out.end(), v.begin(), v.end());
    }
    return out;
  };

  Vector x = power(a, static_cast<unsigned>(t)) * x0;
  x = add(x, stacked(e) * concat(disturbances, e.cols(), "disturbance"));
  if (!d.empty()) x = add(x, stacked(d) * concat(inputs, d.cols(), "input"));
  return x;
}

}  // namespace wcrisk
