#include "wcrisk/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "wcrisk/error.hpp"

namespace wcrisk::cli {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& msg) {
  throw Error(ErrorKind::invalid_input, "config: " + msg);
}

Matrix matrix_from(const json& j, const char* name) {
  if (!j.is_array() || j.empty()) invalid(std::string(name) + " must be a non-empty list of rows");
  std::vector<Vector> rows;
  for (const auto& row : j) {
    if (!row.is_array() || row.empty()) invalid(std::string(name) + " rows must be non-empty lists");
    Vector r;
    for (const auto& x : row) {
      if (!x.is_number()) invalid(std::string(name) + " entries must be numbers");
      r.push_back(x.get<double>());
    }
    rows.push_back(std::move(r));
  }
  try {
    Matrix m = Matrix::from_rows(rows);
    require_finite(m, name);
    return m;
  } catch (const Error& e) {
    invalid(std::string(name) + ": " + e.what());
  }
}

json matrix_to(const Matrix& m) { return m.to_rows(); }

const json& required(const json& j, const char* key) {
  if (!j.contains(key)) invalid(std::string("missing required key '") + key + "'");
  return j.at(key);
}

template <typename T>
T number_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number()) invalid(std::string("'") + key + "' must be a number");
  if constexpr (std::is_unsigned_v<T>) {
    if (!v.is_number_unsigned()) invalid(std::string("'") + key + "' must be a nonnegative integer");
  }
  return v.get<T>();
}

TriggerSpec trigger_from(const json& j) {
  TriggerSpec spec;
  if (!j.is_object()) invalid("'trigger' must be an object");
  spec.corollary = j.contains("corollary") ? j.at("corollary").get<int>() : 0;
  if (spec.corollary < 0 || spec.corollary > 4) invalid("trigger corollary must be 0..4");
  spec.relative = j.value("relative", false);
  if (spec.relative && spec.corollary != 4) invalid("'relative' applies to corollary 4 only");
  if (spec.corollary == 0) {
    if (!j.contains("kind")) invalid("explicit trigger needs 'kind'");
    spec.kind = parse_trigger_kind(j.at("kind").get<std::string>());
  } else {
    spec.kind = corollary_trigger_kind(spec.corollary, spec.relative);
  }
  const auto sigma = j.value("sigma", json("max"));
  if (sigma.is_string()) {
    if (sigma.get<std::string>() != "max") invalid("trigger sigma must be a number or \"max\"");
    if (spec.corollary == 0) invalid("sigma \"max\" needs a corollary");
  } else if (sigma.is_number()) {
    spec.sigma = sigma.get<double>();
    if (!(*spec.sigma >= 0.0) || std::isinf(*spec.sigma)) invalid("trigger sigma must be >= 0");
  } else {
    invalid("trigger sigma must be a number or \"max\"");
  }
  return spec;
}

json trigger_to(const TriggerSpec& spec) {
  json j;
  if (spec.corollary > 0) {
    j["corollary"] = spec.corollary;
    if (spec.relative) j["relative"] = true;
  } else {
    j["kind"] = std::string(to_string(spec.kind));
  }
  j["sigma"] = spec.sigma ? json(*spec.sigma) : json("max");
  return j;
}

}  // namespace

ExperimentConfig reference_example() {
  ExperimentConfig c;
  c.a = Matrix{{1.2, 0.3}, {0.0, 0.5}};
  c.b = Matrix{{1.0}, {0.5}};
  c.e = Matrix{{1.0, 2.0}, {0.5, -0.5}};
  c.k = Matrix{{-0.7, -0.2}};
  c.sigma_w = Matrix{{0.5, 0.0}, {0.0, 0.25}};
  c.epsilon = 0.3;
  c.x0 = {2.0, 3.0};
  c.horizon = 60;
  c.runs = 500;
  c.seed = 42;
  c.radius = 6.0;
  return c;
}

ExperimentConfig preset(std::string_view name) {
  if (name == "paper-example") return reference_example();
  invalid("unknown preset '" + std::string(name) + "'");
}

ExperimentConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    invalid(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) invalid("top level must be an object");

  try {
    ExperimentConfig c;
    const auto& sys = required(j, "system");
    c.a = matrix_from(required(sys, "A"), "A");
    c.b = matrix_from(required(sys, "B"), "B");
    c.e = matrix_from(required(sys, "E"), "E");
    c.k = matrix_from(required(sys, "K"), "K");
    c.sigma_w = matrix_from(required(sys, "sigma_w"), "sigma_w");
    c.epsilon = required(j, "epsilon").get<double>();
    c.x0 = required(j, "x0").get<Vector>();
    c.horizon = number_or(j, "horizon", c.horizon);
    c.runs = number_or(j, "runs", c.runs);
    c.seed = number_or(j, "seed", c.seed);
    c.radius = number_or(j, "radius", c.radius);
    c.workers = number_or(j, "workers", c.workers);
    if (j.contains("trigger")) c.trigger = trigger_from(j.at("trigger"));
    if (j.contains("sampler")) {
      const auto& s = j.at("sampler");
      c.sampler = parse_sampler_kind(s.value("kind", std::string("gaussian")));
      c.dof = number_or(s, "dof", c.dof);
    }
    c.output_dir = j.value("output_dir", c.output_dir);
    c.baseline_periodic = j.value("baseline_periodic", c.baseline_periodic);
    if (c.horizon == 0) invalid("horizon must be at least 1");
    if (c.runs < 2) invalid("runs must be at least 2");
    return c;
  } catch (const json::exception& e) {
    invalid(std::string("wrong value type: ") + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["system"] = {{"A", matrix_to(c.a)},
                 {"B", matrix_to(c.b)},
                 {"E", matrix_to(c.e)},
                 {"K", matrix_to(c.k)},
                 {"sigma_w", matrix_to(c.sigma_w)}};
  j["epsilon"] = c.epsilon;
  j["x0"] = c.x0;
  j["horizon"] = c.horizon;
  j["runs"] = c.runs;
  j["seed"] = c.seed;
  j["radius"] = c.radius;
  j["trigger"] = trigger_to(c.trigger);
  j["sampler"] = {{"kind", std::string(to_string(c.sampler))}, {"dof", c.dof}};
  j["output_dir"] = c.output_dir;
  j["baseline_periodic"] = c.baseline_periodic;
  j["workers"] = c.workers;
  return j;
}

std::string serialize(const ExperimentConfig& config) { return to_json(config).dump(2) + "\n"; }

TriggerSpec parse_trigger_flag(std::string_view text, const TriggerSpec& current) {
  TriggerSpec spec = current;
  if (text.starts_with("cor")) {
    std::string_view rest = text.substr(3);
    spec.relative = false;
    if (rest.ends_with("-rel")) {
      spec.relative = true;
      rest.remove_suffix(4);
    }
    if (rest.size() != 1 || rest[0] < '1' || rest[0] > '4') {
      invalid("trigger must be cor1..cor4, cor4-rel or sigma=VALUE");
    }
    spec.corollary = rest[0] - '0';
    if (spec.relative && spec.corollary != 4) invalid("'-rel' applies to cor4 only");
    spec.kind = corollary_trigger_kind(spec.corollary, spec.relative);
    spec.sigma.reset();
    return spec;
  }
  if (text.starts_with("sigma=")) {
    const std::string value(text.substr(6));
    std::size_t used = 0;
    double sigma = 0.0;
    try {
      sigma = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (value.empty() || used != value.size() || !(sigma >= 0.0) || std::isinf(sigma)) {
      invalid("sigma=VALUE needs a finite nonnegative number");
    }
    spec.sigma = sigma;
    return spec;
  }
  invalid("trigger must be cor1..cor4, cor4-rel or sigma=VALUE");
}

std::string trigger_label(const TriggerSpec& spec) {
  std::string label = spec.corollary > 0 ? "cor" + std::to_string(spec.corollary) : "explicit";
  if (spec.relative) label += "-rel";
  return label;
}

ClosedLoopSystem build_system(const ExperimentConfig& c) {
  if (c.horizon == 0) invalid("horizon must be at least 1");
  if (c.runs < 2) invalid("runs must be at least 2");
  if (!(c.radius > 0.0) || std::isinf(c.radius)) invalid("radius must be positive");
  if (c.x0.size() != c.a.rows()) invalid("x0 dimension does not match A");
  if (c.sampler == SamplerKind::student_t && !(c.dof > 2.0)) invalid("student_t dof must exceed 2");
  return ClosedLoopSystem(c.a, c.b, c.e, c.k, MomentAmbiguitySet(c.sigma_w, c.epsilon));
}

TriggerPolicy resolve_trigger(const ExperimentConfig& config, const ClosedLoopSystem& cl) {
  const auto& spec = config.trigger;
  const double sigma = spec.sigma ? *spec.sigma : sigma_max(cl, spec.corollary, config.radius);
  return TriggerPolicy(spec.kind, sigma, cl.k());
}

std::optional<LinearStochasticSystem> error_channel_system(const ClosedLoopSystem& cl,
                                                           const TriggerPolicy& policy) {
  switch (policy.kind()) {
    case TriggerKind::state_error_abs: return cl.with_state_error(policy.sigma());
    case TriggerKind::input_error_abs: return cl.with_input_error(policy.sigma());
    case TriggerKind::state_error_rel:
    case TriggerKind::input_error_rel: return std::nullopt;
  }
  return std::nullopt;
}

std::optional<StabilityEnvelope> trigger_envelope(const ClosedLoopSystem& cl,
                                                  const TriggerPolicy& policy) {
  const auto sys = error_channel_system(cl, policy);
  if (!sys) return std::nullopt;
  const double drive = sys->d_norm() * *sys->input_bound();
  const double root = std::sqrt(sys->risk_trace());
  if (drive == 0.0 || root == 0.0) return stability_envelope(sys->without_input(), 1.0);
  const double alpha2 = std::sqrt((1.0 - sys->a_norm()) / drive * root);
  return stability_envelope(*sys, 1.0, alpha2);
}

}  // namespace wcrisk::cli
