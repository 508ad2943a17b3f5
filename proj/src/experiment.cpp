#include "wcrisk/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "wcrisk/certificates.hpp"
#include "wcrisk/error.hpp"
#include "wcrisk/simulation.hpp"

namespace wcrisk::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fmt_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string fmt_optional(const std::optional<double>& x) { return x ? fmt_number(*x) : ""; }

fs::path ensure_output_dir(const ExperimentConfig& config) {
  const fs::path dir(config.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error(ErrorKind::io, "write failed for '" + path.string() + "'");
}

json certificate_json(const RiskCertificate& c) {
  json j = {{"kind", std::string(to_string(c.kind))},
            {"radius", c.radius},
            {"threshold", c.threshold_value},
            {"margin", c.margin},
            {"satisfied", c.satisfied},
            {"degenerate_input", c.degenerate_input}};
  j["alpha1"] = c.alpha1 ? json(*c.alpha1) : json(nullptr);
  j["alpha2"] = c.alpha2 ? json(*c.alpha2) : json(nullptr);
  j["slack"] = c.slack ? json(*c.slack) : json(nullptr);
  j["settling_time"] = c.settling_time ? json(*c.settling_time) : json(nullptr);
  return j;
}

std::optional<double> try_sigma_max(const ClosedLoopSystem& cl, int corollary, double radius,
                                    std::string* reason = nullptr) {
  try {
    return sigma_max(cl, corollary, radius);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::infeasible_radius) throw;
    if (reason) *reason = e.what();
    return std::nullopt;
  }
}

json summary_json(const RiskSummary& s) {
  json j = {{"runs", s.update_counts.size()},
            {"level", s.level},
            {"update_mean", s.update_mean},
            {"update_min", s.update_min},
            {"update_max", s.update_max},
            {"cvar", s.cvar},
            {"cvar_stderr", s.cvar_stderr},
            {"mean", s.mean},
            {"max", s.max}};
  j["violation_fraction"] = s.violation_fraction ? json(*s.violation_fraction) : json(nullptr);
  return j;
}

std::vector<double> envelope_series(const StabilityEnvelope& env, unsigned horizon,
                                    double x0_norm_sq, double input_norm_sq) {
  std::vector<double> out;
  for (unsigned t = 0; t <= horizon; ++t) out.push_back(env.value(t, x0_norm_sq, input_norm_sq));
  return out;
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_input:
    case ErrorKind::not_contractive:
    case ErrorKind::wrong_kind: return kExitInvalidConfig;
    case ErrorKind::infeasible_alpha:
    case ErrorKind::infeasible_radius: return kExitInfeasible;
    case ErrorKind::io: return kExitIo;
  }
  return 1;
}

json certify_report(const ExperimentConfig& config) {
  const auto cl = build_system(config);
  const auto& sys = cl.autonomous();
  const double r = config.radius;
  const double x0_sq = norm_sq(config.x0);

  json rep;
  rep["epsilon"] = config.epsilon;
  rep["radius"] = r;
  rep["closed_loop_norm"] = cl.closed_loop_norm();
  rep["b_norm"] = cl.b_norm();
  rep["bk_norm"] = cl.bk_norm();
  rep["trace_p"] = trace(sys.lyapunov_solution());
  rep["risk_trace"] = sys.risk_trace();
  rep["ultimate_radius"] = std::sqrt(sys.risk_trace());
  rep["noise_risk"] = sys.noise_risk();
  rep["invariance_radius"] = std::sqrt(sys.noise_risk()) / (1.0 - cl.closed_loop_norm());

  json sigmas = json::object();
  json reasons = json::object();
  std::optional<double> sig[5];
  for (int c = 1; c <= 4; ++c) {
    std::string reason;
    sig[c] = try_sigma_max(cl, c, r, &reason);
    const std::string key = "sigma" + std::to_string(c);
    sigmas[key] = sig[c] ? json(*sig[c]) : json(nullptr);
    if (!sig[c]) reasons[key] = reason;
  }
  rep["sigma_max"] = sigmas;
  rep["sigma_infeasible"] = reasons;

  // Robust verdicts at the synthesized state-error bound (0 when infeasible,
  // where they reduce to the autonomous verdicts).
  json certs = json::array();
  certs.push_back(certificate_json(ultimate_bound_certificate(sys, r, x0_sq)));
  certs.push_back(certificate_json(invariance_certificate(sys, r)));
  auto rub = certificate_json(
      robust_ultimate_bound_certificate(cl.with_state_error(sig[1].value_or(0.0)), r, x0_sq));
  rub["input_bound"] = sig[1].value_or(0.0);
  rub["channel"] = "state_error";
  certs.push_back(rub);
  auto rinv = certificate_json(robust_invariance_certificate(cl.with_state_error(sig[3].value_or(0.0)), r));
  rinv["input_bound"] = sig[3].value_or(0.0);
  rinv["channel"] = "state_error";
  certs.push_back(rinv);
  rep["certificates"] = certs;

  const auto& spec = config.trigger;
  json trig = {{"label", trigger_label(spec)}, {"kind", std::string(to_string(spec.kind))}};
  if (spec.sigma) {
    trig["sigma"] = *spec.sigma;
  } else {
    trig["sigma"] = sig[spec.corollary] ? json(*sig[spec.corollary]) : json(nullptr);
  }
  rep["trigger"] = trig;
  return rep;
}

int cmd_certify(const ExperimentConfig& config, std::ostream& out) {
  const json rep = certify_report(config);
  const auto dir = ensure_output_dir(config);
  write_file(dir / "report.json", rep.dump(2) + "\n");

  auto show = [](const json& v) { return v.is_null() ? std::string("infeasible") : fmt_number(v.get<double>()); };
  out << "epsilon                      " << fmt_number(rep["epsilon"]) << "\n"
      << "radius r                     " << fmt_number(rep["radius"]) << "\n"
      << "||A+BK||                     " << fmt_number(rep["closed_loop_norm"]) << "\n"
      << "Tr(P)                        " << fmt_number(rep["trace_p"]) << "\n"
      << "sqrt(Tr(P)/eps)              " << fmt_number(rep["ultimate_radius"]) << "\n"
      << "invariance radius            " << fmt_number(rep["invariance_radius"]) << "\n";
  for (const auto& c : rep["certificates"]) {
    out << std::left << std::setw(29) << c["kind"].get<std::string>()
        << (c["satisfied"].get<bool>() ? "satisfied" : "NOT satisfied")
        << "  (threshold " << fmt_number(c["threshold"]) << ", margin " << fmt_number(c["margin"])
        << ")\n";
  }
  for (int c = 1; c <= 4; ++c) {
    const std::string key = "sigma" + std::to_string(c);
    out << std::left << std::setw(29) << (key + "_max") << show(rep["sigma_max"][key]) << "\n";
  }
  out << "report written to " << (dir / "report.json").string() << "\n";

  const auto& spec = config.trigger;
  if (!spec.sigma && rep["sigma_max"]["sigma" + std::to_string(spec.corollary)].is_null()) {
    throw Error(ErrorKind::infeasible_radius,
                rep["sigma_infeasible"]["sigma" + std::to_string(spec.corollary)].get<std::string>());
  }
  return kExitOk;
}

std::string trajectory_csv(const TrajectoryRecord& rec) {
  const std::size_t n = rec.states.front().size();
  const std::size_t m = rec.inputs.empty() ? 0 : rec.inputs.front().size();
  std::ostringstream os;
  os << "t";
  for (std::size_t i = 1; i <= n; ++i) os << ",x" << i;
  for (std::size_t i = 1; i <= m; ++i) os << ",u" << i;
  os << ",norm_sq,trigger\n";
  for (std::size_t t = 0; t < rec.states.size(); ++t) {
    os << t;
    for (double x : rec.states[t]) os << ',' << fmt_number(x);
    for (std::size_t i = 0; i < m; ++i) {
      os << ',';
      if (t < rec.inputs.size()) os << fmt_number(rec.inputs[t][i]);
    }
    os << ',' << fmt_number(norm_sq(rec.states[t])) << ','
       << (t < rec.horizon() && rec.triggered_at(static_cast<unsigned>(t)) ? 1 : 0) << "\n";
  }
  return os.str();
}

int cmd_simulate(const ExperimentConfig& config, std::ostream& out) {
  const auto cl = build_system(config);
  const auto policy = resolve_trigger(config, cl);
  const auto plant = Plant::from(cl);
  const DisturbanceSampler sampler(config.sampler, config.sigma_w, config.seed, config.dof);
  const double x0_sq = norm_sq(config.x0);
  const unsigned settle_from = config.horizon / 3;

  EnsembleOptions opts;
  opts.runs = config.runs;
  opts.level = config.epsilon;
  opts.workers = config.workers;
  opts.radius_sq = config.radius * config.radius;
  opts.violation_from = settle_from;

  const auto dir = ensure_output_dir(config);
  const auto controller = Controller::event_triggered(policy);
  const auto rec = rollout(plant, controller, config.x0, config.horizon, sampler);
  const std::string stem = "trajectory_" + std::to_string(config.seed);
  write_file(dir / (stem + ".csv"), trajectory_csv(rec));
  const auto summary = ensemble(plant, controller, config.x0, config.horizon, sampler, opts);

  json js;
  js["config"] = to_json(config);
  js["trigger"] = {{"label", trigger_label(config.trigger)},
                   {"kind", std::string(to_string(policy.kind()))},
                   {"sigma", policy.sigma()}};
  js["trajectory"] = {{"seed", config.seed},
                      {"update_count", rec.update_count()},
                      {"trigger_times", rec.trigger_times}};
  js["ensemble"] = summary_json(summary);
  js["ensemble"]["violation_from"] = settle_from;

  const auto& sys = cl.autonomous();
  json cert = {{"ultimate_radius", std::sqrt(sys.risk_trace())},
               {"invariance_radius", std::sqrt(sys.noise_risk()) / (1.0 - cl.closed_loop_norm())},
               {"radius", config.radius}};
  if (const auto env = trigger_envelope(cl, policy)) {
    cert["envelope"] = envelope_series(*env, config.horizon, x0_sq, policy.sigma() * policy.sigma());
  } else {
    cert["envelope"] = nullptr;
  }
  js["certificates"] = cert;

  out << "trigger " << trigger_label(config.trigger) << " (" << to_string(policy.kind())
      << ", sigma = " << fmt_number(policy.sigma()) << ")\n"
      << "seed " << config.seed << ": " << rec.update_count() << " updates in " << config.horizon
      << " steps\n"
      << "ensemble of " << config.runs << ": mean updates " << fmt_number(summary.update_mean)
      << ", CVaR at t=" << config.horizon << " " << fmt_number(summary.cvar.back()) << "\n";

  if (config.baseline_periodic) {
    const auto periodic = Controller::periodic();
    const auto base_rec = rollout(plant, periodic, config.x0, config.horizon, sampler);
    write_file(dir / (stem + "_periodic.csv"), trajectory_csv(base_rec));
    const auto base = ensemble(plant, periodic, config.x0, config.horizon, sampler, opts);
    js["baseline_periodic"] = summary_json(base);
    js["baseline_periodic"]["update_count"] = base_rec.update_count();
    js["baseline_periodic"]["envelope"] =
        envelope_series(stability_envelope(sys, 1.0), config.horizon, x0_sq, 0.0);
    out << "periodic baseline: " << base_rec.update_count() << " updates\n";
  }
  write_file(dir / "summary.json", js.dump(2) + "\n");
  out << "outputs written to " << dir.string() << "\n";
  return kExitOk;
}

SweepParameter parse_sweep_parameter(std::string_view text) {
  if (text == "r" || text == "radius") return SweepParameter::radius;
  if (text == "epsilon") return SweepParameter::epsilon;
  if (text == "sigma") return SweepParameter::sigma;
  throw Error(ErrorKind::invalid_input, "sweep parameter must be r, epsilon or sigma");
}

std::vector<std::string> sweep_rows(const ExperimentConfig& config, SweepParameter parameter,
                                    const std::vector<double>& grid) {
  if (grid.empty()) throw Error(ErrorKind::invalid_input, "sweep grid is empty");
  std::vector<std::string> rows;
  for (double value : grid) {
    ExperimentConfig point = config;
    switch (parameter) {
      case SweepParameter::radius: point.radius = value; break;
      case SweepParameter::epsilon: point.epsilon = value; break;
      case SweepParameter::sigma:
        if (!(value >= 0.0)) throw Error(ErrorKind::invalid_input, "sweep sigma must be >= 0");
        point.trigger.sigma = value;
        break;
    }
    const auto cl = build_system(point);
    const auto& sys = cl.autonomous();

    std::optional<double> sig[5];
    for (int c = 1; c <= 4; ++c) sig[c] = try_sigma_max(cl, c, point.radius);

    std::optional<double> sigma_used;
    std::optional<double> mean_updates, cvar_final, cvar_tail;
    std::optional<TriggerPolicy> policy;
    try {
      policy = resolve_trigger(point, cl);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::infeasible_radius) throw;
    }
    if (policy) {
      EnsembleOptions opts;
      opts.runs = point.runs;
      opts.level = point.epsilon;
      opts.workers = point.workers;
      const DisturbanceSampler sampler(point.sampler, point.sigma_w, point.seed, point.dof);
      const auto s = ensemble(Plant::from(cl), Controller::event_triggered(*policy), point.x0,
                              point.horizon, sampler, opts);
      sigma_used = policy->sigma();
      mean_updates = s.update_mean;
      cvar_final = s.cvar.back();
      cvar_tail = *std::max_element(s.cvar.begin() + point.horizon / 3, s.cvar.end());
    }

    std::ostringstream row;
    row << fmt_number(value) << ',' << fmt_number(cl.closed_loop_norm()) << ','
        << fmt_number(std::sqrt(sys.risk_trace())) << ','
        << fmt_number(std::sqrt(sys.noise_risk()) / (1.0 - cl.closed_loop_norm()));
    for (int c = 1; c <= 4; ++c) row << ',' << fmt_optional(sig[c]);
    row << ',' << fmt_optional(sigma_used) << ',' << fmt_optional(mean_updates) << ','
        << fmt_optional(cvar_final) << ',' << fmt_optional(cvar_tail);
    rows.push_back(row.str());
  }
  return rows;
}

int cmd_sweep(const ExperimentConfig& config, SweepParameter parameter,
              const std::vector<double>& grid, std::ostream& out) {
  const auto rows = sweep_rows(config, parameter, grid);
  std::string csv = std::string(kSweepHeader) + "\n";
  for (const auto& r : rows) csv += r + "\n";
  const auto dir = ensure_output_dir(config);
  write_file(dir / "sweep.csv", csv);
  out << csv << "sweep written to " << (dir / "sweep.csv").string() << "\n";
  return kExitOk;
}

int run_guarded(const std::function<int()>& body, std::ostream& err) {
  auto report = [&](std::string_view kind, const std::string& message, int code) {
    err << json{{"error", std::string(kind)}, {"message", message}, {"exit_code", code}}.dump()
        << "\n";
    return code;
  };
  try {
    return body();
  } catch (const Error& e) {
    return report(to_string(e.kind()), e.what(), exit_code_for(e.kind()));
  } catch (const nlohmann::json::exception& e) {
    return report("invalid_input", e.what(), kExitInvalidConfig);
  } catch (const fs::filesystem_error& e) {
    return report("io", e.what(), kExitIo);
  }
}

}  // namespace wcrisk::cli
