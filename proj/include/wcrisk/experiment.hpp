#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "wcrisk/config.hpp"
#include "wcrisk/error.hpp"

namespace wcrisk::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInvalidConfig = 2,
  kExitInfeasible = 3,
  kExitIo = 4,
};

int exit_code_for(ErrorKind kind);

/// Certificate report: Tr(P), ‖a+bk‖, all four certificate verdicts, and
/// σ₁…σ₄ (null with a reason when the radius is infeasible).
nlohmann::json certify_report(const ExperimentConfig& config);

/// Writes <out>/report.json and prints a table. Returns kExitInfeasible when
/// the configured trigger cannot be synthesized at the configured radius.
int cmd_certify(const ExperimentConfig& config, std::ostream& out);

/// Writes <out>/trajectory_<seed>.csv (plus _periodic with the baseline) and
/// <out>/summary.json.
int cmd_simulate(const ExperimentConfig& config, std::ostream& out);

enum class SweepParameter { radius, epsilon, sigma };
SweepParameter parse_sweep_parameter(std::string_view text);

/// Column order of sweep.csv.
inline constexpr const char* kSweepHeader =
    "value,closed_loop_norm,ultimate_radius,invariance_radius,sigma1_max,sigma2_max,sigma3_max,"
    "sigma4_max,sigma_used,mean_updates,cvar_final,cvar_tail_max";

/// One row per grid point; thresholds that are infeasible at a point and the
/// simulation columns of an unsynthesizable trigger are left empty.
std::vector<std::string> sweep_rows(const ExperimentConfig& config, SweepParameter parameter,
                                    const std::vector<double>& grid);

/// Writes <out>/sweep.csv.
int cmd_sweep(const ExperimentConfig& config, SweepParameter parameter,
              const std::vector<double>& grid, std::ostream& out);

/// Runs `body`, mapping library errors to exit codes and a one-line JSON
/// error object on `err`.
int run_guarded(const std::function<int()>& body, std::ostream& err);

/// Trajectory CSV: t, x1..xn, u1..um, norm_sq, trigger. The final row (t = H)
/// has empty input cells.
std::string trajectory_csv(const TrajectoryRecord& rec);

}  // namespace wcrisk::cli
