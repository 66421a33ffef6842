#pragma once

#include "relpos/geometry.hpp"
#include "relpos/scenario_file.hpp"
#include "relpos/solver.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace relpos::cli {

struct ErrorInfo {
  std::string kind;
  std::string message;

  friend bool operator==(const ErrorInfo&, const ErrorInfo&) = default;
};

/// Outcome of one solve (or one Doppler reading) inside a run.
struct SolveRecord {
  std::string label;  // "emitter[0]", "receiver[1]", "team", "doppler[2]", ...
  std::optional<Point> estimate;
  std::vector<Candidate> candidates;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> flags;
  std::optional<Point> truth;
  std::optional<double> error_m;
  std::optional<std::vector<double>> direction;  // mean receiver->estimate unit vector
  std::optional<double> doppler_shift_hz;
  std::optional<double> doppler_distance_m;
  std::optional<ErrorInfo> error;
};

struct ErrorQuantiles {
  double median = 0.0;
  double p90 = 0.0;
  double p95 = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

struct MonteCarloSummary {
  double sigma_t = 0.0;
  int trials = 0;
  int failures = 0;
  std::optional<ErrorQuantiles> position_error;  // meters
  std::optional<ErrorQuantiles> emitter_error;   // pipeline only
};

/// One CSV row.
struct TrialRow {
  int trial = 0;
  double sigma_t = 0.0;
  std::string label;
  Point estimate;
  double residual_norm = 0.0;
  bool converged = false;
};

struct Report {
  std::string tool = "relpos";
  std::string version;
  std::string generated_at;  // UTC, ISO 8601; the only non-deterministic field
  std::uint64_t seed = 0;
  std::string mode;
  std::string input;  // canonical JSON of the scenario document
  std::vector<SolveRecord> solves;
  std::vector<MonteCarloSummary> monte_carlo;
  std::vector<TrialRow> trials;

  /// 0 when no solve raised an error, 1 otherwise.
  int exit_code() const;
};

/// Runs the document's mode once (and its Monte-Carlo sweep, if any).
/// Module errors are captured per solve rather than thrown.
Report run(const ScenarioFile& file);

std::string to_json_string(const Report& r, int indent = 2);
Report report_from_json(std::string_view text);

/// Header: trial,sigma_t,mode,x,y,z,residual_norm,converged
std::string to_csv(const Report& r);

/// Linear-interpolated sample quantile (q in [0, 1]) of unsorted values.
double quantile(std::vector<double> values, double q);

std::string tool_version();

}  // namespace relpos::cli
