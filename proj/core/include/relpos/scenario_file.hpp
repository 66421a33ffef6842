#pragma once

#include "relpos/errors.hpp"
#include "relpos/measurement_sim.hpp"
#include "relpos/solver.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace relpos::cli {

enum class Mode { doppler, tdoa2d, tdoa3d, trilat2d, trilat3d, pipeline };

std::string to_string(Mode m);
/// Throws ValidationError("solve.mode") for unknown names.
Mode mode_from_string(std::string_view name);

/// Malformed input: bad JSON syntax, a wrong type or an unknown field.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line = 0, std::string field = {})
      : Error("ParseError", what), line_(line), field_(std::move(field)) {}
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

/// Well-formed input that breaks an invariant. `field()` is the dotted path.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error("ValidationError", what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct MonteCarloSpec {
  int trials = 0;
  std::vector<double> sigma_t_list;
};

inline constexpr int kSchemaVersion = 1;

/// In-memory form of a scenario document (JSON, schema_version 1).
///
///   {
///     "schema_version": 1,
///     "scenario": {
///       "emitters": [[x, y, z], ...],        // 2 or 3 coordinates, meters
///       "receivers": [[x, y, z], ...],
///       "distances": [d1, d2, d3],           // trilat modes, instead of receivers
///       "received_frequencies": [f, ...],    // doppler mode, hertz
///       "c": 3e8, "carrier": 1e9, "emission_time": 0.0,
///       "noise_sigma_t": 0.0, "seed": 0,
///       "clock_offsets": [s, ...],           // optional, one per receiver
///       "emitter_plane_z": 0.0               // tdoa3d/pipeline; null = free z
///     },
///     "solve": { "mode": "trilat3d", "options": { "max_iterations": 100, ... } },
///     "monte_carlo": { "trials": 200, "sigma_t_list": [0.0, 1e-8] }
///   }
struct ScenarioFile {
  int schema_version = kSchemaVersion;
  sim::Scenario scenario;
  std::optional<std::vector<double>> distances;
  std::vector<double> received_frequencies;
  std::optional<double> emitter_plane_z = 0.0;
  Mode mode = Mode::trilat3d;
  SolverOptions options;
  std::optional<MonteCarloSpec> monte_carlo;

  /// Cross-field checks for the selected mode; throws ValidationError.
  void validate() const;
};

ScenarioFile parse_scenario(const std::filesystem::path& path);
ScenarioFile parse_scenario_text(std::string_view text);

/// Canonical compact JSON for `f`; parsing it back yields an equal document.
std::string to_json_string(const ScenarioFile& f);

}  // namespace relpos::cli
