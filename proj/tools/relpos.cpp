// relpos: run, validate and export relative-positioning scenarios.
//
//   relpos run <file> [--seed N] [--mode M] [--output PATH] [--quiet]
//   relpos validate <file>
//   relpos export-csv <file> [--seed N] [--mode M] [--output PATH]
//
// Exit codes: 0 success, 1 a solve raised an error, 2 bad input.

#include "relpos/runner.hpp"
#include "relpos/scenario_file.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

namespace {

constexpr int kExitInput = 2;

struct Args {
  std::string file;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::string output;
  bool quiet = false;
};

relpos::cli::ScenarioFile load(const Args& a) {
  relpos::cli::ScenarioFile f = relpos::cli::parse_scenario(a.file);
  if (a.seed) f.scenario.seed = *a.seed;
  if (a.mode) f.mode = relpos::cli::mode_from_string(*a.mode);
  f.validate();
  return f;
}

bool emit(const std::string& text, const std::string& output) {
  if (output.empty()) {
    std::cout << text;
    return true;
  }
  std::ofstream out(output, std::ios::binary);
  out << text;
  return static_cast<bool>(out);
}

void summarize(const relpos::cli::Report& r) {
  for (const auto& s : r.solves) {
    std::cerr << s.label << ": ";
    if (s.error) {
      std::cerr << s.error->kind << " (" << s.error->message << ")\n";
    } else if (s.estimate) {
      std::cerr << relpos::to_string(*s.estimate) << " residual " << s.residual_norm << '\n';
    } else if (s.doppler_distance_m) {
      std::cerr << *s.doppler_distance_m << " m (idealized)\n";
    } else {
      std::cerr << "ok\n";
    }
  }
  for (const auto& m : r.monte_carlo) {
    std::cerr << "sigma_t " << m.sigma_t << ": " << m.trials - m.failures << "/" << m.trials << " ok";
    if (m.position_error) std::cerr << ", median error " << m.position_error->median << " m";
    std::cerr << '\n';
  }
}

void add_common(CLI::App* cmd, Args& a) {
  cmd->add_option("file", a.file, "Scenario JSON file")->required();
  cmd->add_option("--seed", a.seed, "Override the scenario seed");
  cmd->add_option("--mode", a.mode, "Override solve.mode")
      ->check(CLI::IsMember({"doppler", "tdoa2d", "tdoa3d", "trilat2d", "trilat3d", "pipeline"}));
  cmd->add_option("--output", a.output, "Write to this path instead of stdout");
  cmd->add_flag("--quiet", a.quiet, "Suppress the summary on stderr");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relative positioning from RF emitters: TDOA, trilateration and the team pipeline"};
  app.set_version_flag("--version", relpos::cli::tool_version());
  app.require_subcommand(1);

  Args run_args;
  Args validate_args;
  Args csv_args;
  auto* run_cmd = app.add_subcommand("run", "Solve a scenario and print a JSON report");
  add_common(run_cmd, run_args);
  auto* validate_cmd = app.add_subcommand("validate", "Check a scenario file");
  validate_cmd->add_option("file", validate_args.file, "Scenario JSON file")->required();
  auto* csv_cmd = app.add_subcommand("export-csv", "Solve a scenario and print one CSV row per trial");
  add_common(csv_cmd, csv_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*validate_cmd) {
      const auto f = load(validate_args);
      std::cout << "ok: " << validate_args.file << " (mode " << relpos::cli::to_string(f.mode) << ")\n";
      return 0;
    }

    const Args& a = *run_cmd ? run_args : csv_args;
    const auto f = load(a);
    const relpos::cli::Report report = relpos::cli::run(f);
    const std::string text = *run_cmd ? relpos::cli::to_json_string(report) + "\n" : relpos::cli::to_csv(report);
    if (!emit(text, a.output)) {
      std::cerr << "error: cannot write " << a.output << '\n';
      return kExitInput;
    }
    if (!a.quiet) summarize(report);
    return report.exit_code();
  } catch (const relpos::cli::ParseError& e) {
    std::cerr << "parse error";
    if (e.line() > 0) std::cerr << " (line " << e.line() << ")";
    if (!e.field().empty()) std::cerr << " [" << e.field() << "]";
    std::cerr << ": " << e.what() << '\n';
  } catch (const relpos::cli::ValidationError& e) {
    std::cerr << "invalid " << e.field() << ": " << e.what() << '\n';
  } catch (const relpos::Error& e) {
    std::cerr << e.kind() << ": " << e.what() << '\n';
  }
  return kExitInput;
}
