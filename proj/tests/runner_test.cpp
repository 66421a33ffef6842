#include "relpos/runner.hpp"

#include <doctest.h>

#include <cmath>
#include <string>

using namespace relpos;
using namespace relpos::cli;

namespace {

const std::string kDir = RELPOS_SCENARIO_DIR;

ScenarioFile load(const char* name) { return parse_scenario(kDir + "/" + name); }

}  // namespace

TEST_CASE("three-sphere run") {
  const auto r = run(load("three_spheres.json"));
  REQUIRE(r.solves.size() == 1);
  const auto& s = r.solves[0];
  REQUIRE(s.estimate.has_value());
  CHECK(std::abs(s.estimate->x() - 180) < 1e-9);
  CHECK(std::abs(s.estimate->y() - 90) < 1e-9);
  CHECK(std::abs(s.estimate->z() - std::sqrt(49500.0)) < 1e-6);
  CHECK(s.residual_norm < 1e-6);
  CHECK(r.exit_code() == 0);
  CHECK(r.seed == 5);
  CHECK(r.mode == "trilat3d");
}

TEST_CASE("doppler run") {
  const auto r = run(load("doppler.json"));
  REQUIRE(r.solves.size() == 3);
  CHECK(r.solves[0].doppler_distance_m == 0.0);
  CHECK(*r.solves[1].doppler_distance_m == doctest::Approx(15.0));
  CHECK(*r.solves[2].doppler_distance_m == doctest::Approx(30.0));
}

TEST_CASE("pipeline run recovers the drone centroid") {
  auto f = load("pipeline.json");
  f.monte_carlo.reset();
  const auto r = run(f);
  CHECK(r.exit_code() == 0);
  const auto& team = r.solves.back();
  CHECK(team.label == "team");
  REQUIRE(team.error_m.has_value());
  CHECK(*team.error_m < 1e-3);
}

TEST_CASE("reports are deterministic apart from the timestamp") {
  const auto f = load("tdoa2d_monte_carlo.json");
  auto a = run(f);
  auto b = run(f);
  a.generated_at = b.generated_at = "";
  CHECK(to_json_string(a) == to_json_string(b));
  CHECK(to_csv(a) == to_csv(b));
}

TEST_CASE("report serialization is a fixed point") {
  for (const char* name : {"three_spheres.json", "doppler.json", "tdoa2d_monte_carlo.json", "pipeline.json"}) {
    CAPTURE(name);
    const auto text = to_json_string(run(load(name)));
    CHECK(to_json_string(report_from_json(text)) == text);
  }
}

TEST_CASE("errors are embedded and set the exit code") {
  auto f = load("three_spheres.json");
  f.distances = std::vector<double>{10, 10, 10};
  const auto r = run(f);
  REQUIRE(r.solves.size() == 1);
  REQUIRE(r.solves[0].error.has_value());
  CHECK(r.solves[0].error->kind == "Inconsistent");
  CHECK(r.exit_code() == 1);
  const auto back = report_from_json(to_json_string(r));
  CHECK(back.solves[0].error == r.solves[0].error);
}

TEST_CASE("Monte-Carlo median error grows with timing noise") {
  const auto r = run(load("tdoa2d_monte_carlo.json"));
  REQUIRE(r.monte_carlo.size() == 3);
  double previous = -1.0;
  for (const auto& m : r.monte_carlo) {
    CHECK(m.trials == 200);
    CHECK(m.failures == 0);
    REQUIRE(m.position_error.has_value());
    CHECK(m.position_error->median > previous);
    previous = m.position_error->median;
  }
  CHECK(r.trials.size() == 600);
  const auto csv = to_csv(r);
  CHECK(csv.rfind("trial,sigma_t,mode,x,y,z,residual_norm,converged\n", 0) == 0);
}

TEST_CASE("clock offsets bias the fix") {
  const auto r = run(load("clock_offset.json"));
  REQUIRE(r.solves.size() == 1);
  REQUIRE(r.solves[0].error_m.has_value());
  CHECK(*r.solves[0].error_m > 1.0);
}

TEST_CASE("quantile") {
  CHECK(quantile({3, 1, 2}, 0.5) == 2.0);
  CHECK(quantile({1, 2, 3, 4}, 0.5) == 2.5);
  CHECK(quantile({5}, 0.9) == 5.0);
  CHECK(quantile({0, 10}, 0.9) == doctest::Approx(9.0));
  CHECK_THROWS_AS(quantile({}, 0.5), EmptyInput);
}
