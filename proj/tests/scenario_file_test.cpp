#include "relpos/scenario_file.hpp"

#include <doctest.h>

#include <string>

using namespace relpos;
using namespace relpos::cli;

namespace {

const std::string kDir = RELPOS_SCENARIO_DIR;

const char* kMinimal = R"({
  "schema_version": 1,
  "scenario": {"emitters": [[0,0],[10,0],[5,10]], "distances": [5,5,5]},
  "solve": {"mode": "trilat2d"}
})";

template <typename E>
E expect_error(const std::string& text) {
  try {
    parse_scenario_text(text);
  } catch (const E& e) {
    return e;
  }
  FAIL("expected an exception");
  throw;
}

std::string with_scenario(const std::string& body, const std::string& mode = "trilat2d") {
  return R"({"schema_version": 1, "scenario": {)" + body + R"(}, "solve": {"mode": ")" + mode + R"("}})";
}

}  // namespace

TEST_CASE("shipped scenario files parse") {
  const auto f = parse_scenario(kDir + "/three_spheres.json");
  REQUIRE(f.scenario.emitters.size() == 3);
  CHECK(f.scenario.emitters[0] == Point(0, 0, 0));
  CHECK(f.scenario.emitters[1] == Point(500, 0, 0));
  CHECK(f.scenario.emitters[2] == Point(0, 500, 0));
  REQUIRE(f.distances.has_value());
  CHECK(*f.distances == std::vector<double>{300, 400, 500});
  CHECK(f.mode == Mode::trilat3d);

  for (const char* name : {"trilat2d_example.json", "doppler.json", "tdoa2d.json", "tdoa2d_monte_carlo.json",
                           "pipeline.json", "clock_offset.json"}) {
    CAPTURE(name);
    CHECK_NOTHROW(parse_scenario(kDir + "/" + name));
  }
}

TEST_CASE("syntax errors") {
  CHECK_THROWS_AS(parse_scenario_text(""), ParseError);
  const auto e = expect_error<ParseError>("{\n  \"schema_version\": 1,\n  \"scenario\": {,\n}");
  CHECK(e.line() == 3);
  CHECK_THROWS_AS(parse_scenario(kDir + "/does_not_exist.json"), ParseError);
}

TEST_CASE("field errors name the field") {
  CHECK_NOTHROW(parse_scenario_text(kMinimal));

  const auto unknown = expect_error<ParseError>(with_scenario(R"("emitters": [[0,0],[10,0],[5,10]], "distances": [5,5,5], "colour": 1)"));
  CHECK(unknown.field() == "scenario.colour");

  const auto type = expect_error<ParseError>(with_scenario(R"("emitters": [[0,0],[10,0],[5,10]], "distances": "far")"));
  CHECK(type.field() == "scenario.distances");

  const auto noise = expect_error<ValidationError>(
      with_scenario(R"("emitters": [[0,0],[10,0],[5,10]], "distances": [5,5,5], "noise_sigma_t": -1e-9)"));
  CHECK(noise.field() == "noise_sigma_t");

  const auto mode = expect_error<ValidationError>(with_scenario(R"("emitters": [[0,0],[10,0],[5,10]], "distances": [5,5,5])", "sonar"));
  CHECK(mode.field() == "solve.mode");

  const auto version = expect_error<ValidationError>(
      R"({"schema_version": 2, "scenario": {"emitters": [[0,0],[10,0],[5,10]], "distances": [5,5,5]}, "solve": {"mode": "trilat2d"}})");
  CHECK(version.field() == "schema_version");
}

TEST_CASE("trilat modes need exactly one distance source") {
  const auto both = expect_error<ValidationError>(
      with_scenario(R"("emitters": [[0,0],[10,0],[5,10]], "distances": [5,5,5], "receivers": [[1,1]])"));
  CHECK_FALSE(both.field().empty());
  const auto neither = expect_error<ValidationError>(with_scenario(R"("emitters": [[0,0],[10,0],[5,10]])"));
  CHECK_FALSE(neither.field().empty());
  CHECK_NOTHROW(parse_scenario_text(with_scenario(R"("emitters": [[0,0],[10,0],[5,10]], "receivers": [[1,1]])")));
}

TEST_CASE("canonical JSON round-trips") {
  for (const char* name : {"three_spheres.json", "doppler.json", "tdoa2d_monte_carlo.json", "pipeline.json", "clock_offset.json"}) {
    CAPTURE(name);
    const auto f = parse_scenario(kDir + "/" + name);
    const auto text = to_json_string(f);
    CHECK(to_json_string(parse_scenario_text(text)) == text);
  }
  auto free = parse_scenario(kDir + "/pipeline.json");
  free.emitter_plane_z = std::nullopt;
  CHECK_FALSE(parse_scenario_text(to_json_string(free)).emitter_plane_z.has_value());
}

TEST_CASE("mode names") {
  for (Mode m : {Mode::doppler, Mode::tdoa2d, Mode::tdoa3d, Mode::trilat2d, Mode::trilat3d, Mode::pipeline}) {
    CHECK(mode_from_string(to_string(m)) == m);
  }
  CHECK_THROWS_AS(mode_from_string("TDOA2D"), ValidationError);
}
