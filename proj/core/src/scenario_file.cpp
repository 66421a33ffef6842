#include "relpos/scenario_file.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace relpos::cli {

using nlohmann::json;

namespace {

constexpr std::pair<Mode, std::string_view> kModeNames[] = {
    {Mode::doppler, "doppler"},   {Mode::tdoa2d, "tdoa2d"},     {Mode::tdoa3d, "tdoa3d"},
    {Mode::trilat2d, "trilat2d"}, {Mode::trilat3d, "trilat3d"}, {Mode::pipeline, "pipeline"},
};

int line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<std::string_view> known) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      const std::string field = path.empty() ? key : path + "." + key;
      throw ParseError("unknown field '" + field + "'", 0, field);
    }
  }
}

const json& require_object(const json& j, const std::string& field) {
  if (!j.is_object()) throw ParseError("'" + field + "' must be an object", 0, field);
  return j;
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ParseError("'" + field + "' must be a number", 0, field);
  return j.get<double>();
}

std::vector<double> numbers(const json& j, const std::string& field) {
  if (!j.is_array()) throw ParseError("'" + field + "' must be an array of numbers", 0, field);
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(number(j[i], field + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::int64_t integer(const json& j, const std::string& field) {
  if (!j.is_number_integer()) throw ParseError("'" + field + "' must be an integer", 0, field);
  return j.get<std::int64_t>();
}

std::vector<Point> points(const json& j, const std::string& field) {
  if (!j.is_array()) throw ParseError("'" + field + "' must be an array of points", 0, field);
  std::vector<Point> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string f = field + "[" + std::to_string(i) + "]";
    const auto c = numbers(j[i], f);
    for (double v : c) {
      if (!std::isfinite(v)) throw ValidationError(f, "'" + f + "' has a non-finite coordinate");
    }
    if (c.size() == 2) {
      out.emplace_back(c[0], c[1]);
    } else if (c.size() == 3) {
      out.emplace_back(c[0], c[1], c[2]);
    } else {
      throw ParseError("'" + f + "' must have 2 or 3 coordinates", 0, f);
    }
  }
  return out;
}

json point_json(const Point& p) {
  return p.dim() == Dim::two ? json::array({p.x(), p.y()}) : json::array({p.x(), p.y(), p.z()});
}

json points_json(const std::vector<Point>& ps) {
  json a = json::array();
  for (const auto& p : ps) a.push_back(point_json(p));
  return a;
}

void require_positive(double v, const std::string& field) {
  if (!std::isfinite(v) || v <= 0.0) throw ValidationError(field, "'" + field + "' must be positive");
}

ScenarioFile from_json(const json& doc) {
  require_object(doc, "<root>");
  reject_unknown(doc, "", {"schema_version", "scenario", "solve", "monte_carlo"});

  ScenarioFile f;
  if (!doc.contains("schema_version")) throw ParseError("missing 'schema_version'", 0, "schema_version");
  f.schema_version = static_cast<int>(integer(doc["schema_version"], "schema_version"));
  if (f.schema_version != kSchemaVersion) {
    throw ValidationError("schema_version", "unsupported schema_version " + std::to_string(f.schema_version));
  }

  if (!doc.contains("scenario")) throw ParseError("missing 'scenario'", 0, "scenario");
  const json& sc = require_object(doc["scenario"], "scenario");
  reject_unknown(sc, "scenario",
                 {"emitters", "receivers", "distances", "received_frequencies", "c", "carrier",
                  "emission_time", "noise_sigma_t", "seed", "clock_offsets", "emitter_plane_z"});
  auto& s = f.scenario;
  if (sc.contains("emitters")) s.emitters = points(sc["emitters"], "scenario.emitters");
  if (sc.contains("receivers")) s.receivers = points(sc["receivers"], "scenario.receivers");
  if (sc.contains("distances")) f.distances = numbers(sc["distances"], "scenario.distances");
  if (sc.contains("received_frequencies")) {
    f.received_frequencies = numbers(sc["received_frequencies"], "scenario.received_frequencies");
  }
  if (sc.contains("c")) s.c = number(sc["c"], "scenario.c");
  if (sc.contains("carrier")) s.carrier = number(sc["carrier"], "scenario.carrier");
  if (sc.contains("emission_time")) s.emission_time = number(sc["emission_time"], "scenario.emission_time");
  if (sc.contains("noise_sigma_t")) s.noise_sigma_t = number(sc["noise_sigma_t"], "scenario.noise_sigma_t");
  if (sc.contains("seed")) {
    const auto seed = integer(sc["seed"], "scenario.seed");
    if (seed < 0) throw ValidationError("seed", "'seed' must be non-negative");
    s.seed = static_cast<std::uint64_t>(seed);
  }
  if (sc.contains("clock_offsets")) s.clock_offsets = numbers(sc["clock_offsets"], "scenario.clock_offsets");
  if (sc.contains("emitter_plane_z")) {
    const json& z = sc["emitter_plane_z"];
    f.emitter_plane_z = z.is_null() ? std::nullopt : std::optional<double>(number(z, "scenario.emitter_plane_z"));
  }

  if (!doc.contains("solve")) throw ParseError("missing 'solve'", 0, "solve");
  const json& solve = require_object(doc["solve"], "solve");
  reject_unknown(solve, "solve", {"mode", "options"});
  if (!solve.contains("mode") || !solve["mode"].is_string()) {
    throw ParseError("'solve.mode' must be a string", 0, "solve.mode");
  }
  f.mode = mode_from_string(solve["mode"].get<std::string>());
  if (solve.contains("options")) {
    const json& o = require_object(solve["options"], "solve.options");
    reject_unknown(o, "solve.options",
                   {"max_iterations", "step_tolerance", "residual_tolerance", "damping_initial",
                    "multistart_count"});
    auto& opt = f.options;
    if (o.contains("max_iterations")) opt.max_iterations = static_cast<int>(integer(o["max_iterations"], "solve.options.max_iterations"));
    if (o.contains("step_tolerance")) opt.step_tolerance = number(o["step_tolerance"], "solve.options.step_tolerance");
    if (o.contains("residual_tolerance")) opt.residual_tolerance = number(o["residual_tolerance"], "solve.options.residual_tolerance");
    if (o.contains("damping_initial")) opt.damping_initial = number(o["damping_initial"], "solve.options.damping_initial");
    if (o.contains("multistart_count")) opt.multistart_count = static_cast<int>(integer(o["multistart_count"], "solve.options.multistart_count"));
  }

  if (doc.contains("monte_carlo") && !doc["monte_carlo"].is_null()) {
    const json& mc = require_object(doc["monte_carlo"], "monte_carlo");
    reject_unknown(mc, "monte_carlo", {"trials", "sigma_t_list"});
    MonteCarloSpec spec;
    if (!mc.contains("trials")) throw ParseError("missing 'monte_carlo.trials'", 0, "monte_carlo.trials");
    spec.trials = static_cast<int>(integer(mc["trials"], "monte_carlo.trials"));
    if (!mc.contains("sigma_t_list")) throw ParseError("missing 'monte_carlo.sigma_t_list'", 0, "monte_carlo.sigma_t_list");
    spec.sigma_t_list = numbers(mc["sigma_t_list"], "monte_carlo.sigma_t_list");
    f.monte_carlo = spec;
  }

  f.validate();
  return f;
}

}  // namespace

std::string to_string(Mode m) {
  for (const auto& [mode, name] : kModeNames) {
    if (mode == m) return std::string(name);
  }
  return "unknown";
}

Mode mode_from_string(std::string_view name) {
  for (const auto& [mode, n] : kModeNames) {
    if (n == name) return mode;
  }
  throw ValidationError("solve.mode", "unknown mode '" + std::string(name) + "'");
}

void ScenarioFile::validate() const {
  const auto& s = scenario;
  if (schema_version != kSchemaVersion) throw ValidationError("schema_version", "schema_version must be 1");
  require_positive(s.c, "c");
  require_positive(s.carrier, "carrier");
  if (!std::isfinite(s.emission_time)) throw ValidationError("emission_time", "'emission_time' must be finite");
  if (!std::isfinite(s.noise_sigma_t) || s.noise_sigma_t < 0.0) {
    throw ValidationError("noise_sigma_t", "'noise_sigma_t' must be >= 0");
  }
  if (emitter_plane_z && !std::isfinite(*emitter_plane_z)) {
    throw ValidationError("emitter_plane_z", "'emitter_plane_z' must be finite");
  }
  try {
    options.validate();
  } catch (const Error& e) {
    throw ValidationError("solve.options", e.what());
  }

  if (!s.emitters.empty()) {
    const Dim d = s.emitters.front().dim();
    for (const auto& p : s.emitters) {
      if (p.dim() != d) throw ValidationError("emitters", "'emitters' mix 2D and 3D points");
    }
    for (const auto& p : s.receivers) {
      if (p.dim() != d) throw ValidationError("receivers", "'receivers' must match the emitters' dimension");
    }
  }
  if (!s.clock_offsets.empty() && s.clock_offsets.size() != s.receivers.size()) {
    throw ValidationError("clock_offsets", "'clock_offsets' needs one entry per receiver");
  }
  for (double o : s.clock_offsets) {
    if (!std::isfinite(o)) throw ValidationError("clock_offsets", "'clock_offsets' must be finite");
  }

  auto require_dim = [&](Dim want) {
    if (s.emitters.empty()) throw ValidationError("emitters", "'emitters' is required for this mode");
    if (s.emitters.front().dim() != want) {
      throw ValidationError("emitters", "mode " + to_string(mode) + " needs " +
                                            std::to_string(to_int(want)) + "D points");
    }
  };
  auto require_receivers = [&](std::size_t n) {
    if (s.receivers.size() != n) {
      throw ValidationError("receivers", "mode " + to_string(mode) + " needs exactly " +
                                             std::to_string(n) + " receivers");
    }
  };

  switch (mode) {
    case Mode::doppler:
      if (received_frequencies.empty()) {
        throw ValidationError("received_frequencies", "doppler mode needs 'received_frequencies'");
      }
      for (double fr : received_frequencies) require_positive(fr, "received_frequencies");
      break;
    case Mode::tdoa2d:
    case Mode::tdoa3d:
      require_dim(mode == Mode::tdoa2d ? Dim::two : Dim::three);
      require_receivers(3);
      break;
    case Mode::pipeline:
      require_dim(Dim::three);
      require_receivers(3);
      if (s.emitters.size() < 3) throw ValidationError("emitters", "pipeline needs at least 3 emitters");
      break;
    case Mode::trilat2d:
    case Mode::trilat3d: {
      require_dim(mode == Mode::trilat2d ? Dim::two : Dim::three);
      if (s.emitters.size() < 3) throw ValidationError("emitters", "trilateration needs at least 3 emitters");
      const bool given = distances.has_value();
      const bool geometric = !s.receivers.empty();
      if (given == geometric) {
        throw ValidationError(given ? "distances" : "receivers",
                              "trilateration needs exactly one of 'distances' or 'receivers'");
      }
      if (given) {
        if (distances->size() != s.emitters.size()) {
          throw ValidationError("distances", "'distances' needs one entry per emitter");
        }
        for (double d : *distances) {
          if (!std::isfinite(d) || d < 0.0) throw ValidationError("distances", "'distances' must be >= 0");
        }
      }
      break;
    }
  }
  if (distances && mode != Mode::trilat2d && mode != Mode::trilat3d) {
    throw ValidationError("distances", "'distances' is only used by trilat modes");
  }

  if (monte_carlo) {
    if (monte_carlo->trials < 1) throw ValidationError("monte_carlo.trials", "'trials' must be >= 1");
    if (monte_carlo->sigma_t_list.empty()) {
      throw ValidationError("monte_carlo.sigma_t_list", "'sigma_t_list' must not be empty");
    }
    for (double sig : monte_carlo->sigma_t_list) {
      if (!std::isfinite(sig) || sig < 0.0) {
        throw ValidationError("monte_carlo.sigma_t_list", "'sigma_t_list' entries must be >= 0");
      }
    }
    if (mode == Mode::doppler || distances) {
      throw ValidationError("monte_carlo", "Monte-Carlo needs a geometric tdoa, trilat or pipeline scenario");
    }
  }
}

ScenarioFile parse_scenario_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), line_of(text, e.byte == 0 ? 0 : e.byte - 1));
  }
  try {
    return from_json(doc);
  } catch (const relpos::Error& e) {
    if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const ValidationError*>(&e)) throw;
    throw ValidationError("scenario", e.what());
  }
}

ScenarioFile parse_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str());
}

std::string to_json_string(const ScenarioFile& f) {
  const auto& s = f.scenario;
  json sc = {
      {"c", s.c},
      {"carrier", s.carrier},
      {"emission_time", s.emission_time},
      {"noise_sigma_t", s.noise_sigma_t},
      {"seed", s.seed},
  };
  if (!s.emitters.empty()) sc["emitters"] = points_json(s.emitters);
  if (!s.receivers.empty()) sc["receivers"] = points_json(s.receivers);
  if (f.distances) sc["distances"] = *f.distances;
  if (!f.received_frequencies.empty()) sc["received_frequencies"] = f.received_frequencies;
  if (!s.clock_offsets.empty()) sc["clock_offsets"] = s.clock_offsets;
  sc["emitter_plane_z"] = f.emitter_plane_z ? json(*f.emitter_plane_z) : json(nullptr);

  const auto& o = f.options;
  json doc = {
      {"schema_version", f.schema_version},
      {"scenario", sc},
      {"solve",
       {{"mode", to_string(f.mode)},
        {"options",
         {{"max_iterations", o.max_iterations},
          {"step_tolerance", o.step_tolerance},
          {"residual_tolerance", o.residual_tolerance},
          {"damping_initial", o.damping_initial},
          {"multistart_count", o.multistart_count}}}}},
  };
  if (f.monte_carlo) {
    doc["monte_carlo"] = {{"trials", f.monte_carlo->trials}, {"sigma_t_list", f.monte_carlo->sigma_t_list}};
  }
  return doc.dump();
}

}  // namespace relpos::cli
