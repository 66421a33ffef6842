#include "relpos/runner.hpp"

#include "relpos/doppler.hpp"
#include "relpos/measurement_sim.hpp"
#include "relpos/tdoa.hpp"
#include "relpos/trilat.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <numeric>
#include <sstream>

#ifndef RELPOS_VERSION
#define RELPOS_VERSION "0.0.0"
#endif

namespace relpos::cli {

using nlohmann::json;

std::string tool_version() { return RELPOS_VERSION; }

int Report::exit_code() const {
  const bool failed = std::any_of(solves.begin(), solves.end(), [](const SolveRecord& s) { return s.error.has_value(); });
  const bool mc_failed = std::any_of(monte_carlo.begin(), monte_carlo.end(),
                                     [](const MonteCarloSummary& m) { return m.failures > 0; });
  return failed || mc_failed ? 1 : 0;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw EmptyInput("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

void fill_from_result(SolveRecord& rec, const SolveResult& r) {
  rec.estimate = r.estimate;
  rec.candidates = r.candidates;
  rec.residual_norm = r.residual_norm;
  rec.iterations = r.iterations;
  rec.converged = r.converged;
  rec.flags.clear();
  for (SolveFlag f : r.flags) rec.flags.push_back(to_string(f));
}

void set_truth(SolveRecord& rec, const Point& truth) {
  rec.truth = truth;
  if (rec.estimate) rec.error_m = distance(*rec.estimate, truth);
}

template <typename Fn>
SolveRecord guarded(std::string label, Fn&& fn) {
  SolveRecord rec;
  rec.label = std::move(label);
  try {
    fn(rec);
  } catch (const NoConvergence& e) {
    fill_from_result(rec, e.best());
    rec.error = ErrorInfo{e.kind(), e.what()};
  } catch (const Error& e) {
    rec.error = ErrorInfo{e.kind(), e.what()};
  } catch (const std::exception& e) {
    rec.error = ErrorInfo{"InternalError", e.what()};
  }
  return rec;
}

std::string idx(const char* what, std::size_t i) { return std::string(what) + "[" + std::to_string(i) + "]"; }

std::vector<SolveRecord> run_doppler(const ScenarioFile& f) {
  std::vector<SolveRecord> out;
  for (std::size_t i = 0; i < f.received_frequencies.size(); ++i) {
    out.push_back(guarded(idx("doppler", i), [&](SolveRecord& rec) {
      const doppler::DopplerReading reading(f.scenario.carrier, f.received_frequencies[i], f.scenario.c);
      rec.doppler_shift_hz = doppler::doppler_shift(reading);
      rec.doppler_distance_m = doppler::doppler_distance(reading).meters;
      rec.converged = true;
      rec.flags = {"idealized"};
    }));
  }
  return out;
}

sim::ArrivalSet noisy_arrivals(const sim::Scenario& s, double sigma_t, std::uint64_t seed) {
  return sim::perturb_arrivals(sim::simulate_arrivals(s), sigma_t, seed);
}

std::vector<SolveRecord> run_tdoa(const ScenarioFile& f, double sigma_t, std::uint64_t seed) {
  const auto& s = f.scenario;
  std::vector<SolveRecord> out;
  sim::ArrivalSet arrivals;
  try {
    arrivals = noisy_arrivals(s, sigma_t, seed);
  } catch (const Error& e) {
    SolveRecord rec;
    rec.label = "arrivals";
    rec.error = ErrorInfo{e.kind(), e.what()};
    return {rec};
  }
  for (std::size_t j = 0; j < s.emitters.size(); ++j) {
    out.push_back(guarded(idx("emitter", j), [&](SolveRecord& rec) {
      const auto rd = tdoa::arrival_deltas(arrivals, j, 0, s.c);
      const SolveResult r = f.mode == Mode::tdoa2d
                                ? tdoa::locate_emitter_2d(s.receivers, rd, f.options)
                                : tdoa::locate_emitter_3d(s.receivers, rd, f.emitter_plane_z, f.options);
      fill_from_result(rec, r);
      set_truth(rec, s.emitters[j]);
      const DirectionVector dir = tdoa::combined_direction(s.receivers, r.estimate);
      rec.direction = std::vector<double>(dir.components.data(), dir.components.data() + to_int(dir.dim));
    }));
  }
  return out;
}

SolveResult closed_or_lsq(const trilat::TrilaterationProblem& p, const SolverOptions& opts) {
  if (p.emitters.size() == 3) {
    return p.dim == Dim::two ? trilat::trilaterate_2d(p) : trilat::trilaterate_3d(p);
  }
  return trilat::trilaterate_lsq(p, centroid(p.emitters), opts);
}

std::vector<SolveRecord> run_trilat(const ScenarioFile& f, double sigma_t, std::uint64_t seed) {
  const auto& s = f.scenario;
  const Dim dim = f.mode == Mode::trilat2d ? Dim::two : Dim::three;
  if (f.distances) {
    return {guarded("position", [&](SolveRecord& rec) {
      fill_from_result(rec, closed_or_lsq({s.emitters, *f.distances, dim}, f.options));
    })};
  }

  sim::ArrivalSet arrivals;
  try {
    arrivals = noisy_arrivals(s, sigma_t, seed);
  } catch (const Error& e) {
    SolveRecord rec;
    rec.label = "arrivals";
    rec.error = ErrorInfo{e.kind(), e.what()};
    return {rec};
  }
  std::vector<SolveRecord> out;
  for (std::size_t i = 0; i < s.receivers.size(); ++i) {
    out.push_back(guarded(idx("receiver", i), [&](SolveRecord& rec) {
      // One-way ranges from time of flight against the known emission time.
      std::vector<double> ranges;
      for (Eigen::Index j = 0; j < arrivals.times.cols(); ++j) {
        ranges.push_back(std::max(0.0, s.c * (arrivals.times(static_cast<Eigen::Index>(i), j) - s.emission_time)));
      }
      fill_from_result(rec, closed_or_lsq({s.emitters, ranges, dim}, f.options));
      set_truth(rec, s.receivers[i]);
    }));
  }
  return out;
}

std::vector<SolveRecord> run_pipeline(const ScenarioFile& f, double sigma_t, std::uint64_t seed) {
  const auto& s = f.scenario;
  ScenarioFile step1 = f;
  step1.mode = Mode::tdoa3d;
  std::vector<SolveRecord> out = run_tdoa(step1, sigma_t, seed);

  const bool located = std::all_of(out.begin(), out.end(), [](const SolveRecord& r) { return !r.error && r.estimate; });
  if (!located) {
    SolveRecord team;
    team.label = "team";
    team.error = ErrorInfo{"Skipped", "emitter localization failed"};
    out.push_back(team);
    return out;
  }

  std::vector<Point> estimates;
  for (const auto& r : out) estimates.push_back(*r.estimate);
  out.push_back(guarded("team", [&](SolveRecord& rec) {
    // Drone-to-emitter ranges follow from the known drone positions and the
    // step-one emitter estimates.
    sim::Scenario located_geometry = s;
    located_geometry.emitters = estimates;
    const sim::DistanceMatrix dm = sim::true_distance_matrix(located_geometry);
    fill_from_result(rec, trilat::team_relative_position(s.receivers, estimates, dm, f.options));
    set_truth(rec, centroid(s.receivers));
  }));
  return out;
}

std::vector<SolveRecord> run_once(const ScenarioFile& f, double sigma_t, std::uint64_t seed) {
  switch (f.mode) {
    case Mode::doppler: return run_doppler(f);
    case Mode::tdoa2d:
    case Mode::tdoa3d: return run_tdoa(f, sigma_t, seed);
    case Mode::trilat2d:
    case Mode::trilat3d: return run_trilat(f, sigma_t, seed);
    case Mode::pipeline: return run_pipeline(f, sigma_t, seed);
  }
  return {};
}

ErrorQuantiles summarize(const std::vector<double>& errors) {
  ErrorQuantiles q;
  q.median = quantile(errors, 0.5);
  q.p90 = quantile(errors, 0.9);
  q.p95 = quantile(errors, 0.95);
  q.max = *std::max_element(errors.begin(), errors.end());
  q.mean = std::accumulate(errors.begin(), errors.end(), 0.0) / static_cast<double>(errors.size());
  return q;
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void add_rows(Report& report, const std::vector<SolveRecord>& recs, int trial, double sigma_t) {
  for (const auto& r : recs) {
    if (!r.estimate) continue;
    report.trials.push_back({trial, sigma_t, r.label, *r.estimate, r.residual_norm, r.converged && !r.error});
  }
}

}  // namespace

Report run(const ScenarioFile& file) {
  file.validate();
  Report report;
  report.version = tool_version();
  report.generated_at = utc_now();
  report.seed = file.scenario.seed;
  report.mode = to_string(file.mode);
  report.input = to_json_string(file);

  report.solves = run_once(file, file.scenario.noise_sigma_t, file.scenario.seed);
  add_rows(report, report.solves, 0, file.scenario.noise_sigma_t);

  if (!file.monte_carlo) return report;

  report.trials.clear();
  for (double sigma : file.monte_carlo->sigma_t_list) {
    MonteCarloSummary summary;
    summary.sigma_t = sigma;
    summary.trials = file.monte_carlo->trials;
    std::vector<double> position_errors;
    std::vector<double> emitter_errors;
    for (int t = 0; t < file.monte_carlo->trials; ++t) {
      const auto recs = run_once(file, sigma, file.scenario.seed + static_cast<std::uint64_t>(t));
      add_rows(report, recs, t, sigma);
      const bool failed = std::any_of(recs.begin(), recs.end(), [](const SolveRecord& r) { return r.error.has_value(); });
      if (failed) {
        ++summary.failures;
        continue;
      }
      double sum = 0.0;
      double emitter_sum = 0.0;
      int count = 0;
      int emitter_count = 0;
      for (const auto& r : recs) {
        if (!r.error_m) continue;
        if (file.mode == Mode::pipeline && r.label != "team") {
          emitter_sum += *r.error_m;
          ++emitter_count;
        } else {
          sum += *r.error_m;
          ++count;
        }
      }
      if (count > 0) position_errors.push_back(sum / count);
      if (emitter_count > 0) emitter_errors.push_back(emitter_sum / emitter_count);
    }
    if (!position_errors.empty()) summary.position_error = summarize(position_errors);
    if (!emitter_errors.empty()) summary.emitter_error = summarize(emitter_errors);
    report.monte_carlo.push_back(summary);
  }
  return report;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json point_json(const Point& p) {
  return p.dim() == Dim::two ? json::array({p.x(), p.y()}) : json::array({p.x(), p.y(), p.z()});
}

Point point_from(const json& j) {
  const auto c = j.get<std::vector<double>>();
  if (c.size() == 2) return {c[0], c[1]};
  if (c.size() == 3) return {c[0], c[1], c[2]};
  throw ParseError("point must have 2 or 3 coordinates");
}

template <typename T>
void put_opt(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

json quantiles_json(const ErrorQuantiles& q) {
  return {{"median", q.median}, {"p90", q.p90}, {"p95", q.p95}, {"max", q.max}, {"mean", q.mean}};
}

ErrorQuantiles quantiles_from(const json& j) {
  return {j.at("median").get<double>(), j.at("p90").get<double>(), j.at("p95").get<double>(),
          j.at("max").get<double>(), j.at("mean").get<double>()};
}

}  // namespace

std::string to_json_string(const Report& r, int indent) {
  json solves = json::array();
  for (const auto& s : r.solves) {
    json j = {{"label", s.label},
              {"residual_norm", s.residual_norm},
              {"iterations", s.iterations},
              {"converged", s.converged},
              {"flags", s.flags}};
    if (s.estimate) j["estimate"] = point_json(*s.estimate);
    json cands = json::array();
    for (const auto& c : s.candidates) cands.push_back({{"point", point_json(c.point)}, {"residual_norm", c.residual_norm}});
    j["candidates"] = cands;
    if (s.truth) j["truth"] = point_json(*s.truth);
    put_opt(j, "error_m", s.error_m);
    put_opt(j, "direction", s.direction);
    put_opt(j, "doppler_shift_hz", s.doppler_shift_hz);
    put_opt(j, "doppler_distance_m", s.doppler_distance_m);
    if (s.error) j["error"] = {{"kind", s.error->kind}, {"message", s.error->message}};
    solves.push_back(j);
  }

  json mc = json::array();
  for (const auto& m : r.monte_carlo) {
    json j = {{"sigma_t", m.sigma_t}, {"trials", m.trials}, {"failures", m.failures}};
    if (m.position_error) j["position_error"] = quantiles_json(*m.position_error);
    if (m.emitter_error) j["emitter_error"] = quantiles_json(*m.emitter_error);
    mc.push_back(j);
  }

  json trials = json::array();
  for (const auto& t : r.trials) {
    trials.push_back({{"trial", t.trial},
                      {"sigma_t", t.sigma_t},
                      {"label", t.label},
                      {"estimate", point_json(t.estimate)},
                      {"residual_norm", t.residual_norm},
                      {"converged", t.converged}});
  }

  const json doc = {
      {"provenance", {{"tool", r.tool}, {"version", r.version}, {"seed", r.seed}, {"generated_at", r.generated_at}}},
      {"mode", r.mode},
      {"input", json::parse(r.input)},
      {"solves", solves},
      {"monte_carlo", mc},
      {"trials", trials},
      {"exit_code", r.exit_code()},
  };
  return doc.dump(indent);
}

Report report_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(e.what());
  }
  try {
    Report r;
    const json& prov = doc.at("provenance");
    r.tool = prov.at("tool").get<std::string>();
    r.version = prov.at("version").get<std::string>();
    r.seed = prov.at("seed").get<std::uint64_t>();
    r.generated_at = prov.at("generated_at").get<std::string>();
    r.mode = doc.at("mode").get<std::string>();
    r.input = doc.at("input").dump();

    for (const json& j : doc.at("solves")) {
      SolveRecord s;
      s.label = j.at("label").get<std::string>();
      s.residual_norm = j.at("residual_norm").get<double>();
      s.iterations = j.at("iterations").get<int>();
      s.converged = j.at("converged").get<bool>();
      s.flags = j.at("flags").get<std::vector<std::string>>();
      if (j.contains("estimate")) s.estimate = point_from(j["estimate"]);
      for (const json& c : j.at("candidates")) {
        s.candidates.push_back({point_from(c.at("point")), c.at("residual_norm").get<double>()});
      }
      if (j.contains("truth")) s.truth = point_from(j["truth"]);
      if (j.contains("error_m")) s.error_m = j["error_m"].get<double>();
      if (j.contains("direction")) s.direction = j["direction"].get<std::vector<double>>();
      if (j.contains("doppler_shift_hz")) s.doppler_shift_hz = j["doppler_shift_hz"].get<double>();
      if (j.contains("doppler_distance_m")) s.doppler_distance_m = j["doppler_distance_m"].get<double>();
      if (j.contains("error")) {
        s.error = ErrorInfo{j["error"].at("kind").get<std::string>(), j["error"].at("message").get<std::string>()};
      }
      r.solves.push_back(std::move(s));
    }
    for (const json& j : doc.at("monte_carlo")) {
      MonteCarloSummary m;
      m.sigma_t = j.at("sigma_t").get<double>();
      m.trials = j.at("trials").get<int>();
      m.failures = j.at("failures").get<int>();
      if (j.contains("position_error")) m.position_error = quantiles_from(j["position_error"]);
      if (j.contains("emitter_error")) m.emitter_error = quantiles_from(j["emitter_error"]);
      r.monte_carlo.push_back(m);
    }
    for (const json& j : doc.at("trials")) {
      r.trials.push_back({j.at("trial").get<int>(), j.at("sigma_t").get<double>(), j.at("label").get<std::string>(),
                          point_from(j.at("estimate")), j.at("residual_norm").get<double>(),
                          j.at("converged").get<bool>()});
    }
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed report: ") + e.what());
  }
}

std::string to_csv(const Report& r) {
  std::ostringstream os;
  os.precision(17);
  os << "trial,sigma_t,mode,x,y,z,residual_norm,converged\n";
  for (const auto& t : r.trials) {
    os << t.trial << ',' << t.sigma_t << ',' << r.mode << ',' << t.estimate.x() << ',' << t.estimate.y() << ','
       << t.estimate.z() << ',' << t.residual_norm << ',' << (t.converged ? "true" : "false") << '\n';
  }
  return os.str();
}

}  // namespace relpos::cli
