#pragma once

#include "relpos/geometry.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <vector>

namespace relpos::sim {

/// Forward-model inputs. Receivers and emitters share one dimension; times are
/// on a single clock unless `clock_offsets` gives a per-receiver bias.
struct Scenario {
  std::vector<Point> emitters;
  std::vector<Point> receivers;
  double c = 3.0e8;
  double carrier = 1.0e9;
  double emission_time = 0.0;
  double noise_sigma_t = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> clock_offsets;  // empty: shared clock

  Dim dim() const;
  /// Throws DimensionError, InvalidNoise or InvalidArgument.
  void validate() const;
};

enum class ClockModel { shared, offset };

/// Arrival timestamps indexed (receiver, emitter).
struct ArrivalSet {
  Eigen::MatrixXd times;
  ClockModel clock = ClockModel::shared;
  std::vector<double> offsets;
};

/// Ranges indexed (receiver, emitter), meters.
struct DistanceMatrix {
  Eigen::MatrixXd d;
};

DistanceMatrix true_distance_matrix(const Scenario& s);

/// emission_time + d / c (+ receiver clock offset when configured). Pure.
ArrivalSet simulate_arrivals(const Scenario& s);

/// Adds i.i.d. N(0, sigma_t^2) jitter to every timestamp, visiting entries
/// receiver-major. The generator is std::mt19937_64 seeded with `seed`; its
/// output is mapped to (0, 1] with 53-bit resolution and turned into normals
/// with the Box-Muller transform (both outputs of each pair are used). The
/// sequence is therefore identical on every conforming platform.
ArrivalSet perturb_arrivals(const ArrivalSet& a, double sigma_t, std::uint64_t seed);

/// Portable standard-normal source described above.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}
  double next();

 private:
  double uniform();

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace relpos::sim
