#include "relpos/measurement_sim.hpp"

#include "relpos/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace relpos::sim {

Dim Scenario::dim() const {
  if (!emitters.empty()) return emitters.front().dim();
  if (!receivers.empty()) return receivers.front().dim();
  return Dim::three;
}

void Scenario::validate() const {
  if (emitters.empty()) throw InvalidArgument("scenario needs at least one emitter");
  if (receivers.empty()) throw InsufficientReceivers("scenario needs at least one receiver");
  require_same_dim(emitters, dim(), "emitters");
  require_same_dim(receivers, dim(), "receivers");
  if (!std::isfinite(c) || c <= 0.0) throw InvalidArgument("c must be positive");
  if (!std::isfinite(carrier) || carrier <= 0.0) throw InvalidArgument("carrier must be positive");
  if (!std::isfinite(emission_time)) throw InvalidArgument("emission_time must be finite");
  if (!std::isfinite(noise_sigma_t) || noise_sigma_t < 0.0) {
    throw InvalidNoise("noise_sigma_t must be >= 0");
  }
  if (!clock_offsets.empty() && clock_offsets.size() != receivers.size()) {
    throw InvalidArgument("clock_offsets needs one entry per receiver");
  }
  for (double o : clock_offsets) {
    if (!std::isfinite(o)) throw InvalidArgument("clock_offsets must be finite");
  }
}

DistanceMatrix true_distance_matrix(const Scenario& s) {
  require_same_dim(s.receivers, s.dim(), "receivers");
  require_same_dim(s.emitters, s.dim(), "emitters");
  DistanceMatrix m{Eigen::MatrixXd(s.receivers.size(), s.emitters.size())};
  for (std::size_t i = 0; i < s.receivers.size(); ++i) {
    for (std::size_t j = 0; j < s.emitters.size(); ++j) {
      m.d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          distance(s.receivers[i], s.emitters[j]);
    }
  }
  return m;
}

ArrivalSet simulate_arrivals(const Scenario& s) {
  s.validate();
  const DistanceMatrix dm = true_distance_matrix(s);
  ArrivalSet a;
  a.times = (dm.d / s.c).array() + s.emission_time;
  if (!s.clock_offsets.empty()) {
    a.clock = ClockModel::offset;
    a.offsets = s.clock_offsets;
    for (Eigen::Index i = 0; i < a.times.rows(); ++i) {
      a.times.row(i).array() += s.clock_offsets[static_cast<std::size_t>(i)];
    }
  }
  return a;
}

double GaussianSource::uniform() {
  // (0, 1]: never zero, so the logarithm below is finite.
  return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
}

double GaussianSource::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

ArrivalSet perturb_arrivals(const ArrivalSet& a, double sigma_t, std::uint64_t seed) {
  if (!std::isfinite(sigma_t) || sigma_t < 0.0) {
    throw InvalidNoise("sigma_t must be >= 0, got " + std::to_string(sigma_t));
  }
  ArrivalSet out = a;
  if (sigma_t == 0.0) return out;
  GaussianSource gauss(seed);
  for (Eigen::Index i = 0; i < out.times.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.times.cols(); ++j) {
      out.times(i, j) += sigma_t * gauss.next();
    }
  }
  return out;
}

}  // namespace relpos::sim
