#include "relpos/doppler.hpp"

#include "relpos/errors.hpp"

#include <cmath>
#include <string>

namespace relpos::doppler {

namespace {

double require_positive(double v, const char* name) {
  if (!std::isfinite(v) || v <= 0.0) {
    throw InvalidArgument(std::string(name) + " must be positive and finite");
  }
  return v;
}

}  // namespace

DopplerReading::DopplerReading(double f_emitted, double f_received, double c)
    : f_emitted_(require_positive(f_emitted, "f_emitted")),
      f_received_(require_positive(f_received, "f_received")),
      c_(require_positive(c, "c")) {}

double doppler_shift(const DopplerReading& r) { return std::abs(r.f_received() - r.f_emitted()); }

DopplerRange doppler_distance(const DopplerReading& r) {
  return {(r.c() * doppler_shift(r)) / (2.0 * r.f_emitted()), true};
}

}  // namespace relpos::doppler
