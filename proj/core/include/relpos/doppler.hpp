#pragma once

namespace relpos::doppler {

/// Propagation speed used throughout unless a scenario overrides it.
inline constexpr double kSpeedOfLightApprox = 3.0e8;
inline constexpr double kSpeedOfLight = 299792458.0;

/// One carrier observation. All fields must be strictly positive and finite.
class DopplerReading {
 public:
  DopplerReading(double f_emitted, double f_received, double c = kSpeedOfLightApprox);

  double f_emitted() const { return f_emitted_; }
  double f_received() const { return f_received_; }
  double c() const { return c_; }

 private:
  double f_emitted_;
  double f_received_;
  double c_;
};

/// Range figure derived from a frequency shift. `idealized` is always set:
/// the formula assumes a stationary geometry and ignores reflections, and a
/// Doppler shift alone does not determine a geometric range in practice.
struct DopplerRange {
  double meters = 0.0;
  bool idealized = true;
};

/// |f_received - f_emitted| in hertz.
double doppler_shift(const DopplerReading& r);

/// (c * f_d) / (2 * f_emitted).
DopplerRange doppler_distance(const DopplerReading& r);

}  // namespace relpos::doppler
