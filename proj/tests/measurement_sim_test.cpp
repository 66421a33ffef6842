#include "relpos/errors.hpp"
#include "relpos/measurement_sim.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

using namespace relpos;
using namespace relpos::sim;

namespace {

Scenario sphere_emitters(Point receiver) {
  Scenario s;
  s.emitters = {Point(0, 0, 0), Point(500, 0, 0), Point(0, 500, 0)};
  s.receivers = {receiver};
  return s;
}

}  // namespace

TEST_CASE("true_distance_matrix examples") {
  Scenario coincident;
  coincident.emitters = {Point(0, 0, 0)};
  coincident.receivers = {Point(0, 0, 0)};
  CHECK(true_distance_matrix(coincident).d(0, 0) == 0.0);

  // Receiver quoted to three decimals; the exact height is sqrt(49500).
  const auto rounded = true_distance_matrix(sphere_emitters(Point(180, 90, 222.486))).d;
  CHECK(rounded(0, 0) == doctest::Approx(300).epsilon(1e-6));
  CHECK(rounded(0, 1) == doctest::Approx(400).epsilon(1e-6));
  CHECK(rounded(0, 2) == doctest::Approx(500).epsilon(1e-6));
  const auto exact = true_distance_matrix(sphere_emitters(Point(180, 90, std::sqrt(49500.0)))).d;
  CHECK(std::abs(exact(0, 0) - 300) < 1e-9);
  CHECK(std::abs(exact(0, 1) - 400) < 1e-9);
  CHECK(std::abs(exact(0, 2) - 500) < 1e-9);

  Scenario planar;
  planar.emitters = {Point(0, 0), Point(100, 0), Point(0, 100)};
  planar.receivers = {Point(40, 30)};
  const auto d = true_distance_matrix(planar).d;
  CHECK(d(0, 0) == 50.0);
  CHECK(d(0, 1) == doctest::Approx(67.08203932499369).epsilon(1e-15));
  CHECK(d(0, 2) == doctest::Approx(80.62257748298549).epsilon(1e-15));
}

TEST_CASE("true_distance_matrix rejects mixed dimensions") {
  Scenario s;
  s.emitters = {Point(0, 0)};
  s.receivers = {Point(0, 0, 0)};
  CHECK_THROWS_AS(true_distance_matrix(s), DimensionError);
  CHECK_THROWS_AS(simulate_arrivals(s), DimensionError);
}

TEST_CASE("simulate_arrivals examples") {
  Scenario far;
  far.emitters = {Point(0, 0, 0)};
  far.receivers = {Point(3e8, 0, 0)};
  CHECK(simulate_arrivals(far).times(0, 0) == 1.0);

  Scenario same;
  same.emitters = {Point(1, 2, 3)};
  same.receivers = {Point(1, 2, 3)};
  same.emission_time = 12.5;
  CHECK(simulate_arrivals(same).times(0, 0) == 12.5);

  Scenario planar;
  planar.emitters = {Point(0, 0)};
  planar.receivers = {Point(40, 30)};
  CHECK(simulate_arrivals(planar).times(0, 0) == doctest::Approx(50.0 / 3e8).epsilon(1e-15));
  CHECK(simulate_arrivals(planar).clock == ClockModel::shared);
}

TEST_CASE("clock offsets bias each receiver row") {
  Scenario s;
  s.emitters = {Point(0, 0), Point(10, 0)};
  s.receivers = {Point(0, 5), Point(5, 5)};
  const auto shared = simulate_arrivals(s);
  s.clock_offsets = {1e-6, -2e-6};
  const auto biased = simulate_arrivals(s);
  CHECK(biased.clock == ClockModel::offset);
  for (int j = 0; j < 2; ++j) {
    CHECK(biased.times(0, j) == doctest::Approx(shared.times(0, j) + 1e-6).epsilon(1e-15));
    CHECK(biased.times(1, j) == doctest::Approx(shared.times(1, j) - 2e-6).epsilon(1e-15));
  }
  s.clock_offsets = {1e-6};
  CHECK_THROWS_AS(simulate_arrivals(s), InvalidArgument);
}

TEST_CASE("arrival differences reproduce range differences") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-2000, 2000);
  for (int trial = 0; trial < 200; ++trial) {
    Scenario s;
    s.emitters = {Point(u(rng), u(rng), u(rng))};
    s.receivers = {Point(u(rng), u(rng), u(rng)), Point(u(rng), u(rng), u(rng)), Point(u(rng), u(rng), u(rng))};
    const auto a = simulate_arrivals(s);
    const auto d = true_distance_matrix(s).d;
    for (int i = 1; i < 3; ++i) {
      const double from_times = s.c * (a.times(0, 0) - a.times(i, 0));
      const double direct = d(0, 0) - d(i, 0);
      CHECK(std::abs(from_times - direct) <= 1e-9 * std::max(1.0, d.maxCoeff()));
    }
    // Pure function of the scenario.
    CHECK(simulate_arrivals(s).times == a.times);
  }
}

TEST_CASE("perturb_arrivals contract") {
  ArrivalSet base;
  base.times = Eigen::MatrixXd::Constant(100, 100, 1e-6);

  CHECK(perturb_arrivals(base, 0.0, 3).times == base.times);
  CHECK(perturb_arrivals(base, 1e-9, 42).times == perturb_arrivals(base, 1e-9, 42).times);
  CHECK(perturb_arrivals(base, 1e-9, 42).times != perturb_arrivals(base, 1e-9, 43).times);
  CHECK_THROWS_AS(perturb_arrivals(base, -1e-9, 1), InvalidNoise);

  const Eigen::MatrixXd delta = perturb_arrivals(base, 1e-9, 2024).times - base.times;
  const double n = static_cast<double>(delta.size());
  const double mean = delta.mean();
  const double sd = std::sqrt((delta.array() - mean).square().sum() / (n - 1.0));
  CHECK(std::abs(sd - 1e-9) <= 0.05 * 1e-9);
  CHECK(std::abs(mean) <= 4.0 * 1e-9 / std::sqrt(n));
}

TEST_CASE("gaussian source is reproducible and standard") {
  GaussianSource a(123);
  GaussianSource b(123);
  bool identical = true;
  double sum = 0.0;
  double sum_sq = 0.0;
  constexpr int kSamples = 200000;
  for (int i = 0; i < kSamples; ++i) {
    const double x = a.next();
    identical = identical && x == b.next();
    sum += x;
    sum_sq += x * x;
  }
  CHECK(identical);
  CHECK(std::abs(sum / kSamples) < 0.01);
  CHECK(std::abs(sum_sq / kSamples - 1.0) < 0.01);
}

TEST_CASE("scenario validation") {
  Scenario s;
  s.emitters = {Point(0, 0)};
  s.receivers = {Point(1, 0)};
  s.noise_sigma_t = -1.0;
  CHECK_THROWS_AS(s.validate(), InvalidNoise);
  s.noise_sigma_t = 0.0;
  s.c = 0.0;
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  s.c = 3e8;
  s.receivers.clear();
  CHECK_THROWS_AS(s.validate(), InsufficientReceivers);
}
