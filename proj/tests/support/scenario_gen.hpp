#pragma once

// Seeded scenario generators shared by the property and acceptance suites.

#include "relpos/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace relpos::testing {

inline double min_angle_deg(const Point& a, const Point& b, const Point& c) {
  auto angle = [](const Eigen::Vector3d& u, const Eigen::Vector3d& v) {
    return std::acos(std::clamp(u.normalized().dot(v.normalized()), -1.0, 1.0));
  };
  const double at_a = angle(b.vec() - a.vec(), c.vec() - a.vec());
  const double at_b = angle(a.vec() - b.vec(), c.vec() - b.vec());
  const double at_c = std::numbers::pi - at_a - at_b;
  return std::min({at_a, at_b, at_c}) * 180.0 / std::numbers::pi;
}

/// Planar triangle with corners in [-extent, extent]^2 and every interior
/// angle above `min_angle`.
inline std::vector<Point> random_triangle(std::mt19937_64& rng, double extent, double min_angle) {
  std::uniform_real_distribution<double> u(-extent, extent);
  for (;;) {
    std::vector<Point> t{Point(u(rng), u(rng)), Point(u(rng), u(rng)), Point(u(rng), u(rng))};
    if (min_angle_deg(t[0], t[1], t[2]) > min_angle) return t;
  }
}

/// Uniform point in the disk of radius `factor * diameter` around the centroid.
inline Point random_point_near(std::mt19937_64& rng, const std::vector<Point>& anchors, double factor) {
  const Point c = centroid(anchors);
  const double r = factor * diameter(anchors);
  std::uniform_real_distribution<double> u(-r, r);
  for (;;) {
    const double dx = u(rng);
    const double dy = u(rng);
    if (std::hypot(dx, dy) <= r) return Point(c.x() + dx, c.y() + dy);
  }
}

struct TeamScenario {
  std::vector<Point> drones;
  std::vector<Point> emitters;
};

/// Three drones at distinct altitudes above a non-degenerate horizontal
/// triangle, and three ground emitters (z = 0) spread around them.
inline TeamScenario random_team(std::mt19937_64& rng) {
  TeamScenario s;
  const auto footprint = random_triangle(rng, 300.0, 20.0);
  std::uniform_real_distribution<double> alt(60.0, 200.0);
  std::vector<double> altitudes;
  while (altitudes.size() < 3) {
    const double a = alt(rng);
    if (std::none_of(altitudes.begin(), altitudes.end(), [a](double b) { return std::abs(a - b) < 5.0; })) {
      altitudes.push_back(a);
    }
  }
  for (int i = 0; i < 3; ++i) s.drones.emplace_back(footprint[i].x(), footprint[i].y(), altitudes[i]);
  const auto ground = random_triangle(rng, 1500.0, 20.0);
  for (const auto& g : ground) s.emitters.emplace_back(g.x(), g.y(), 0.0);
  return s;
}

}  // namespace relpos::testing
