#include "relpos/geometry.hpp"

#include "relpos/errors.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace relpos {

namespace {

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) {
    throw InvalidArgument(std::string("non-finite coordinate ") + name);
  }
}

}  // namespace

Point::Point(double x, double y) : x_(x), y_(y), z_(0.0), dim_(Dim::two) {
  require_finite(x, "x");
  require_finite(y, "y");
}

Point::Point(double x, double y, double z) : x_(x), y_(y), z_(z), dim_(Dim::three) {
  require_finite(x, "x");
  require_finite(y, "y");
  require_finite(z, "z");
}

Point Point::from_vector(const Eigen::Vector3d& v, Dim dim) {
  return dim == Dim::two ? Point(v.x(), v.y()) : Point(v.x(), v.y(), v.z());
}

bool lex_less(const Point& a, const Point& b) {
  if (a.x() != b.x()) return a.x() < b.x();
  if (a.y() != b.y()) return a.y() < b.y();
  return a.z() < b.z();
}

std::string to_string(const Point& p) {
  std::ostringstream os;
  os.precision(12);
  os << '(' << p.x() << ", " << p.y();
  if (p.dim() == Dim::three) os << ", " << p.z();
  os << ')';
  return os.str();
}

void require_same_dim(const Point& p, const Point& q) {
  if (p.dim() != q.dim()) {
    throw DimensionError("mixing 2D and 3D points: " + to_string(p) + " vs " + to_string(q));
  }
}

void require_same_dim(std::span<const Point> points, Dim dim, const char* what) {
  for (const auto& p : points) {
    if (p.dim() != dim) {
      throw DimensionError(std::string(what) + " has a point of the wrong dimension: " +
                           to_string(p));
    }
  }
}

double distance(const Point& p, const Point& q) {
  require_same_dim(p, q);
  return (p.vec() - q.vec()).norm();
}

DirectionVector direction_unit(const Point& from, const Point& to) {
  require_same_dim(from, to);
  const Eigen::Vector3d d = to.vec() - from.vec();
  const double n = d.norm();
  if (n == 0.0) {
    throw DegenerateDirection("no direction between coincident points " + to_string(from));
  }
  return {d / n, from.dim(), true};
}

DirectionVector average_direction(std::span<const DirectionVector> dirs) {
  if (dirs.empty()) throw EmptyInput("average_direction needs at least one vector");
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (const auto& d : dirs) {
    if (d.dim != dirs.front().dim) throw DimensionError("average_direction: mixed dimensions");
    sum += d.components;
  }
  return {sum / static_cast<double>(dirs.size()), dirs.front().dim, false};
}

DirectionVector renormalize(const DirectionVector& d) {
  const double n = d.norm();
  if (n == 0.0) throw DegenerateDirection("cannot normalize the zero vector");
  return {d.components / n, d.dim, true};
}

Point centroid(std::span<const Point> points) {
  if (points.empty()) throw EmptyInput("centroid of an empty set");
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (const auto& p : points) sum += p.vec();
  return Point::from_vector(sum / static_cast<double>(points.size()), points.front().dim());
}

double diameter(std::span<const Point> points) {
  double best = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      best = std::max(best, (points[i].vec() - points[j].vec()).norm());
    }
  }
  return best;
}

bool collinear(const Point& a, const Point& b, const Point& c, double tol) {
  const Eigen::Vector3d ab = b.vec() - a.vec();
  const Eigen::Vector3d ac = c.vec() - a.vec();
  const double scale = std::max({ab.squaredNorm(), ac.squaredNorm(), (c.vec() - b.vec()).squaredNorm()});
  if (scale == 0.0) return true;
  return ab.cross(ac).norm() <= tol * scale;
}

}  // namespace relpos
