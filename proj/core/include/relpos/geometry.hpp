#pragma once

#include <Eigen/Core>

#include <span>
#include <string>
#include <vector>

namespace relpos {

enum class Dim { two = 2, three = 3 };

inline int to_int(Dim d) { return static_cast<int>(d); }

/// Position in a local Cartesian frame, meters. Planar points keep z = 0 and
/// carry Dim::two so mixed-dimension arithmetic is caught at runtime.
class Point {
 public:
  Point() = default;
  Point(double x, double y);
  Point(double x, double y, double z);

  static Point planar(double x, double y) { return {x, y}; }
  static Point spatial(double x, double y, double z) { return {x, y, z}; }
  static Point from_vector(const Eigen::Vector3d& v, Dim dim);

  double x() const { return x_; }
  double y() const { return y_; }
  double z() const { return z_; }
  Dim dim() const { return dim_; }

  Eigen::Vector3d vec() const { return {x_, y_, z_}; }

  friend bool operator==(const Point&, const Point&) = default;

 private:
  double x_ = 0.0;
  double y_ = 0.0;
  double z_ = 0.0;
  Dim dim_ = Dim::three;
};

/// Lexicographic (x, y, z) ordering used for deterministic tie-breaks.
bool lex_less(const Point& a, const Point& b);

std::string to_string(const Point& p);

void require_same_dim(const Point& p, const Point& q);
void require_same_dim(std::span<const Point> points, Dim dim, const char* what);

double distance(const Point& p, const Point& q);

struct DirectionVector {
  Eigen::Vector3d components = Eigen::Vector3d::Zero();
  Dim dim = Dim::three;
  bool unit = false;

  double norm() const { return components.norm(); }
};

/// Unit vector pointing from `from` towards `to`.
DirectionVector direction_unit(const Point& from, const Point& to);

/// Component-wise mean of the inputs. The result is not renormalized; use
/// `renormalize` when a unit vector is required.
DirectionVector average_direction(std::span<const DirectionVector> dirs);

/// Throws DegenerateDirection for the zero vector.
DirectionVector renormalize(const DirectionVector& d);

Point centroid(std::span<const Point> points);

/// Largest pairwise distance.
double diameter(std::span<const Point> points);

/// True when the three points span less than a line's worth of area relative
/// to their size: |(b-a) x (c-a)| <= tol * max_edge^2.
bool collinear(const Point& a, const Point& b, const Point& c, double tol = 1e-9);

}  // namespace relpos
