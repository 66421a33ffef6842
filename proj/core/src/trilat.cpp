#include "relpos/trilat.hpp"

#include "relpos/errors.hpp"

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

namespace relpos::trilat {

namespace {

constexpr double kAnchorGuard = 1e-9;
constexpr double kRadicandSlack = 1e-9;
// Heights below this are a single on-plane solution rather than a mirror pair.
constexpr double kOnPlane = 1e-9;
// Squared heights below this fraction of d1^2 are rounding noise.
constexpr double kRadicandNoise = 64.0 * std::numeric_limits<double>::epsilon();

Eigen::Vector3d guarded_offset(const Eigen::Vector3d& q, const Point& anchor) {
  Eigen::Vector3d d = q - anchor.vec();
  if (d.norm() < kAnchorGuard) d.x() += kAnchorGuard;
  return d;
}

void require_three(const TrilaterationProblem& p, Dim dim) {
  p.validate();
  if (p.dim != dim) {
    throw DimensionError("expected a " + std::to_string(to_int(dim)) + "D problem");
  }
  if (p.emitters.size() != 3) {
    throw InvalidArgument("closed-form trilateration needs exactly 3 emitters");
  }
  if (collinear(p.emitters[0], p.emitters[1], p.emitters[2])) {
    throw GeometryDegenerate("emitters are collinear");
  }
}

double sq(double v) { return v * v; }

Candidate make_candidate(const TrilaterationProblem& p, const Point& q) {
  return {q, trilateration_residuals(p, q).norm()};
}

bool higher(const Point& a, const Point& b) { return a.z() > b.z(); }

SolveResult finish(const TrilaterationProblem& p, std::vector<Candidate> candidates) {
  SolveResult res;
  res.candidates = order_candidates(std::move(candidates), kResidualTieTolerance,
                                    p.dim == Dim::three ? CandidatePreference(higher) : nullptr);
  res.estimate = res.candidates.front().point;
  res.residual_norm = res.candidates.front().residual_norm;
  res.converged = true;
  if (res.residual_norm > kConsistencyTolerance) res.flags.insert(SolveFlag::inconsistent);
  return res;
}

// Unit normal of the best-fit plane through the anchors, if they are coplanar.
std::optional<Eigen::Vector3d> coplanar_normal(std::span<const Point> anchors) {
  const Point g = centroid(anchors);
  Eigen::MatrixXd centred(static_cast<Eigen::Index>(anchors.size()), 3);
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    centred.row(static_cast<Eigen::Index>(i)) = (anchors[i].vec() - g.vec()).transpose();
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(centred, Eigen::ComputeFullV);
  const Eigen::Vector3d sv = svd.singularValues().head<3>();
  if (anchors.size() > 3 && sv(2) > 1e-9 * std::max(sv(0), 1.0)) return std::nullopt;
  return Eigen::Vector3d(svd.matrixV().col(2));
}

}  // namespace

void TrilaterationProblem::validate() const {
  if (emitters.size() != distances.size()) {
    throw InvalidArgument("emitters and distances differ in length");
  }
  if (emitters.empty()) throw EmptyInput("trilateration needs emitters");
  require_same_dim(emitters, dim, "emitters");
  for (double d : distances) {
    if (!std::isfinite(d) || d < 0.0) throw InvalidArgument("distances must be finite and >= 0");
  }
}

Eigen::VectorXd trilateration_residuals(const TrilaterationProblem& p, const Point& q) {
  p.validate();
  if (q.dim() != p.dim) throw DimensionError("query point dimension differs from problem");
  Eigen::VectorXd r(static_cast<Eigen::Index>(p.emitters.size()));
  for (std::size_t i = 0; i < p.emitters.size(); ++i) {
    r(static_cast<Eigen::Index>(i)) = guarded_offset(q.vec(), p.emitters[i]).norm() - p.distances[i];
  }
  return r;
}

Eigen::MatrixXd trilateration_jacobian(const TrilaterationProblem& p, const Point& q) {
  p.validate();
  if (q.dim() != p.dim) throw DimensionError("query point dimension differs from problem");
  const int cols = to_int(p.dim);
  Eigen::MatrixXd j(static_cast<Eigen::Index>(p.emitters.size()), cols);
  for (std::size_t i = 0; i < p.emitters.size(); ++i) {
    j.row(static_cast<Eigen::Index>(i)) =
        guarded_offset(q.vec(), p.emitters[i]).normalized().head(cols).transpose();
  }
  return j;
}

SolveResult trilaterate_2d(const TrilaterationProblem& p) {
  require_three(p, Dim::two);
  const Eigen::Vector2d origin(p.emitters[0].x(), p.emitters[0].y());
  const Eigen::Vector2d a = Eigen::Vector2d(p.emitters[1].x(), p.emitters[1].y()) - origin;
  const Eigen::Vector2d b = Eigen::Vector2d(p.emitters[2].x(), p.emitters[2].y()) - origin;
  const double d1 = p.distances[0];
  const double d2 = p.distances[1];
  const double d3 = p.distances[2];

  // Circle 1 minus circle 2: a . q = (d1^2 - d2^2 + |a|^2) / 2.
  const double along = (sq(d1) - sq(d2) + a.squaredNorm()) / (2.0 * a.norm());
  const Eigen::Vector2d n = a.normalized();
  const Eigen::Vector2d u(-n.y(), n.x());
  const Eigen::Vector2d foot = along * n;

  // |foot + t u - b|^2 = d3^2.
  const Eigen::Vector2d w = foot - b;
  const double beta = u.dot(w);
  const double disc = sq(beta) - (w.squaredNorm() - sq(d3));

  std::vector<double> ts;
  if (disc > 0.0) {
    const double root = std::sqrt(disc);
    ts = {-beta - root, -beta + root};
  } else {
    ts = {-beta};
  }

  std::vector<Candidate> candidates;
  for (double t : ts) {
    const Eigen::Vector2d q = origin + foot + t * u;
    candidates.push_back(make_candidate(p, Point(q.x(), q.y())));
  }
  SolveResult res = finish(p, std::move(candidates));
  const auto fitting = std::count_if(res.candidates.begin(), res.candidates.end(), [](const Candidate& c) {
    return c.residual_norm <= kConsistencyTolerance;
  });
  if (fitting > 1) res.flags.insert(SolveFlag::ambiguous);
  return res;
}

SolveResult trilaterate_3d(const TrilaterationProblem& p) {
  require_three(p, Dim::three);
  const Eigen::Vector3d origin = p.emitters[0].vec();
  const Eigen::Vector3d a = p.emitters[1].vec() - origin;
  const Eigen::Vector3d b = p.emitters[2].vec() - origin;
  const double d1 = p.distances[0];
  const double d2 = p.distances[1];
  const double d3 = p.distances[2];

  // Orthonormal frame on the emitter plane, first emitter at the origin.
  const double base = a.norm();
  const Eigen::Vector3d ex = a / base;
  const double i = ex.dot(b);
  const Eigen::Vector3d ey = (b - i * ex).normalized();
  const Eigen::Vector3d ez = ex.cross(ey);
  const double j = ey.dot(b);

  const double x = (sq(d1) - sq(d2) + sq(base)) / (2.0 * base);
  const double y = (sq(d1) - sq(d3) + sq(i) + sq(j)) / (2.0 * j) - (i / j) * x;
  double radicand = sq(d1) - sq(x) - sq(y);
  if (radicand < -kRadicandSlack * std::max(sq(d1), 1.0)) {
    throw Inconsistent("spheres do not intersect (squared height " + std::to_string(radicand) + ")");
  }
  if (radicand <= kRadicandNoise * sq(d1)) radicand = 0.0;
  const double h = std::sqrt(radicand);

  const Eigen::Vector3d in_plane = origin + x * ex + y * ey;
  std::vector<Candidate> candidates;
  if (h > kOnPlane) {
    candidates.push_back(make_candidate(p, Point::from_vector(in_plane + h * ez, Dim::three)));
    candidates.push_back(make_candidate(p, Point::from_vector(in_plane - h * ez, Dim::three)));
  } else {
    candidates.push_back(make_candidate(p, Point::from_vector(in_plane, Dim::three)));
  }
  SolveResult res = finish(p, std::move(candidates));
  if (res.candidates.size() == 2) res.flags.insert(SolveFlag::mirror_ambiguity);
  return res;
}

SolveResult trilaterate_lsq(const TrilaterationProblem& p, const Point& init,
                            const SolverOptions& opts) {
  p.validate();
  if (p.emitters.size() < 3) throw InvalidArgument("trilateration needs at least 3 emitters");
  if (init.dim() != p.dim) throw DimensionError("initial point dimension differs from problem");

  SolveResult gn = gauss_newton([&](const Point& q) { return trilateration_residuals(p, q); },
                                [&](const Point& q) { return trilateration_jacobian(p, q); }, init,
                                opts);

  std::vector<Candidate> candidates{{gn.estimate, gn.residual_norm}};
  bool mirrored = false;
  if (p.dim == Dim::three) {
    if (const auto normal = coplanar_normal(p.emitters)) {
      const Eigen::Vector3d anchor = p.emitters.front().vec();
      const double offset = normal->dot(gn.estimate.vec() - anchor);
      if (std::abs(offset) > kOnPlane) {
        const Point reflected =
            Point::from_vector(gn.estimate.vec() - 2.0 * offset * *normal, Dim::three);
        candidates.push_back(make_candidate(p, reflected));
        mirrored = true;
      }
    }
  }

  SolveResult res = finish(p, std::move(candidates));
  res.iterations = gn.iterations;
  if (mirrored) res.flags.insert(SolveFlag::mirror_ambiguity);
  return res;
}

std::vector<double> aggregate_distances(std::span<const Point> drones,
                                        const sim::DistanceMatrix& dm, DistanceAggregation how) {
  if (drones.empty()) throw EmptyInput("no drones");
  if (dm.d.rows() != static_cast<Eigen::Index>(drones.size())) {
    throw InvalidArgument("distance matrix needs one row per drone");
  }
  const double count = static_cast<double>(drones.size());
  const Point g = centroid(drones);
  double spread = 0.0;
  for (const auto& d : drones) spread += (d.vec() - g.vec()).squaredNorm();
  spread /= count;

  std::vector<double> out;
  for (Eigen::Index e = 0; e < dm.d.cols(); ++e) {
    if (how == DistanceAggregation::mean) {
      out.push_back(dm.d.col(e).mean());
    } else {
      const double mean_sq = dm.d.col(e).squaredNorm() / count;
      out.push_back(std::sqrt(std::max(mean_sq - spread, 0.0)));
    }
  }
  return out;
}

SolveResult team_relative_position(std::span<const Point> drones,
                                   std::span<const Point> emitter_estimates,
                                   const sim::DistanceMatrix& dm, const SolverOptions& opts,
                                   DistanceAggregation how) {
  if (emitter_estimates.size() < 3) throw InvalidArgument("need at least 3 emitter estimates");
  if (dm.d.cols() != static_cast<Eigen::Index>(emitter_estimates.size())) {
    throw InvalidArgument("distance matrix needs one column per emitter");
  }
  const Dim dim = emitter_estimates.front().dim();
  require_same_dim(drones, dim, "drones");

  TrilaterationProblem prob{{emitter_estimates.begin(), emitter_estimates.end()},
                            aggregate_distances(drones, dm, how), dim};
  return trilaterate_lsq(prob, centroid(drones), opts);
}

}  // namespace relpos::trilat
