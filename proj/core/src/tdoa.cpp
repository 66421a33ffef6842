#include "relpos/tdoa.hpp"

#include "relpos/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace relpos::tdoa {

namespace {

// Offsets shorter than this are nudged along +x so unit vectors stay defined.
constexpr double kAnchorGuard = 1e-9;
// Runs that end farther than this many receiver diameters from the centre
// have followed an asymptote rather than found an intersection.
constexpr double kRunawayDiameters = 1e3;

Eigen::Vector3d guarded_offset(const Eigen::Vector3d& p, const Point& anchor) {
  Eigen::Vector3d d = p - anchor.vec();
  if (d.norm() < kAnchorGuard) d.x() += kAnchorGuard;
  return d;
}

void check_pairs(std::span<const Point> receivers, const RangeDifferenceSet& rd) {
  if (rd.reference_index >= receivers.size()) {
    throw InvalidArgument("reference receiver index out of range");
  }
  for (const auto& pair : rd.deltas) {
    if (pair.other_index >= receivers.size() || pair.other_index == rd.reference_index) {
      throw InvalidArgument("range difference pair has an invalid receiver index");
    }
  }
}

Eigen::VectorXd residuals_at(std::span<const Point> receivers, const RangeDifferenceSet& rd,
                             const Eigen::Vector3d& p) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(rd.deltas.size()));
  const double to_ref = guarded_offset(p, receivers[rd.reference_index]).norm();
  for (std::size_t k = 0; k < rd.deltas.size(); ++k) {
    const auto& pair = rd.deltas[k];
    r(static_cast<Eigen::Index>(k)) =
        to_ref - guarded_offset(p, receivers[pair.other_index]).norm() - pair.delta_d;
  }
  return r;
}

Eigen::MatrixXd jacobian_at(std::span<const Point> receivers, const RangeDifferenceSet& rd,
                            const Eigen::Vector3d& p, int cols) {
  Eigen::MatrixXd j(static_cast<Eigen::Index>(rd.deltas.size()), cols);
  const Eigen::Vector3d u_ref = guarded_offset(p, receivers[rd.reference_index]).normalized();
  for (std::size_t k = 0; k < rd.deltas.size(); ++k) {
    const Eigen::Vector3d u_other =
        guarded_offset(p, receivers[rd.deltas[k].other_index]).normalized();
    j.row(static_cast<Eigen::Index>(k)) = (u_ref - u_other).head(cols).transpose();
  }
  return j;
}

void require_three_receivers(std::span<const Point> receivers, const RangeDifferenceSet& rd,
                             Dim dim) {
  if (receivers.size() != 3) {
    throw InsufficientReceivers("emitter fix needs exactly 3 receivers, got " +
                                std::to_string(receivers.size()));
  }
  require_same_dim(receivers, dim, "receivers");
  check_pairs(receivers, rd);
  if (rd.deltas.size() != 2) throw InvalidArgument("expected two range differences");
  if (collinear(receivers[0], receivers[1], receivers[2])) {
    throw GeometryDegenerate("receivers are collinear");
  }
}

struct MultiStartProblem {
  VectorResidualFn residual;
  VectorJacobianFn jacobian;
  std::vector<Eigen::VectorXd> starts;
  std::function<Point(const Eigen::VectorXd&)> to_point;
  Point centre;
  double runaway_radius = 0.0;
};

// Centre plus (count - 1) starts evenly spaced on a horizontal circle.
std::vector<Eigen::VectorXd> ring_starts(const Eigen::VectorXd& centre, double radius, int count) {
  std::vector<Eigen::VectorXd> starts{centre};
  const int ring = count - 1;
  for (int k = 0; k < ring; ++k) {
    const double angle = 2.0 * std::numbers::pi * k / ring;
    Eigen::VectorXd s = centre;
    s(0) += radius * std::cos(angle);
    s(1) += radius * std::sin(angle);
    starts.push_back(s);
  }
  return starts;
}

SolveResult solve_multistart(const MultiStartProblem& prob, const SolverOptions& opts) {
  std::vector<Candidate> found;
  int total_iterations = 0;
  LeastSquaresOutcome best_failed;
  best_failed.residual_norm = std::numeric_limits<double>::infinity();

  for (const auto& start : prob.starts) {
    const LeastSquaresOutcome o = minimize_least_squares(prob.residual, prob.jacobian, start, opts);
    total_iterations += o.iterations;
    if (!o.params.allFinite()) continue;
    const bool runaway = (prob.to_point(o.params).vec() - prob.centre.vec()).norm() > prob.runaway_radius;
    if (o.converged && !runaway) {
      found.push_back({prob.to_point(o.params), o.residual_norm});
    } else if (o.residual_norm < best_failed.residual_norm) {
      // Divergent or unfinished run; kept only as the best failed iterate.
      best_failed = o;
    }
  }

  if (found.empty()) {
    SolveResult best;
    best.iterations = total_iterations;
    if (best_failed.params.size() > 0) {
      best.estimate = prob.to_point(best_failed.params);
      best.residual_norm = best_failed.residual_norm;
      best.candidates = {{best.estimate, best.residual_norm}};
    }
    throw NoConvergence("no start converged to a bounded minimizer", best);
  }

  const Eigen::Vector3d centre = prob.centre.vec();
  auto nearer_centre = [&](const Point& a, const Point& b) {
    return (a.vec() - centre).norm() < (b.vec() - centre).norm();
  };

  SolveResult res;
  res.candidates = order_candidates(std::move(found), kResidualTieTolerance, nearer_centre, kDedupRadius);
  res.estimate = res.candidates.front().point;
  res.residual_norm = res.candidates.front().residual_norm;
  res.iterations = total_iterations;
  res.converged = true;
  if (res.residual_norm > kConsistencyTolerance) res.flags.insert(SolveFlag::inconsistent);
  const auto fitting = std::count_if(res.candidates.begin(), res.candidates.end(), [](const Candidate& c) {
    return c.residual_norm <= kConsistencyTolerance;
  });
  if (fitting > 1) res.flags.insert(SolveFlag::ambiguous);
  return res;
}

}  // namespace

RangeDifferenceSet arrival_deltas(const sim::ArrivalSet& a, std::size_t emitter_index,
                                  std::size_t reference_index, double c) {
  const auto receivers = static_cast<std::size_t>(a.times.rows());
  if (receivers < 2) {
    throw InsufficientReceivers("range differences need at least 2 receivers");
  }
  if (emitter_index >= static_cast<std::size_t>(a.times.cols())) {
    throw InvalidArgument("emitter index out of range");
  }
  if (reference_index >= receivers) throw InvalidArgument("reference index out of range");
  if (!std::isfinite(c) || c <= 0.0) throw InvalidArgument("c must be positive");

  const auto col = static_cast<Eigen::Index>(emitter_index);
  const double t_ref = a.times(static_cast<Eigen::Index>(reference_index), col);
  RangeDifferenceSet rd{reference_index, {}};
  for (std::size_t i = 0; i < receivers; ++i) {
    if (i == reference_index) continue;
    const double dt = t_ref - a.times(static_cast<Eigen::Index>(i), col);
    rd.deltas.push_back({i, dt, c * dt});
  }
  return rd;
}

Eigen::VectorXd hyperbolic_residuals(std::span<const Point> receivers,
                                     const RangeDifferenceSet& rd, const Point& p) {
  require_same_dim(receivers, p.dim(), "receivers");
  check_pairs(receivers, rd);
  return residuals_at(receivers, rd, p.vec());
}

Eigen::MatrixXd hyperbolic_jacobian(std::span<const Point> receivers,
                                    const RangeDifferenceSet& rd, const Point& p) {
  require_same_dim(receivers, p.dim(), "receivers");
  check_pairs(receivers, rd);
  return jacobian_at(receivers, rd, p.vec(), to_int(p.dim()));
}

SolveResult locate_emitter_2d(std::span<const Point> receivers, const RangeDifferenceSet& rd,
                              const SolverOptions& opts) {
  opts.validate();
  require_three_receivers(receivers, rd, Dim::two);

  const Point centre = centroid(receivers);
  MultiStartProblem prob;
  prob.residual = [&](const Eigen::VectorXd& v) {
    return residuals_at(receivers, rd, Eigen::Vector3d(v(0), v(1), 0.0));
  };
  prob.jacobian = [&](const Eigen::VectorXd& v) {
    return jacobian_at(receivers, rd, Eigen::Vector3d(v(0), v(1), 0.0), 2);
  };
  prob.to_point = [](const Eigen::VectorXd& v) { return Point(v(0), v(1)); };
  prob.centre = centre;
  prob.runaway_radius = kRunawayDiameters * diameter(receivers);
  prob.starts = ring_starts(Eigen::Vector2d(centre.x(), centre.y()), diameter(receivers),
                            opts.multistart_count);
  return solve_multistart(prob, opts);
}

SolveResult locate_emitter_3d(std::span<const Point> receivers, const RangeDifferenceSet& rd,
                              std::optional<double> emitter_plane_z, const SolverOptions& opts) {
  opts.validate();
  require_three_receivers(receivers, rd, Dim::three);
  if (emitter_plane_z && !std::isfinite(*emitter_plane_z)) {
    throw InvalidArgument("emitter_plane_z must be finite");
  }

  const Point centre = centroid(receivers);
  const double radius = diameter(receivers);
  MultiStartProblem prob;
  prob.runaway_radius = kRunawayDiameters * radius;
  if (emitter_plane_z) {
    const double z = *emitter_plane_z;
    prob.residual = [&receivers, &rd, z](const Eigen::VectorXd& v) {
      return residuals_at(receivers, rd, Eigen::Vector3d(v(0), v(1), z));
    };
    prob.jacobian = [&receivers, &rd, z](const Eigen::VectorXd& v) {
      return jacobian_at(receivers, rd, Eigen::Vector3d(v(0), v(1), z), 2);
    };
    prob.to_point = [z](const Eigen::VectorXd& v) { return Point(v(0), v(1), z); };
    prob.centre = Point(centre.x(), centre.y(), z);
    prob.starts = ring_starts(Eigen::Vector2d(centre.x(), centre.y()), radius, opts.multistart_count);
    return solve_multistart(prob, opts);
  }

  prob.residual = [&](const Eigen::VectorXd& v) { return residuals_at(receivers, rd, v.head<3>()); };
  prob.jacobian = [&](const Eigen::VectorXd& v) {
    return jacobian_at(receivers, rd, v.head<3>(), 3);
  };
  prob.to_point = [](const Eigen::VectorXd& v) { return Point(v(0), v(1), v(2)); };
  prob.centre = centre;
  prob.starts = ring_starts(centre.vec(), radius, opts.multistart_count);
  SolveResult res = solve_multistart(prob, opts);
  res.flags.insert(SolveFlag::under_determined);
  return res;
}

DirectionVector combined_direction(std::span<const Point> receivers, const Point& emitter) {
  std::vector<DirectionVector> dirs;
  dirs.reserve(receivers.size());
  for (const auto& r : receivers) dirs.push_back(direction_unit(r, emitter));
  return average_direction(dirs);
}

}  // namespace relpos::tdoa
