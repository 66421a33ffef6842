#pragma once

#include "relpos/geometry.hpp"
#include "relpos/measurement_sim.hpp"
#include "relpos/solver.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace relpos::trilat {

/// Known anchors (emitters) and measured ranges to each, meters.
struct TrilaterationProblem {
  std::vector<Point> emitters;
  std::vector<double> distances;
  Dim dim = Dim::three;

  void validate() const;
};

/// r_i = |q - E_i| - d_i.
Eigen::VectorXd trilateration_residuals(const TrilaterationProblem& p, const Point& q);

/// Rows are the unit vectors (q - E_i) / |q - E_i|.
Eigen::MatrixXd trilateration_jacobian(const TrilaterationProblem& p, const Point& q);

/// Closed form for three planar circles. Subtracting the first two circle
/// equations gives a line; its intersections with the third circle are the
/// candidates (the tangent point when they miss). The estimate has the lowest
/// total squared residual. A best residual above kConsistencyTolerance sets
/// `inconsistent`; the circles then have no common point.
SolveResult trilaterate_2d(const TrilaterationProblem& p);

/// Closed form for three spheres. Returns both solutions mirrored through
/// the emitter plane (flag mirror_ambiguity); the estimate is the one with
/// the larger z. Throws Inconsistent when the spheres miss each other by more
/// than a 1e-9 * d1^2 slack on the squared height.
SolveResult trilaterate_3d(const TrilaterationProblem& p);

/// Gauss-Newton on the sum of squared range residuals from `init`. When the
/// anchors are coplanar and the fit lies off their plane, the reflected
/// solution is added as a second candidate.
SolveResult trilaterate_lsq(const TrilaterationProblem& p, const Point& init,
                            const SolverOptions& opts = {});

/// How per-drone ranges to one emitter are folded into a single range.
enum class DistanceAggregation {
  /// sqrt(mean_j d_j^2 - mean_j |D_j - g|^2): exactly |g - E| for exact ranges,
  /// where g is the drone centroid.
  centroid_corrected,
  /// Arithmetic mean of the ranges. Biased away from |g - E| by roughly
  /// spread^2 / range.
  mean,
};

/// One range per emitter from the (drone, emitter) matrix.
std::vector<double> aggregate_distances(std::span<const Point> drones,
                                        const sim::DistanceMatrix& dm, DistanceAggregation how);

/// Team reference point: aggregate the drone ranges per emitter, then
/// trilaterate against the emitter estimates starting at the drone centroid.
SolveResult team_relative_position(std::span<const Point> drones,
                                   std::span<const Point> emitter_estimates,
                                   const sim::DistanceMatrix& dm, const SolverOptions& opts = {},
                                   DistanceAggregation how = DistanceAggregation::centroid_corrected);

}  // namespace relpos::trilat
