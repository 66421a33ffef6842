#pragma once

#include "relpos/geometry.hpp"
#include "relpos/measurement_sim.hpp"
#include "relpos/solver.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace relpos::tdoa {

struct RangeDifference {
  std::size_t other_index = 0;
  double delta_t = 0.0;  // t_ref - t_other, seconds
  double delta_d = 0.0;  // c * delta_t, meters
};

/// Sign convention: delta_t = t_ref - t_other. A positive value means the
/// signal reached the other receiver first, i.e. the emitter is closer to it.
/// Flipping the convention mirrors every solution, so it is fixed here.
struct RangeDifferenceSet {
  std::size_t reference_index = 0;
  std::vector<RangeDifference> deltas;
};

/// Range differences for one emitter column of `a`, relative to the
/// reference receiver. Only differences are used, so the emission time (and
/// any clock bias common to all receivers) cancels.
RangeDifferenceSet arrival_deltas(const sim::ArrivalSet& a, std::size_t emitter_index,
                                  std::size_t reference_index, double c);

/// r_k = |p - r_ref| - |p - r_k| - delta_d_k, one entry per pair.
Eigen::VectorXd hyperbolic_residuals(std::span<const Point> receivers,
                                     const RangeDifferenceSet& rd, const Point& p);

/// Rows are u_ref - u_k with u = (p - r) / |p - r|; one column per free
/// coordinate of `p` (2 for planar, 3 for spatial points).
Eigen::MatrixXd hyperbolic_jacobian(std::span<const Point> receivers,
                                    const RangeDifferenceSet& rd, const Point& p);

/// Planar emitter fix from three receivers. Two hyperbolae may cross twice,
/// so every converged minimizer of a multi-start Gauss-Newton run is returned;
/// the estimate has the lowest residual norm, ties going to the candidate
/// nearest the receiver centroid.
SolveResult locate_emitter_2d(std::span<const Point> receivers, const RangeDifferenceSet& rd,
                              const SolverOptions& opts = {});

/// Spatial variant. Three receivers give two equations, so the emitter is
/// constrained to the horizontal plane z = `emitter_plane_z` when one is
/// given. With std::nullopt all three coordinates float and the result is
/// flagged under_determined.
SolveResult locate_emitter_3d(std::span<const Point> receivers, const RangeDifferenceSet& rd,
                              std::optional<double> emitter_plane_z = 0.0,
                              const SolverOptions& opts = {});

/// Mean of the receiver-to-emitter unit vectors (not renormalized).
DirectionVector combined_direction(std::span<const Point> receivers, const Point& emitter);

}  // namespace relpos::tdoa
