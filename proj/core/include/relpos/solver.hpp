#pragma once

#include "relpos/errors.hpp"
#include "relpos/geometry.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

namespace relpos {

/// Residual norm (m) above which a best fit is reported as inconsistent.
inline constexpr double kConsistencyTolerance = 1e-6;
/// Converged minimizers closer than this (m) are the same candidate.
inline constexpr double kDedupRadius = 1e-6;
/// Residual norms (m) closer than this are ranked by secondary preference.
inline constexpr double kResidualTieTolerance = 1e-9;

struct SolverOptions {
  int max_iterations = 100;
  double step_tolerance = 1e-10;       // meters
  double residual_tolerance = 1e-12;   // change in squared residual norm, m^2
  double damping_initial = 1e-3;
  int multistart_count = 9;

  /// Throws InvalidArgument naming the offending field.
  void validate() const;
};

/// `ambiguous` marks a solve where more than one candidate fits the data within
/// the consistency tolerance (e.g. two hyperbola intersections).
enum class SolveFlag { mirror_ambiguity, under_determined, inconsistent, ambiguous };

std::string to_string(SolveFlag f);

struct Candidate {
  Point point;
  double residual_norm = 0.0;
};

struct SolveResult {
  Point estimate;
  std::vector<Candidate> candidates;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::set<SolveFlag> flags;

  bool has(SolveFlag f) const { return flags.contains(f); }
};

/// Raised when an iterative solve stops without meeting a convergence test.
/// The best iterate found is attached.
class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, SolveResult best)
      : Error("NoConvergence", what), best_(std::move(best)) {}
  const SolveResult& best() const { return best_; }

 private:
  SolveResult best_;
};

using ResidualFn = std::function<Eigen::VectorXd(const Point&)>;
using JacobianFn = std::function<Eigen::MatrixXd(const Point&)>;

using VectorResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using VectorJacobianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

struct LeastSquaresOutcome {
  Eigen::VectorXd params;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Damped Gauss-Newton over a flat parameter vector. Each iteration first
/// tries the undamped step; if the normal equations are singular or the step
/// does not reduce the cost, Levenberg damping is applied and multiplied by 10
/// until a step is accepted (and divided by 10 after each accepted step).
/// Never throws; `converged` reports whether a stopping test fired before the
/// iteration budget ran out.
LeastSquaresOutcome minimize_least_squares(const VectorResidualFn& residual,
                                           const VectorJacobianFn& jacobian,
                                           const Eigen::VectorXd& init,
                                           const SolverOptions& opts);

/// Gauss-Newton on Point-valued parameters. The free coordinates are x, y for
/// planar inits and x, y, z for spatial ones; the Jacobian must have one column
/// per free coordinate. Throws NoConvergence carrying the best iterate.
SolveResult gauss_newton(const ResidualFn& residual, const JacobianFn& jacobian,
                         const Point& init, const SolverOptions& opts = {});

/// Central differences: J(i, k) = (r_i(q + h e_k) - r_i(q - h e_k)) / (2h).
Eigen::MatrixXd finite_difference_jacobian(const ResidualFn& residual, const Point& q, double h);

struct Box {
  Point lo;
  Point hi;
};

struct GridMinimum {
  Point point;
  double value = 0.0;
  std::uint64_t nodes = 0;
};

inline constexpr std::uint64_t kDefaultGridBudget = 200'000'000;

/// Exhaustive lattice scan `lo + k * resolution` (inclusive of `hi` up to
/// rounding). Ties go to the lexicographically smallest node. Lattices larger
/// than `node_budget` raise BudgetExceeded before any evaluation.
GridMinimum grid_search(const std::function<double(const Point&)>& objective, const Box& bounds,
                        double resolution, std::uint64_t node_budget = kDefaultGridBudget);

/// Orders candidates by residual norm, treating norms within `tie_tolerance`
/// of a group's smallest as equal, then by `prefer` within the group, then
/// lexicographically. Duplicates closer than `dedup_radius` are dropped
/// (keeping the better one).
using CandidatePreference = std::function<bool(const Point&, const Point&)>;
std::vector<Candidate> order_candidates(std::vector<Candidate> candidates, double tie_tolerance,
                                        const CandidatePreference& prefer,
                                        double dedup_radius = 0.0);

}  // namespace relpos
