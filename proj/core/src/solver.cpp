#include "relpos/solver.hpp"

#include "relpos/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace relpos {

void SolverOptions::validate() const {
  if (max_iterations < 1) throw InvalidArgument("max_iterations must be >= 1");
  if (!(step_tolerance > 0.0)) throw InvalidArgument("step_tolerance must be positive");
  if (!(residual_tolerance > 0.0)) throw InvalidArgument("residual_tolerance must be positive");
  if (!(damping_initial > 0.0)) throw InvalidArgument("damping_initial must be positive");
  if (multistart_count < 1) throw InvalidArgument("multistart_count must be >= 1");
}

std::string to_string(SolveFlag f) {
  switch (f) {
    case SolveFlag::mirror_ambiguity: return "mirror_ambiguity";
    case SolveFlag::under_determined: return "under_determined";
    case SolveFlag::inconsistent: return "inconsistent";
    case SolveFlag::ambiguous: return "ambiguous";
  }
  return "unknown";
}

namespace {

constexpr double kMinDamping = 1e-15;
constexpr double kMaxDamping = 1e20;
// Normal matrices with a smaller reciprocal condition estimate are treated
// as singular and only damped steps are attempted.
constexpr double kSingularRcond = 1e-13;
constexpr double kMinGainRatio = 0.25;
constexpr double kStallRatio = 1e-6;

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace

LeastSquaresOutcome minimize_least_squares(const VectorResidualFn& residual,
                                           const VectorJacobianFn& jacobian,
                                           const Eigen::VectorXd& init,
                                           const SolverOptions& opts) {
  opts.validate();
  const Eigen::Index n = init.size();

  LeastSquaresOutcome out;
  out.params = init;
  Eigen::VectorXd r = residual(init);
  double cost = r.squaredNorm();
  double damping = opts.damping_initial;

  for (int iter = 1; iter <= opts.max_iterations; ++iter) {
    out.iterations = iter;
    if (cost == 0.0) {
      out.converged = true;
      break;
    }
    const Eigen::MatrixXd jac = jacobian(out.params);
    const Eigen::MatrixXd normal = jac.transpose() * jac;
    const Eigen::VectorXd grad = jac.transpose() * r;
    if (!grad.allFinite() || grad.isZero(0.0)) {
      out.converged = grad.allFinite();
      break;
    }

    Eigen::VectorXd step;
    Eigen::VectorXd trial;
    Eigen::VectorXd trial_r;
    double trial_cost = std::numeric_limits<double>::infinity();
    bool accepted = false;
    bool stationary = false;

    const Eigen::LDLT<Eigen::MatrixXd> plain(normal);
    if (plain.info() == Eigen::Success && plain.isPositive() && plain.rcond() > kSingularRcond) {
      step = -plain.solve(grad);
      if (all_finite(step)) {
        trial = out.params + step;
        trial_r = residual(trial);
        trial_cost = trial_r.squaredNorm();
        // Gain ratio: the undamped step must deliver a fair share of the
        // reduction its linear model predicts, otherwise damping takes over.
        const double predicted = cost - (r + jac * step).squaredNorm();
        const double gain = predicted > 0.0 ? (cost - trial_cost) / predicted : 1.0;
        if (std::isfinite(trial_cost) && trial_cost <= cost && gain > kMinGainRatio) {
          accepted = true;
          damping = std::max(damping / 10.0, kMinDamping);
        }
      }
    }

    while (!accepted) {
      const Eigen::MatrixXd damped =
          normal + damping * Eigen::MatrixXd::Identity(n, n);
      step = -damped.ldlt().solve(grad);
      if (!all_finite(step) || step.norm() < opts.step_tolerance) {
        stationary = true;
        break;
      }
      trial = out.params + step;
      trial_r = residual(trial);
      trial_cost = trial_r.squaredNorm();
      if (std::isfinite(trial_cost) && trial_cost <= cost) {
        accepted = true;
        damping = std::max(damping / 10.0, kMinDamping);
      } else {
        damping *= 10.0;
        if (damping > kMaxDamping) {
          stationary = true;
          break;
        }
      }
    }

    if (stationary) {
      out.converged = true;
      break;
    }

    const double change = cost - trial_cost;
    out.params = trial;
    r = trial_r;
    cost = trial_cost;
    // The residual-change test only fires once progress has also stalled
    // relative to the cost, so zero-residual problems run to full precision.
    const bool stalled = change < opts.residual_tolerance && change < kStallRatio * (cost + change);
    if (step.norm() < opts.step_tolerance || stalled) {
      out.converged = true;
      break;
    }
  }

  out.residual_norm = std::sqrt(cost);
  return out;
}

namespace {

int free_coordinates(const Point& p) { return p.dim() == Dim::two ? 2 : 3; }

Point point_from_params(const Eigen::VectorXd& v, Dim dim) {
  return dim == Dim::two ? Point(v(0), v(1)) : Point(v(0), v(1), v(2));
}

Eigen::VectorXd params_from_point(const Point& p) {
  Eigen::VectorXd v(free_coordinates(p));
  v(0) = p.x();
  v(1) = p.y();
  if (p.dim() == Dim::three) v(2) = p.z();
  return v;
}

}  // namespace

SolveResult gauss_newton(const ResidualFn& residual, const JacobianFn& jacobian,
                         const Point& init, const SolverOptions& opts) {
  const Dim dim = init.dim();
  const int cols = free_coordinates(init);
  auto vec_residual = [&](const Eigen::VectorXd& v) { return residual(point_from_params(v, dim)); };
  auto vec_jacobian = [&](const Eigen::VectorXd& v) {
    Eigen::MatrixXd j = jacobian(point_from_params(v, dim));
    if (j.cols() != cols) {
      throw DimensionError("jacobian has " + std::to_string(j.cols()) + " columns, expected " +
                           std::to_string(cols));
    }
    return j;
  };

  const LeastSquaresOutcome o =
      minimize_least_squares(vec_residual, vec_jacobian, params_from_point(init), opts);

  SolveResult res;
  res.estimate = point_from_params(o.params, dim);
  res.residual_norm = o.residual_norm;
  res.candidates = {{res.estimate, o.residual_norm}};
  res.iterations = o.iterations;
  res.converged = o.converged;
  if (!o.converged) {
    throw NoConvergence("gauss_newton: no convergence after " + std::to_string(o.iterations) +
                            " iterations",
                        res);
  }
  return res;
}

Eigen::MatrixXd finite_difference_jacobian(const ResidualFn& residual, const Point& q, double h) {
  if (!(h > 0.0)) throw InvalidArgument("finite difference step must be positive");
  const int cols = free_coordinates(q);
  const Eigen::VectorXd base = params_from_point(q);
  Eigen::MatrixXd jac;
  for (int k = 0; k < cols; ++k) {
    Eigen::VectorXd plus = base;
    Eigen::VectorXd minus = base;
    plus(k) += h;
    minus(k) -= h;
    const Eigen::VectorXd rp = residual(point_from_params(plus, q.dim()));
    const Eigen::VectorXd rm = residual(point_from_params(minus, q.dim()));
    if (k == 0) jac.resize(rp.size(), cols);
    jac.col(k) = (rp - rm) / (2.0 * h);
  }
  return jac;
}

GridMinimum grid_search(const std::function<double(const Point&)>& objective, const Box& bounds,
                        double resolution, std::uint64_t node_budget) {
  require_same_dim(bounds.lo, bounds.hi);
  if (!(resolution > 0.0)) throw InvalidArgument("grid resolution must be positive");
  const Eigen::Vector3d lo = bounds.lo.vec();
  const Eigen::Vector3d hi = bounds.hi.vec();
  const int axes = free_coordinates(bounds.lo);

  std::uint64_t counts[3] = {1, 1, 1};
  double total = 1.0;
  for (int a = 0; a < axes; ++a) {
    if (hi(a) < lo(a)) throw InvalidArgument("grid bounds are empty");
    const double span = (hi(a) - lo(a)) / resolution;
    total *= std::floor(span + 1e-9) + 1.0;
    if (total > static_cast<double>(node_budget)) {
      throw BudgetExceeded("grid lattice exceeds node budget of " + std::to_string(node_budget));
    }
    counts[a] = static_cast<std::uint64_t>(std::floor(span + 1e-9)) + 1;
  }

  GridMinimum best;
  best.value = std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::uint64_t i = 0; i < counts[0]; ++i) {
    const double x = lo(0) + static_cast<double>(i) * resolution;
    for (std::uint64_t j = 0; j < counts[1]; ++j) {
      const double y = lo(1) + static_cast<double>(j) * resolution;
      for (std::uint64_t k = 0; k < counts[2]; ++k) {
        const Point p = axes == 2 ? Point(x, y)
                                  : Point(x, y, lo(2) + static_cast<double>(k) * resolution);
        const double v = objective(p);
        ++best.nodes;
        if (v < best.value || (!found && !std::isnan(v))) {
          best.value = v;
          best.point = p;
          found = true;
        }
      }
    }
  }
  if (!found) throw InvalidArgument("grid objective was NaN at every node");
  return best;
}

std::vector<Candidate> order_candidates(std::vector<Candidate> candidates, double tie_tolerance,
                                        const CandidatePreference& prefer, double dedup_radius) {
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.residual_norm != b.residual_norm) return a.residual_norm < b.residual_norm;
    return lex_less(a.point, b.point);
  });

  std::vector<Candidate> kept;
  for (const auto& c : candidates) {
    const bool dup = std::any_of(kept.begin(), kept.end(), [&](const Candidate& k) {
      return (k.point.vec() - c.point.vec()).norm() <= dedup_radius;
    });
    if (!dup || dedup_radius <= 0.0) kept.push_back(c);
  }

  auto within_group = [&](const Candidate& a, const Candidate& b) {
    if (prefer && prefer(a.point, b.point)) return true;
    if (prefer && prefer(b.point, a.point)) return false;
    return lex_less(a.point, b.point);
  };
  for (std::size_t start = 0; start < kept.size();) {
    std::size_t end = start + 1;
    while (end < kept.size() &&
           kept[end].residual_norm <= kept[start].residual_norm + tie_tolerance) {
      ++end;
    }
    std::stable_sort(kept.begin() + static_cast<std::ptrdiff_t>(start),
                     kept.begin() + static_cast<std::ptrdiff_t>(end), within_group);
    start = end;
  }
  return kept;
}

}  // namespace relpos
