#include "relpos/errors.hpp"
#include "relpos/solver.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

using namespace relpos;

namespace {

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

// Hand-written objective of the three circles centred (0,0), (10,0), (5,10)
// with radius 5; kept independent of the library's residual code.
double three_circles(const Point& q) {
  auto term = [&](double cx, double cy) {
    const double r = std::hypot(q.x() - cx, q.y() - cy) - 5.0;
    return r * r;
  };
  return term(0, 0) + term(10, 0) + term(5, 10);
}

}  // namespace

TEST_CASE("gauss_newton solves linear residuals in one step") {
  const auto res = gauss_newton([](const Point& q) { return vec2(q.x() - 3.0, q.y() + 1.0); },
                                [](const Point&) { return Eigen::MatrixXd(Eigen::MatrixXd::Identity(2, 2)); },
                                Point(0, 0));
  CHECK(res.converged);
  CHECK(res.iterations <= 2);
  CHECK(res.estimate.x() == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(res.estimate.y() == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("gauss_newton on a sphere residual") {
  auto residual = [](const Point& q) {
    Eigen::VectorXd r(1);
    r << q.vec().norm() - 5.0;
    return r;
  };
  auto jacobian = [](const Point& q) {
    Eigen::MatrixXd j(1, 3);
    j.row(0) = q.vec().normalized().transpose();
    return j;
  };
  const auto res = gauss_newton(residual, jacobian, Point(1, 0, 0));
  CHECK(std::abs(res.estimate.x() - 5.0) < 1e-12);
  CHECK(std::abs(res.estimate.y()) < 1e-12);
  CHECK(std::abs(res.estimate.z()) < 1e-12);
}

TEST_CASE("gauss_newton reports the best iterate on non-convergence") {
  auto residual = [](const Point& q) {
    Eigen::VectorXd r(2);
    r << 10.0 * (q.y() - q.x() * q.x()), 1.0 - q.x();
    return r;
  };
  auto jacobian = [](const Point& q) {
    Eigen::MatrixXd j(2, 2);
    j << -20.0 * q.x(), 10.0, -1.0, 0.0;
    return j;
  };
  SolverOptions opts;
  opts.max_iterations = 1;
  try {
    gauss_newton(residual, jacobian, Point(-1.2, 1.0), opts);
    FAIL("expected NoConvergence");
  } catch (const NoConvergence& e) {
    CHECK(e.kind() == "NoConvergence");
    CHECK_FALSE(e.best().converged);
    CHECK(e.best().iterations == 1);
    CHECK(std::isfinite(e.best().residual_norm));
  }
  // Enough iterations reach the Rosenbrock minimum.
  const auto res = gauss_newton(residual, jacobian, Point(-1.2, 1.0));
  CHECK(std::abs(res.estimate.x() - 1.0) < 1e-9);
  CHECK(std::abs(res.estimate.y() - 1.0) < 1e-9);
}

TEST_CASE("singular normal equations escalate damping instead of failing") {
  // The residual ignores y, so J^T J is singular everywhere.
  auto residual = [](const Point& q) {
    Eigen::VectorXd r(1);
    r << q.x() - 2.0;
    return r;
  };
  auto jacobian = [](const Point&) {
    Eigen::MatrixXd j(1, 2);
    j << 1.0, 0.0;
    return j;
  };
  const auto res = gauss_newton(residual, jacobian, Point(0, 7));
  CHECK(res.converged);
  CHECK(std::abs(res.estimate.x() - 2.0) < 1e-9);
  CHECK(res.estimate.y() == doctest::Approx(7.0));
}

TEST_CASE("gauss_newton checks jacobian shape") {
  auto residual = [](const Point& q) { return vec2(q.x(), q.y()); };
  auto jacobian = [](const Point&) { return Eigen::MatrixXd(Eigen::MatrixXd::Identity(2, 3)); };
  CHECK_THROWS_AS(gauss_newton(residual, jacobian, Point(1, 1)), DimensionError);
}

TEST_CASE("accepted residual norms never increase") {
  VectorResidualFn residual = [](const Eigen::VectorXd& v) {
    Eigen::VectorXd r(3);
    r << std::hypot(v(0), v(1)) - 5.0, std::hypot(v(0) - 10.0, v(1)) - 5.0, std::hypot(v(0) - 5.0, v(1) - 10.0) - 5.0;
    return r;
  };
  VectorJacobianFn jacobian = [](const Eigen::VectorXd& v) {
    Eigen::MatrixXd j(3, 2);
    const Eigen::Vector2d q(v(0), v(1));
    j.row(0) = q.normalized().transpose();
    j.row(1) = (q - Eigen::Vector2d(10, 0)).normalized().transpose();
    j.row(2) = (q - Eigen::Vector2d(5, 10)).normalized().transpose();
    return j;
  };
  double previous = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 30; ++k) {
    SolverOptions opts;
    opts.max_iterations = k;
    const auto out = minimize_least_squares(residual, jacobian, vec2(-7.0, 12.0), opts);
    CHECK(out.residual_norm <= previous);
    previous = out.residual_norm;
  }
}

TEST_CASE("finite_difference_jacobian") {
  auto quad = [](const Point& q) { return vec2(q.x() * q.x(), q.x() * q.y()); };
  const auto j = finite_difference_jacobian(quad, Point(2, 3), 1e-6);
  CHECK(std::abs(j(0, 0) - 4.0) < 1e-6);
  CHECK(std::abs(j(0, 1) - 0.0) < 1e-6);
  CHECK(std::abs(j(1, 0) - 3.0) < 1e-6);
  CHECK(std::abs(j(1, 1) - 2.0) < 1e-6);

  auto linear = [](const Point& q) { return vec2(2.0 * q.x() - q.y(), 0.5 * q.y()); };
  for (double h : {1e-3, 0.5, 4.0}) {
    const auto jl = finite_difference_jacobian(linear, Point(-1.0, 8.0), h);
    CHECK(jl(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(jl(0, 1) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(jl(1, 0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(jl(1, 1) == doctest::Approx(0.5).epsilon(1e-12));
  }
  CHECK_THROWS_AS(finite_difference_jacobian(linear, Point(0, 0), 0.0), InvalidArgument);
}

TEST_CASE("grid_search examples") {
  auto bowl = [](const Point& q) { return (q.vec() - Eigen::Vector3d(180, 90, 222)).squaredNorm(); };
  const auto m = grid_search(bowl, {Point(170, 80, 210), Point(190, 100, 230)}, 1.0);
  CHECK(m.point == Point(180, 90, 222));
  CHECK(m.value == 0.0);
  CHECK(m.nodes == 21u * 21u * 21u);

  const auto flat = grid_search([](const Point&) { return 1.0; }, {Point(-2, 3), Point(4, 9)}, 0.5);
  CHECK(flat.point == Point(-2, 3));

  const auto circles = grid_search(three_circles, {Point(-10, -10), Point(20, 20)}, 0.01);
  CHECK(std::abs(circles.point.x() - 5.0) <= 0.01);
}

TEST_CASE("grid_search matches a naive scan and enforces the budget") {
  auto wavy = [](const Point& q) { return std::sin(q.x() * 1.7) * std::cos(q.y() * 0.9) + 0.01 * q.x(); };
  const auto m = grid_search(wavy, {Point(-3, -3), Point(3, 3)}, 0.25);
  double best = std::numeric_limits<double>::infinity();
  Point arg;
  for (int i = 0; i <= 24; ++i) {
    for (int j = 0; j <= 24; ++j) {
      const Point q(-3 + 0.25 * i, -3 + 0.25 * j);
      if (wavy(q) < best) {
        best = wavy(q);
        arg = q;
      }
    }
  }
  CHECK(m.point == arg);
  CHECK(m.value == best);

  CHECK_THROWS_AS(grid_search(wavy, {Point(0, 0), Point(1000, 1000)}, 0.01, 1'000'000), BudgetExceeded);
  CHECK_THROWS_AS(grid_search(wavy, {Point(0, 0), Point(1, 1)}, 0.0), InvalidArgument);
  CHECK_THROWS_AS(grid_search(wavy, {Point(1, 0), Point(0, 1)}, 0.1), InvalidArgument);
}

TEST_CASE("order_candidates ranks ties by preference then lexicographically") {
  std::vector<Candidate> c{{Point(0, 0, -1), 1e-12}, {Point(0, 0, 1), 2e-12}, {Point(5, 5, 5), 3.0}};
  auto higher = [](const Point& a, const Point& b) { return a.z() > b.z(); };
  const auto ordered = order_candidates(c, 1e-9, higher);
  REQUIRE(ordered.size() == 3);
  CHECK(ordered[0].point == Point(0, 0, 1));
  CHECK(ordered[1].point == Point(0, 0, -1));
  CHECK(ordered[2].point == Point(5, 5, 5));

  const auto lex = order_candidates(c, 1e-9, nullptr);
  CHECK(lex[0].point == Point(0, 0, -1));

  std::vector<Candidate> dup{{Point(1, 1), 0.5}, {Point(1, 1 + 1e-8), 0.1}};
  const auto deduped = order_candidates(dup, 0.0, nullptr, 1e-6);
  REQUIRE(deduped.size() == 1);
  CHECK(deduped[0].residual_norm == 0.1);
}

TEST_CASE("solver options validation") {
  SolverOptions o;
  CHECK_NOTHROW(o.validate());
  o.max_iterations = 0;
  CHECK_THROWS_AS(o.validate(), InvalidArgument);
  o = {};
  o.damping_initial = -1;
  CHECK_THROWS_AS(o.validate(), InvalidArgument);
}
