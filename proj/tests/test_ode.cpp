#include <doctest.h>

#include <cmath>

#include "covevo/analytic.hpp"
#include "covevo/errors.hpp"
#include "covevo/ode.hpp"
#include "support.hpp"

using namespace covevo;
using covevo::testing::half23;
using covevo::testing::mixed;
using covevo::testing::regular36;

namespace {

double euler_gap(const Ensemble& ens, double eps, double h) {
  OdeConfig cfg;
  cfg.step = h;
  cfg.y_target = 1.0 - h;
  const auto rk = covariance_ode(ens, eps, cfg);
  const auto init = initial_covariance(ens, eps);
  const auto slope = covariance_rhs(ens, eps, 1.0, init);
  CovarianceMatrix euler(init.labels(), eps, 1.0 - h);
  for (std::size_t i = 0; i < init.size(); ++i)
    for (std::size_t j = i; j < init.size(); ++j) euler.set(i, j, init(i, j) - h * slope(i, j));
  return rk.max_abs_difference(euler);
}

double ode_error(const Ensemble& ens, double eps, double y, double h) {
  OdeConfig cfg;
  cfg.step = h;
  cfg.y_target = y;
  return covariance_ode(ens, eps, cfg).max_abs_difference(covariance_analytic(ens, eps, y));
}

}  // namespace

TEST_CASE("one step agrees with Euler to second order") {
  const double g1 = euler_gap(regular36(), 0.4, 1e-3);
  const double g2 = euler_gap(regular36(), 0.4, 5e-4);
  CHECK(g1 <= 50 * 1e-3 * 1e-3);
  CHECK(g1 / g2 > 3.0);
  CHECK(g1 / g2 < 5.0);
}

TEST_CASE("integration matches the closed form") {
  CHECK(ode_error(regular36(), 0.40, 0.6, 1e-4) <= 1e-5);
  CHECK(ode_error(half23(), 0.35, 0.7, 1e-4) <= 1e-5);
  CHECK(ode_error(mixed(), 0.45, 0.65, 1e-4) <= 1e-5);
}

TEST_CASE("fourth order convergence") {
  const double coarse = ode_error(mixed(), 0.4, 0.6, 1e-2);
  const double fine = ode_error(mixed(), 0.4, 0.6, 5e-3);
  CHECK(std::log2(coarse / fine) >= 3.5);
}

TEST_CASE("weighted variable sum is conserved by the right-hand side") {
  for (const Ensemble& ens : {regular36(), mixed()}) {
    const auto targets = std::vector<double>{0.9, 0.75, 0.6, 0.5};
    const auto path = covariance_ode_path(ens, 0.4, 1e-3, targets);
    for (const auto& state : path) {
      const auto d = covariance_rhs(ens, 0.4, state.y(), state);
      double s = 0.0;
      for (int k : ens.variable_degrees())
        for (int j : ens.variable_degrees()) s += d.at(Label::l(k), Label::l(j)) / (k * j);
      CHECK(std::fabs(s) <= 1e-9);
    }
  }
}

TEST_CASE("path returns targets in input order") {
  const auto path = covariance_ode_path(regular36(), 0.4, 1e-3, {0.6, 0.9, 0.75});
  REQUIRE(path.size() == 3);
  CHECK(path[0].y() == 0.6);
  CHECK(path[1].y() == 0.9);
  CHECK(path[2].y() == 0.75);
  OdeConfig cfg;
  cfg.step = 1e-3;
  cfg.y_target = 0.75;
  CHECK(path[2].max_abs_difference(covariance_ode(regular36(), 0.4, cfg)) <= 1e-12);
}

TEST_CASE("comparison report") {
  const auto report = compare_ode_analytic(half23(), {0.35, 0.40}, {0.9, 0.7}, 1e-4, 1e-5);
  REQUIRE(report.size() == 4);
  for (const auto& r : report) {
    CHECK(r.pass);
    CHECK(r.max_abs_diff <= 1e-5);
    CHECK(r.max_rel_diff >= 0.0);
  }
}

TEST_CASE("config validation") {
  OdeConfig cfg;
  cfg.step = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.step = 0.02;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.step = 1e-3;
  cfg.y_target = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.y_target = 1e-4;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.y_target = 0.5;
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("vanishing residual edges are singular") {
  OdeConfig cfg;
  cfg.step = 1e-2;
  cfg.y_target = 0.9;
  CHECK_THROWS_AS(covariance_ode(regular36(), 1e-13, cfg), SingularityError);
}
