#include <doctest.h>

#include <cmath>

#include "covevo/errors.hpp"
#include "covevo/evolution.hpp"

using namespace covevo;

namespace {

Ensemble regular36() { return Ensemble(DegreeDistribution({{3, 1.0}}), DegreeDistribution({{6, 1.0}}), 1200); }

Ensemble mixed() {
  return Ensemble(DegreeDistribution::parse("2:0.3,3:0.4,5:0.3"), DegreeDistribution::parse("5:0.5,7:0.5"), 1000);
}

}  // namespace

TEST_CASE("means at y = 1 for (3,6)") {
  const auto p = means_at(regular36(), 0.4, 1.0);
  CHECK(p.x == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(p.e == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(p.mean_l.at(3) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(p.mean_r[1] == doctest::Approx(0.031104).epsilon(1e-13));
  CHECK(p.mean_r[2] == doctest::Approx(0.10368).epsilon(1e-13));
  CHECK(p.G[1] == doctest::Approx(0.18144).epsilon(1e-13));
  CHECK(p.F == 0.0);
  CHECK(p.F_prime == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(std::fabs(p.mean_r[1] - p.x * DegreeDistribution({{6, 1.0}}).eval(p.x_tilde)) <= 1e-14);
  CHECK(p.mean_r[7] == 0.0);
}

TEST_CASE("zero erasure probability is singular") {
  CHECK_THROWS_AS(means_at(regular36(), 0.0, 1.0), SingularityError);
  CHECK(mean_r1(regular36(), 0.0, 1.0) == 0.0);
  CHECK_THROWS_AS(means_at(regular36(), 0.4, 0.0), DomainError);
  CHECK_THROWS_AS(means_at(regular36(), 1.2, 0.5), DomainError);
}

TEST_CASE("definitional identities along y") {
  for (const Ensemble& ens : {regular36(), mixed()}) {
    const double eps = 0.37;
    const int dc = ens.max_check_degree();
    for (int i = 2; i <= 20; ++i) {
      const double y = i / 20.0;
      const auto p = means_at(ens, eps, y);
      CHECK(std::fabs(p.x - eps * ens.lambda().eval(y)) <= 1e-14 * p.x);
      CHECK(std::fabs(p.e - p.x * p.y) <= 1e-14 * p.e);
      double lsum = 0.0;
      for (const auto& [k, v] : p.mean_l) lsum += v;
      CHECK(std::fabs(lsum - p.e) <= 1e-12);
      CHECK(std::fabs(p.a * p.e - (p.x_prime * y * y + p.x * y)) <= 1e-12);
      double gsum = 0.0;
      for (int j = 1; j < dc; ++j) gsum += p.G[j];
      CHECK(std::fabs(p.G_sigma - gsum) <= 1e-12);
      CHECK(std::fabs(p.G_sigma - (dc * p.mean_r[dc] - p.e) / p.x) <= 1e-12);
      CHECK(std::fabs(p.mean_r[1] - mean_r1(ens, eps, y)) <= 1e-15);
    }
  }
}

TEST_CASE("derivative of F matches central differences") {
  for (const Ensemble& ens : {regular36(), mixed()}) {
    const double eps = 0.42, h = 1e-6;
    for (double y = 0.2; y <= 0.95; y += 0.05) {
      const double fd = (means_at(ens, eps, y + h).F - means_at(ens, eps, y - h).F) / (2 * h);
      const double fp = means_at(ens, eps, y).F_prime;
      CHECK(std::fabs(fd - fp) <= 1e-6 * std::max(std::fabs(fp), 1e-3));
    }
  }
}

TEST_CASE("x derivatives match central differences") {
  const Ensemble ens = mixed();
  const double eps = 0.4, h = 1e-5;
  for (double y = 0.2; y <= 0.9; y += 0.1) {
    const auto p = means_at(ens, eps, y);
    const double d1 = (means_at(ens, eps, y + h).x - means_at(ens, eps, y - h).x) / (2 * h);
    const double d2 = (means_at(ens, eps, y + h).x_prime - means_at(ens, eps, y - h).x_prime) / (2 * h);
    CHECK(d1 == doctest::Approx(p.x_prime).epsilon(1e-8));
    CHECK(d2 == doctest::Approx(p.x_second).epsilon(1e-8));
  }
}

TEST_CASE("tau of y") {
  const Ensemble ens = regular36();
  CHECK(tau_of_y(ens, 0.4, 1.0) == 0.0);
  CHECK(tau_of_y(ens, 0.4, 0.5) == doctest::Approx(0.4 * 0.875 / 3.0).epsilon(1e-15));
  CHECK(tau_of_y(ens, 0.3, 0.0) == doctest::Approx(0.3 / 3.0).epsilon(1e-15));
  double prev = tau_of_y(ens, 0.4, 0.0);
  for (int i = 1; i <= 100; ++i) {
    const double t = tau_of_y(ens, 0.4, i / 100.0);
    CHECK(t < prev);
    prev = t;
  }
}

TEST_CASE("y of tau inverts tau of y") {
  for (const Ensemble& ens : {regular36(), mixed()}) {
    CHECK(y_of_tau(ens, 0.4, 0.0) == 1.0);
    for (int i = 6; i <= 20; ++i) {
      const double y = i / 20.0;
      const double tau = tau_of_y(ens, 0.4, y);
      const double back = y_of_tau(ens, 0.4, tau);
      CHECK(std::fabs(back - y) <= 1e-9);
      CHECK(std::fabs(tau_of_y(ens, 0.4, back) - tau) <= 1e-12);
    }
  }
  CHECK(y_of_tau(regular36(), 0.4, 0.4 * 0.875 / 3.0) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK_THROWS_AS(y_of_tau(regular36(), 0.4, 0.2), RangeError);
}
