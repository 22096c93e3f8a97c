#include "covevo/evolution.hpp"

#include <cmath>
#include <string>

#include "covevo/errors.hpp"
#include "covevo/numeric.hpp"

namespace covevo {

namespace {

void check_domain(double epsilon, double y) {
  if (!(y > 0.0 && y <= 1.0)) throw DomainError("y = " + std::to_string(y) + " outside (0,1]");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw DomainError("epsilon = " + std::to_string(epsilon) + " outside [0,1]");
  }
}

}  // namespace

double mean_r1(const Ensemble& ens, double epsilon, double y) {
  check_domain(epsilon, y);
  const double x = epsilon * ens.lambda().eval(y);
  return x * (y - 1.0 + ens.rho().eval(1.0 - x));
}

EvolutionPoint means_at(const Ensemble& ens, double epsilon, double y) {
  check_domain(epsilon, y);
  const auto& lambda = ens.lambda();
  const auto& rho = ens.rho();
  const int dc = ens.max_check_degree();

  EvolutionPoint p;
  p.y = y;
  p.epsilon = epsilon;
  p.max_check_degree = dc;
  p.x = epsilon * lambda.eval(y);
  p.x_tilde = 1.0 - p.x;
  p.e = p.x * y;
  p.x_prime = epsilon * lambda.eval(y, 1);
  p.x_second = epsilon * lambda.eval(y, 2);

  CompensatedSum F, Fp, wsq, shifted;
  for (const auto& [i, li] : lambda.coeffs()) {
    const double yi = ipow(y, i);
    p.mean_l[i] = epsilon * li * yi;
    const double d = yi - 1.0;
    F.add(li / i * (epsilon * epsilon * d * d + epsilon * d));
    Fp.add(2.0 * epsilon * epsilon * li * ipow(y, 2 * i - 1));
    wsq.add(epsilon * epsilon * i * li * ipow(y, 2 * i - 2));
    shifted.add(li / i * d);
  }
  p.F = F.value();
  p.F_prime = Fp.value() - (2.0 * epsilon - 1.0) * p.x;
  p.weighted_square_sum = wsq.value();
  p.shifted_inverse_sum = shifted.value();

  p.mean_r.assign(dc + 2, 0.0);
  for (int j = 2; j <= dc; ++j) {
    CompensatedSum s;
    for (const auto& [i, ri] : rho.coeffs()) {
      if (i < j) continue;
      s.add(ri * binomial(i - 1, j - 1) * ipow(p.x, j) * ipow(p.x_tilde, i - j));
    }
    p.mean_r[j] = s.value();
  }
  p.mean_r[1] = p.x * (y - 1.0 + rho.eval(p.x_tilde));

  if (p.x == 0.0) {
    throw SingularityError("x = epsilon * lambda(y) vanishes; G_j and a are undefined");
  }
  p.a = (p.x_prime * y + p.x) / p.x;
  p.G.assign(dc + 1, 0.0);
  for (int j = 1; j < dc; ++j) p.G[j] = j * (p.mean_r[j + 1] - p.mean_r[j]) / p.x;
  p.G[dc] = -dc * p.mean_r[dc] / p.x;
  p.G_sigma = (dc * p.mean_r[dc] - p.e) / p.x;
  return p;
}

double tau_of_y(const Ensemble& ens, double epsilon, double y) {
  if (!(y >= 0.0 && y <= 1.0)) throw DomainError("y = " + std::to_string(y) + " outside [0,1]");
  CompensatedSum s;
  for (const auto& [i, li] : ens.lambda().coeffs()) s.add(li * (1.0 - ipow(y, i)) / i);
  return epsilon * s.value();
}

double y_of_tau(const Ensemble& ens, double epsilon, double tau, double y_floor) {
  if (!(tau >= 0.0)) throw DomainError("tau must be non-negative");
  if (tau == 0.0) return 1.0;
  const double tau_floor = tau_of_y(ens, epsilon, y_floor);
  if (tau > tau_floor) {
    throw RangeError("tau = " + std::to_string(tau) + " exceeds tau(y_floor) = " + std::to_string(tau_floor));
  }
  // tau_of_y is decreasing: lo has tau >= target, hi has tau <= target.
  double lo = y_floor, hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (tau_of_y(ens, epsilon, mid) >= tau) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double dlo = std::fabs(tau_of_y(ens, epsilon, lo) - tau);
  const double dhi = std::fabs(tau_of_y(ens, epsilon, hi) - tau);
  return dlo <= dhi ? lo : hi;
}

}  // namespace covevo
