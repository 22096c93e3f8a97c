#pragma once

#include <map>
#include <vector>

#include "covevo/ensemble.hpp"

namespace covevo {

/// Default lower bound on y; 1/x and 1/e factors blow up as y -> 0.
inline constexpr double kDefaultYFloor = 1e-3;

/// All y-indexed scalars of the residual-graph analysis at one (epsilon, y).
///
/// Check-side vectors are indexed by degree: `mean_r[j]` and `G[j]` are
/// valid for 1 <= j <= d_c, index 0 is unused and `mean_r[d_c + 1] == 0`.
struct EvolutionPoint {
  double y = 0.0;
  double epsilon = 0.0;
  int max_check_degree = 0;
  double x = 0.0;         // epsilon * lambda(y)
  double x_tilde = 0.0;   // 1 - x
  double e = 0.0;         // x * y, residual edge fraction
  double a = 0.0;         // (x' y + x) / x, edge-weighted mean variable degree
  double x_prime = 0.0;   // epsilon * lambda'(y)
  double x_second = 0.0;  // epsilon * lambda''(y)
  double F = 0.0;
  double F_prime = 0.0;
  std::map<int, double> mean_l;  // k -> epsilon * lambda_k * y^k
  std::vector<double> mean_r;    // j -> expected degree-j check edges / xi
  std::vector<double> G;         // j -> G_j
  double G_sigma = 0.0;          // (d_c r_{d_c} - e) / x
  /// sum_{s in L} epsilon^2 s lambda_s y^(2s-2)
  double weighted_square_sum = 0.0;
  /// sum_{i in L} (lambda_i / i) (y^i - 1)
  double shifted_inverse_sum = 0.0;
};

/// Means and auxiliary scalars at (epsilon, y). Requires 0 < y <= 1 and
/// 0 <= epsilon <= 1 (DomainError); throws SingularityError when x == 0.
EvolutionPoint means_at(const Ensemble& ens, double epsilon, double y);

/// r_1 mean x (y - 1 + rho(1 - x)); defined for x == 0 as well.
double mean_r1(const Ensemble& ens, double epsilon, double y);

/// tau(y) = epsilon * sum_i lambda_i (1 - y^i) / i, decreasing from tau(1) = 0.
double tau_of_y(const Ensemble& ens, double epsilon, double y);

/// Bisection inverse of tau_of_y on [y_floor, 1]; RangeError when tau
/// exceeds tau(y_floor).
double y_of_tau(const Ensemble& ens, double epsilon, double tau, double y_floor = kDefaultYFloor);

}  // namespace covevo
