#pragma once

#include <optional>
#include <string>
#include <vector>

#include "covevo/ensemble.hpp"

namespace covevo {

/// Density-evolution gap g(epsilon, y) = y - 1 + rho(1 - epsilon lambda(y)).
/// Decoding proceeds at y while g > 0; r_1 = x g.
double de_gap(const Ensemble& ens, double epsilon, double y);

/// BP threshold sup{epsilon : g(epsilon, y) > 0 for all y in (0,1]}.
///
/// Bisection on epsilon to 1e-9, with the inner minimum taken over a 10^4
/// point grid and refined by golden section. When the minimum is an interior
/// tangency the result is then polished by Newton on {g = 0, dg/dy = 0}.
double threshold(const Ensemble& ens);

struct CriticalPoint {
  double y = 0.0;
  double gap = 0.0;  // g(epsilon, y) at the minimizer
  std::vector<std::string> warnings;
};

/// Minimizer of g(epsilon_star, .) over (0,1). Throws
/// DegenerateMinimumError when the grid minimizer sits on the grid boundary.
/// With several (near-)equal minima the smallest y is reported and a
/// warning recorded.
CriticalPoint critical_point(const Ensemble& ens, double epsilon_star);

struct ScalingResult {
  double epsilon_star = 0.0;
  double y_star = 0.0;
  double x_star = 0.0;
  /// Slope scaling parameter in closed form, including sqrt(n / xi).
  double alpha = 0.0;
  /// alpha * sqrt(xi / n); independent of the block length.
  double alpha_normalized = 0.0;
  /// alpha from -sqrt(n/xi) sqrt(delta_{r1,r1}) / (d r_1 / d epsilon).
  double alpha_via_covariance = 0.0;
  /// epsilon* sqrt((d_v - 1)/d_v (1/x* - 1/y*)), regular ensembles only.
  std::optional<double> alpha_regular;
  double delta_r1r1 = 0.0;
  /// d r_1 / d epsilon at (epsilon*, y*) = -lambda(y*) x* rho'(1 - x*).
  double r1_epsilon_derivative = 0.0;
  std::vector<std::string> warnings;
};

ScalingResult alpha(const Ensemble& ens);

/// Gaussian tail probability Q(z) = erfc(z / sqrt 2) / 2.
double q_function(double z);

struct WaterfallPoint {
  double epsilon = 0.0;
  double p_block = 0.0;
};

/// P_B(n, epsilon) ~ Q(sqrt(n) (epsilon* - epsilon) / alpha) for each epsilon.
std::vector<WaterfallPoint> waterfall(const Ensemble& ens, const std::vector<double>& eps_list);
std::vector<WaterfallPoint> waterfall(const Ensemble& ens, const ScalingResult& scaling,
                                      const std::vector<double>& eps_list);

}  // namespace covevo
