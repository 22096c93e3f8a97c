#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "covevo/analytic.hpp"
#include "covevo/ensemble.hpp"
#include "covevo/scaling.hpp"

namespace covevo::testing {

inline Ensemble regular36(std::int64_t n = 1200) {
  return Ensemble(DegreeDistribution({{3, 1.0}}), DegreeDistribution({{6, 1.0}}), n);
}

inline Ensemble half23(std::int64_t n = 1200) {
  return Ensemble(DegreeDistribution({{2, 0.5}, {3, 0.5}}), DegreeDistribution({{6, 1.0}}), n);
}

inline Ensemble mixed(std::int64_t n = 1000) {
  return Ensemble(DegreeDistribution({{2, 0.3}, {3, 0.4}, {5, 0.3}}), DegreeDistribution({{5, 0.5}, {7, 0.5}}), n);
}

/// Scaled gap |a - b| / max(1, |b|).
inline double scaled_gap(double a, double b) { return std::fabs(a - b) / std::max(1.0, std::fabs(b)); }

template <class K>
double map_gap(const std::map<K, double>& a, const std::map<K, double>& b) {
  if (a.size() != b.size()) return INFINITY;
  double worst = 0.0;
  for (const auto& [key, v] : b) {
    const auto it = a.find(key);
    if (it == a.end()) return INFINITY;
    worst = std::max(worst, scaled_gap(it->second, v));
  }
  return worst;
}

/// Worst scaled disagreement per identity family between definitional and closed-form values.
inline std::map<std::string, double> identity_gaps(const AuxiliaryQuantities& from_matrix,
                                                   const AuxiliaryQuantities& closed) {
  return {
      {"ll_weighted_sum", scaled_gap(from_matrix.ll_weighted_sum, closed.ll_weighted_sum)},
      {"ll_pair", map_gap(from_matrix.ll_pair, closed.ll_pair)},
      {"U", map_gap(from_matrix.U, closed.U)},
      {"A", map_gap(from_matrix.A, closed.A)},
      {"A_sigma", scaled_gap(from_matrix.A_sigma, closed.A_sigma)},
      {"S", map_gap(from_matrix.S, closed.S)},
      {"S_sigma", map_gap(from_matrix.S_sigma, closed.S_sigma)},
      {"G_sigma", scaled_gap(from_matrix.G_sigma, closed.G_sigma)},
      {"delta_r_sigma", map_gap(from_matrix.delta_r_sigma, closed.delta_r_sigma)},
      {"delta_r_sigma_sigma", scaled_gap(from_matrix.delta_r_sigma_sigma, closed.delta_r_sigma_sigma)},
      {"A_top", scaled_gap(from_matrix.A_top, closed.A_top)},
      {"delta_r_top", map_gap(from_matrix.delta_r_top, closed.delta_r_top)},
  };
}

/// Brute-force threshold: largest epsilon on a uniform grid whose gap stays positive on a uniform y grid.
inline double grid_threshold(const Ensemble& ens, int eps_steps, int y_steps) {
  double best = 0.0;
  for (int i = 1; i <= eps_steps; ++i) {
    const double eps = static_cast<double>(i) / eps_steps;
    bool ok = true;
    for (int j = 1; j <= y_steps && ok; ++j) ok = de_gap(ens, eps, static_cast<double>(j) / y_steps) > 0.0;
    if (!ok) break;
    best = eps;
  }
  return best;
}

}  // namespace covevo::testing
