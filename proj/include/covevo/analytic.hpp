#pragma once

#include <map>
#include <tuple>
#include <utility>

#include "covevo/covariance.hpp"
#include "covevo/ensemble.hpp"
#include "covevo/evolution.hpp"

namespace covevo {

/// V_{i,j}(x) = sum_s s rho_s C(s-1,i-1) C(s-1,j-1) x^(i+j) (1-x)^(2s-i-j),
/// for 1 <= i,j <= d_c and 0 <= x <= 1 (DomainError otherwise).
double v_term(const Ensemble& ens, double x, int i, int j);

/// Closed-form covariance solution at (epsilon, y). Requires
/// y_floor <= y <= 1 and 0 < epsilon <= 1.
///
/// Entries are only meaningful as residual-graph statistics while the
/// decoder is still running, i.e. while r_1 > 0 on [y, 1]; elsewhere the
/// formulas are evaluated as written.
CovarianceMatrix covariance_analytic(const Ensemble& ens, double epsilon, double y,
                                     double y_floor = kDefaultYFloor);

/// Same as covariance_analytic but reusing an already evaluated point.
CovarianceMatrix covariance_analytic(const Ensemble& ens, const EvolutionPoint& p);

/// Covariances right after initialization (y = 1), built from the
/// initial-condition formulas rather than the general solution.
CovarianceMatrix initial_covariance(const Ensemble& ens, double epsilon);

/// Sums and differences of covariance entries that admit their own closed
/// forms. Indices: k, s range over L, j over 1..d_c-1, V over 1..d_c.
struct AuxiliaryQuantities {
  /// sum_{k,s} delta_{l_k,l_s} / (k s)
  double ll_weighted_sum = 0.0;
  /// 2 delta_{l_k,l_s}/(k s l_k l_s) - delta_{l_k,l_k}/(k l_k)^2 - delta_{l_s,l_s}/(s l_s)^2
  std::map<std::pair<int, int>, double> ll_pair;
  /// delta_{l_k,l_k}/(k l_k)^2 - delta_{l_s,l_s}/(s l_s)^2
  std::map<std::pair<int, int>, double> U;
  /// sum_i delta_{l_i,r_j} / i
  std::map<int, double> A;
  double A_sigma = 0.0;
  /// delta_{l_k,r_j}/(k l_k) - delta_{l_s,r_j}/(s l_s), keyed (k, s, j)
  std::map<std::tuple<int, int, int>, double> S;
  std::map<std::pair<int, int>, double> S_sigma;
  double G_sigma = 0.0;
  /// sum_k delta_{r_j,r_k}
  std::map<int, double> delta_r_sigma;
  double delta_r_sigma_sigma = 0.0;
  /// sum_i delta_{l_i,r_{d_c}} / i with delta_{., r_{d_c}} = delta_{., l_Sigma} - delta_{., r_Sigma}
  double A_top = 0.0;
  /// delta_{r_j,r_{d_c}} for 2 <= j <= d_c - 1
  std::map<int, double> delta_r_top;
  std::map<std::pair<int, int>, double> V;
};

/// Closed forms of the auxiliary quantities (no covariance matrix involved).
AuxiliaryQuantities auxiliary(const Ensemble& ens, double epsilon, double y, double y_floor = kDefaultYFloor);

/// The same quantities assembled from the entries of `m` by their definitions.
AuxiliaryQuantities auxiliary_from_matrix(const Ensemble& ens, const CovarianceMatrix& m);

/// delta_{X, r_{d_c}} reconstructed as delta_{X, l_Sigma} - delta_{X, r_Sigma}.
double top_check_covariance(const CovarianceMatrix& m, const Label& x);

}  // namespace covevo
