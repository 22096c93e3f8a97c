#pragma once

#include <vector>

#include "covevo/covariance.hpp"
#include "covevo/ensemble.hpp"
#include "covevo/evolution.hpp"

namespace covevo {

struct OdeConfig {
  enum class Method { Rk4Fixed };

  double step = 1e-4;
  double y_target = 0.5;
  Method method = Method::Rk4Fixed;
  double comparison_tolerance = 1e-5;
  double y_floor = kDefaultYFloor;

  /// Throws ValidationError unless 0 < step <= 1e-2 and y_floor <= y_target < 1.
  void validate() const;
};

/// Right-hand side d delta_{X,Y} / dy of the covariance evolution at
/// (epsilon, y) for the state `state`, as a symmetric matrix.
CovarianceMatrix covariance_rhs(const Ensemble& ens, double epsilon, double y, const CovarianceMatrix& state);

/// Integrates the covariance evolution from initial_covariance at y = 1 down
/// to cfg.y_target with classical fixed-step RK4 on the packed upper
/// triangle. The step is shrunk uniformly so the last step lands on y_target.
///
/// Throws StepSizeError if an entry exceeds 1e6 in magnitude and
/// SingularityError if e(y) drops below 1e-12.
CovarianceMatrix covariance_ode(const Ensemble& ens, double epsilon, const OdeConfig& cfg);

/// One integration passing through every target in `y_targets` (any order);
/// the result is ordered like the input.
std::vector<CovarianceMatrix> covariance_ode_path(const Ensemble& ens, double epsilon, double step,
                                                  const std::vector<double>& y_targets,
                                                  double y_floor = kDefaultYFloor);

struct OdeComparison {
  double epsilon = 0.0;
  double y = 0.0;
  double max_abs_diff = 0.0;
  /// max_abs_diff divided by the largest analytic entry magnitude
  double max_rel_diff = 0.0;
  bool pass = false;
};

/// Integrates once per epsilon and compares against covariance_analytic at each y.
std::vector<OdeComparison> compare_ode_analytic(const Ensemble& ens, const std::vector<double>& epsilons,
                                                const std::vector<double>& ys, double step, double tolerance,
                                                double y_floor = kDefaultYFloor);

}  // namespace covevo
