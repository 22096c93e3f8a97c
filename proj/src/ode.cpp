#include "covevo/ode.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "covevo/analytic.hpp"
#include "covevo/errors.hpp"

namespace covevo {

namespace {

constexpr double kBlowUp = 1e6;
constexpr double kMinResidualEdges = 1e-12;

double indicator(bool c) { return c ? 1.0 : 0.0; }

// Dense row-major m x m buffers for the linearized drift and the source term.
struct Drift {
  std::size_t m = 0;
  double scale = 0.0;  // -e / y
  std::vector<double> jac;
  std::vector<double> source;
};

Drift drift_terms(const Ensemble& ens, const std::vector<Label>& labels, double epsilon, double y) {
  const EvolutionPoint p = means_at(ens, epsilon, y);
  if (p.e < kMinResidualEdges) {
    throw SingularityError("e(y) = " + std::to_string(p.e) + " below 1e-12 during integration");
  }
  const int dc = ens.max_check_degree();
  const double e = p.e, a = p.a, x = p.x;
  Drift d;
  d.m = labels.size();
  d.scale = -e / y;
  d.jac.assign(d.m * d.m, 0.0);
  d.source.assign(d.m * d.m, 0.0);

  for (std::size_t r = 0; r < d.m; ++r) {
    const Label& X = labels[r];
    for (std::size_t c = 0; c < d.m; ++c) {
      const Label& Z = labels[c];
      double v = 0.0;
      if (X.is_variable()) {
        const int k = X.degree;
        if (Z.is_variable()) v = k * p.mean_l.at(k) / (e * e) - indicator(k == Z.degree) * k / e;
      } else {
        const int j = X.degree;
        if (j <= dc - 2) {
          if (Z.is_variable()) {
            v = -(2.0 * a - Z.degree - 1.0) / e * p.G[j] / y;
          } else {
            v = j * (a - 1.0) / e * (indicator(Z.degree == j + 1) - indicator(Z.degree == j));
          }
        } else {
          // r_{d_c - 1}: r_{d_c} is eliminated through edge conservation.
          if (Z.is_variable()) {
            v = (dc - 1) * (a - 1.0) / e - (2.0 * a - Z.degree - 1.0) / e * p.G[dc - 1] / y;
          } else {
            v = -(dc - 1) * (a - 1.0) / e * (1.0 + indicator(Z.degree == dc - 1));
          }
        }
      }
      d.jac[r * d.m + c] = v;
    }
  }

  const double curvature = (p.x_second * x - p.x_prime * p.x_prime) / (x * x);
  for (std::size_t r = 0; r < d.m; ++r) {
    for (std::size_t c = 0; c < d.m; ++c) {
      const Label& A = labels[r];
      const Label& B = labels[c];
      double v = 0.0;
      if (A.is_variable() && B.is_variable()) {
        const int k = A.degree, s = B.degree;
        v = k * s * p.mean_l.at(k) / e * (indicator(k == s) - p.mean_l.at(s) / e);
      } else if (A.is_variable() || B.is_variable()) {
        const int k = A.is_variable() ? A.degree : B.degree;
        const int i = A.is_variable() ? B.degree : A.degree;
        v = (a - k) * k * p.mean_l.at(k) / e * p.G[i] / y;
      } else {
        const int i = A.degree, j = B.degree;
        v = curvature * p.G[i] * p.G[j] +
            i * j * p.x_prime / (x * x) *
                (indicator(i == j) * (p.mean_r[j + 1] + p.mean_r[j]) - indicator(i == j + 1) * p.mean_r[i] -
                 indicator(j == i + 1) * p.mean_r[j]);
      }
      d.source[r * d.m + c] = v;
    }
  }
  return d;
}

// Packed upper-triangle derivative for the packed state.
void packed_rhs(const Drift& d, const std::vector<double>& state, std::vector<double>& out) {
  const std::size_t m = d.m;
  std::vector<double> full(m * m);
  std::size_t k = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i; j < m; ++j) full[i * m + j] = full[j * m + i] = state[k++];

  // JM[i][j] = sum_z jac[i][z] * M[z][j]
  std::vector<double> jm(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t z = 0; z < m; ++z) {
      const double jz = d.jac[i * m + z];
      if (jz == 0.0) continue;
      for (std::size_t j = 0; j < m; ++j) jm[i * m + j] += jz * full[z * m + j];
    }
  out.resize(state.size());
  k = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i; j < m; ++j) out[k++] = d.scale * (jm[i * m + j] + jm[j * m + i] + d.source[i * m + j]);
}

void check_state(const std::vector<double>& state, double y) {
  for (double v : state) {
    if (!std::isfinite(v) || std::fabs(v) > kBlowUp) {
      throw StepSizeError("covariance entry exceeded 1e6 near y = " + std::to_string(y) + "; reduce the step");
    }
  }
}

// Integrates `state` from y_from down to y_to in uniform steps no larger than `step`.
void integrate(const Ensemble& ens, const std::vector<Label>& labels, double epsilon, double step, double y_from,
               double y_to, std::vector<double>& state) {
  const double span = y_from - y_to;
  if (span <= 0.0) return;
  const auto n = static_cast<long>(std::ceil(span / step - 1e-9));
  const double h = -span / static_cast<double>(n);
  std::vector<double> k1, k2, k3, k4, tmp(state.size());
  for (long s = 0; s < n; ++s) {
    const double y = y_from + s * h;
    const double y_next = (s + 1 == n) ? y_to : y_from + (s + 1) * h;
    const double hh = y_next - y;
    const Drift d0 = drift_terms(ens, labels, epsilon, y);
    const Drift dm = drift_terms(ens, labels, epsilon, y + 0.5 * hh);
    const Drift d1 = drift_terms(ens, labels, epsilon, y_next);
    packed_rhs(d0, state, k1);
    for (std::size_t i = 0; i < state.size(); ++i) tmp[i] = state[i] + 0.5 * hh * k1[i];
    packed_rhs(dm, tmp, k2);
    for (std::size_t i = 0; i < state.size(); ++i) tmp[i] = state[i] + 0.5 * hh * k2[i];
    packed_rhs(dm, tmp, k3);
    for (std::size_t i = 0; i < state.size(); ++i) tmp[i] = state[i] + hh * k3[i];
    packed_rhs(d1, tmp, k4);
    for (std::size_t i = 0; i < state.size(); ++i) {
      state[i] += hh / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    check_state(state, y_next);
  }
}

}  // namespace

void OdeConfig::validate() const {
  if (!(step > 0.0 && step <= 1e-2)) throw ValidationError("ODE step must lie in (0, 1e-2]");
  if (!(y_target >= y_floor && y_target < 1.0)) {
    throw ValidationError("y_target must lie in [" + std::to_string(y_floor) + ", 1)");
  }
  if (!(comparison_tolerance > 0.0)) throw ValidationError("comparison tolerance must be positive");
}

CovarianceMatrix covariance_rhs(const Ensemble& ens, double epsilon, double y, const CovarianceMatrix& state) {
  const Drift d = drift_terms(ens, state.labels(), epsilon, y);
  std::vector<double> out;
  packed_rhs(d, state.packed_upper(), out);
  CovarianceMatrix result(state.labels(), epsilon, y);
  result.assign_packed_upper(out);
  return result;
}

CovarianceMatrix covariance_ode(const Ensemble& ens, double epsilon, const OdeConfig& cfg) {
  cfg.validate();
  return covariance_ode_path(ens, epsilon, cfg.step, {cfg.y_target}, cfg.y_floor).front();
}

std::vector<CovarianceMatrix> covariance_ode_path(const Ensemble& ens, double epsilon, double step,
                                                  const std::vector<double>& y_targets, double y_floor) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw DomainError("epsilon outside (0,1]");
  if (!(step > 0.0)) throw ValidationError("ODE step must be positive");
  for (double y : y_targets) {
    if (!(y >= y_floor && y <= 1.0)) throw ValidationError("y target " + std::to_string(y) + " outside range");
  }
  std::vector<std::size_t> order(y_targets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return y_targets[a] > y_targets[b]; });

  const CovarianceMatrix init = initial_covariance(ens, epsilon);
  std::vector<double> state = init.packed_upper();
  std::vector<CovarianceMatrix> out(y_targets.size());
  double y = 1.0;
  for (std::size_t idx : order) {
    integrate(ens, init.labels(), epsilon, step, y, y_targets[idx], state);
    y = std::min(y, y_targets[idx]);
    CovarianceMatrix m(init.labels(), epsilon, y_targets[idx]);
    m.assign_packed_upper(state);
    out[idx] = std::move(m);
  }
  return out;
}

std::vector<OdeComparison> compare_ode_analytic(const Ensemble& ens, const std::vector<double>& epsilons,
                                                const std::vector<double>& ys, double step, double tolerance,
                                                double y_floor) {
  std::vector<OdeComparison> out;
  for (double eps : epsilons) {
    const auto path = covariance_ode_path(ens, eps, step, ys, y_floor);
    for (std::size_t k = 0; k < ys.size(); ++k) {
      const CovarianceMatrix ref = covariance_analytic(ens, eps, ys[k], y_floor);
      OdeComparison c;
      c.epsilon = eps;
      c.y = ys[k];
      c.max_abs_diff = path[k].max_abs_difference(ref);
      const double scale = ref.max_abs_entry();
      c.max_rel_diff = scale > 0.0 ? c.max_abs_diff / scale : c.max_abs_diff;
      c.pass = c.max_abs_diff <= tolerance;
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace covevo
