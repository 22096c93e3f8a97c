#include "covevo/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "covevo/analytic.hpp"
#include "covevo/errors.hpp"

namespace covevo {

namespace {

constexpr int kGridPoints = 10000;
constexpr double kGoldenTol = 1e-10;
constexpr double kBisectionTol = 1e-9;

struct GapDerivatives {
  double g, gy, gyy, ge, gye;
};

GapDerivatives gap_derivatives(const Ensemble& ens, double eps, double y) {
  const auto& lambda = ens.lambda();
  const auto& rho = ens.rho();
  const double l0 = lambda.eval(y), l1 = lambda.eval(y, 1), l2 = lambda.eval(y, 2);
  const double xt = 1.0 - eps * l0;
  const double r0 = rho.eval(xt), r1 = rho.eval(xt, 1), r2 = rho.eval(xt, 2);
  GapDerivatives d;
  d.g = y - 1.0 + r0;
  d.gy = 1.0 - r1 * eps * l1;
  d.gyy = r2 * (eps * l1) * (eps * l1) - r1 * eps * l2;
  d.ge = -r1 * l0;
  d.gye = r2 * l0 * eps * l1 - r1 * l1;
  return d;
}

// Golden-section minimization of f on [a, b].
template <class F>
double golden_section(F&& f, double a, double b, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

double grid_y(int i) { return static_cast<double>(i) / kGridPoints; }

struct GridScan {
  std::vector<double> values;  // values[i] = g(eps, grid_y(i)), i = 1..N
  int argmin = 1;
};

GridScan scan(const Ensemble& ens, double eps) {
  GridScan s;
  s.values.assign(kGridPoints + 1, std::numeric_limits<double>::infinity());
  for (int i = 1; i <= kGridPoints; ++i) {
    s.values[i] = de_gap(ens, eps, grid_y(i));
    if (s.values[i] < s.values[s.argmin]) s.argmin = i;
  }
  return s;
}

double refine_min(const Ensemble& ens, double eps, int i) {
  const double a = grid_y(std::max(i - 1, 1));
  const double b = grid_y(std::min(i + 1, kGridPoints));
  return golden_section([&](double y) { return de_gap(ens, eps, y); }, a, b, kGoldenTol);
}

double inner_min(const Ensemble& ens, double eps, double* argmin = nullptr) {
  const GridScan s = scan(ens, eps);
  const double y = refine_min(ens, eps, s.argmin);
  const double v = std::min(de_gap(ens, eps, y), s.values[s.argmin]);
  if (argmin) *argmin = y;
  return v;
}

// Newton on the tangency system {g = 0, g_y = 0}; nullopt when it does not settle.
std::optional<std::pair<double, double>> polish_tangency(const Ensemble& ens, double eps, double y) {
  for (int it = 0; it < 50; ++it) {
    if (!(y > 0.0 && y < 1.0 && eps > 0.0 && eps <= 1.0)) return std::nullopt;
    const GapDerivatives d = gap_derivatives(ens, eps, y);
    const double det = d.gy * d.gye - d.ge * d.gyy;
    if (det == 0.0 || !std::isfinite(det)) return std::nullopt;
    // [g_y g_e; g_yy g_ye] [dy; de] = -[g; g_y]
    const double dy = (-d.g * d.gye + d.ge * d.gy) / det;
    const double de = (-d.gy * d.gy + d.gyy * d.g) / det;
    y += dy;
    eps += de;
    if (std::fabs(dy) < 1e-15 && std::fabs(de) < 1e-15) break;
  }
  if (!(y > 0.0 && y < 1.0 && eps > 0.0 && eps <= 1.0)) return std::nullopt;
  const GapDerivatives d = gap_derivatives(ens, eps, y);
  if (std::fabs(d.g) > 1e-13 || std::fabs(d.gy) > 1e-11 || d.gyy <= 0.0) return std::nullopt;
  return std::make_pair(eps, y);
}

}  // namespace

double de_gap(const Ensemble& ens, double epsilon, double y) {
  return y - 1.0 + ens.rho().eval(1.0 - epsilon * ens.lambda().eval(y));
}

double threshold(const Ensemble& ens) {
  double lo = 0.0, hi = 1.0;
  if (inner_min(ens, hi) > 0.0) return 1.0;
  while (hi - lo > kBisectionTol) {
    const double mid = 0.5 * (lo + hi);
    if (inner_min(ens, mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double y_lo = 0.0;
  inner_min(ens, hi, &y_lo);
  if (const auto polished = polish_tangency(ens, hi, y_lo)) {
    if (std::fabs(polished->first - lo) <= 1e-6) return polished->first;
  }
  return lo;
}

CriticalPoint critical_point(const Ensemble& ens, double epsilon_star) {
  if (!(epsilon_star > 0.0 && epsilon_star <= 1.0)) throw DomainError("epsilon_star outside (0,1]");
  const GridScan s = scan(ens, epsilon_star);
  if (s.argmin <= 1 || s.argmin >= kGridPoints) {
    throw DegenerateMinimumError("minimizer of y - 1 + rho(1 - eps lambda(y)) sits on the grid boundary (y = " +
                                 std::to_string(grid_y(s.argmin)) + ")");
  }
  CriticalPoint cp;
  // Interior local minima whose value is within tolerance of the global one.
  const double gmin = s.values[s.argmin];
  const double tie = 1e-9 + 1e-6 * std::fabs(gmin);
  int chosen = s.argmin;
  int minima = 0;
  for (int i = 2; i < kGridPoints; ++i) {
    if (s.values[i] <= s.values[i - 1] && s.values[i] < s.values[i + 1] && s.values[i] - gmin <= tie) {
      if (minima == 0) chosen = i;
      ++minima;
    }
  }
  if (minima > 1) {
    cp.warnings.push_back("flat or multiple critical points (" + std::to_string(minima) +
                          " near-equal minima); using the smallest y");
  }
  double y = refine_min(ens, epsilon_star, chosen);
  // Newton on g_y = 0 inside the bracket sharpens the golden-section estimate.
  const double a = grid_y(chosen - 1), b = grid_y(chosen + 1);
  for (int it = 0; it < 20; ++it) {
    const GapDerivatives d = gap_derivatives(ens, epsilon_star, y);
    if (d.gyy <= 0.0) break;
    const double next = y - d.gy / d.gyy;
    if (!(next > a && next < b)) break;
    const bool done = std::fabs(next - y) < 1e-16;
    y = next;
    if (done) break;
  }
  cp.y = y;
  cp.gap = de_gap(ens, epsilon_star, y);
  return cp;
}

ScalingResult alpha(const Ensemble& ens) {
  ScalingResult r;
  r.epsilon_star = threshold(ens);
  const CriticalPoint cp = critical_point(ens, r.epsilon_star);
  r.warnings = cp.warnings;
  r.y_star = cp.y;

  const auto& lambda = ens.lambda();
  const auto& rho = ens.rho();
  const double eps = r.epsilon_star, y = r.y_star;
  r.x_star = eps * lambda.eval(y);
  const double x = r.x_star, xt = 1.0 - x;
  const double rp = rho.eval(xt, 1);
  const double bracket = (rho.eval(xt) * rho.eval(xt) - rho.eval(xt * xt) - xt * xt * rho.eval(xt * xt, 1)) / (rp * rp) +
                         (1.0 - 2.0 * x * rho.eval(xt)) / rp + x * x - eps * eps * lambda.eval(y * y) -
                         eps * eps * y * y * lambda.eval(y * y, 1);
  if (!(bracket > 0.0)) throw SingularityError("non-positive variance term in the scaling parameter");
  const double n_over_xi = lambda.inverse_degree_sum();
  r.alpha_normalized = std::sqrt(bracket) / lambda.eval(y);
  r.alpha = r.alpha_normalized * std::sqrt(n_over_xi);

  const CovarianceMatrix cov = covariance_analytic(ens, eps, y, std::min(kDefaultYFloor, y));
  r.delta_r1r1 = cov.at(Label::r(1), Label::r(1));
  r.r1_epsilon_derivative = -lambda.eval(y) * x * rp;
  r.alpha_via_covariance = -std::sqrt(n_over_xi) * std::sqrt(std::max(r.delta_r1r1, 0.0)) / r.r1_epsilon_derivative;

  if (ens.is_regular()) {
    const double dv = lambda.min_degree();
    r.alpha_regular = eps * std::sqrt((dv - 1.0) / dv * (1.0 / x - 1.0 / y));
  }
  return r;
}

double q_function(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

std::vector<WaterfallPoint> waterfall(const Ensemble& ens, const std::vector<double>& eps_list) {
  return waterfall(ens, alpha(ens), eps_list);
}

std::vector<WaterfallPoint> waterfall(const Ensemble& ens, const ScalingResult& scaling,
                                      const std::vector<double>& eps_list) {
  const double root_n = std::sqrt(static_cast<double>(ens.n()));
  std::vector<WaterfallPoint> out;
  out.reserve(eps_list.size());
  for (double eps : eps_list) {
    if (!(eps >= 0.0 && eps <= 1.0)) throw DomainError("waterfall epsilon outside [0,1]");
    out.push_back({eps, q_function(root_n * (scaling.epsilon_star - eps) / scaling.alpha)});
  }
  return out;
}

}  // namespace covevo
