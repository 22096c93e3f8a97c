#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace covevo {

/// Edge-perspective degree polynomial: lambda(x) = sum_i lambda_i x^(i-1).
///
/// Degrees are >= 2, coefficients strictly positive and summing to one
/// within kNormTolerance. Immutable once constructed.
class DegreeDistribution {
 public:
  static constexpr double kNormTolerance = 1e-12;

  /// Throws ValidationError on a degree below 2, a non-positive or >1
  /// coefficient, an empty map, or a sum off by more than kNormTolerance.
  /// With `renormalize` the coefficients are rescaled to sum to one instead.
  explicit DegreeDistribution(std::map<int, double> coeffs, bool renormalize = false);

  /// Parses "2:0.5,3:0.5". The offending token is quoted in the error message.
  static DegreeDistribution parse(std::string_view text, bool renormalize = false);

  const std::map<int, double>& coeffs() const noexcept { return coeffs_; }
  double coeff(int degree) const noexcept;
  std::vector<int> degrees() const;
  int max_degree() const noexcept { return coeffs_.rbegin()->first; }
  int min_degree() const noexcept { return coeffs_.begin()->first; }

  /// d-th derivative of the polynomial at x in [0,1] (DomainError otherwise).
  double eval(double x, int derivative = 0) const;

  /// sum_i coeff_i / i (node-perspective normalizer).
  double inverse_degree_sum() const noexcept;

  /// Renders back to "d:c,d:c" form with round-trip precision.
  std::string to_string() const;

 private:
  std::map<int, double> coeffs_;
};

/// Free-function form of DegreeDistribution::eval.
double eval_poly(const DegreeDistribution& d, double x, int derivative = 0);

struct EnsembleCounts {
  std::int64_t xi = 0;  // common edge total
  std::map<int, std::int64_t> variables_by_degree;
  std::map<int, std::int64_t> checks_by_degree;

  std::int64_t variable_count() const;
  std::int64_t check_count() const;
  std::int64_t variable_edges() const;
  std::int64_t check_edges() const;
};

/// Irregular LDPC ensemble LDPC(n, lambda, rho).
class Ensemble {
 public:
  /// Throws ValidationError when n <= 0 or the design rate is outside (0, 1).
  Ensemble(DegreeDistribution lambda, DegreeDistribution rho, std::int64_t n);

  /// {"lambda":{"2":0.5,...},"rho":{...},"n":N}. `n` may be omitted when
  /// `default_n` is given.
  static Ensemble from_json(std::string_view json_text, std::int64_t default_n = 0,
                            bool renormalize = false);
  std::string to_json() const;

  const DegreeDistribution& lambda() const noexcept { return lambda_; }
  const DegreeDistribution& rho() const noexcept { return rho_; }
  std::int64_t n() const noexcept { return n_; }

  /// Real-valued edge count n / sum_i(lambda_i / i).
  double xi() const noexcept;
  /// Real-valued check count xi * sum_i(rho_i / i).
  double check_count() const noexcept;
  double design_rate() const noexcept;
  int max_check_degree() const noexcept { return rho_.max_degree(); }
  std::vector<int> variable_degrees() const { return lambda_.degrees(); }

  /// True when both sides have a single degree.
  bool is_regular() const noexcept;

 private:
  DegreeDistribution lambda_;
  DegreeDistribution rho_;
  std::int64_t n_;
};

/// Integer realization of the ensemble fractions (largest-remainder
/// rounding, ties toward the lower degree) with equal edge totals on both
/// sides. The gap is closed with whole degree-d_c checks plus the fewest
/// single-check additions or removals; InfeasibleError when none exists.
EnsembleCounts counts(const Ensemble& e);

}  // namespace covevo
