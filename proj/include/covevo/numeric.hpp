#pragma once

#include <cstddef>
#include <span>

namespace covevo {

/// Binomial coefficient C(n, k). Exact integer arithmetic for n <= 60,
/// log-gamma above. Returns 0 when k < 0 or k > n.
double binomial(int n, int k);

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) noexcept;
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Pairwise summation of a contiguous range.
double pairwise_sum(std::span<const double> values);

/// Integer power by repeated squaring; pow(0, 0) == 1.
double ipow(double base, int exponent);

}  // namespace covevo
