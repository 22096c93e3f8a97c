#include "covevo/numeric.hpp"

#include <cmath>
#include <cstdint>

namespace covevo {

double binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0.0;
  if (k > n - k) k = n - k;
  if (n <= 60) {
    // r * (n - i) stays below 2^64 for n <= 60 and the division is exact.
    std::uint64_t r = 1;
    for (int i = 0; i < k; ++i) {
      r = r * static_cast<std::uint64_t>(n - i) / static_cast<std::uint64_t>(i + 1);
    }
    return static_cast<double>(r);
  }
  return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)));
}

void CompensatedSum::add(double v) noexcept {
  const double t = sum_ + v;
  if (std::fabs(sum_) >= std::fabs(v)) {
    comp_ += (sum_ - t) + v;
  } else {
    comp_ += (v - t) + sum_;
  }
  sum_ = t;
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    CompensatedSum s;
    for (double v : values) s.add(v);
    return s.value();
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double ipow(double base, int exponent) {
  if (exponent < 0) return 1.0 / ipow(base, -exponent);
  double result = 1.0;
  while (exponent > 0) {
    if (exponent & 1) result *= base;
    base *= base;
    exponent >>= 1;
  }
  return result;
}

}  // namespace covevo
