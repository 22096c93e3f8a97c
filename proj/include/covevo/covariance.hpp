#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "covevo/ensemble.hpp"

namespace covevo {

/// One residual-graph statistic: l_k (edges at degree-k variables) or
/// r_j (edges at residual-degree-j checks).
struct Label {
  enum class Side { Variable, Check };
  Side side = Side::Variable;
  int degree = 0;

  static Label l(int k) { return {Side::Variable, k}; }
  static Label r(int j) { return {Side::Check, j}; }
  bool is_variable() const noexcept { return side == Side::Variable; }
  std::string name() const;
  /// Parses "l3" / "r1"; nullopt when malformed.
  static std::optional<Label> parse(const std::string& text);

  friend bool operator==(const Label&, const Label&) = default;
};

/// The covariance index set: l_k for k in L, then r_1 .. r_{d_c - 1}.
std::vector<Label> covariance_labels(const Ensemble& ens);

/// Symmetric matrix of xi-normalized covariances over a label set.
class CovarianceMatrix {
 public:
  CovarianceMatrix() = default;
  CovarianceMatrix(std::vector<Label> labels, double epsilon, double y);

  const std::vector<Label>& labels() const noexcept { return labels_; }
  std::size_t size() const noexcept { return labels_.size(); }
  double epsilon() const noexcept { return epsilon_; }
  double y() const noexcept { return y_; }

  double operator()(std::size_t i, std::size_t j) const { return data_[i * labels_.size() + j]; }
  /// Writes both (i,j) and (j,i).
  void set(std::size_t i, std::size_t j, double v);
  double at(const Label& a, const Label& b) const;
  std::optional<std::size_t> index_of(const Label& a) const;

  /// Ascending eigenvalues.
  std::vector<double> eigenvalues() const;
  double max_abs_difference(const CovarianceMatrix& other) const;
  double max_abs_entry() const;

  /// Upper triangle row-major, size m(m+1)/2.
  std::vector<double> packed_upper() const;
  void assign_packed_upper(const std::vector<double>& packed);

 private:
  std::vector<Label> labels_;
  std::vector<double> data_;
  double epsilon_ = 0.0;
  double y_ = 0.0;
};

}  // namespace covevo
