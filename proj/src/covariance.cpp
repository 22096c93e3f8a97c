#include "covevo/covariance.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "covevo/errors.hpp"

namespace covevo {

std::string Label::name() const { return (is_variable() ? "l" : "r") + std::to_string(degree); }

std::optional<Label> Label::parse(const std::string& text) {
  if (text.size() < 2 || (text[0] != 'l' && text[0] != 'r')) return std::nullopt;
  int degree = 0;
  for (std::size_t i = 1; i < text.size(); ++i) {
    if (text[i] < '0' || text[i] > '9') return std::nullopt;
    degree = degree * 10 + (text[i] - '0');
  }
  return text[0] == 'l' ? Label::l(degree) : Label::r(degree);
}

std::vector<Label> covariance_labels(const Ensemble& ens) {
  std::vector<Label> out;
  for (int k : ens.variable_degrees()) out.push_back(Label::l(k));
  for (int j = 1; j < ens.max_check_degree(); ++j) out.push_back(Label::r(j));
  return out;
}

CovarianceMatrix::CovarianceMatrix(std::vector<Label> labels, double epsilon, double y)
    : labels_(std::move(labels)), data_(labels_.size() * labels_.size(), 0.0), epsilon_(epsilon), y_(y) {}

void CovarianceMatrix::set(std::size_t i, std::size_t j, double v) {
  const std::size_t m = labels_.size();
  data_[i * m + j] = v;
  data_[j * m + i] = v;
}

std::optional<std::size_t> CovarianceMatrix::index_of(const Label& a) const {
  const auto it = std::find(labels_.begin(), labels_.end(), a);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels_.begin());
}

double CovarianceMatrix::at(const Label& a, const Label& b) const {
  const auto i = index_of(a);
  const auto j = index_of(b);
  if (!i || !j) throw DomainError("label " + (i ? b.name() : a.name()) + " not in covariance index set");
  return (*this)(*i, *j);
}

std::vector<double> CovarianceMatrix::eigenvalues() const {
  const auto m = static_cast<Eigen::Index>(labels_.size());
  Eigen::MatrixXd mat(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) mat(i, j) = data_[static_cast<std::size_t>(i * m + j)];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(mat, Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

double CovarianceMatrix::max_abs_difference(const CovarianceMatrix& other) const {
  if (other.labels_ != labels_) throw DomainError("covariance matrices have different index sets");
  double worst = 0.0;
  for (std::size_t k = 0; k < data_.size(); ++k) worst = std::max(worst, std::fabs(data_[k] - other.data_[k]));
  return worst;
}

double CovarianceMatrix::max_abs_entry() const {
  double worst = 0.0;
  for (double v : data_) worst = std::max(worst, std::fabs(v));
  return worst;
}

std::vector<double> CovarianceMatrix::packed_upper() const {
  const std::size_t m = labels_.size();
  std::vector<double> out;
  out.reserve(m * (m + 1) / 2);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i; j < m; ++j) out.push_back(data_[i * m + j]);
  return out;
}

void CovarianceMatrix::assign_packed_upper(const std::vector<double>& packed) {
  const std::size_t m = labels_.size();
  if (packed.size() != m * (m + 1) / 2) throw DomainError("packed size does not match the index set");
  std::size_t k = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i; j < m; ++j) set(i, j, packed[k++]);
}

}  // namespace covevo
