#include "covevo/analytic.hpp"

#include <string>
#include <vector>

#include "covevo/errors.hpp"
#include "covevo/numeric.hpp"

namespace covevo {

namespace {

double indicator(bool c) { return c ? 1.0 : 0.0; }

void check_covariance_domain(double epsilon, double y, double y_floor) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) {
    throw DomainError("epsilon = " + std::to_string(epsilon) + " outside (0,1]");
  }
  if (!(y >= y_floor && y <= 1.0)) {
    throw DomainError("y = " + std::to_string(y) + " outside [" + std::to_string(y_floor) + ",1]");
  }
}

}  // namespace

double v_term(const Ensemble& ens, double x, int i, int j) {
  const int dc = ens.max_check_degree();
  if (i < 1 || j < 1 || i > dc || j > dc) throw DomainError("V index outside 1..d_c");
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("V argument outside [0,1]");
  const double xt = 1.0 - x;
  std::vector<double> terms;
  for (const auto& [s, rs] : ens.rho().coeffs()) {
    const double c = binomial(s - 1, i - 1) * binomial(s - 1, j - 1);
    if (c == 0.0) continue;
    terms.push_back(s * rs * c * ipow(x, i + j) * ipow(xt, 2 * s - i - j));
  }
  return pairwise_sum(terms);
}

CovarianceMatrix covariance_analytic(const Ensemble& ens, double epsilon, double y, double y_floor) {
  check_covariance_domain(epsilon, y, y_floor);
  return covariance_analytic(ens, means_at(ens, epsilon, y));
}

CovarianceMatrix covariance_analytic(const Ensemble& ens, const EvolutionPoint& p) {
  const double eps = p.epsilon, y = p.y, x = p.x, e = p.e;
  const double F = p.F, Fp = p.F_prime, ratio = p.x_prime / x;
  if (e == 0.0) throw SingularityError("e(y) vanishes");

  CovarianceMatrix m(covariance_labels(ens), eps, y);
  const auto& labels = m.labels();
  for (std::size_t a = 0; a < labels.size(); ++a) {
    for (std::size_t b = a; b < labels.size(); ++b) {
      const Label& A = labels[a];
      const Label& B = labels[b];
      double v = 0.0;
      if (A.is_variable() && B.is_variable()) {
        const int k = A.degree, s = B.degree;
        const double lk = p.mean_l.at(k), ls = p.mean_l.at(s);
        v = -k * s * lk * ls / (e * e) * F +
            eps * lk * ls / e * (k * (ipow(y, s) - 1.0) + s * (ipow(y, k) - 1.0)) +
            indicator(k == s) * k * lk * (1.0 - eps * ipow(y, k));
      } else if (A.is_variable() || B.is_variable()) {
        const int s = A.is_variable() ? A.degree : B.degree;
        const int j = A.is_variable() ? B.degree : A.degree;
        const double ls = p.mean_l.at(s);
        v = (F * s * ls / e - eps * ls * (ipow(y, s) - 1.0)) * (ratio * p.G[j] - indicator(j == 1)) -
            s * ls / e * p.G[j] * ((Fp + x) / 2.0 - eps * x * ipow(y, s));
      } else {
        const int i = A.degree, j = B.degree;
        const double gi = p.G[i], gj = p.G[j];
        v = -F * (ratio * gi - indicator(i == 1)) * (ratio * gj - indicator(j == 1)) +
            gi * gj * (Fp * ratio - p.weighted_square_sum + x * x) - v_term(ens, x, i, j) +
            (indicator(j == 1) * gi + indicator(i == 1) * gj) * (x * (e - x) - (Fp - x) / 2.0) +
            indicator(i == j) * i * p.mean_r[i] + indicator(i == 1 && j == 1) * (e - x) * (e - x);
      }
      m.set(a, b, v);
    }
  }
  return m;
}

CovarianceMatrix initial_covariance(const Ensemble& ens, double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) {
    throw DomainError("epsilon = " + std::to_string(epsilon) + " outside (0,1]");
  }
  const EvolutionPoint p = means_at(ens, epsilon, 1.0);
  const double ee = epsilon * (1.0 - epsilon);
  const double lambda_prime_one = ens.lambda().eval(1.0, 1);

  CovarianceMatrix m(covariance_labels(ens), epsilon, 1.0);
  const auto& labels = m.labels();
  for (std::size_t a = 0; a < labels.size(); ++a) {
    for (std::size_t b = a; b < labels.size(); ++b) {
      const Label& A = labels[a];
      const Label& B = labels[b];
      double v = 0.0;
      if (A.is_variable() && B.is_variable()) {
        v = indicator(A.degree == B.degree) * A.degree * ens.lambda().coeff(A.degree) * ee;
      } else if (A.is_variable() || B.is_variable()) {
        const int k = A.is_variable() ? A.degree : B.degree;
        const int i = A.is_variable() ? B.degree : A.degree;
        v = -k * ens.lambda().coeff(k) * ee * p.G[i];
      } else {
        const int i = A.degree, j = B.degree;
        v = indicator(i == j) * i * p.mean_r[i] - v_term(ens, p.x, i, j) + lambda_prime_one * ee * p.G[i] * p.G[j];
      }
      m.set(a, b, v);
    }
  }
  return m;
}

AuxiliaryQuantities auxiliary(const Ensemble& ens, double epsilon, double y, double y_floor) {
  check_covariance_domain(epsilon, y, y_floor);
  const EvolutionPoint p = means_at(ens, epsilon, y);
  const int dc = ens.max_check_degree();
  const double eps = epsilon, et = 1.0 - epsilon, x = p.x, e = p.e;
  const double ratio = p.x_prime / x;
  const double W = p.shifted_inverse_sum;
  const double S2 = p.weighted_square_sum;
  const double F = p.F, Fp = p.F_prime;
  const double gs = p.G_sigma;
  const double rdc = p.mean_r[dc];
  const auto degrees = ens.variable_degrees();

  AuxiliaryQuantities q;
  q.ll_weighted_sum = eps * et * ens.lambda().inverse_degree_sum();
  for (int k : degrees) {
    const double lk = p.mean_l.at(k);
    for (int s : degrees) {
      const double ls = p.mean_l.at(s);
      const double tk = (eps * ipow(y, k) - 1.0) / (k * lk);
      const double ts = (eps * ipow(y, s) - 1.0) / (s * ls);
      q.ll_pair[{k, s}] = k == s ? 0.0 : tk + ts;
      q.U[{k, s}] = -tk + ts + 2.0 * eps / e * ((ipow(y, k) - 1.0) / k - (ipow(y, s) - 1.0) / s);
      const double shift = (ipow(y, k) - 1.0) / k - (ipow(y, s) - 1.0) / s;
      const double step = ipow(y, k - 1) - ipow(y, s - 1);
      for (int j = 1; j < dc; ++j) {
        q.S[{k, s, j}] = -eps * (p.G[j] * ratio - indicator(j == 1)) * shift + eps * p.G[j] * step;
      }
      q.S_sigma[{k, s}] = -eps * (gs * ratio - 1.0) * shift + eps * gs * step;
    }
  }
  for (int j = 1; j < dc; ++j) {
    q.A[j] = eps * et * W * (p.G[j] * ratio - indicator(j == 1)) - et * x * p.G[j];
  }
  q.A_sigma = eps * et * W * (gs * ratio - 1.0) - et * x * gs;
  q.A_top = eps * et * W * ratio * p.G[dc] - et * x * p.G[dc];
  q.G_sigma = gs;

  q.delta_r_sigma_sigma = -F * (ratio * gs - 1.0) * (ratio * gs - 1.0) + Fp * gs * (ratio * gs - 1.0) -
                          gs * gs * S2 + dc * dc * rdc * rdc - v_term(ens, x, dc, dc);
  for (int j = 1; j < dc; ++j) {
    const double gj = p.G[j];
    const double ij = indicator(j == 1);
    q.delta_r_sigma[j] = -F * (ratio * gs - 1.0) * (ratio * gj - ij) + Fp * gj * (ratio * gs - 1.0) -
                         gs * gj * S2 + dc * rdc * x * gj + v_term(ens, x, j, dc) +
                         (Fp - x) / 2.0 * (gj - ij * gs) + ij * dc * rdc * (e - x);
  }
  const double bracket = -F * ratio * ratio + Fp * ratio - S2 + x * x;
  for (int j = 2; j < dc; ++j) {
    q.delta_r_top[j] = p.G[j] * p.G[dc] * bracket - v_term(ens, x, j, dc);
  }
  for (int i = 1; i <= dc; ++i)
    for (int j = 1; j <= dc; ++j) q.V[{i, j}] = v_term(ens, x, i, j);
  return q;
}

double top_check_covariance(const CovarianceMatrix& m, const Label& x) {
  const auto xi = m.index_of(x);
  if (!xi) throw DomainError("label " + x.name() + " not in covariance index set");
  CompensatedSum s;
  for (std::size_t k = 0; k < m.size(); ++k) {
    const double v = m(*xi, k);
    s.add(m.labels()[k].is_variable() ? v : -v);
  }
  return s.value();
}

AuxiliaryQuantities auxiliary_from_matrix(const Ensemble& ens, const CovarianceMatrix& m) {
  const double y = m.y();
  const EvolutionPoint p = means_at(ens, m.epsilon(), y);
  const int dc = ens.max_check_degree();
  const auto degrees = ens.variable_degrees();
  auto d = [&](const Label& a, const Label& b) { return m.at(a, b); };

  AuxiliaryQuantities q;
  CompensatedSum total;
  for (int k : degrees)
    for (int s : degrees) total.add(d(Label::l(k), Label::l(s)) / (k * s));
  q.ll_weighted_sum = total.value();

  for (int k : degrees) {
    const double wk = k * p.mean_l.at(k);
    for (int s : degrees) {
      const double ws = s * p.mean_l.at(s);
      const double dkk = d(Label::l(k), Label::l(k)) / (wk * wk);
      const double dss = d(Label::l(s), Label::l(s)) / (ws * ws);
      q.ll_pair[{k, s}] = 2.0 * d(Label::l(k), Label::l(s)) / (wk * ws) - dkk - dss;
      q.U[{k, s}] = dkk - dss;
      CompensatedSum ss;
      for (int j = 1; j < dc; ++j) {
        const double v = d(Label::l(k), Label::r(j)) / wk - d(Label::l(s), Label::r(j)) / ws;
        q.S[{k, s, j}] = v;
        ss.add(v);
      }
      q.S_sigma[{k, s}] = ss.value();
    }
  }
  CompensatedSum as, gs;
  for (int j = 1; j < dc; ++j) {
    CompensatedSum aj;
    for (int i : degrees) aj.add(d(Label::l(i), Label::r(j)) / i);
    q.A[j] = aj.value();
    as.add(q.A[j]);
    gs.add(p.G[j]);
  }
  q.A_sigma = as.value();
  q.G_sigma = gs.value();
  CompensatedSum atop;
  for (int i : degrees) atop.add(top_check_covariance(m, Label::l(i)) / i);
  q.A_top = atop.value();

  CompensatedSum rss;
  for (int j = 1; j < dc; ++j) {
    CompensatedSum rs;
    for (int k = 1; k < dc; ++k) rs.add(d(Label::r(j), Label::r(k)));
    q.delta_r_sigma[j] = rs.value();
    rss.add(rs.value());
  }
  q.delta_r_sigma_sigma = rss.value();
  for (int j = 2; j < dc; ++j) q.delta_r_top[j] = top_check_covariance(m, Label::r(j));
  for (int i = 1; i <= dc; ++i)
    for (int j = 1; j <= dc; ++j) q.V[{i, j}] = v_term(ens, p.x, i, j);
  return q;
}

}  // namespace covevo
