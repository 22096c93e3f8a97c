#include "covevo/ensemble.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <vector>

#include <json.hpp>

#include "covevo/errors.hpp"

namespace covevo {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

// Largest-remainder apportionment of `total` units over `weights`;
// ties in the fractional part go to the lower degree.
std::map<int, std::int64_t> apportion(std::int64_t total, const std::map<int, double>& weights) {
  double wsum = 0.0;
  for (const auto& [d, w] : weights) wsum += w;

  struct Share {
    int degree;
    std::int64_t floor;
    double remainder;
  };
  std::vector<Share> shares;
  std::int64_t assigned = 0;
  for (const auto& [d, w] : weights) {
    const double quota = static_cast<double>(total) * w / wsum;
    const double fl = std::floor(quota);
    shares.push_back({d, static_cast<std::int64_t>(fl), quota - fl});
    assigned += static_cast<std::int64_t>(fl);
  }
  std::vector<std::size_t> order(shares.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double diff = shares[a].remainder - shares[b].remainder;
    if (std::fabs(diff) > 1e-12) return diff > 0;
    return shares[a].degree < shares[b].degree;
  });
  for (std::size_t k = 0; assigned < total; ++k, ++assigned) {
    shares[order[k % order.size()]].floor += 1;
  }
  std::map<int, std::int64_t> out;
  for (const auto& s : shares) out[s.degree] = s.floor;
  return out;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

DegreeDistribution::DegreeDistribution(std::map<int, double> coeffs, bool renormalize)
    : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) throw ValidationError("degree distribution is empty");
  double sum = 0.0;
  for (const auto& [d, c] : coeffs_) {
    if (d < 2) throw ValidationError("degree " + std::to_string(d) + " is below the minimum degree 2");
    if (!(c > 0.0) || !std::isfinite(c)) {
      throw ValidationError("coefficient for degree " + std::to_string(d) + " must be positive");
    }
    if (c > 1.0 + kNormTolerance) {
      throw ValidationError("coefficient for degree " + std::to_string(d) + " exceeds 1");
    }
    sum += c;
  }
  if (renormalize) {
    for (auto& [d, c] : coeffs_) c /= sum;
  } else if (std::fabs(sum - 1.0) > kNormTolerance) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", sum);
    throw ValidationError(std::string("coefficients sum to ") + buf + ", expected 1");
  }
}

DegreeDistribution DegreeDistribution::parse(std::string_view text, bool renormalize) {
  std::map<int, double> coeffs;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto raw = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    const std::string token = trim(raw);
    const auto colon = token.find(':');
    if (token.empty() || colon == std::string::npos) {
      throw ValidationError("malformed degree token '" + token + "' (expected degree:coefficient)");
    }
    const std::string deg_text = trim(std::string_view(token).substr(0, colon));
    const std::string coef_text = trim(std::string_view(token).substr(colon + 1));
    int degree = 0;
    const auto [dp, dec] = std::from_chars(deg_text.data(), deg_text.data() + deg_text.size(), degree);
    if (dec != std::errc{} || dp != deg_text.data() + deg_text.size()) {
      throw ValidationError("malformed degree in token '" + token + "'");
    }
    double coef = 0.0;
    std::size_t used = 0;
    try {
      coef = std::stod(coef_text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (coef_text.empty() || used != coef_text.size()) {
      throw ValidationError("malformed coefficient in token '" + token + "'");
    }
    if (coeffs.count(degree)) throw ValidationError("duplicate degree in token '" + token + "'");
    coeffs[degree] = coef;
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return DegreeDistribution(std::move(coeffs), renormalize);
}

double DegreeDistribution::coeff(int degree) const noexcept {
  const auto it = coeffs_.find(degree);
  return it == coeffs_.end() ? 0.0 : it->second;
}

std::vector<int> DegreeDistribution::degrees() const {
  std::vector<int> out;
  out.reserve(coeffs_.size());
  for (const auto& [d, c] : coeffs_) out.push_back(d);
  return out;
}

double DegreeDistribution::eval(double x, int derivative) const {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DomainError("polynomial argument " + std::to_string(x) + " outside [0,1]");
  }
  if (derivative < 0) throw DomainError("negative derivative order");
  double total = 0.0;
  for (const auto& [d, c] : coeffs_) {
    int power = d - 1;
    double factor = c;
    for (int q = 0; q < derivative; ++q) factor *= power--;
    if (factor == 0.0) continue;
    double term = factor;
    for (int q = 0; q < power; ++q) term *= x;
    total += term;
  }
  return total;
}

double DegreeDistribution::inverse_degree_sum() const noexcept {
  double s = 0.0;
  for (const auto& [d, c] : coeffs_) s += c / d;
  return s;
}

std::string DegreeDistribution::to_string() const {
  std::string out;
  char buf[64];
  for (const auto& [d, c] : coeffs_) {
    if (!out.empty()) out += ',';
    std::snprintf(buf, sizeof buf, "%d:%.17g", d, c);
    out += buf;
  }
  return out;
}

double eval_poly(const DegreeDistribution& d, double x, int derivative) { return d.eval(x, derivative); }

std::int64_t EnsembleCounts::variable_count() const {
  std::int64_t s = 0;
  for (const auto& [d, c] : variables_by_degree) s += c;
  return s;
}

std::int64_t EnsembleCounts::check_count() const {
  std::int64_t s = 0;
  for (const auto& [d, c] : checks_by_degree) s += c;
  return s;
}

std::int64_t EnsembleCounts::variable_edges() const {
  std::int64_t s = 0;
  for (const auto& [d, c] : variables_by_degree) s += d * c;
  return s;
}

std::int64_t EnsembleCounts::check_edges() const {
  std::int64_t s = 0;
  for (const auto& [d, c] : checks_by_degree) s += d * c;
  return s;
}

Ensemble::Ensemble(DegreeDistribution lambda, DegreeDistribution rho, std::int64_t n)
    : lambda_(std::move(lambda)), rho_(std::move(rho)), n_(n) {
  if (n_ <= 0) throw ValidationError("block length n must be positive");
  const double rate = design_rate();
  if (!(rate > 0.0 && rate < 1.0)) {
    throw ValidationError("design rate " + std::to_string(rate) + " outside (0,1)");
  }
}

Ensemble Ensemble::from_json(std::string_view json_text, std::int64_t default_n, bool renormalize) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& ex) {
    throw ValidationError(std::string("ensemble JSON: ") + ex.what());
  }
  auto read_side = [&](const char* key) {
    if (!doc.contains(key) || !doc[key].is_object()) {
      throw ValidationError(std::string("ensemble JSON: missing object '") + key + "'");
    }
    std::map<int, double> coeffs;
    for (const auto& [k, v] : doc[key].items()) {
      int degree = 0;
      const auto [p, ec] = std::from_chars(k.data(), k.data() + k.size(), degree);
      if (ec != std::errc{} || p != k.data() + k.size()) {
        throw ValidationError(std::string("ensemble JSON: malformed degree '") + k + "' in " + key);
      }
      if (!v.is_number()) {
        throw ValidationError(std::string("ensemble JSON: non-numeric coefficient for degree '") + k + "'");
      }
      coeffs[degree] = v.get<double>();
    }
    return DegreeDistribution(std::move(coeffs), renormalize);
  };
  auto lambda = read_side("lambda");
  auto rho = read_side("rho");
  std::int64_t n = default_n;
  if (doc.contains("n")) {
    if (!doc["n"].is_number_integer()) throw ValidationError("ensemble JSON: 'n' must be an integer");
    n = doc["n"].get<std::int64_t>();
  }
  return Ensemble(std::move(lambda), std::move(rho), n);
}

std::string Ensemble::to_json() const {
  nlohmann::json doc;
  for (const auto& [d, c] : lambda_.coeffs()) doc["lambda"][std::to_string(d)] = c;
  for (const auto& [d, c] : rho_.coeffs()) doc["rho"][std::to_string(d)] = c;
  doc["n"] = n_;
  return doc.dump();
}

double Ensemble::xi() const noexcept { return static_cast<double>(n_) / lambda_.inverse_degree_sum(); }

double Ensemble::check_count() const noexcept { return xi() * rho_.inverse_degree_sum(); }

double Ensemble::design_rate() const noexcept {
  return 1.0 - rho_.inverse_degree_sum() / lambda_.inverse_degree_sum();
}

bool Ensemble::is_regular() const noexcept {
  return lambda_.coeffs().size() == 1 && rho_.coeffs().size() == 1;
}

EnsembleCounts counts(const Ensemble& e) {
  std::map<int, double> vw, cw;
  for (const auto& [d, c] : e.lambda().coeffs()) vw[d] = c / d;
  for (const auto& [d, c] : e.rho().coeffs()) cw[d] = c / d;

  EnsembleCounts out;
  out.variables_by_degree = apportion(e.n(), vw);
  const auto m = static_cast<std::int64_t>(std::llround(e.check_count()));
  if (m <= 0) throw InfeasibleError("ensemble realizes zero check nodes");
  out.checks_by_degree = apportion(m, cw);

  const int dc = e.max_check_degree();
  const std::int64_t gap = out.variable_edges() - out.check_edges();
  const std::int64_t remainder = gap - floor_div(gap, dc) * dc;

  // Fewest single-check additions (+j) or removals (-j), j in R, that absorb
  // the part of the gap whole degree-dc checks cannot. Breadth-first over
  // residues mod dc, degrees ascending, additions before removals.
  std::int64_t best_delta = 0;
  if (remainder != 0) {
    std::vector<int> moves;
    for (int d : e.rho().degrees()) {
      moves.push_back(d);
      moves.push_back(-d);
    }
    std::vector<int> via(dc, 0), from(dc, -1);
    from[0] = 0;
    std::vector<int> frontier{0};
    while (!frontier.empty() && from[remainder] < 0) {
      std::vector<int> next;
      for (int r : frontier) {
        for (int mv : moves) {
          const int t = ((r + mv) % dc + dc) % dc;
          if (from[t] >= 0) continue;
          from[t] = r;
          via[t] = mv;
          next.push_back(t);
        }
      }
      frontier = std::move(next);
    }
    if (from[remainder] < 0) {
      throw InfeasibleError("cannot equalize edge totals: variable side has " +
                            std::to_string(out.variable_edges()) + " edges, check side " +
                            std::to_string(out.check_edges()));
    }
    for (int r = static_cast<int>(remainder); r != 0; r = from[r]) {
      const int mv = via[r];
      best_delta += mv;
      out.checks_by_degree[std::abs(mv)] += mv > 0 ? 1 : -1;
    }
    for (const auto& [d, c] : out.checks_by_degree) {
      if (c < 0) throw InfeasibleError("edge equalization drives the degree-" + std::to_string(d) + " check count negative");
    }
  }
  out.checks_by_degree[dc] += (gap - best_delta) / dc;
  if (out.checks_by_degree[dc] < 0) {
    throw InfeasibleError("edge equalization drives the degree-" + std::to_string(dc) + " check count negative");
  }
  out.xi = out.variable_edges();
  if (out.xi != out.check_edges()) throw InfeasibleError("edge totals differ after equalization");
  return out;
}

}  // namespace covevo
