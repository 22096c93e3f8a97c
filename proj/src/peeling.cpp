#include "covevo/peeling.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>
#include <thread>

#include "covevo/errors.hpp"

namespace covevo {

namespace {
__extension__ typedef unsigned __int128 u128;
}  // namespace

std::uint64_t mix64(std::uint64_t v) noexcept {
  v += 0x9E3779B97F4A7C15ULL;
  v = (v ^ (v >> 30)) * 0xBF58476D1CE4E5B9ULL;
  v = (v ^ (v >> 27)) * 0x94D049BB133111EBULL;
  return v ^ (v >> 31);
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t trial_id) noexcept {
  return mix64(base_seed ^ mix64(trial_id));
}

std::uint64_t Rng::below(std::uint64_t bound) {
  std::uint64_t x = next();
  u128 m = static_cast<u128>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = next();
      m = static_cast<u128>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

TannerGraph sample_graph(const Ensemble& ens, std::uint64_t seed) { return sample_graph(counts(ens), seed); }

TannerGraph sample_graph(const EnsembleCounts& c, std::uint64_t seed) {
  TannerGraph g;
  for (const auto& [d, count] : c.variables_by_degree) g.variable_degree.insert(g.variable_degree.end(), count, d);
  for (const auto& [d, count] : c.checks_by_degree) g.check_degree.insert(g.check_degree.end(), count, d);

  g.variable_offset.assign(g.variable_degree.size() + 1, 0);
  for (std::size_t v = 0; v < g.variable_degree.size(); ++v) {
    g.variable_offset[v + 1] = g.variable_offset[v] + g.variable_degree[v];
  }
  g.check_offset.assign(g.check_degree.size() + 1, 0);
  g.socket_check.reserve(static_cast<std::size_t>(c.xi));
  for (std::size_t k = 0; k < g.check_degree.size(); ++k) {
    g.check_offset[k + 1] = g.check_offset[k] + g.check_degree[k];
    g.socket_check.insert(g.socket_check.end(), g.check_degree[k], static_cast<std::int32_t>(k));
  }
  if (g.variable_offset.back() != g.check_offset.back()) {
    throw InfeasibleError("socket totals differ between variable and check sides");
  }

  const auto xi = static_cast<std::size_t>(g.variable_offset.back());
  g.pairing.resize(xi);
  for (std::size_t s = 0; s < xi; ++s) g.pairing[s] = static_cast<std::int64_t>(s);
  Rng rng(seed);
  for (std::size_t s = xi; s > 1; --s) {
    const auto j = static_cast<std::size_t>(rng.below(s));
    std::swap(g.pairing[s - 1], g.pairing[j]);
  }
  return g;
}

namespace {

// Checks of residual degree one, with O(1) insert, erase and uniform sampling.
class DegreeOnePool {
 public:
  explicit DegreeOnePool(std::size_t checks) : position_(checks, kAbsent) {}

  void insert(std::int32_t c) {
    position_[c] = members_.size();
    members_.push_back(c);
  }
  void erase(std::int32_t c) {
    const std::size_t p = position_[c];
    const std::int32_t last = members_.back();
    members_[p] = last;
    position_[last] = p;
    members_.pop_back();
    position_[c] = kAbsent;
  }
  bool empty() const noexcept { return members_.empty(); }
  std::int32_t sample(Rng& rng) const { return members_[rng.below(members_.size())]; }

 private:
  static constexpr std::size_t kAbsent = static_cast<std::size_t>(-1);
  std::vector<std::int32_t> members_;
  std::vector<std::size_t> position_;
};

}  // namespace

TrajectoryRecord peel(const TannerGraph& graph, double epsilon, std::uint64_t seed, const std::vector<double>& tau_grid,
                      std::vector<std::int64_t>* edge_trace) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw DomainError("epsilon outside [0,1]");
  if (!std::is_sorted(tau_grid.begin(), tau_grid.end())) throw ValidationError("tau grid must be sorted ascending");

  const std::size_t nv = graph.variable_degree.size();
  const std::size_t nc = graph.check_degree.size();
  const double xi = static_cast<double>(graph.edge_count());
  int max_check_degree = 0;
  for (int d : graph.check_degree) max_check_degree = std::max(max_check_degree, d);

  Rng rng(seed);
  std::vector<char> unknown(nv, 0);
  std::vector<int> residual_degree(nc, 0);
  std::vector<std::int32_t> neighbour_xor(nc, 0);  // xor of the unknown neighbours of each check
  std::map<int, std::int64_t> l_counts, r_counts;
  for (int d : graph.variable_degree) l_counts[d] = 0;
  for (int j = 1; j <= max_check_degree; ++j) r_counts[j] = 0;

  std::int64_t residual_edges = 0;
  for (std::size_t v = 0; v < nv; ++v) {
    if (!(rng.uniform() < epsilon)) continue;
    unknown[v] = 1;
    l_counts[graph.variable_degree[v]] += graph.variable_degree[v];
    residual_edges += graph.variable_degree[v];
    for (std::int64_t s = graph.variable_offset[v]; s < graph.variable_offset[v + 1]; ++s) {
      const std::int32_t c = graph.check_of_variable_socket(s);
      residual_degree[c] += 1;
      neighbour_xor[c] ^= static_cast<std::int32_t>(v);
    }
  }
  DegreeOnePool pool(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    const int d = residual_degree[c];
    if (d > 0) r_counts[d] += d;
    if (d == 1) pool.insert(static_cast<std::int32_t>(c));
  }
  if (edge_trace) edge_trace->push_back(residual_edges);

  TrajectoryRecord rec;
  rec.seed = seed;
  std::size_t next_grid = 0;
  std::int64_t t = 0;
  auto record = [&](bool halted) {
    TrajectorySample s;
    s.grid_index = next_grid;
    s.tau = tau_grid[next_grid];
    s.t = t;
    s.halted = halted;
    s.r_counts = r_counts;
    s.l_counts = l_counts;
    rec.samples.push_back(std::move(s));
    ++next_grid;
  };

  while (true) {
    while (next_grid < tau_grid.size() && static_cast<double>(t) / xi >= tau_grid[next_grid]) record(false);
    if (pool.empty()) break;
    const std::int32_t chosen = pool.sample(rng);
    const std::int32_t v = neighbour_xor[chosen];
    unknown[v] = 0;
    const int dv = graph.variable_degree[v];
    l_counts[dv] -= dv;
    residual_edges -= dv;
    for (std::int64_t s = graph.variable_offset[v]; s < graph.variable_offset[v + 1]; ++s) {
      const std::int32_t c = graph.check_of_variable_socket(s);
      const int d = residual_degree[c];
      r_counts[d] -= d;
      if (d - 1 > 0) r_counts[d - 1] += d - 1;
      if (d == 1) pool.erase(c);
      if (d - 1 == 1) pool.insert(c);
      residual_degree[c] = d - 1;
      neighbour_xor[c] ^= v;
    }
    ++t;
    if (edge_trace) edge_trace->push_back(residual_edges);
  }
  if (next_grid < tau_grid.size()) record(true);

  rec.iterations = t;
  rec.residual_at_halt = residual_edges;
  rec.success = residual_edges == 0;
  return rec;
}

void MomentAccumulator::add(const std::vector<double>& x) {
  MomentAccumulator single(x.size());
  single.count_ = 1;
  single.mean_ = x;
  merge(single);
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  const std::size_t dim = mean_.size();
  const double na = static_cast<double>(count_), nb = static_cast<double>(other.count_);
  const double n = na + nb;
  std::vector<double> delta(dim);
  for (std::size_t i = 0; i < dim; ++i) delta[i] = other.mean_[i] - mean_[i];
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) {
      comoment_[i * dim + j] += other.comoment_[i * dim + j] + delta[i] * delta[j] * na * nb / n;
    }
  for (std::size_t i = 0; i < dim; ++i) mean_[i] += delta[i] * nb / n;
  count_ += other.count_;
}

double MomentAccumulator::covariance(std::size_t i, std::size_t j) const {
  if (count_ < 2) throw DomainError("sample covariance needs at least two samples");
  return comoment_[i * mean_.size() + j] / static_cast<double>(count_ - 1);
}

SimSummary simulate(const Ensemble& ens, double epsilon, std::int64_t trials, std::uint64_t base_seed,
                    const std::vector<double>& tau_grid, const SimOptions& options) {
  if (trials < 1) throw ValidationError("trials must be at least 1");
  if (!std::is_sorted(tau_grid.begin(), tau_grid.end())) throw ValidationError("tau grid must be sorted ascending");
  const EnsembleCounts cnt = counts(ens);

  std::vector<TrajectoryRecord> records(static_cast<std::size_t>(trials));
  std::atomic<std::int64_t> next{0};
  auto worker = [&] {
    for (std::int64_t i = next++; i < trials; i = next++) {
      const std::uint64_t seed = trial_seed(base_seed, static_cast<std::uint64_t>(i));
      const TannerGraph g = sample_graph(cnt, seed);
      TrajectoryRecord r = peel(g, epsilon, mix64(seed), tau_grid);
      r.trial_id = static_cast<std::uint64_t>(i);
      r.seed = seed;
      records[static_cast<std::size_t>(i)] = std::move(r);
    }
  };
  unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
  threads = static_cast<unsigned>(std::min<std::int64_t>(threads, trials));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  SimSummary out;
  out.trials = trials;
  out.xi = cnt.xi;
  for (int k : ens.variable_degrees()) out.labels.push_back(Label::l(k));
  for (int j = 1; j <= ens.max_check_degree(); ++j) out.labels.push_back(Label::r(j));
  const std::size_t dim = out.labels.size();

  std::vector<MomentAccumulator> acc(tau_grid.size(), MomentAccumulator(dim));
  std::vector<double> obs(dim);
  for (const auto& r : records) {
    if (!r.success) ++out.failures;
    for (const auto& s : r.samples) {
      std::size_t k = 0;
      for (const auto& lab : out.labels) {
        const auto& m = lab.is_variable() ? s.l_counts : s.r_counts;
        const auto it = m.find(lab.degree);
        obs[k++] = it == m.end() ? 0.0 : static_cast<double>(it->second);
      }
      acc[s.grid_index].add(obs);
    }
  }
  const double p = static_cast<double>(out.failures) / static_cast<double>(trials);
  out.block_error_rate = p;
  out.block_error_stderr = std::sqrt(p * (1.0 - p) / static_cast<double>(trials));

  const double xi = static_cast<double>(cnt.xi);
  for (std::size_t g = 0; g < tau_grid.size(); ++g) {
    TauStatistics ts;
    ts.tau = tau_grid[g];
    ts.samples = acc[g].count();
    ts.mean.assign(dim, 0.0);
    ts.mean_stderr.assign(dim, 0.0);
    if (ts.samples > 0) {
      for (std::size_t i = 0; i < dim; ++i) ts.mean[i] = acc[g].mean()[i] / xi;
    }
    if (ts.samples >= 2) {
      CovarianceMatrix cov(out.labels, epsilon, std::nan(""));
      for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = i; j < dim; ++j) cov.set(i, j, acc[g].covariance(i, j) / xi);
        ts.mean_stderr[i] = std::sqrt(acc[g].covariance(i, i) / static_cast<double>(ts.samples)) / xi;
      }
      ts.covariance = std::move(cov);
    }
    out.tau_stats.push_back(std::move(ts));
  }
  if (options.keep_records) out.records = std::move(records);
  return out;
}

}  // namespace covevo
