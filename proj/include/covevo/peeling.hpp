#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "covevo/covariance.hpp"
#include "covevo/ensemble.hpp"

namespace covevo {

/// splitmix64 finalizer; used to derive independent per-trial seeds.
std::uint64_t mix64(std::uint64_t v) noexcept;

/// Seed for trial `trial_id`: mix64(base_seed ^ mix64(trial_id)). Stable across releases.
std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t trial_id) noexcept;

/// mt19937_64 plus portable uniform draws (std distributions are
/// implementation-defined, these are not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next() { return engine_(); }
  /// Uniform integer in [0, bound), Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t bound);
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

 private:
  std::mt19937_64 engine_;
};

/// Configuration-model Tanner graph: variable socket s is wired to check
/// socket pairing[s]. Multi-edges are allowed.
struct TannerGraph {
  std::vector<int> variable_degree;
  std::vector<int> check_degree;
  std::vector<std::int64_t> variable_offset;  // CSR over variable sockets, size nv + 1
  std::vector<std::int64_t> check_offset;     // CSR over check sockets, size nc + 1
  std::vector<std::int64_t> pairing;          // variable socket -> check socket
  std::vector<std::int32_t> socket_check;     // check socket -> check node

  std::int64_t edge_count() const { return static_cast<std::int64_t>(pairing.size()); }
  std::int32_t check_of_variable_socket(std::int64_t s) const { return socket_check[pairing[s]]; }
};

/// Node counts from counts(ens); uniform socket permutation by Fisher-Yates.
TannerGraph sample_graph(const Ensemble& ens, std::uint64_t seed);
TannerGraph sample_graph(const EnsembleCounts& counts, std::uint64_t seed);

struct TrajectorySample {
  std::size_t grid_index = 0;
  double tau = 0.0;         // the grid value
  std::int64_t t = 0;       // iteration at which the state was recorded
  bool halted = false;      // recorded after the decoder stopped short of this grid point
  std::map<int, std::int64_t> r_counts;  // residual check degree j -> edges, j = 1..d_c
  std::map<int, std::int64_t> l_counts;  // variable degree k -> edges
};

struct TrajectoryRecord {
  std::uint64_t trial_id = 0;
  std::uint64_t seed = 0;
  std::vector<TrajectorySample> samples;
  bool success = false;
  std::int64_t residual_at_halt = 0;  // edges
  std::int64_t iterations = 0;
};

/// Peeling decoder over BEC(epsilon). The state is recorded at the first
/// iteration t with t / xi >= tau_grid[g]; if decoding halts before a grid
/// point, the halted state is recorded once for it and later points are
/// absent. `edge_trace`, when given, receives the residual edge total after
/// initialization and after every iteration.
TrajectoryRecord peel(const TannerGraph& graph, double epsilon, std::uint64_t seed, const std::vector<double>& tau_grid,
                      std::vector<std::int64_t>* edge_trace = nullptr);

/// Running mean and co-moment matrix with an associative merge.
class MomentAccumulator {
 public:
  explicit MomentAccumulator(std::size_t dim = 0) : mean_(dim, 0.0), comoment_(dim * dim, 0.0) {}
  void add(const std::vector<double>& x);
  void merge(const MomentAccumulator& other);
  std::int64_t count() const noexcept { return count_; }
  const std::vector<double>& mean() const noexcept { return mean_; }
  /// Unbiased sample covariance (i, j); requires count >= 2.
  double covariance(std::size_t i, std::size_t j) const;

 private:
  std::int64_t count_ = 0;
  std::vector<double> mean_;
  std::vector<double> comoment_;
};

struct TauStatistics {
  double tau = 0.0;
  std::int64_t samples = 0;
  std::vector<double> mean;         // E[X] / xi over SimSummary::labels
  std::vector<double> mean_stderr;  // standard error of mean
  std::optional<CovarianceMatrix> covariance;  // Cov[X,Y] / xi, absent with < 2 samples
};

struct SimSummary {
  std::int64_t trials = 0;
  std::int64_t failures = 0;
  double block_error_rate = 0.0;
  double block_error_stderr = 0.0;
  std::int64_t xi = 0;
  std::vector<Label> labels;  // l_k for k in L, then r_1 .. r_{d_c}
  std::vector<TauStatistics> tau_stats;
  std::vector<TrajectoryRecord> records;  // filled only with SimOptions::keep_records
};

struct SimOptions {
  unsigned threads = 1;  // 0 = hardware concurrency
  bool keep_records = false;
};

/// Runs `trials` independent (graph, channel) draws. Trial i uses
/// trial_seed(base_seed, i) for the graph and mix64 of it for the channel.
/// Results are identical for any thread count.
SimSummary simulate(const Ensemble& ens, double epsilon, std::int64_t trials, std::uint64_t base_seed,
                    const std::vector<double>& tau_grid, const SimOptions& options = {});

}  // namespace covevo
