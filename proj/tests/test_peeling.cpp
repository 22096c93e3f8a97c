#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "covevo/evolution.hpp"
#include "covevo/peeling.hpp"
#include "support.hpp"

using namespace covevo;
using covevo::testing::mixed;
using covevo::testing::regular36;

namespace {

std::int64_t sum_values(const std::map<int, std::int64_t>& m) {
  std::int64_t s = 0;
  for (const auto& [k, v] : m) s += v;
  return s;
}

}  // namespace

TEST_CASE("seed mixing") {
  CHECK(mix64(0) == 0xe220a8397b1dcdafULL);
  CHECK(trial_seed(7, 3) == mix64(7 ^ mix64(3)));
  CHECK(trial_seed(7, 3) != trial_seed(7, 4));
}

TEST_CASE("bounded draws stay in range and look uniform") {
  Rng rng(42);
  std::vector<int> hist(6, 0);
  for (int i = 0; i < 60000; ++i) {
    const auto v = rng.below(6);
    REQUIRE(v < 6);
    ++hist[v];
  }
  for (int h : hist) CHECK(std::abs(h - 10000) < 500);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("sampled graph has exact degrees") {
  const auto g = sample_graph(regular36(1200), 11);
  CHECK(g.edge_count() == 3600);
  CHECK(g.variable_degree.size() == 1200);
  CHECK(g.check_degree.size() == 600);
  CHECK(std::all_of(g.variable_degree.begin(), g.variable_degree.end(), [](int d) { return d == 3; }));
  CHECK(std::all_of(g.check_degree.begin(), g.check_degree.end(), [](int d) { return d == 6; }));
  std::vector<std::int64_t> sorted = g.pairing;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::int64_t> iota(sorted.size());
  std::iota(iota.begin(), iota.end(), 0);
  CHECK(sorted == iota);
  std::vector<int> seen(g.check_degree.size(), 0);
  for (std::int64_t s = 0; s < g.edge_count(); ++s) ++seen[g.check_of_variable_socket(s)];
  CHECK(seen == g.check_degree);
}

TEST_CASE("irregular graph follows counts") {
  const Ensemble ens = mixed(1000);
  const auto c = counts(ens);
  const auto g = sample_graph(c, 5);
  CHECK(g.edge_count() == c.xi);
  std::map<int, std::int64_t> vd, cd;
  for (int d : g.variable_degree) ++vd[d];
  for (int d : g.check_degree) ++cd[d];
  CHECK(vd == c.variables_by_degree);
  CHECK(cd == c.checks_by_degree);
}

TEST_CASE("graph sampling is deterministic per seed") {
  const Ensemble ens = regular36(600);
  CHECK(sample_graph(ens, 99).pairing == sample_graph(ens, 99).pairing);
  for (std::uint64_t s = 0; s < 10; ++s) CHECK(sample_graph(ens, 2 * s).pairing != sample_graph(ens, 2 * s + 1).pairing);
}

TEST_CASE("no erasures decodes immediately") {
  const auto g = sample_graph(regular36(600), 1);
  const auto rec = peel(g, 0.0, 2, {0.0, 0.01});
  CHECK(rec.success);
  CHECK(rec.iterations == 0);
  CHECK(rec.residual_at_halt == 0);
}

TEST_CASE("full erasure halts at once") {
  const auto g = sample_graph(regular36(600), 1);
  const auto rec = peel(g, 1.0, 2, {0.0, 0.01});
  CHECK_FALSE(rec.success);
  CHECK(rec.iterations == 0);
  CHECK(rec.residual_at_halt == 1800);
  REQUIRE(rec.samples.size() == 2);
  CHECK_FALSE(rec.samples[0].halted);
  CHECK(rec.samples[1].halted);
  CHECK(rec.samples[0].r_counts.at(6) == 1800);
  CHECK(rec.samples[0].r_counts.at(1) == 0);
}

TEST_CASE("residual edges are conserved and shrink monotonically") {
  const Ensemble ens = mixed(2000);
  const auto g = sample_graph(ens, 17);
  std::vector<std::int64_t> trace;
  const std::vector<double> grid{0.0, 0.02, 0.05, 0.1, 0.15, 0.2};
  const auto rec = peel(g, 0.45, 23, grid, &trace);
  REQUIRE_FALSE(trace.empty());
  CHECK(static_cast<std::int64_t>(trace.size()) == rec.iterations + 1);
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] < trace[i - 1]);
  CHECK(trace.back() == rec.residual_at_halt);
  for (const auto& s : rec.samples) {
    CHECK(sum_values(s.r_counts) == sum_values(s.l_counts));
    CHECK(std::find(grid.begin(), grid.end(), s.tau) != grid.end());
    CHECK(s.grid_index < grid.size());
  }
  CHECK(rec.samples.size() <= grid.size());
}

TEST_CASE("peeling is deterministic") {
  const auto g = sample_graph(regular36(2000), 3);
  const auto a = peel(g, 0.42, 8, {0.01, 0.05});
  const auto b = peel(g, 0.42, 8, {0.01, 0.05});
  CHECK(a.iterations == b.iterations);
  CHECK(a.success == b.success);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(a.samples[i].r_counts == b.samples[i].r_counts);
    CHECK(a.samples[i].l_counts == b.samples[i].l_counts);
  }
}

TEST_CASE("single trial summary") {
  SimOptions opt;
  opt.keep_records = true;
  const auto s = simulate(regular36(1000), 0.4, 1, 5, {0.02}, opt);
  CHECK(s.trials == 1);
  REQUIRE(s.records.size() == 1);
  REQUIRE(s.tau_stats.size() == 1);
  const auto& st = s.tau_stats[0];
  CHECK(st.samples == 1);
  CHECK_FALSE(st.covariance.has_value());
  const auto& sample = s.records[0].samples.at(0);
  CHECK(st.mean[0] == doctest::Approx(sample.l_counts.at(3) / static_cast<double>(s.xi)));
  CHECK(st.mean[1] == doctest::Approx(sample.r_counts.at(1) / static_cast<double>(s.xi)));
}

TEST_CASE("thread count does not change results") {
  const std::vector<double> grid{0.02, 0.05};
  SimOptions one, many;
  many.threads = 4;
  const auto a = simulate(regular36(1000), 0.42, 40, 77, grid, one);
  const auto b = simulate(regular36(1000), 0.42, 40, 77, grid, many);
  CHECK(a.failures == b.failures);
  REQUIRE(a.tau_stats.size() == b.tau_stats.size());
  for (std::size_t i = 0; i < a.tau_stats.size(); ++i) {
    CHECK(a.tau_stats[i].mean == b.tau_stats[i].mean);
    CHECK(a.tau_stats[i].covariance->max_abs_difference(*b.tau_stats[i].covariance) == 0.0);
  }
}

TEST_CASE("moment merge matches a single pass") {
  MomentAccumulator whole(2), left(2), right(2);
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const std::vector<double> v{rng.uniform(), rng.uniform() * 3.0};
    whole.add(v);
    (i < 70 ? left : right).add(v);
  }
  left.merge(right);
  CHECK(left.count() == whole.count());
  CHECK(left.mean()[1] == doctest::Approx(whole.mean()[1]).epsilon(1e-13));
  CHECK(left.covariance(0, 1) == doctest::Approx(whole.covariance(0, 1)).epsilon(1e-12));
  CHECK(left.covariance(1, 1) == doctest::Approx(whole.covariance(1, 1)).epsilon(1e-12));
}

TEST_CASE("empirical mean of r1 tracks the closed form") {
  const Ensemble ens = regular36(20000);
  SimOptions opt;
  opt.threads = 0;
  const auto s = simulate(ens, 0.40, 200, 2024, {0.05}, opt);
  const auto& st = s.tau_stats.at(0);
  const double y = y_of_tau(ens, 0.40, 0.05);
  CHECK(std::fabs(st.mean[1] - mean_r1(ens, 0.40, y)) <= 3.0 * st.mean_stderr[1]);
  CHECK(s.block_error_rate == 0.0);
}
