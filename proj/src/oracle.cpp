#include "regionprove/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "regionprove/rng.hpp"

namespace regionprove {

namespace {

constexpr std::int64_t kMaxGridCells = 100000000;  // 1e8
constexpr std::int64_t kMcChunk = 65536;

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

// Runs `count_range(first, last)` over [0, total) split across threads and
// sums the returned counters.
std::int64_t parallel_count(std::int64_t total, int threads,
                            const std::function<std::int64_t(std::int64_t, std::int64_t)>& count_range) {
  const int workers = std::max(1, threads);
  if (workers == 1 || total < 2) return count_range(0, total);
  std::vector<std::int64_t> partial(static_cast<std::size_t>(workers), 0);
  std::vector<std::thread> pool;
  const std::int64_t chunk = (total + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const std::int64_t first = std::min<std::int64_t>(total, w * chunk);
    const std::int64_t last = std::min<std::int64_t>(total, first + chunk);
    pool.emplace_back([&, w, first, last] { partial[static_cast<std::size_t>(w)] = count_range(first, last); });
  }
  for (auto& t : pool) t.join();
  std::int64_t sum = 0;
  for (std::int64_t p : partial) sum += p;
  return sum;
}

}  // namespace

const char* to_string(OracleMethod method) {
  return method == OracleMethod::Grid ? "grid" : "mc";
}

OracleReport grid_safe_rate(const AugmentedNetwork& net, const Hyperrectangle& region,
                            std::int64_t cells_per_dim, int threads) {
  using clock = std::chrono::steady_clock;
  const auto t_start = clock::now();
  require(cells_per_dim >= 1, "cells_per_dim must be >= 1");
  region.validate();
  require(static_cast<Eigen::Index>(region.dim()) == net.input_dim(),
          "region dimension mismatches network input");

  const std::size_t d = region.dim();
  std::int64_t total = 1;
  for (std::size_t i = 0; i < d; ++i) {
    if (total > kMaxGridCells / cells_per_dim)
      throw std::invalid_argument("grid oracle refused: more than 1e8 cells requested");
    total *= cells_per_dim;
  }

  const std::int64_t safe_count = parallel_count(
      total, threads, [&](std::int64_t first, std::int64_t last) -> std::int64_t {
        ForwardWorkspace ws = net.make_workspace();
        Eigen::VectorXd x(static_cast<Eigen::Index>(d));
        std::int64_t count = 0;
        for (std::int64_t cell = first; cell < last; ++cell) {
          std::int64_t rest = cell;
          for (std::size_t i = 0; i < d; ++i) {
            const std::int64_t idx = rest % cells_per_dim;
            rest /= cells_per_dim;
            x(static_cast<Eigen::Index>(i)) =
                region.lower[i] +
                (static_cast<double>(idx) + 0.5) * region.side(i) / static_cast<double>(cells_per_dim);
          }
          if (net.evaluate_with(ws, x.data(), x.size()) >= 0.0) ++count;
        }
        return count;
      });

  OracleReport report;
  report.method = OracleMethod::Grid;
  report.samples_or_cells = total;
  report.safe_rate = static_cast<double>(safe_count) / static_cast<double>(total);
  report.violation_rate = 1.0 - report.safe_rate;
  report.wall_time_s = std::chrono::duration<double>(clock::now() - t_start).count();
  return report;
}

OracleReport mc_safe_rate(const AugmentedNetwork& net, const Hyperrectangle& region,
                          std::int64_t samples, std::uint64_t seed, int threads) {
  using clock = std::chrono::steady_clock;
  const auto t_start = clock::now();
  require(samples >= 1, "sample count must be >= 1");
  region.validate();
  require(static_cast<Eigen::Index>(region.dim()) == net.input_dim(),
          "region dimension mismatches network input");

  const std::size_t d = region.dim();
  const std::int64_t chunks = (samples + kMcChunk - 1) / kMcChunk;

  const std::int64_t safe_count = parallel_count(
      chunks, threads, [&](std::int64_t first, std::int64_t last) -> std::int64_t {
        ForwardWorkspace ws = net.make_workspace();
        Eigen::VectorXd x(static_cast<Eigen::Index>(d));
        std::int64_t count = 0;
        for (std::int64_t chunk = first; chunk < last; ++chunk) {
          SplitMix64 rng(mix_seed(seed, static_cast<std::uint64_t>(chunk)));
          const std::int64_t chunk_size = std::min(kMcChunk, samples - chunk * kMcChunk);
          for (std::int64_t s = 0; s < chunk_size; ++s) {
            for (std::size_t i = 0; i < d; ++i)
              x(static_cast<Eigen::Index>(i)) = rng.next_in(region.lower[i], region.upper[i]);
            if (net.evaluate_with(ws, x.data(), x.size()) >= 0.0) ++count;
          }
        }
        return count;
      });

  OracleReport report;
  report.method = OracleMethod::MonteCarlo;
  report.samples_or_cells = samples;
  report.safe_rate = static_cast<double>(safe_count) / static_cast<double>(samples);
  report.violation_rate = 1.0 - report.safe_rate;
  report.wall_time_s = std::chrono::duration<double>(clock::now() - t_start).count();
  return report;
}

double region_violation_fraction(const AugmentedNetwork& net, const Hyperrectangle& region,
                                 std::int64_t cells_per_dim, int threads) {
  return grid_safe_rate(net, region, cells_per_dim, threads).violation_rate;
}

}  // namespace regionprove
