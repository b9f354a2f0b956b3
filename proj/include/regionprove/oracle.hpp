#pragma once

#include <cstdint>

#include "regionprove/geometry.hpp"
#include "regionprove/network.hpp"

namespace regionprove {

enum class OracleMethod { Grid, MonteCarlo };

const char* to_string(OracleMethod method);

struct OracleReport {
  double safe_rate = 0.0;
  double violation_rate = 0.0;
  std::int64_t samples_or_cells = 0;
  OracleMethod method = OracleMethod::Grid;
  double wall_time_s = 0.0;
};

// Evaluates y* at the center of every cell of the uniform
// cells_per_dim^d grid over `region`; safe_rate is the fraction with
// y* >= 0. Refuses grids beyond 1e8 cells. `threads` splits the index
// range; the counts are integers, so the result does not depend on it.
OracleReport grid_safe_rate(const AugmentedNetwork& net, const Hyperrectangle& region,
                            std::int64_t cells_per_dim, int threads = 1);

// Uniform i.i.d. sampling over `region`; deterministic for a fixed seed
// independent of the thread count (samples are drawn in fixed-size chunks
// with seeds derived from chunk indices).
OracleReport mc_safe_rate(const AugmentedNetwork& net, const Hyperrectangle& region,
                          std::int64_t samples, std::uint64_t seed, int threads = 1);

// 1 - grid safe rate restricted to `region`.
double region_violation_fraction(const AugmentedNetwork& net, const Hyperrectangle& region,
                                 std::int64_t cells_per_dim, int threads = 1);

}  // namespace regionprove
