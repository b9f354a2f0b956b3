#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "regionprove/geometry.hpp"
#include "regionprove/network.hpp"
#include "regionprove/rng.hpp"
#include "regionprove/tolerance.hpp"

namespace regionprove {

// Split heuristics:
//   H1 largest side, median of the safe samples' coordinates
//   H2 largest side, mean of the safe samples' coordinates
//   H3 random dimension, median
//   H4 random dimension, mean
//   H5 dimension and position that best separate safe from violation
//      samples (fewest points on the wrong side)
enum class Heuristic { H1, H2, H3, H4, H5 };

Heuristic heuristic_from_string(std::string_view name);  // "h1".."h5"
const char* to_string(Heuristic h);

struct EngineConfig {
  ToleranceParams tolerance;
  Heuristic heuristic = Heuristic::H5;
  int max_splits = 18;                 // refinement depth cap
  std::optional<double> min_side_eps;  // optional absolute side-length stop
  std::uint64_t master_seed = 0;
  double min_split_fraction = 0.05;    // beta: split point clamped to [beta, 1-beta] of the side
  int threads = 1;
  std::optional<double> time_limit_s;  // run_eprove throws TimeoutError past this
};

// Sampled under-estimate [lo, hi] of the reachable y* interval over a
// region; the sample points are kept (one per column) for the split
// heuristics, partitioned by the sign of y*.
struct ReachableEstimate {
  double lo = 0.0;
  double hi = 0.0;
  Eigen::MatrixXd safe_points;       // y* >= 0
  Eigen::VectorXd safe_values;
  Eigen::MatrixXd violation_points;  // y* < 0
  Eigen::VectorXd violation_values;

  Eigen::Index sample_count() const { return safe_values.size() + violation_values.size(); }
};

// Builds the estimate from caller-provided points (tests inject fixture
// samples here). Points are columns of `points`.
ReachableEstimate estimate_from_points(const AugmentedNetwork& net, const Eigen::MatrixXd& points);

// n i.i.d. uniform samples from `region` drawn from the SplitMix64 stream
// seeded with `seed` (per point, per dimension). Bitwise reproducible.
ReachableEstimate compute_reachable_set(const AugmentedNetwork& net, const Hyperrectangle& region,
                                        std::int64_t n, std::uint64_t seed);

// Unsafe iff hi < 0, Safe iff lo >= 0, Unknown otherwise.
RegionKind classify_region(const ReachableEstimate& estimate);

struct SplitChoice {
  std::size_t dim = 0;
  double at = 0.0;
};

// `rng` drives only the random dimension choice of H3/H4. The returned
// position is clamped into [lower + beta*side, upper - beta*side].
SplitChoice choose_split(const Hyperrectangle& region, const ReachableEstimate& estimate,
                         Heuristic heuristic, double beta, SplitMix64& rng);

struct ClassifiedRegion {
  Hyperrectangle box;
  int depth = 0;           // splits from the root domain
  std::uint64_t seed = 0;  // sample-stream seed; compute_reachable_set(net, box, n, seed)
                           // reproduces the exact samples that classified the region

  bool operator==(const ClassifiedRegion&) const = default;
};

struct VerificationOutcome {
  std::vector<ClassifiedRegion> safe;
  std::vector<ClassifiedRegion> unsafe;
  std::vector<ClassifiedRegion> unknown;
  SafetyProperty property;
  ToleranceParams params;
  double safe_rate = 0.0;
  double unsafe_rate = 0.0;
  double unknown_rate = 0.0;
  double confidence_per_region = 0.0;     // 1 - rate^n
  double confidence_joint_achieved = 0.0; // joint over max(|safe|, |unsafe|, 1) regions
  double wall_time_s = 0.0;

  RegionSet safe_set() const;
  RegionSet unsafe_set() const;
  RegionSet unknown_set() const;
  const std::vector<ClassifiedRegion>& regions(RegionKind kind) const;
};

// The refinement loop: pops a region, samples it, classifies it by the
// sign of the estimated reachable interval, splits Unknown regions until
// the depth cap (or optional side-length floor) is reached. Residual
// unknown regions are reported, never counted as safe. Per-region sample
// seeds derive from the master seed and the split path, so the outcome is
// identical for any thread count and work order.
VerificationOutcome run_eprove(const Network& net, const SafetyProperty& prop,
                               const EngineConfig& config);

struct AuditReport {
  std::vector<double> violation_fractions;  // one per outcome.safe entry, same order
  double threshold = 0.0;                   // 1 - rate
  std::size_t exceed_count = 0;
};

// Runs `violation_fraction` on every safe region and counts how many
// exceed 1 - rate. Oracle exceptions propagate.
AuditReport audit_safe_regions(const VerificationOutcome& outcome,
                               const std::function<double(const Hyperrectangle&)>& violation_fraction);

}  // namespace regionprove
