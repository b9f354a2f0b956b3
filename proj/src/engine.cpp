#include "regionprove/engine.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>

namespace regionprove {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

// Fixed tags separating the derived streams so a region's sample stream,
// its split stream and its children never alias.
constexpr std::uint64_t kRootTag = 0x726f6f74;
constexpr std::uint64_t kSplitStreamTag = 0x73706c69;
constexpr std::uint64_t kLeftChildTag = 1;
constexpr std::uint64_t kRightChildTag = 2;

ReachableEstimate estimate_with_workspace(const AugmentedNetwork& net, ForwardWorkspace& ws,
                                          const Eigen::MatrixXd& points) {
  require(points.cols() >= 1, "estimate needs at least one sample point");
  require(points.rows() == net.input_dim(), "sample dimension mismatches network input");
  const Eigen::Index n = points.cols();
  Eigen::VectorXd values(n);
  for (Eigen::Index c = 0; c < n; ++c)
    values(c) = net.evaluate_with(ws, points.col(c).data(), points.rows());

  ReachableEstimate est;
  est.lo = values.minCoeff();
  est.hi = values.maxCoeff();
  const Eigen::Index safe_count = (values.array() >= 0.0).count();
  est.safe_points.resize(points.rows(), safe_count);
  est.safe_values.resize(safe_count);
  est.violation_points.resize(points.rows(), n - safe_count);
  est.violation_values.resize(n - safe_count);
  Eigen::Index si = 0;
  Eigen::Index vi = 0;
  for (Eigen::Index c = 0; c < n; ++c) {
    if (values(c) >= 0.0) {
      est.safe_points.col(si) = points.col(c);
      est.safe_values(si++) = values(c);
    } else {
      est.violation_points.col(vi) = points.col(c);
      est.violation_values(vi++) = values(c);
    }
  }
  // lo < 0 iff some sample violated; Unknown with an empty violation set
  // is impossible by construction.
  assert((est.lo < 0.0) == (est.violation_values.size() > 0));
  return est;
}

Eigen::MatrixXd sample_points(const Hyperrectangle& region, std::int64_t n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  const Eigen::Index d = static_cast<Eigen::Index>(region.dim());
  Eigen::MatrixXd points(d, n);
  for (Eigen::Index c = 0; c < n; ++c)
    for (Eigen::Index i = 0; i < d; ++i)
      points(i, c) = rng.next_in(region.lower[static_cast<std::size_t>(i)],
                                 region.upper[static_cast<std::size_t>(i)]);
  return points;
}

std::size_t argmax_side(const Hyperrectangle& region) {
  std::size_t best = 0;
  double best_side = region.side(0);
  for (std::size_t i = 1; i < region.dim(); ++i) {
    if (region.side(i) > best_side) {
      best_side = region.side(i);
      best = i;
    }
  }
  return best;
}

double median_inplace(std::vector<double>& values) {
  const std::size_t n = values.size();
  auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (n % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(values.begin(), mid);
  return lo + (hi - lo) / 2.0;
}

}  // namespace

Heuristic heuristic_from_string(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "h1") return Heuristic::H1;
  if (lower == "h2") return Heuristic::H2;
  if (lower == "h3") return Heuristic::H3;
  if (lower == "h4") return Heuristic::H4;
  if (lower == "h5") return Heuristic::H5;
  throw std::invalid_argument("unknown heuristic '" + std::string(name) + "' (expected h1..h5)");
}

const char* to_string(Heuristic h) {
  switch (h) {
    case Heuristic::H1: return "h1";
    case Heuristic::H2: return "h2";
    case Heuristic::H3: return "h3";
    case Heuristic::H4: return "h4";
    case Heuristic::H5: return "h5";
  }
  return "h5";
}

ReachableEstimate estimate_from_points(const AugmentedNetwork& net, const Eigen::MatrixXd& points) {
  ForwardWorkspace ws = net.make_workspace();
  return estimate_with_workspace(net, ws, points);
}

ReachableEstimate compute_reachable_set(const AugmentedNetwork& net, const Hyperrectangle& region,
                                        std::int64_t n, std::uint64_t seed) {
  require(n >= 1, "sample count must be >= 1");
  region.validate();
  require(static_cast<Eigen::Index>(region.dim()) == net.input_dim(),
          "region dimension mismatches network input");
  ForwardWorkspace ws = net.make_workspace();
  return estimate_with_workspace(net, ws, sample_points(region, n, seed));
}

RegionKind classify_region(const ReachableEstimate& estimate) {
  if (estimate.hi < 0.0) return RegionKind::Unsafe;
  if (estimate.lo >= 0.0) return RegionKind::Safe;
  return RegionKind::Unknown;
}

SplitChoice choose_split(const Hyperrectangle& region, const ReachableEstimate& estimate,
                         Heuristic heuristic, double beta, SplitMix64& rng) {
  const std::size_t d = region.dim();
  require(d >= 1, "region must have at least one dimension");
  require(beta > 0.0 && beta <= 0.5, "beta must lie in (0, 0.5]");

  auto clamp_at = [&](std::size_t dim, double at) {
    const double lo = region.lower[dim];
    const double hi = region.upper[dim];
    const double side = hi - lo;
    if (!(side > 0.0)) throw std::invalid_argument("choose_split: zero-width region side");
    return std::min(std::max(at, lo + beta * side), hi - beta * side);
  };
  auto midpoint = [&](std::size_t dim) { return region.lower[dim] + 0.5 * region.side(dim); };

  const Eigen::Index safe_count = estimate.safe_values.size();
  auto safe_stat = [&](std::size_t dim, bool use_mean) {
    if (safe_count == 0) return midpoint(dim);
    const auto row = estimate.safe_points.row(static_cast<Eigen::Index>(dim));
    if (use_mean) return row.mean();
    std::vector<double> coords(static_cast<std::size_t>(safe_count));
    for (Eigen::Index c = 0; c < safe_count; ++c) coords[static_cast<std::size_t>(c)] = row(c);
    return median_inplace(coords);
  };

  switch (heuristic) {
    case Heuristic::H1: {
      const std::size_t dim = argmax_side(region);
      return {dim, clamp_at(dim, safe_stat(dim, false))};
    }
    case Heuristic::H2: {
      const std::size_t dim = argmax_side(region);
      return {dim, clamp_at(dim, safe_stat(dim, true))};
    }
    case Heuristic::H3: {
      const std::size_t dim = rng.next_below(static_cast<std::uint32_t>(d));
      return {dim, clamp_at(dim, safe_stat(dim, false))};
    }
    case Heuristic::H4: {
      const std::size_t dim = rng.next_below(static_cast<std::uint32_t>(d));
      return {dim, clamp_at(dim, safe_stat(dim, true))};
    }
    case Heuristic::H5: break;
  }

  // H5: for each dimension try the extreme coordinates of the safe
  // samples, score by the misclassification count under the better of the
  // two side labelings, keep the first minimum (ties resolve to the
  // lowest dimension and to max-of-safe before min-of-safe). A candidate
  // counts as dividing the classes only if it beats labeling the whole
  // region with its majority class; when none does (the violations sit in
  // the interior of every dimension), the cut would shave a thin slice
  // without separating anything, so fall back to the largest-side median
  // split to keep the refinement contracting.
  const Eigen::Index violation_count = estimate.violation_values.size();
  const long trivial_score =
      static_cast<long>(std::min<Eigen::Index>(safe_count, violation_count));
  bool found = false;
  long best_score = 0;
  SplitChoice best;
  if (safe_count > 0 && violation_count > 0) {
    for (std::size_t dim = 0; dim < d; ++dim) {
      if (!(region.side(dim) > 0.0)) continue;
      const auto safe_row = estimate.safe_points.row(static_cast<Eigen::Index>(dim));
      const auto violation_row = estimate.violation_points.row(static_cast<Eigen::Index>(dim));
      const double candidates[2] = {safe_row.maxCoeff(), safe_row.minCoeff()};
      for (double candidate : candidates) {
        const double at = clamp_at(dim, candidate);
        const long safe_le = (safe_row.array() <= at).count();
        const long violation_le = (violation_row.array() <= at).count();
        const long safe_gt = static_cast<long>(safe_count) - safe_le;
        const long violation_gt = static_cast<long>(violation_count) - violation_le;
        const long score = std::min(violation_le + safe_gt, safe_le + violation_gt);
        if (!found || score < best_score) {
          found = true;
          best_score = score;
          best = {dim, at};
        }
      }
    }
  }
  if (!found || best_score * 2 >= trivial_score) {
    const std::size_t dim = argmax_side(region);
    return {dim, clamp_at(dim, safe_stat(dim, false))};
  }
  return best;
}

RegionSet VerificationOutcome::safe_set() const {
  RegionSet set;
  set.label = RegionKind::Safe;
  for (const auto& r : safe) set.regions.push_back(r.box);
  return set;
}

RegionSet VerificationOutcome::unsafe_set() const {
  RegionSet set;
  set.label = RegionKind::Unsafe;
  for (const auto& r : unsafe) set.regions.push_back(r.box);
  return set;
}

RegionSet VerificationOutcome::unknown_set() const {
  RegionSet set;
  set.label = RegionKind::Unknown;
  for (const auto& r : unknown) set.regions.push_back(r.box);
  return set;
}

const std::vector<ClassifiedRegion>& VerificationOutcome::regions(RegionKind kind) const {
  switch (kind) {
    case RegionKind::Safe: return safe;
    case RegionKind::Unsafe: return unsafe;
    case RegionKind::Unknown: return unknown;
  }
  return unknown;
}

VerificationOutcome run_eprove(const Network& net, const SafetyProperty& prop,
                               const EngineConfig& config) {
  using clock = std::chrono::steady_clock;
  const auto t_start = clock::now();

  prop.validate(net.output_dim());
  require(static_cast<Eigen::Index>(prop.domain.dim()) == net.input_dim(),
          "property domain dimension mismatches network input");
  config.tolerance.validate();
  require(config.max_splits >= 0, "max_splits must be >= 0");
  require(config.min_split_fraction > 0.0 && config.min_split_fraction <= 0.5,
          "min_split_fraction must lie in (0, 0.5]");
  if (config.min_side_eps) require(*config.min_side_eps > 0.0, "min_side_eps must be positive");
  if (config.time_limit_s) require(*config.time_limit_s > 0.0, "time_limit_s must be positive");

  const AugmentedNetwork augmented = augment(net, prop);
  const std::int64_t n = config.tolerance.n;

  struct WorkItem {
    Hyperrectangle box;
    int depth = 0;
    std::uint64_t seed = 0;
  };

  std::vector<WorkItem> stack;
  stack.push_back({prop.domain, 0, mix_seed(config.master_seed, kRootTag)});

  std::vector<ClassifiedRegion> safe;
  std::vector<ClassifiedRegion> unsafe;
  std::vector<ClassifiedRegion> unknown;
  std::mutex mutex;
  std::condition_variable cv;
  int in_flight = 0;
  bool timed_out = false;
  std::exception_ptr failure;

  const std::optional<clock::time_point> deadline =
      config.time_limit_s
          ? std::optional(t_start + std::chrono::duration_cast<clock::duration>(
                                        std::chrono::duration<double>(*config.time_limit_s)))
          : std::nullopt;

  auto worker = [&]() {
    ForwardWorkspace ws = augmented.make_workspace();
    for (;;) {
      WorkItem item;
      {
        std::unique_lock<std::mutex> lock(mutex);
        cv.wait(lock, [&] { return !stack.empty() || in_flight == 0 || timed_out || failure; });
        if (timed_out || failure) return;
        if (stack.empty()) return;  // in_flight == 0: all work drained
        item = std::move(stack.back());
        stack.pop_back();
        ++in_flight;
      }
      try {
        if (deadline && clock::now() > *deadline) {
          std::lock_guard<std::mutex> lock(mutex);
          timed_out = true;
          cv.notify_all();
          return;
        }
        const ReachableEstimate estimate =
            estimate_with_workspace(augmented, ws, sample_points(item.box, n, item.seed));
        const RegionKind kind = classify_region(estimate);
        bool refine =
            kind == RegionKind::Unknown && item.depth < config.max_splits &&
            (!config.min_side_eps || item.box.min_side() >= *config.min_side_eps);
        SplitChoice choice;
        if (refine) {
          SplitMix64 split_rng(mix_seed(item.seed, kSplitStreamTag));
          choice = choose_split(item.box, estimate, config.heuristic,
                                config.min_split_fraction, split_rng);
          // A side this small has no representable interior point left;
          // the region is residual unknown.
          if (!(item.box.lower[choice.dim] < choice.at &&
                choice.at < item.box.upper[choice.dim]))
            refine = false;
        }
        if (!refine) {
          std::lock_guard<std::mutex> lock(mutex);
          auto& bucket = kind == RegionKind::Safe     ? safe
                         : kind == RegionKind::Unsafe ? unsafe
                                                      : unknown;
          bucket.push_back({std::move(item.box), item.depth, item.seed});
          --in_flight;
          cv.notify_all();
        } else {
          auto halves = split(item.box, choice.dim, choice.at);
          std::lock_guard<std::mutex> lock(mutex);
          stack.push_back(
              {std::move(halves.first), item.depth + 1, mix_seed(item.seed, kLeftChildTag)});
          stack.push_back(
              {std::move(halves.second), item.depth + 1, mix_seed(item.seed, kRightChildTag)});
          --in_flight;
          cv.notify_all();
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(mutex);
        failure = std::current_exception();
        cv.notify_all();
        return;
      }
    }
  };

  const int thread_count = std::max(1, config.threads);
  if (thread_count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(thread_count));
    for (int i = 0; i < thread_count; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  if (timed_out) throw TimeoutError("run_eprove exceeded the configured time limit");

  // Canonical region order; makes the outcome independent of scheduling.
  auto by_bounds = [](const ClassifiedRegion& a, const ClassifiedRegion& b) {
    return bounds_less(a.box, b.box);
  };
  std::sort(safe.begin(), safe.end(), by_bounds);
  std::sort(unsafe.begin(), unsafe.end(), by_bounds);
  std::sort(unknown.begin(), unknown.end(), by_bounds);

  VerificationOutcome out;
  out.safe = std::move(safe);
  out.unsafe = std::move(unsafe);
  out.unknown = std::move(unknown);
  out.property = prop;
  out.params = config.tolerance;

  const double domain_volume = volume(prop.domain);
  double safe_volume = 0.0;
  double unsafe_volume = 0.0;
  double unknown_volume = 0.0;
  for (const auto& r : out.safe) safe_volume += volume(r.box);
  for (const auto& r : out.unsafe) unsafe_volume += volume(r.box);
  for (const auto& r : out.unknown) unknown_volume += volume(r.box);
  const double covered = safe_volume + unsafe_volume + unknown_volume;
  if (std::abs(covered - domain_volume) > 1e-9 * domain_volume)
    throw std::logic_error("run_eprove: region volumes fail to partition the domain");
  out.safe_rate = safe_volume / domain_volume;
  out.unsafe_rate = unsafe_volume / domain_volume;
  out.unknown_rate = unknown_volume / domain_volume;

  const std::int64_t effective_m = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::max(out.safe.size(), out.unsafe.size())));
  out.confidence_per_region = confidence_single(n, config.tolerance.rate);
  out.confidence_joint_achieved = confidence_joint(n, config.tolerance.rate, effective_m);

  out.wall_time_s = std::chrono::duration<double>(clock::now() - t_start).count();
  return out;
}

AuditReport audit_safe_regions(
    const VerificationOutcome& outcome,
    const std::function<double(const Hyperrectangle&)>& violation_fraction) {
  AuditReport report;
  report.threshold = 1.0 - outcome.params.rate;
  report.violation_fractions.reserve(outcome.safe.size());
  for (const auto& region : outcome.safe) {
    const double fraction = violation_fraction(region.box);
    report.violation_fractions.push_back(fraction);
    if (fraction > report.threshold) ++report.exceed_count;
  }
  return report;
}

}  // namespace regionprove
