#pragma once

#include <cstdint>
#include <functional>

namespace regionprove {

// Statistical parameters of a verification run. `rate` is the per-region
// lower bound on the safe fraction of points, `alpha` the confidence that
// the bound holds jointly over at most `m` regions when every region is
// sampled with `n` points.
struct ToleranceParams {
  double alpha = 0.999;
  double rate = 0.995;
  std::int64_t n = 3500;
  std::int64_t m = 10000;

  // (1 - rate^n)^m >= alpha.
  bool consistent() const;
  // Throws std::invalid_argument on out-of-range fields or inconsistency.
  void validate() const;

  bool operator==(const ToleranceParams&) const = default;
};

// One-sided tolerance-limit confidence for a single region: 1 - rate^n.
// Computed in log space so values close to 1 keep their full precision.
double confidence_single(std::int64_t n, double rate);

// (1 - rate^n)^m: the single-region bound holding simultaneously for m
// regions sampled independently.
double confidence_joint(std::int64_t n, double rate, std::int64_t m);

// Smallest n with confidence_joint(n, rate, m) >= alpha. The analytic
// candidate ceil(ln(1 - alpha^(1/m)) / ln(rate)) is re-checked by direct
// evaluation on both sides of the integrality boundary.
std::int64_t required_sample_size(double alpha, double rate, std::int64_t m);

// Doubling estimation of the region-count bound: starting from m = 1,
// run the verification with n = required_sample_size(alpha, rate, m) and
// double m until the region count reported by `run` (callers pass
// max(#safe, #unsafe)) fits under the current m. Throws std::runtime_error
// once max_doublings is exceeded.
ToleranceParams doubling_m_schedule(double alpha, double rate,
                                    const std::function<std::int64_t(std::int64_t)>& run,
                                    int max_doublings = 30);

}  // namespace regionprove
