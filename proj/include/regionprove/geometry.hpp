#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace regionprove {

// Axis-aligned box over the input space, bounds in property-domain units.
struct Hyperrectangle {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t dim() const { return lower.size(); }
  double side(std::size_t i) const { return upper[i] - lower[i]; }
  double min_side() const;

  // Throws std::invalid_argument unless bounds are finite, equally sized
  // and lower[i] <= upper[i] everywhere.
  void validate() const;

  bool operator==(const Hyperrectangle& other) const = default;
};

enum class RegionKind { Safe, Unsafe, Unknown };

const char* to_string(RegionKind kind);

struct RegionSet {
  std::vector<Hyperrectangle> regions;
  RegionKind label = RegionKind::Unknown;
};

double volume(const Hyperrectangle& box);

// Cuts `box` along `dim`; `at` must lie strictly inside the side, callers
// clamp before asking. The two halves partition the box.
std::pair<Hyperrectangle, Hyperrectangle> split(const Hyperrectangle& box,
                                                std::size_t dim, double at);

// Every side has length >= eps (closed comparison).
bool is_eps_bounded(const Hyperrectangle& box, double eps);

// Every bound is an integer multiple of eps, within 1e-9 relative
// tolerance. Binary halving of [0,1]^d gives exactly representable
// bounds, so the tolerance only matters for user-supplied boxes.
bool is_eps_aligned(const Hyperrectangle& box, double eps);

// Largest eps-aligned box contained in `box`: lower bounds round up,
// upper bounds round down to multiples of eps. Empty when some dimension
// has no aligned slab of positive width left. For a k*eps-bounded input
// with integer k >= 3, volume(result) >= ((k-2)/k)^d * volume(box).
std::optional<Hyperrectangle> eps_align_shrink(const Hyperrectangle& box, double eps);

// Sum of member volumes; members are assumed interior-disjoint.
double total_volume(const RegionSet& set);

// Lexicographic (lower, upper) order; total on interior-disjoint boxes.
bool bounds_less(const Hyperrectangle& a, const Hyperrectangle& b);

}  // namespace regionprove
