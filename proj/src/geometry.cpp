#include "regionprove/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace regionprove {

namespace {
constexpr double kAlignRelTol = 1e-9;

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

// Index of the nearest multiple of eps if `value` is one within
// tolerance, otherwise NaN.
double aligned_index(double value, double eps) {
  const double q = value / eps;
  const double r = std::round(q);
  if (std::abs(q - r) <= kAlignRelTol * std::max(1.0, std::abs(q))) return r;
  return std::numeric_limits<double>::quiet_NaN();
}
}  // namespace

double Hyperrectangle::min_side() const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < dim(); ++i) m = std::min(m, side(i));
  return m;
}

void Hyperrectangle::validate() const {
  require(!lower.empty(), "hyperrectangle must have at least one dimension");
  require(lower.size() == upper.size(), "hyperrectangle bound arrays differ in length");
  for (std::size_t i = 0; i < lower.size(); ++i) {
    require(std::isfinite(lower[i]) && std::isfinite(upper[i]),
            "hyperrectangle bounds must be finite");
    require(lower[i] <= upper[i], "hyperrectangle lower bound exceeds upper bound");
  }
}

const char* to_string(RegionKind kind) {
  switch (kind) {
    case RegionKind::Safe: return "safe";
    case RegionKind::Unsafe: return "unsafe";
    case RegionKind::Unknown: return "unknown";
  }
  return "unknown";
}

double volume(const Hyperrectangle& box) {
  double v = 1.0;
  for (std::size_t i = 0; i < box.dim(); ++i) v *= box.side(i);
  return v;
}

std::pair<Hyperrectangle, Hyperrectangle> split(const Hyperrectangle& box,
                                                std::size_t dim, double at) {
  require(dim < box.dim(), "split dimension out of range");
  require(box.lower[dim] < at && at < box.upper[dim],
          "split point must lie strictly inside the side");
  Hyperrectangle left = box;
  Hyperrectangle right = box;
  left.upper[dim] = at;
  right.lower[dim] = at;
  return {std::move(left), std::move(right)};
}

bool is_eps_bounded(const Hyperrectangle& box, double eps) {
  require(eps > 0, "eps must be positive");
  for (std::size_t i = 0; i < box.dim(); ++i)
    if (box.side(i) < eps) return false;
  return true;
}

bool is_eps_aligned(const Hyperrectangle& box, double eps) {
  require(eps > 0, "eps must be positive");
  for (std::size_t i = 0; i < box.dim(); ++i) {
    if (std::isnan(aligned_index(box.lower[i], eps))) return false;
    if (std::isnan(aligned_index(box.upper[i], eps))) return false;
  }
  return true;
}

std::optional<Hyperrectangle> eps_align_shrink(const Hyperrectangle& box, double eps) {
  require(eps > 0, "eps must be positive");
  Hyperrectangle out = box;
  for (std::size_t i = 0; i < box.dim(); ++i) {
    double lo_idx = aligned_index(box.lower[i], eps);
    if (std::isnan(lo_idx)) lo_idx = std::ceil(box.lower[i] / eps);
    double hi_idx = aligned_index(box.upper[i], eps);
    if (std::isnan(hi_idx)) hi_idx = std::floor(box.upper[i] / eps);
    if (!(lo_idx < hi_idx)) return std::nullopt;  // dimension collapsed
    out.lower[i] = lo_idx * eps;
    out.upper[i] = hi_idx * eps;
  }
  return out;
}

double total_volume(const RegionSet& set) {
  double v = 0.0;
  for (const auto& r : set.regions) v += volume(r);
  return v;
}

bool bounds_less(const Hyperrectangle& a, const Hyperrectangle& b) {
  if (a.lower != b.lower) return a.lower < b.lower;
  return a.upper < b.upper;
}

}  // namespace regionprove
