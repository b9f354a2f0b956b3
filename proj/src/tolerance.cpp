#include "regionprove/tolerance.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace regionprove {

namespace {
void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

void check_inputs(double alpha, double rate, std::int64_t m) {
  require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
  require(rate > 0.0 && rate < 1.0, "rate must lie in (0, 1)");
  require(m >= 1, "m must be >= 1");
}
}  // namespace

bool ToleranceParams::consistent() const {
  return confidence_joint(n, rate, m) >= alpha;
}

void ToleranceParams::validate() const {
  check_inputs(alpha, rate, m);
  require(n >= 1, "n must be >= 1");
  if (!consistent())
    throw std::invalid_argument(
        "inconsistent tolerance parameters: (1 - rate^n)^m < alpha; "
        "raise n or lower m/alpha");
}

double confidence_single(std::int64_t n, double rate) {
  require(n >= 1, "n must be >= 1");
  require(rate > 0.0 && rate < 1.0, "rate must lie in (0, 1)");
  return -std::expm1(static_cast<double>(n) * std::log(rate));
}

double confidence_joint(std::int64_t n, double rate, std::int64_t m) {
  require(n >= 1, "n must be >= 1");
  require(rate > 0.0 && rate < 1.0, "rate must lie in (0, 1)");
  require(m >= 1, "m must be >= 1");
  const double log_rate_pow = static_cast<double>(n) * std::log(rate);  // ln(rate^n) <= 0
  const double log_single = std::log1p(-std::exp(log_rate_pow));        // ln(1 - rate^n)
  return std::exp(static_cast<double>(m) * log_single);
}

std::int64_t required_sample_size(double alpha, double rate, std::int64_t m) {
  check_inputs(alpha, rate, m);
  // ln(1 - alpha^(1/m)) without cancellation: alpha^(1/m) = exp(ln(alpha)/m).
  const double log_target = std::log(-std::expm1(std::log(alpha) / static_cast<double>(m)));
  const double raw = log_target / std::log(rate);
  if (!(raw < 1e12))
    throw std::runtime_error("required sample size exceeds 1e12; parameters impractical");
  std::int64_t n = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(raw)));
  while (n > 1 && confidence_joint(n - 1, rate, m) >= alpha) --n;
  while (confidence_joint(n, rate, m) < alpha) ++n;
  return n;
}

ToleranceParams doubling_m_schedule(double alpha, double rate,
                                    const std::function<std::int64_t(std::int64_t)>& run,
                                    int max_doublings) {
  check_inputs(alpha, rate, 1);
  std::int64_t m = 1;
  for (int i = 0; i <= max_doublings; ++i) {
    const std::int64_t n = required_sample_size(alpha, rate, m);
    const std::int64_t count = run(n);
    if (count <= m) return ToleranceParams{alpha, rate, n, m};
    m *= 2;
  }
  throw std::runtime_error("doubling_m_schedule: region count still exceeds m after " +
                           std::to_string(max_doublings) + " doublings");
}

}  // namespace regionprove
