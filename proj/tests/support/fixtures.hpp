#pragma once

// Shared test fixtures: the toy verification networks, an independent
// plain-loop evaluator that frozen expected values are checked against,
// and deterministic random model generators.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "regionprove/engine.hpp"
#include "regionprove/network.hpp"
#include "regionprove/rng.hpp"

namespace fixtures {

// Naive MLP evaluation with explicit loops, kept independent of the
// library's evaluation path on purpose (it is the oracle side of the
// dual-route checks).
inline std::vector<double> naive_forward(const std::vector<std::vector<std::vector<double>>>& weights,
                                         const std::vector<std::vector<double>>& biases,
                                         std::vector<double> x) {
  for (std::size_t k = 0; k < weights.size(); ++k) {
    std::vector<double> next(weights[k].size());
    for (std::size_t i = 0; i < weights[k].size(); ++i) {
      double acc = biases[k][i];
      for (std::size_t j = 0; j < x.size(); ++j) acc += weights[k][i][j] * x[j];
      next[i] = acc;
    }
    if (k + 1 < weights.size())
      for (double& v : next) v = std::max(v, 0.0);
    x = std::move(next);
  }
  return x;
}

inline regionprove::Layer make_layer(const std::vector<std::vector<double>>& weights,
                                     const std::vector<double>& bias) {
  regionprove::Layer layer;
  layer.weights.resize(static_cast<Eigen::Index>(weights.size()),
                       static_cast<Eigen::Index>(weights.front().size()));
  for (std::size_t r = 0; r < weights.size(); ++r)
    for (std::size_t c = 0; c < weights[r].size(); ++c)
      layer.weights(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = weights[r][c];
  layer.bias.resize(static_cast<Eigen::Index>(bias.size()));
  for (std::size_t r = 0; r < bias.size(); ++r)
    layer.bias(static_cast<Eigen::Index>(r)) = bias[r];
  return layer;
}

// The 2-2-1 toy network: h = ReLU([[4,-1],[-2,3]] x), y = [-1, 7] h.
inline regionprove::Network toy_network() {
  return regionprove::Network(
      {make_layer({{4, -1}, {-2, 3}}, {0, 0}), make_layer({{-1, 7}}, {0})});
}

// Its two-output sibling: y1 = -h1 + h2/3, y2 = h1 + 2 h2, which maps
// (1,0) -> (-4, 4) and (0,1) -> (1, 6); both exact in binary64.
inline regionprove::Network toy_two_output_network() {
  return regionprove::Network(
      {make_layer({{4, -1}, {-2, 3}}, {0, 0}),
       make_layer({{-1, 1.0 / 3.0}, {1, 2}}, {0, 0})});
}

inline regionprove::Hyperrectangle unit_box(std::size_t d) {
  return regionprove::Hyperrectangle{std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)};
}

// Desired behavior: coefficient 1 on output `index`, so y_index >= 0.
inline regionprove::SafetyProperty output_nonneg_property(std::size_t domain_dim,
                                                          Eigen::Index output_dim = 1,
                                                          Eigen::Index index = 0) {
  regionprove::SafetyProperty prop;
  prop.domain = unit_box(domain_dim);
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(output_dim);
  coeffs(index) = 1.0;
  prop.constraints.push_back({coeffs, 0.0});
  return prop;
}

// Desired behavior for the two-output toy net: y2 - y1 >= 0.
inline regionprove::SafetyProperty output_margin_property() {
  regionprove::SafetyProperty prop;
  prop.domain = unit_box(2);
  Eigen::VectorXd coeffs(2);
  coeffs << -1.0, 1.0;
  prop.constraints.push_back({coeffs, 0.0});
  return prop;
}

// y == c everywhere (zero weights, bias c).
inline regionprove::Network constant_network(double c, Eigen::Index input_dim = 2) {
  std::vector<std::vector<double>> row(1, std::vector<double>(static_cast<std::size_t>(input_dim), 0.0));
  return regionprove::Network({make_layer(row, {c})});
}

// Piecewise-linear indicator of [0.5,1]x[0,1] union [0,0.24]x[0,0.49] on
// the unit square: y >= 0 exactly inside the union. Uses the identities
// min(u,v) = v - ReLU(v-u) and max(u,v) = u + ReLU(v-u); x1, x2 pass
// through the ReLU layers unchanged because they are nonnegative on the
// domain.
inline regionprove::Network box_indicator_network() {
  // u1 = ReLU(x1 - x2 + 0.25), u2 = x1, u3 = x2
  // v1 = ReLU(0.99 - u1 - u2 - u3), v2 = u2
  // y  = v2 - 0.5 + v1  ==  max(x1 - 0.5, min(0.24 - x1, 0.49 - x2))
  return regionprove::Network({
      make_layer({{1, -1}, {1, 0}, {0, 1}}, {0.25, 0, 0}),
      make_layer({{-1, -1, -1}, {0, 1, 0}}, {0.99, 0}),
      make_layer({{1, 1}}, {-0.5}),
  });
}

// y = |x1 - center| - half_width: negative exactly on a vertical strip of
// width 2*half_width.
inline regionprove::Network sliver_network(double center = 0.3, double half_width = 5e-5) {
  return regionprove::Network({
      make_layer({{1, 0}, {-1, 0}}, {-center, center}),
      make_layer({{1, 1}}, {-half_width}),
  });
}

class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

  double next() {
    // Box-Muller; u1 in (0,1] keeps the log finite.
    const double u1 = 1.0 - rng_.next_unit();
    const double u2 = rng_.next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  regionprove::SplitMix64 rng_;
};

// Random ReLU MLP with He-scaled weights; used for the randomized
// engine/oracle comparisons (no frozen exact values depend on it).
inline regionprove::Network random_mlp(std::uint64_t seed, Eigen::Index input_dim,
                                       const std::vector<Eigen::Index>& hidden,
                                       Eigen::Index output_dim = 1) {
  GaussianStream gauss(seed);
  std::vector<regionprove::Layer> layers;
  Eigen::Index fan_in = input_dim;
  for (Eigen::Index width : hidden) {
    regionprove::Layer layer;
    layer.weights.resize(width, fan_in);
    layer.bias.resize(width);
    const double scale = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (Eigen::Index r = 0; r < width; ++r) {
      for (Eigen::Index c = 0; c < fan_in; ++c) layer.weights(r, c) = scale * gauss.next();
      layer.bias(r) = 0.2 * gauss.next();
    }
    layers.push_back(std::move(layer));
    fan_in = width;
  }
  regionprove::Layer out;
  out.weights.resize(output_dim, fan_in);
  out.bias.resize(output_dim);
  const double scale = std::sqrt(1.0 / static_cast<double>(fan_in));
  for (Eigen::Index r = 0; r < output_dim; ++r) {
    for (Eigen::Index c = 0; c < fan_in; ++c) out.weights(r, c) = scale * gauss.next();
    out.bias(r) = 0.1 * gauss.next();
  }
  layers.push_back(std::move(out));
  return regionprove::Network(std::move(layers));
}

inline bool same_region_list(const std::vector<regionprove::ClassifiedRegion>& a,
                             const std::vector<regionprove::ClassifiedRegion>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(a[i] == b[i])) return false;
  return true;
}

// Equality up to wall time.
inline bool same_outcome(const regionprove::VerificationOutcome& a,
                         const regionprove::VerificationOutcome& b) {
  return same_region_list(a.safe, b.safe) && same_region_list(a.unsafe, b.unsafe) &&
         same_region_list(a.unknown, b.unknown) && a.params == b.params &&
         a.safe_rate == b.safe_rate && a.unsafe_rate == b.unsafe_rate &&
         a.unknown_rate == b.unknown_rate &&
         a.confidence_per_region == b.confidence_per_region &&
         a.confidence_joint_achieved == b.confidence_joint_achieved;
}

inline std::string toy_nnet_text() {
  return "// 2-2-1 toy model\n"
         "2,2,1,2,\n"
         "2,2,1,\n"
         "0,\n"
         "0.0,0.0,\n"
         "1.0,1.0,\n"
         "0.0,0.0,0.0,\n"
         "1.0,1.0,1.0,\n"
         "4.0,-1.0,\n"
         "-2.0,3.0,\n"
         "0.0,\n"
         "0.0,\n"
         "-1.0,7.0,\n"
         "0.0,\n";
}

// One affine layer behind a non-trivial normalization block; expected
// values in tests are worked out by hand.
inline std::string normalized_nnet_text() {
  return "1,2,1,2,\n"
         "2,1,\n"
         "0,\n"
         "0.0,0.0,\n"
         "10.0,10.0,\n"
         "5.0,5.0,100.0,\n"
         "2.0,2.0,10.0,\n"
         "1.0,1.0,\n"
         "0.0,\n";
}

}  // namespace fixtures
