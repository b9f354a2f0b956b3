#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "regionprove/errors.hpp"
#include "regionprove/geometry.hpp"

namespace regionprove {

struct Layer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
};

// Input/output scaling as recorded in .nnet files: inputs are clamped to
// [min, max] and mapped to (x - mean) / range before layer 0, outputs are
// mapped back with the shared output mean/range.
struct Normalization {
  Eigen::VectorXd input_min;
  Eigen::VectorXd input_max;
  Eigen::VectorXd input_mean;
  Eigen::VectorXd input_range;
  double output_mean = 0.0;
  double output_range = 1.0;
};

// Feedforward MLP: affine layers with ReLU on every hidden layer and
// identity on the last one. Immutable after construction; evaluation is
// pure, so instances are safe to share across threads.
class Network {
 public:
  explicit Network(std::vector<Layer> layers,
                   std::optional<Normalization> normalization = std::nullopt);

  Eigen::Index input_dim() const { return input_dim_; }
  Eigen::Index output_dim() const { return output_dim_; }
  Eigen::Index max_width() const { return max_width_; }
  const std::vector<Layer>& layers() const { return layers_; }
  const std::optional<Normalization>& normalization() const { return normalization_; }

  // Copy with normalization stripped (inputs/outputs taken in raw units).
  Network without_normalization() const;

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;

  // Row i of the result is forward() of row i of xs. Both run the same
  // per-sample evaluation path, so the equality is bitwise.
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& xs) const;

  bool operator==(const Network& other) const;

 private:
  std::vector<Layer> layers_;
  std::optional<Normalization> normalization_;
  Eigen::Index input_dim_ = 0;
  Eigen::Index output_dim_ = 0;
  Eigen::Index max_width_ = 0;
};

// Reusable forward-pass scratch, one per worker thread. Keeps the hot
// loop free of allocations; every evaluation in the library funnels
// through this class so results cannot depend on the call site.
class ForwardWorkspace {
 public:
  // extra_rows reserves space for a caller-appended affine stage (the
  // property constraints) that continues the same buffer swap chain.
  explicit ForwardWorkspace(const Network& net, Eigen::Index extra_rows = 0);

  // Runs the full network. The returned view aliases an internal buffer
  // and stays valid until the next call on this workspace.
  Eigen::VectorBlock<Eigen::VectorXd> run(const Network& net, const double* x,
                                          Eigen::Index n);

  // Applies one more affine stage to the last run() result, continuing
  // the buffer alternation exactly as an appended network layer would.
  Eigen::VectorBlock<Eigen::VectorXd> apply_affine(const Layer& layer);

 private:
  Eigen::VectorXd buf_a_;
  Eigen::VectorXd buf_b_;
  Eigen::VectorXd input_;
  Eigen::Index last_size_ = 0;
  bool last_in_a_ = false;
};

// Desired linear behavior on the outputs: coeffs . y + offset >= 0.
struct LinearConstraint {
  Eigen::VectorXd coeffs;
  double offset = 0.0;
};

// Input region plus the conjunction of desired output constraints. The
// property holds at x iff every constraint is satisfied by y = net(x).
struct SafetyProperty {
  Hyperrectangle domain;
  std::vector<LinearConstraint> constraints;

  // Throws std::invalid_argument on empty/degenerate domain, missing
  // constraints or coefficient length mismatches.
  void validate(Eigen::Index output_dim) const;
};

// Base network with the property constraints folded into one scalar
// output y* = min_i (c_i . y + b_i); the property holds at x iff
// y*(x) >= 0. With a single constraint this is exactly the base network
// with one linear layer appended.
class AugmentedNetwork {
 public:
  AugmentedNetwork(Network base, std::vector<LinearConstraint> constraints);

  const Network& base() const { return base_; }
  Eigen::Index input_dim() const { return base_.input_dim(); }
  Eigen::Index constraint_count() const { return constraint_stage_.weights.rows(); }

  ForwardWorkspace make_workspace() const;

  double evaluate(const Eigen::VectorXd& x) const;
  double evaluate_with(ForwardWorkspace& ws, const double* x, Eigen::Index n) const;

  // One value per row of xs; same evaluation path as evaluate().
  Eigen::VectorXd evaluate_batch(const Eigen::MatrixXd& xs) const;

 private:
  Network base_;
  Layer constraint_stage_;  // rows = constraints, bias = offsets
};

AugmentedNetwork augment(Network net, const SafetyProperty& prop);

// --- file formats ---------------------------------------------------

// Standard .nnet text: "//" comment lines, then
//   numLayers, inputSize, outputSize, maxLayerSize
//   layer sizes (numLayers + 1 entries)
//   legacy flag (ignored)
//   input minimums / input maximums
//   means   (inputs + output)
//   ranges  (inputs + output)
// followed per layer by its weight rows and then its bias values.
Network parse_nnet(std::istream& in);
Network parse_nnet(const std::string& text);
Network parse_nnet_file(const std::string& path);
std::string write_nnet(const Network& net);

// {"layers":[{"weights":[[...]],"bias":[...]}], "activation":"relu-hidden"}
Network parse_network_json(const std::string& text);
Network parse_network_file(const std::string& path);  // dispatches on extension
std::string write_network_json(const Network& net);

// {"domain":{"lower":[...],"upper":[...]},
//  "constraints":[{"coeffs":[...],"offset":0.0}]}
SafetyProperty parse_property_json(const std::string& text);
SafetyProperty parse_property_file(const std::string& path);
std::string write_property_json(const SafetyProperty& prop);

}  // namespace regionprove
