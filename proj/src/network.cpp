#include "regionprove/network.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string_view>

#include "json.hpp"

namespace regionprove {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

bool same_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

bool same_vector(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == b.size() && (a.array() == b.array()).all();
}

}  // namespace

Network::Network(std::vector<Layer> layers, std::optional<Normalization> normalization)
    : layers_(std::move(layers)), normalization_(std::move(normalization)) {
  require(!layers_.empty(), "network needs at least one layer");
  input_dim_ = layers_.front().weights.cols();
  require(input_dim_ >= 1, "network input dimension must be positive");
  max_width_ = input_dim_;
  Eigen::Index prev = input_dim_;
  for (const Layer& layer : layers_) {
    require(layer.weights.rows() >= 1, "layer must have at least one output");
    require(layer.weights.cols() == prev, "consecutive layer dimensions do not chain");
    require(layer.bias.size() == layer.weights.rows(), "bias length mismatches layer width");
    require(layer.weights.allFinite() && layer.bias.allFinite(),
            "layer weights and biases must be finite");
    prev = layer.weights.rows();
    max_width_ = std::max(max_width_, prev);
  }
  output_dim_ = prev;
  if (normalization_) {
    const Normalization& nm = *normalization_;
    require(nm.input_min.size() == input_dim_ && nm.input_max.size() == input_dim_ &&
                nm.input_mean.size() == input_dim_ && nm.input_range.size() == input_dim_,
            "normalization vectors must have one entry per input");
    require(nm.input_min.allFinite() && nm.input_max.allFinite() && nm.input_mean.allFinite() &&
                nm.input_range.allFinite() && std::isfinite(nm.output_mean) &&
                std::isfinite(nm.output_range),
            "normalization parameters must be finite");
    require(nm.input_range.minCoeff() > 0 && nm.output_range > 0,
            "normalization ranges must be positive");
  }
}

Network Network::without_normalization() const {
  return Network(layers_, std::nullopt);
}

Eigen::VectorXd Network::forward(const Eigen::VectorXd& x) const {
  ForwardWorkspace ws(*this);
  return Eigen::VectorXd(ws.run(*this, x.data(), x.size()));
}

Eigen::MatrixXd Network::forward_batch(const Eigen::MatrixXd& xs) const {
  if (xs.rows() == 0) return Eigen::MatrixXd(0, output_dim_);
  require(xs.cols() == input_dim_, "batch row length mismatches network input dimension");
  ForwardWorkspace ws(*this);
  Eigen::MatrixXd out(xs.rows(), output_dim_);
  Eigen::VectorXd row(input_dim_);
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    row = xs.row(i);
    out.row(i) = ws.run(*this, row.data(), input_dim_);
  }
  return out;
}

bool Network::operator==(const Network& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    if (!same_matrix(layers_[k].weights, other.layers_[k].weights)) return false;
    if (!same_vector(layers_[k].bias, other.layers_[k].bias)) return false;
  }
  if (normalization_.has_value() != other.normalization_.has_value()) return false;
  if (normalization_) {
    const Normalization& a = *normalization_;
    const Normalization& b = *other.normalization_;
    return same_vector(a.input_min, b.input_min) && same_vector(a.input_max, b.input_max) &&
           same_vector(a.input_mean, b.input_mean) &&
           same_vector(a.input_range, b.input_range) && a.output_mean == b.output_mean &&
           a.output_range == b.output_range;
  }
  return true;
}

ForwardWorkspace::ForwardWorkspace(const Network& net, Eigen::Index extra_rows) {
  const Eigen::Index width = std::max(net.max_width(), extra_rows);
  buf_a_.resize(width);
  buf_b_.resize(width);
  input_.resize(net.input_dim());
}

Eigen::VectorBlock<Eigen::VectorXd> ForwardWorkspace::run(const Network& net, const double* x,
                                                          Eigen::Index n) {
  require(n == net.input_dim(), "input dimension mismatch");
  const double* cur = x;
  if (net.normalization()) {
    const Normalization& nm = *net.normalization();
    Eigen::Map<const Eigen::VectorXd> raw(x, n);
    input_ = raw.cwiseMax(nm.input_min).cwiseMin(nm.input_max);
    input_ = (input_ - nm.input_mean).cwiseQuotient(nm.input_range);
    cur = input_.data();
  }
  Eigen::Index cur_size = n;
  bool write_a = true;
  const auto& layers = net.layers();
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const Layer& layer = layers[k];
    Eigen::VectorXd& dst = write_a ? buf_a_ : buf_b_;
    Eigen::Map<const Eigen::VectorXd> in(cur, cur_size);
    dst.head(layer.weights.rows()).noalias() = layer.weights * in + layer.bias;
    if (k + 1 < layers.size())
      dst.head(layer.weights.rows()) = dst.head(layer.weights.rows()).cwiseMax(0.0);
    cur = dst.data();
    cur_size = layer.weights.rows();
    write_a = !write_a;
  }
  last_in_a_ = !write_a;
  last_size_ = cur_size;
  Eigen::VectorXd& out = last_in_a_ ? buf_a_ : buf_b_;
  if (net.normalization()) {
    const Normalization& nm = *net.normalization();
    out.head(cur_size) = out.head(cur_size).array() * nm.output_range + nm.output_mean;
  }
  return out.head(cur_size);
}

Eigen::VectorBlock<Eigen::VectorXd> ForwardWorkspace::apply_affine(const Layer& layer) {
  require(layer.weights.cols() == last_size_, "affine stage input size mismatch");
  Eigen::VectorXd& src = last_in_a_ ? buf_a_ : buf_b_;
  Eigen::VectorXd& dst = last_in_a_ ? buf_b_ : buf_a_;
  Eigen::Map<const Eigen::VectorXd> in(src.data(), last_size_);
  dst.head(layer.weights.rows()).noalias() = layer.weights * in + layer.bias;
  last_in_a_ = !last_in_a_;
  last_size_ = layer.weights.rows();
  return dst.head(last_size_);
}

void SafetyProperty::validate(Eigen::Index output_dim) const {
  domain.validate();
  if (!(volume(domain) > 0))
    throw std::invalid_argument("property domain must have positive volume");
  if (constraints.empty())
    throw std::invalid_argument("property needs at least one constraint");
  for (const LinearConstraint& c : constraints) {
    if (c.coeffs.size() != output_dim)
      throw std::invalid_argument("constraint coefficient length mismatches network output");
    if (!c.coeffs.allFinite() || !std::isfinite(c.offset))
      throw std::invalid_argument("constraint coefficients must be finite");
  }
}

AugmentedNetwork::AugmentedNetwork(Network base, std::vector<LinearConstraint> constraints)
    : base_(std::move(base)) {
  require(!constraints.empty(), "augmentation needs at least one constraint");
  const Eigen::Index k = static_cast<Eigen::Index>(constraints.size());
  constraint_stage_.weights.resize(k, base_.output_dim());
  constraint_stage_.bias.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const LinearConstraint& c = constraints[i];
    require(c.coeffs.size() == base_.output_dim(),
            "constraint coefficient length mismatches network output");
    require(c.coeffs.allFinite() && std::isfinite(c.offset),
            "constraint coefficients must be finite");
    constraint_stage_.weights.row(i) = c.coeffs.transpose();
    constraint_stage_.bias(i) = c.offset;
  }
}

ForwardWorkspace AugmentedNetwork::make_workspace() const {
  return ForwardWorkspace(base_, constraint_count());
}

double AugmentedNetwork::evaluate_with(ForwardWorkspace& ws, const double* x,
                                       Eigen::Index n) const {
  ws.run(base_, x, n);
  return ws.apply_affine(constraint_stage_).minCoeff();
}

double AugmentedNetwork::evaluate(const Eigen::VectorXd& x) const {
  ForwardWorkspace ws = make_workspace();
  return evaluate_with(ws, x.data(), x.size());
}

Eigen::VectorXd AugmentedNetwork::evaluate_batch(const Eigen::MatrixXd& xs) const {
  if (xs.rows() == 0) return Eigen::VectorXd(0);
  require(xs.cols() == input_dim(), "batch row length mismatches network input dimension");
  ForwardWorkspace ws = make_workspace();
  Eigen::VectorXd out(xs.rows());
  Eigen::VectorXd row(input_dim());
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    row = xs.row(i);
    out(i) = evaluate_with(ws, row.data(), row.size());
  }
  return out;
}

AugmentedNetwork augment(Network net, const SafetyProperty& prop) {
  prop.validate(net.output_dim());
  return AugmentedNetwork(std::move(net), prop.constraints);
}

// --- .nnet ------------------------------------------------------------

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++line_no_;
      if (line.rfind("//", 0) == 0) continue;
      if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
      return true;
    }
    return false;
  }

  int line_no() const { return line_no_; }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_double_token(std::string_view tok, int line_no) {
  std::string_view t = tok;
  if (!t.empty() && t.front() == '+') t.remove_prefix(1);
  double value = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw ParseError("invalid numeric token '" + std::string(tok) + "'", line_no);
  return value;
}

// Comma-separated values; empty fields (trailing commas are common in
// shipped .nnet files) are skipped.
std::vector<double> parse_csv_doubles(const std::string& line, int line_no) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    const std::size_t comma = line.find(',', pos);
    const std::size_t end = comma == std::string::npos ? line.size() : comma;
    const std::string_view tok = trim(std::string_view(line).substr(pos, end - pos));
    if (!tok.empty()) out.push_back(parse_double_token(tok, line_no));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

Eigen::Index as_count(double v, const char* what, int line_no) {
  if (!(v >= 1 && v == std::floor(v) && v <= 1e9))
    throw ParseError(std::string("invalid ") + what + " in header", line_no);
  return static_cast<Eigen::Index>(v);
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string join_csv(const Eigen::VectorXd& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_full(v(i));
  }
  return out;
}

}  // namespace

Network parse_nnet(std::istream& in) {
  LineReader reader(in);
  std::string line;
  auto need = [&](const char* what) {
    if (!reader.next(line))
      throw ParseError(std::string("unexpected end of file while reading ") + what,
                       reader.line_no() + 1);
  };
  auto expect_count = [&](const std::vector<double>& values, Eigen::Index count,
                          const char* what) {
    if (static_cast<Eigen::Index>(values.size()) != count)
      throw ParseError("expected " + std::to_string(count) + " " + what + ", got " +
                           std::to_string(values.size()),
                       reader.line_no());
  };

  need("header");
  const auto header = parse_csv_doubles(line, reader.line_no());
  if (header.size() < 4)
    throw ParseError("header needs numLayers, inputSize, outputSize, maxLayerSize",
                     reader.line_no());
  const Eigen::Index num_layers = as_count(header[0], "numLayers", reader.line_no());
  const Eigen::Index input_size = as_count(header[1], "inputSize", reader.line_no());
  const Eigen::Index output_size = as_count(header[2], "outputSize", reader.line_no());

  need("layer sizes");
  const auto sizes_raw = parse_csv_doubles(line, reader.line_no());
  expect_count(sizes_raw, num_layers + 1, "layer sizes");
  std::vector<Eigen::Index> sizes;
  for (double v : sizes_raw) sizes.push_back(as_count(v, "layer size", reader.line_no()));
  if (sizes.front() != input_size)
    throw ParseError("declared inputSize disagrees with the first layer size", reader.line_no());
  if (sizes.back() != output_size)
    throw ParseError("declared outputSize disagrees with the last layer size", reader.line_no());

  need("legacy flag");  // ignored

  need("input minimums");
  const auto mins = parse_csv_doubles(line, reader.line_no());
  expect_count(mins, input_size, "input minimums");
  need("input maximums");
  const auto maxes = parse_csv_doubles(line, reader.line_no());
  expect_count(maxes, input_size, "input maximums");
  need("means");
  const auto means = parse_csv_doubles(line, reader.line_no());
  expect_count(means, input_size + 1, "means");
  need("ranges");
  const auto ranges = parse_csv_doubles(line, reader.line_no());
  expect_count(ranges, input_size + 1, "ranges");

  std::vector<Layer> layers;
  for (Eigen::Index k = 0; k < num_layers; ++k) {
    const Eigen::Index rows = sizes[k + 1];
    const Eigen::Index cols = sizes[k];
    Layer layer;
    layer.weights.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      need("weight row");
      const auto values = parse_csv_doubles(line, reader.line_no());
      expect_count(values, cols, "weights");
      layer.weights.row(r) = to_vector(values).transpose();
    }
    layer.bias.resize(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
      need("bias value");
      const auto values = parse_csv_doubles(line, reader.line_no());
      expect_count(values, 1, "bias values");
      layer.bias(r) = values[0];
    }
    layers.push_back(std::move(layer));
  }

  Normalization nm;
  nm.input_min = to_vector(mins);
  nm.input_max = to_vector(maxes);
  nm.input_mean = to_vector(means).head(input_size);
  nm.input_range = to_vector(ranges).head(input_size);
  nm.output_mean = means[static_cast<std::size_t>(input_size)];
  nm.output_range = ranges[static_cast<std::size_t>(input_size)];

  try {
    return Network(std::move(layers), std::move(nm));
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), reader.line_no());
  }
}

Network parse_nnet(const std::string& text) {
  std::istringstream in(text);
  return parse_nnet(in);
}

Network parse_nnet_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return parse_nnet(in);
}

std::string write_nnet(const Network& net) {
  std::string out;
  const auto& layers = net.layers();
  out += std::to_string(layers.size()) + "," + std::to_string(net.input_dim()) + "," +
         std::to_string(net.output_dim()) + "," + std::to_string(net.max_width()) + "\n";
  out += std::to_string(net.input_dim());
  for (const Layer& layer : layers) out += "," + std::to_string(layer.weights.rows());
  out += "\n0\n";
  Normalization nm;
  if (net.normalization()) {
    nm = *net.normalization();
  } else {
    // Identity scaling with clamp bounds wide enough to be a no-op.
    const double big = std::numeric_limits<double>::max();
    nm.input_min = Eigen::VectorXd::Constant(net.input_dim(), -big);
    nm.input_max = Eigen::VectorXd::Constant(net.input_dim(), big);
    nm.input_mean = Eigen::VectorXd::Zero(net.input_dim());
    nm.input_range = Eigen::VectorXd::Ones(net.input_dim());
  }
  out += join_csv(nm.input_min) + "\n";
  out += join_csv(nm.input_max) + "\n";
  out += join_csv(nm.input_mean) + "," + format_full(nm.output_mean) + "\n";
  out += join_csv(nm.input_range) + "," + format_full(nm.output_range) + "\n";
  for (const Layer& layer : layers) {
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
      out += join_csv(layer.weights.row(r).transpose()) + "\n";
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r)
      out += format_full(layer.bias(r)) + "\n";
  }
  return out;
}

// --- JSON formats -----------------------------------------------------

namespace {

using nlohmann::json;

json parse_json_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(e.what());
  }
}

Eigen::VectorXd json_to_vector(const json& j, const char* what) {
  if (!j.is_array()) throw ParseError(std::string(what) + " must be an array");
  Eigen::VectorXd v(j.size());
  Eigen::Index i = 0;
  for (const auto& x : j) {
    if (!x.is_number()) throw ParseError(std::string(what) + " must contain numbers");
    v(i++) = x.get<double>();
  }
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Network parse_network_json(const std::string& text) {
  const json j = parse_json_text(text);
  if (!j.is_object() || !j.contains("layers")) throw ParseError("missing 'layers' field");
  const json& jl = j["layers"];
  if (!jl.is_array() || jl.empty()) throw ParseError("'layers' must be a non-empty array");
  if (j.contains("activation") && j["activation"] != "relu-hidden")
    throw ParseError("unsupported activation (expected 'relu-hidden')");
  std::vector<Layer> layers;
  int index = 0;
  for (const auto& jlayer : jl) {
    if (!jlayer.is_object() || !jlayer.contains("weights") || !jlayer.contains("bias"))
      throw ParseError("layer " + std::to_string(index) + " needs 'weights' and 'bias'");
    const json& jw = jlayer["weights"];
    if (!jw.is_array() || jw.empty())
      throw ParseError("layer " + std::to_string(index) + ": 'weights' must be a non-empty array");
    Layer layer;
    const Eigen::Index rows = static_cast<Eigen::Index>(jw.size());
    Eigen::Index cols = -1;
    for (Eigen::Index r = 0; r < rows; ++r) {
      Eigen::VectorXd row = json_to_vector(jw[static_cast<std::size_t>(r)], "weight row");
      if (cols < 0) {
        cols = row.size();
        if (cols == 0)
          throw ParseError("layer " + std::to_string(index) + ": empty weight row");
        layer.weights.resize(rows, cols);
      } else if (row.size() != cols) {
        throw ParseError("layer " + std::to_string(index) + ": ragged weight matrix");
      }
      layer.weights.row(r) = row.transpose();
    }
    layer.bias = json_to_vector(jlayer["bias"], "bias");
    if (layer.bias.size() != rows)
      throw ParseError("layer " + std::to_string(index) + ": bias length mismatches weights");
    layers.push_back(std::move(layer));
    ++index;
  }
  try {
    return Network(std::move(layers));
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
}

Network parse_network_file(const std::string& path) {
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".nnet") return parse_nnet_file(path);
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json")
    return parse_network_json(read_file(path));
  throw ParseError("unknown network format for '" + path + "' (expected .nnet or .json)");
}

std::string write_network_json(const Network& net) {
  json j;
  j["activation"] = "relu-hidden";
  j["layers"] = json::array();
  for (const Layer& layer : net.layers()) {
    json jw = json::array();
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) row.push_back(layer.weights(r, c));
      jw.push_back(std::move(row));
    }
    json jb = json::array();
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) jb.push_back(layer.bias(r));
    j["layers"].push_back(json{{"weights", std::move(jw)}, {"bias", std::move(jb)}});
  }
  return j.dump();
}

SafetyProperty parse_property_json(const std::string& text) {
  const json j = parse_json_text(text);
  if (!j.is_object() || !j.contains("domain") || !j.contains("constraints"))
    throw ParseError("property needs 'domain' and 'constraints'");
  const json& jd = j["domain"];
  if (!jd.is_object() || !jd.contains("lower") || !jd.contains("upper"))
    throw ParseError("'domain' needs 'lower' and 'upper'");
  SafetyProperty prop;
  const Eigen::VectorXd lo = json_to_vector(jd["lower"], "'domain.lower'");
  const Eigen::VectorXd hi = json_to_vector(jd["upper"], "'domain.upper'");
  if (lo.size() != hi.size()) throw ParseError("domain bound arrays differ in length");
  prop.domain.lower.assign(lo.data(), lo.data() + lo.size());
  prop.domain.upper.assign(hi.data(), hi.data() + hi.size());
  const json& jc = j["constraints"];
  if (!jc.is_array() || jc.empty()) throw ParseError("'constraints' must be a non-empty array");
  for (const auto& c : jc) {
    if (!c.is_object() || !c.contains("coeffs") || !c.contains("offset"))
      throw ParseError("constraint needs 'coeffs' and 'offset'");
    if (!c["offset"].is_number()) throw ParseError("'offset' must be a number");
    prop.constraints.push_back(
        LinearConstraint{json_to_vector(c["coeffs"], "'coeffs'"), c["offset"].get<double>()});
  }
  try {
    prop.domain.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
  return prop;
}

SafetyProperty parse_property_file(const std::string& path) {
  return parse_property_json(read_file(path));
}

std::string write_property_json(const SafetyProperty& prop) {
  json j;
  j["domain"] = {{"lower", prop.domain.lower}, {"upper", prop.domain.upper}};
  j["constraints"] = json::array();
  for (const LinearConstraint& c : prop.constraints) {
    json coeffs = json::array();
    for (Eigen::Index i = 0; i < c.coeffs.size(); ++i) coeffs.push_back(c.coeffs(i));
    j["constraints"].push_back(json{{"coeffs", std::move(coeffs)}, {"offset", c.offset}});
  }
  return j.dump();
}

}  // namespace regionprove
