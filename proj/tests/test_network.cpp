#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "regionprove/network.hpp"
#include "regionprove/rng.hpp"
#include "support/fixtures.hpp"

using namespace regionprove;

namespace {

const std::vector<std::vector<std::vector<double>>> kToyWeights = {
    {{4, -1}, {-2, 3}}, {{-1, 7}}};
const std::vector<std::vector<double>> kToyBiases = {{0, 0}, {0}};
const std::vector<std::vector<std::vector<double>>> kTwoOutputToyWeights = {
    {{4, -1}, {-2, 3}}, {{-1, 1.0 / 3.0}, {1, 2}}};
const std::vector<std::vector<double>> kTwoOutputToyBiases = {{0, 0}, {0, 0}};

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

std::string toy_json() {
  return R"({"layers":[{"weights":[[4,-1],[-2,3]],"bias":[0,0]},
                       {"weights":[[-1,7]],"bias":[0]}],
             "activation":"relu-hidden"})";
}

std::string toy_two_output_json() {
  return R"({"layers":[{"weights":[[4,-1],[-2,3]],"bias":[0,0]},
                       {"weights":[[-1,0.3333333333333333],[1,2]],"bias":[0,0]}],
             "activation":"relu-hidden"})";
}

}  // namespace

TEST_CASE("toy network forward values") {
  const Network net = fixtures::toy_network();
  CHECK(net.forward(vec2(1, 0))(0) == -4.0);
  // Confirmed against the naive evaluator: ReLU(-1, 3) -> (0, 3), then
  // 0*(-1) + 3*7 = 21.
  CHECK(fixtures::naive_forward(kToyWeights, kToyBiases, {0, 1})[0] == 21.0);
  CHECK(net.forward(vec2(0, 1))(0) == 21.0);
  // Determinism: repeated evaluation is bitwise identical.
  CHECK(net.forward(vec2(0.37, 0.81))(0) == net.forward(vec2(0.37, 0.81))(0));
}

TEST_CASE("two-output toy network matches the traced activations") {
  const Network net = fixtures::toy_two_output_network();
  const Eigen::VectorXd at10 = net.forward(vec2(1, 0));
  CHECK(at10(0) == -4.0);
  CHECK(at10(1) == 4.0);
  const Eigen::VectorXd at01 = net.forward(vec2(0, 1));
  CHECK(at01(0) == 1.0);
  CHECK(at01(1) == 6.0);
  const auto oracle10 = fixtures::naive_forward(kTwoOutputToyWeights, kTwoOutputToyBiases, {1, 0});
  const auto oracle01 = fixtures::naive_forward(kTwoOutputToyWeights, kTwoOutputToyBiases, {0, 1});
  CHECK(at10(0) == oracle10[0]);
  CHECK(at10(1) == oracle10[1]);
  CHECK(at01(0) == oracle01[0]);
  CHECK(at01(1) == oracle01[1]);
}

TEST_CASE("forward rejects dimension mismatches") {
  const Network net = fixtures::toy_network();
  Eigen::VectorXd bad(3);
  bad << 1, 2, 3;
  CHECK_THROWS_AS(net.forward(bad), std::invalid_argument);
}

TEST_CASE("batch evaluation equals the mapped single path bitwise") {
  const Network net = fixtures::toy_network();
  Eigen::MatrixXd xs(2, 2);
  xs << 1, 0, 0, 1;
  const Eigen::MatrixXd ys = net.forward_batch(xs);
  CHECK(ys(0, 0) == -4.0);
  CHECK(ys(1, 0) == 21.0);

  CHECK(net.forward_batch(Eigen::MatrixXd(0, 2)).rows() == 0);

  Eigen::MatrixXd one(1, 2);
  one << 0.62, 0.17;
  CHECK(net.forward_batch(one)(0, 0) == net.forward(vec2(0.62, 0.17))(0));

  SplitMix64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const Network random = fixtures::random_mlp(rng.next_u64(), 3, {9, 7}, 2);
    Eigen::MatrixXd batch(17, 3);
    for (Eigen::Index i = 0; i < batch.size(); ++i) batch(i) = rng.next_in(-2, 2);
    const Eigen::MatrixXd out = random.forward_batch(batch);
    for (Eigen::Index r = 0; r < batch.rows(); ++r) {
      const Eigen::VectorXd single = random.forward(batch.row(r).transpose());
      for (Eigen::Index c = 0; c < out.cols(); ++c) CHECK(out(r, c) == single(c));
    }
  }
}

TEST_CASE("nnet parsing") {
  SUBCASE("zero-weight file evaluates to zero") {
    const std::string text =
        "2,2,1,2,\n2,2,1,\n0,\n0,0,\n1,1,\n0,0,0,\n1,1,1,\n"
        "0,0,\n0,0,\n0,\n0,\n0,0,\n0,\n";
    const Network net = parse_nnet(text);
    CHECK(net.forward(vec2(0.3, 0.7))(0) == 0.0);
  }
  SUBCASE("toy file reproduces the traced output") {
    const Network net = parse_nnet(fixtures::toy_nnet_text());
    CHECK(net.forward(vec2(1, 0))(0) == -4.0);
    CHECK(net.normalization().has_value());
  }
  SUBCASE("declared size and value count disagree") {
    // Three input minimums against inputSize = 2.
    const std::string text =
        "2,2,1,2,\n2,2,1,\n0,\n0,0,0,\n1,1,\n0,0,0,\n1,1,1,\n"
        "0,0,\n0,0,\n0,\n0,\n0,0,\n0,\n";
    CHECK_THROWS_AS(parse_nnet(text), ParseError);
  }
  SUBCASE("non-numeric token reports its line") {
    const std::string text = "2,2,1,xyz,\n";
    try {
      parse_nnet(text);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 1);
      CHECK(std::string(e.what()).find("xyz") != std::string::npos);
    }
  }
  SUBCASE("truncated file") {
    CHECK_THROWS_AS(parse_nnet(std::string("2,2,1,2,\n2,2,1,\n0,\n")), ParseError);
  }
}

TEST_CASE("nnet normalization semantics") {
  const Network net = parse_nnet(fixtures::normalized_nnet_text());
  // y = ((x1-5)/2 + (x2-5)/2) * 10 + 100 with inputs clamped to [0, 10].
  CHECK(net.forward(vec2(7, 3))(0) == 100.0);
  CHECK(net.forward(vec2(20, 3))(0) == 115.0);  // x1 clamps to 10
  const Network raw = net.without_normalization();
  CHECK(raw.forward(vec2(7, 3))(0) == 10.0);
  CHECK_FALSE(raw.normalization().has_value());
}

TEST_CASE("network JSON parsing") {
  const Network toy = parse_network_json(toy_json());
  CHECK(toy.forward(vec2(1, 0))(0) == -4.0);
  CHECK(toy == fixtures::toy_network());

  const Network two_out = parse_network_json(toy_two_output_json());
  CHECK(two_out.forward(vec2(1, 0))(0) == -4.0);
  CHECK(two_out.forward(vec2(1, 0))(1) == 4.0);
  CHECK(two_out.forward(vec2(0, 1))(0) == 1.0);
  CHECK(two_out.forward(vec2(0, 1))(1) == 6.0);

  CHECK_THROWS_AS(parse_network_json(R"({"layers":[]})"), ParseError);
  CHECK_THROWS_AS(parse_network_json(R"({"layers":[{"weights":[[1,2],[3]],"bias":[0,0]}]})"),
                  ParseError);
  CHECK_THROWS_AS(parse_network_json(R"({"layers":[{"weights":[[1,2]]}]})"), ParseError);
  CHECK_THROWS_AS(parse_network_json(R"({"layers":[{"weights":[[1]],"bias":[0]}],"activation":"tanh"})"),
                  ParseError);
  CHECK_THROWS_AS(parse_network_json("not json"), ParseError);
}

TEST_CASE("serialization round-trips reparse to an identical network") {
  const Network nnet_net = parse_nnet(fixtures::toy_nnet_text());
  CHECK(parse_nnet(write_nnet(nnet_net)) == nnet_net);

  const Network norm_net = parse_nnet(fixtures::normalized_nnet_text());
  CHECK(parse_nnet(write_nnet(norm_net)) == norm_net);

  const Network json_net = fixtures::toy_two_output_network();
  CHECK(parse_network_json(write_network_json(json_net)) == json_net);

  SplitMix64 rng(31);
  for (int i = 0; i < 5; ++i) {
    const Network random = fixtures::random_mlp(rng.next_u64(), 2, {5, 3}, 2);
    CHECK(parse_network_json(write_network_json(random)) == random);
  }
}

TEST_CASE("augmentation folds constraints into one scalar output") {
  const Network net = fixtures::toy_two_output_network();
  const AugmentedNetwork aug = augment(net, fixtures::output_margin_property());
  CHECK(aug.evaluate(vec2(1, 0)) == 8.0);
  CHECK(aug.evaluate(vec2(0, 1)) == 5.0);

  SUBCASE("duplicate constraints change nothing") {
    SafetyProperty twice = fixtures::output_margin_property();
    twice.constraints.push_back(twice.constraints.front());
    const AugmentedNetwork aug2 = augment(net, twice);
    CHECK(aug2.evaluate(vec2(1, 0)) == aug.evaluate(vec2(1, 0)));
    CHECK(aug2.evaluate(vec2(0.4, 0.7)) == aug.evaluate(vec2(0.4, 0.7)));
  }

  SUBCASE("opposing constraints take the min") {
    // y == 3 at every input; constraints y >= 0 and -y >= 0.
    const Network constant = fixtures::constant_network(3.0);
    SafetyProperty prop;
    prop.domain = fixtures::unit_box(2);
    Eigen::VectorXd plus(1), minus(1);
    plus << 1;
    minus << -1;
    prop.constraints.push_back({plus, 0.0});
    prop.constraints.push_back({minus, 0.0});
    CHECK(augment(constant, prop).evaluate(vec2(0.5, 0.5)) == -3.0);
  }
}

TEST_CASE("single-constraint augmentation is exactly one affine stage on the outputs") {
  // The augmented scalar must equal the constraint row applied to the
  // base outputs as one linear-layer step, bitwise (same accumulation).
  SplitMix64 rng(83);
  for (int trial = 0; trial < 10; ++trial) {
    const Network net = fixtures::random_mlp(rng.next_u64(), 2, {6, 5}, 3);
    Eigen::VectorXd coeffs(3);
    coeffs << rng.next_in(-1, 1), rng.next_in(-1, 1), rng.next_in(-1, 1);
    const double offset = rng.next_in(-1, 1);

    SafetyProperty prop;
    prop.domain = fixtures::unit_box(2);
    prop.constraints.push_back({coeffs, offset});
    const AugmentedNetwork aug = augment(net, prop);

    Eigen::MatrixXd row_matrix = coeffs.transpose();
    Eigen::VectorXd offset_vector(1);
    offset_vector << offset;

    for (int p = 0; p < 20; ++p) {
      const Eigen::VectorXd x = vec2(rng.next_in(0, 1), rng.next_in(0, 1));
      const Eigen::VectorXd y = net.forward(x);
      Eigen::VectorXd stage(1);
      stage.noalias() = row_matrix * y + offset_vector;
      CHECK(aug.evaluate(x) == stage(0));
    }
  }
}

TEST_CASE("scaling the final layer scales y* and keeps every sign") {
  SplitMix64 rng(19);
  const Network net = fixtures::random_mlp(4242, 2, {8, 8}, 1);
  std::vector<Layer> doubled = net.layers();
  doubled.back().weights *= 2.0;
  doubled.back().bias *= 2.0;
  const Network net2(doubled);
  const SafetyProperty prop = fixtures::output_nonneg_property(2);
  const AugmentedNetwork aug = augment(net, prop);
  const AugmentedNetwork aug2 = augment(net2, prop);
  for (int p = 0; p < 200; ++p) {
    const Eigen::VectorXd x = vec2(rng.next_in(0, 1), rng.next_in(0, 1));
    const double y = aug.evaluate(x);
    CHECK(aug2.evaluate(x) == 2.0 * y);  // exact: scaling by 2 is lossless
    CHECK((aug2.evaluate(x) >= 0) == (y >= 0));
  }
}

TEST_CASE("property parsing and validation") {
  const SafetyProperty prop = parse_property_json(
      R"({"domain":{"lower":[0,0],"upper":[1,1]},
          "constraints":[{"coeffs":[-1,1],"offset":0.0}]})");
  CHECK(prop.domain == fixtures::unit_box(2));
  CHECK(prop.constraints.size() == 1);
  CHECK(prop.constraints[0].coeffs(0) == -1.0);

  const SafetyProperty reparsed = parse_property_json(write_property_json(prop));
  CHECK(reparsed.domain == prop.domain);
  CHECK(reparsed.constraints[0].coeffs == prop.constraints[0].coeffs);
  CHECK(reparsed.constraints[0].offset == prop.constraints[0].offset);

  CHECK_THROWS_AS(parse_property_json(R"({"constraints":[]})"), ParseError);
  CHECK_THROWS_AS(
      parse_property_json(R"({"domain":{"lower":[0],"upper":[1]},"constraints":[]})"),
      ParseError);

  SafetyProperty bad = prop;
  bad.constraints[0].coeffs = Eigen::VectorXd::Ones(3);
  CHECK_THROWS_AS(bad.validate(2), std::invalid_argument);
  SafetyProperty degenerate = prop;
  degenerate.domain.upper[0] = degenerate.domain.lower[0];
  CHECK_THROWS_AS(degenerate.validate(2), std::invalid_argument);
}

TEST_CASE("network construction invariants") {
  CHECK_THROWS_AS(Network({}), std::invalid_argument);
  // Chained dimensions must agree.
  CHECK_THROWS_AS(Network({fixtures::make_layer({{1, 2}}, {0}),
                           fixtures::make_layer({{1, 2}}, {0})}),
                  std::invalid_argument);
  // Non-finite weights are rejected.
  CHECK_THROWS_AS(Network({fixtures::make_layer({{std::nan("")}}, {0})}), std::invalid_argument);
}
