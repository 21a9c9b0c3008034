#include <doctest.h>

#include "oracles.hpp"
#include "polytope/code.hpp"
#include "polytope/rng.hpp"

using namespace polytope;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<int>(values.size()));
  int i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

PwlNetwork relu_layer(const Eigen::MatrixXd& w, const Eigen::VectorXd& b) {
  PwlNetwork net;
  net.layers.push_back({w, b, ActivationKind::kRelu});
  return net;
}

LayerSpan full_span(const PwlNetwork& net) { return {0, net.layer_count()}; }

SplineCode code_from_bits(const PwlNetwork& net, const LayerSpan& span,
                          const std::vector<int>& bits) {
  SplineCode code = make_code(net, span);
  REQUIRE(code.m == static_cast<int>(bits.size()));
  for (int i = 0; i < code.m; ++i) code.set_bit(i, bits[i] != 0);
  return code;
}

}  // namespace

TEST_CASE("extract_code binarizes the sign pattern, zero counts inactive") {
  Eigen::MatrixXd w = Eigen::MatrixXd::Identity(3, 3);
  const auto net = relu_layer(w, vec({0, 0, 0}));
  const SplineCode code = span_code(net, full_span(net), vec({0.5, -0.2, 0.0}));
  REQUIRE(code.m == 3);
  CHECK(code.bit(0));
  CHECK_FALSE(code.bit(1));
  CHECK_FALSE(code.bit(2));
  CHECK(code.layer_offsets == std::vector<int>{0});
}

TEST_CASE("a span with no relu layers yields the empty code") {
  PwlNetwork net;
  net.layers.push_back({Eigen::MatrixXd::Identity(2, 2), vec({0, 0}),
                        ActivationKind::kIdentity});
  const SplineCode code = span_code(net, full_span(net), vec({1.0, 2.0}));
  CHECK(code.m == 0);
  CHECK(code.layer_offsets.empty());
}

TEST_CASE("code bits match the naive oracle on a random net") {
  const PwlNetwork net = init_random({2, 4, 4, 3}, 55);
  const LayerSpan span = full_span(net);
  Rng rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    const Eigen::VectorXd x = vec({rng.normal(), rng.normal()});
    const SplineCode code = span_code(net, span, x);

    oracles::NaiveNet naive;
    for (const Layer& layer : net.layers) {
      oracles::NaiveLayer nl;
      nl.relu = layer.activation == ActivationKind::kRelu;
      nl.bias.assign(layer.bias.data(), layer.bias.data() + layer.bias.size());
      for (int r = 0; r < layer.fan_out(); ++r) {
        std::vector<double> row(layer.fan_in());
        for (int c = 0; c < layer.fan_in(); ++c) row[c] = layer.weights(r, c);
        nl.weights.push_back(std::move(row));
      }
      naive.push_back(std::move(nl));
    }
    const std::vector<int> expected = oracles::naive_code_bits(naive, {x[0], x[1]});
    REQUIRE(code.m == static_cast<int>(expected.size()));
    for (int i = 0; i < code.m; ++i) CHECK(code.bit(i) == (expected[i] != 0));
  }
}

TEST_CASE("hamming counts differing bits and rejects span mismatches") {
  const auto net = relu_layer(Eigen::MatrixXd::Identity(3, 3), vec({0, 0, 0}));
  const LayerSpan span = full_span(net);
  const SplineCode a = code_from_bits(net, span, {1, 0, 1});
  const SplineCode b = code_from_bits(net, span, {1, 1, 1});
  CHECK(hamming(a, b) == 1);
  CHECK(hamming(a, a) == 0);
  CHECK(hamming(b, a) == 1);

  const auto other = relu_layer(Eigen::MatrixXd::Identity(4, 4), vec({0, 0, 0, 0}));
  const SplineCode c = make_code(other, full_span(other));
  CHECK_THROWS_AS(hamming(a, c), ValidationError);
}

TEST_CASE("hamming is a metric on random packed codes") {
  const auto net = relu_layer(Eigen::MatrixXd::Identity(90, 90),
                              Eigen::VectorXd::Zero(90));
  const LayerSpan span = full_span(net);
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    SplineCode a = make_code(net, span), b = make_code(net, span), c = make_code(net, span);
    for (int i = 0; i < a.m; ++i) {
      a.set_bit(i, rng.uniform() < 0.5);
      b.set_bit(i, rng.uniform() < 0.5);
      c.set_bit(i, rng.uniform() < 0.5);
    }
    const int ab = hamming(a, b), ba = hamming(b, a);
    const int ac = hamming(a, c), cb = hamming(c, b);
    CHECK(ab >= 0);
    CHECK(ab == ba);
    CHECK((hamming(a, a) == 0));
    CHECK((ab == 0) == (a == b));
    CHECK(ab <= ac + cb);  // triangle inequality
  }
}

TEST_CASE("region_affine of the all-active code is the layer itself") {
  Eigen::MatrixXd w(2, 2);
  w << 1.0, 2.0, -0.5, 0.25;
  const auto net = relu_layer(w, vec({0.5, -0.125}));
  const SplineCode code = code_from_bits(net, full_span(net), {1, 1});
  const RegionAffine ra = region_affine(net, code);
  CHECK(ra.a == w);
  CHECK(ra.b == net.layers[0].bias);
}

TEST_CASE("region_affine of the all-inactive code is the zero map") {
  Eigen::MatrixXd w(2, 2);
  w << 1.0, 2.0, -0.5, 0.25;
  const auto net = relu_layer(w, vec({0.5, -0.125}));
  const SplineCode code = code_from_bits(net, full_span(net), {0, 0});
  const RegionAffine ra = region_affine(net, code);
  CHECK(ra.a.isZero(0.0));
  CHECK(ra.b.isZero(0.0));
}

TEST_CASE("region affine reproduces the traced span output") {
  const PwlNetwork net = init_random({2, 6, 4, 3}, 31);
  const LayerSpan span = full_span(net);
  Rng rng(14);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::VectorXd x = vec({rng.uniform(-2, 2), rng.uniform(-2, 2)});
    const SplineCode code = span_code(net, span, x);
    const RegionAffine ra = region_affine(net, code);
    const Eigen::VectorXd expected = span_output(net, span, x);
    const double err = (apply_region_affine(ra, x) - expected).norm();
    CHECK(err < 1e-9 * (1.0 + expected.norm()));
  }
}

TEST_CASE("apply_region_affine basics and oracle") {
  RegionAffine identity;
  identity.a = Eigen::MatrixXd::Identity(3, 3);
  identity.b = Eigen::VectorXd::Zero(3);
  const Eigen::VectorXd x = vec({1.0, -2.0, 0.5});
  CHECK(apply_region_affine(identity, x) == x);

  RegionAffine constant;
  constant.a = Eigen::MatrixXd::Zero(2, 3);
  constant.b = vec({3.0, -1.0});
  CHECK(apply_region_affine(constant, x) == constant.b);

  Rng rng(4);
  RegionAffine random;
  random.a = Eigen::MatrixXd::Zero(3, 3);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) random.a(r, c) = rng.normal();
  }
  random.b = vec({rng.normal(), rng.normal(), rng.normal()});
  const Eigen::VectorXd y = apply_region_affine(random, x);
  for (int r = 0; r < 3; ++r) {
    double acc = random.b[r];
    for (int c = 0; c < 3; ++c) acc += random.a(r, c) * x[c];
    CHECK(y[r] == doctest::Approx(acc).epsilon(1e-12));
  }

  CHECK_THROWS_AS(apply_region_affine(constant, vec({1.0})), ValidationError);
}

TEST_CASE("region_affine_distance basics") {
  RegionAffine r1, r2;
  r1.a = Eigen::MatrixXd::Zero(2, 2);
  r1.b = Eigen::VectorXd::Zero(2);
  r2 = r1;
  CHECK(region_affine_distance(r1, r2) == 0.0);
  r2.a(0, 1) = 3.0;
  CHECK(region_affine_distance(r1, r2) == doctest::Approx(3.0).epsilon(1e-15));

  RegionAffine other;
  other.a = Eigen::MatrixXd::Zero(3, 2);
  other.b = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(region_affine_distance(r1, other), ValidationError);
}

TEST_CASE("single-neuron constraints are the expected halfspace") {
  Eigen::MatrixXd w(1, 2);
  w << 1.0, 0.0;
  const auto net = relu_layer(w, vec({0.0}));
  const SplineCode active = code_from_bits(net, full_span(net), {1});
  const RegionConstraints constraints = region_constraints(net, active);
  REQUIRE(constraints.halfspaces.size() == 1);
  CHECK(constraints.halfspaces[0].normal == vec({1.0, 0.0}));
  CHECK(constraints.halfspaces[0].offset == 0.0);
  CHECK(constraints.halfspaces[0].sense == HalfspaceSense::kGreater);
  CHECK(constraints.contains(vec({0.5, 7.0})));
  CHECK_FALSE(constraints.contains(vec({0.0, 7.0})));  // boundary belongs to bit 0
  CHECK_FALSE(constraints.contains(vec({-0.5, 7.0})));
}

TEST_CASE("a generating point satisfies its own constraints") {
  const PwlNetwork net = init_random({2, 5, 3}, 8);
  const Eigen::VectorXd x = vec({0.7, -0.3});
  const SplineCode code = span_code(net, full_span(net), x);
  CHECK(region_constraints(net, code).contains(x));
}

TEST_CASE("constraints agree with code equality on random and near-boundary points") {
  const PwlNetwork net = init_random({2, 6, 5, 3}, 23);
  const LayerSpan span = full_span(net);
  const Eigen::VectorXd anchor = vec({0.4, 0.9});
  const SplineCode code = span_code(net, span, anchor);
  const RegionConstraints constraints = region_constraints(net, code);

  Rng rng(60);
  int inside = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::VectorXd x = vec({rng.uniform(-2, 2), rng.uniform(-2, 2)});
    if (trial % 3 == 0) {
      // Perturb toward the nearest constraint boundary.
      const Halfspace* nearest = nullptr;
      double best = 0.0;
      for (const Halfspace& h : constraints.halfspaces) {
        const double norm = h.normal.norm();
        if (norm < 1e-12) continue;
        const double margin = std::abs(h.normal.dot(x) + h.offset) / norm;
        if (!nearest || margin < best) {
          nearest = &h;
          best = margin;
        }
      }
      if (nearest) {
        const Eigen::VectorXd step = nearest->normal / nearest->normal.norm();
        const double value = nearest->normal.dot(x) + nearest->offset;
        x -= (value / nearest->normal.norm()) * step;  // onto the boundary...
        x += (trial % 2 == 0 ? 1e-7 : -1e-7) * step;   // ...then +-1e-7 off it
      }
    }
    const bool by_code = span_code(net, span, x) == code;
    const bool by_constraints = constraints.contains(x);
    CHECK(by_code == by_constraints);
    inside += by_code;
  }
  CHECK(inside > 0);  // the anchor's region is fat enough to be hit
}

TEST_CASE("points sharing a code see an exactly affine span") {
  const PwlNetwork net = init_random({2, 8, 4}, 45);
  const LayerSpan span = full_span(net);
  Rng rng(3);
  int checked = 0;
  for (int trial = 0; trial < 300 && checked < 20; ++trial) {
    const Eigen::VectorXd x = vec({rng.uniform(-2, 2), rng.uniform(-2, 2)});
    const Eigen::VectorXd y = x + 0.05 * vec({rng.normal(), rng.normal()});
    const Eigen::VectorXd m = 0.5 * (x + y);
    const SplineCode cx = span_code(net, span, x);
    if (!(span_code(net, span, y) == cx) || !(span_code(net, span, m) == cx)) continue;
    const Eigen::VectorXd mid_out = span_output(net, span, m);
    const Eigen::VectorXd blend =
        0.5 * (span_output(net, span, x) + span_output(net, span, y));
    CHECK((mid_out - blend).norm() < 1e-9 * (1.0 + mid_out.norm()));
    ++checked;
  }
  CHECK(checked == 20);
}

TEST_CASE("soft codes follow the logistic curve") {
  Eigen::MatrixXd w(1, 1);
  w << 1.0;
  const auto net = relu_layer(w, vec({0.0}));
  const LayerSpan span = full_span(net);

  SoftCode at_zero = soft_code(forward_traced(net, vec({0.0})), net, span, 2.0);
  CHECK(at_zero.probabilities[0] == 0.5);

  SoftCode saturated = soft_code(forward_traced(net, vec({0.1})), net, span, 1e6);
  CHECK(saturated.probabilities[0] == doctest::Approx(1.0).epsilon(1e-9));

  SoftCode unit = soft_code(forward_traced(net, vec({1.0})), net, span, 1.0);
  CHECK(unit.probabilities[0] == doctest::Approx(0.7310585786300049).epsilon(1e-12));

  CHECK_THROWS_AS(soft_code(forward_traced(net, vec({1.0})), net, span, 0.0),
                  ValidationError);
}

TEST_CASE("soft codes round to the hard code at high steepness") {
  const PwlNetwork net = init_random({2, 6, 3}, 71);
  const LayerSpan span = full_span(net);
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd x = vec({rng.normal(), rng.normal()});
    const ActivationTrace trace = forward_traced(net, x);
    bool near_boundary = false;
    for (std::size_t l = 0; l < trace.pre.size(); ++l) {
      if (net.layers[l].activation != ActivationKind::kRelu) continue;
      near_boundary |= trace.pre[l].cwiseAbs().minCoeff() < 1e-6;
    }
    if (near_boundary) continue;
    const SoftCode soft = soft_code(trace, net, span, 1e8);
    const SplineCode hard = extract_code(trace, net, span);
    for (int i = 0; i < hard.m; ++i) {
      CHECK((soft.probabilities[i] >= 0.5) == hard.bit(i));
    }
  }
}

TEST_CASE("soft_region_map interpolates the relu output") {
  Eigen::MatrixXd w(1, 1);
  w << 1.0;
  Layer layer{w, vec({0.0}), ActivationKind::kRelu};

  CHECK(soft_region_map(layer, vec({1.0}), 1.0)[0] ==
        doctest::Approx(0.7310585786300049).epsilon(1e-12));
  CHECK(soft_region_map(layer, vec({0.0}), 123.0)[0] == 0.0);

  const PwlNetwork net = init_random({3, 7, 2}, 12);
  const Layer& hidden = net.layers[0];
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd x = vec({rng.normal(), rng.normal(), rng.normal()});
    const Eigen::VectorXd hard = (hidden.weights * x + hidden.bias).cwiseMax(0.0);
    const Eigen::VectorXd soft = soft_region_map(hidden, x, 1e8);
    CHECK((soft - hard).cwiseAbs().maxCoeff() < 1e-6);
  }

  Layer identity{w, vec({0.0}), ActivationKind::kIdentity};
  CHECK_THROWS_AS(soft_region_map(identity, vec({1.0}), 1.0), ValidationError);
  CHECK_THROWS_AS(soft_region_map(layer, vec({1.0}), -1.0), ValidationError);
}

TEST_CASE("code hex serialization is msb-first per byte and round-trips") {
  const auto net = relu_layer(Eigen::MatrixXd::Identity(10, 10),
                              Eigen::VectorXd::Zero(10));
  const LayerSpan span = full_span(net);
  SplineCode code = make_code(net, span);
  // bits 0..9: 1,0,0,0,0,0,0,1 | 1,0 -> bytes 0x81, 0x80
  code.set_bit(0, true);
  code.set_bit(7, true);
  code.set_bit(8, true);
  CHECK(code_to_hex(code) == "8180");
  CHECK(code_from_hex("8180", net, span) == code);

  CHECK_THROWS_AS(code_from_hex("81", net, span), ValidationError);      // too short
  CHECK_THROWS_AS(code_from_hex("8120", net, span), ValidationError);    // padding bit set
  CHECK_THROWS_AS(code_from_hex("81zz", net, span), ValidationError);    // bad digit

  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    SplineCode random = make_code(net, span);
    for (int i = 0; i < random.m; ++i) random.set_bit(i, rng.uniform() < 0.5);
    CHECK(code_from_hex(code_to_hex(random), net, span) == random);
  }
}

TEST_CASE("span validation rejects out-of-range spans") {
  const PwlNetwork net = init_random({2, 4, 2}, 1);
  CHECK_THROWS_AS((LayerSpan{0, 3}.validate(net)), ValidationError);
  CHECK_THROWS_AS((LayerSpan{-1, 1}.validate(net)), ValidationError);
  CHECK_THROWS_AS((LayerSpan{2, 1}.validate(net)), ValidationError);
  CHECK_NOTHROW((LayerSpan{1, 1}.validate(net)));
}
