#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "polytope/net.hpp"

namespace polytope {

// Consecutive layers start..start+count-1. Codes over a span name the
// polytopes that partition layer `start`'s input space; only ReLU layers
// inside the span contribute code bits.
struct LayerSpan {
  int start = 0;
  int count = 1;

  int end() const { return start + count - 1; }
  bool operator==(const LayerSpan& other) const = default;

  void validate(const PwlNetwork& net) const;
};

// Binary activation pattern over a span, bit i = 1 iff the corresponding
// pre-activation is strictly positive (exact zero counts as inactive).
// Bits are ordered layer-major then neuron index; layer_offsets[j] is the
// first bit of the j-th ReLU layer in the span.
struct SplineCode {
  int m = 0;
  std::vector<std::uint64_t> blocks;
  LayerSpan span;
  std::vector<int> layer_offsets;

  bool bit(int i) const { return (blocks[i >> 6] >> (i & 63)) & 1; }
  void set_bit(int i, bool value) {
    if (value)
      blocks[i >> 6] |= std::uint64_t{1} << (i & 63);
    else
      blocks[i >> 6] &= ~(std::uint64_t{1} << (i & 63));
  }

  bool operator==(const SplineCode& other) const {
    return m == other.m && span == other.span && blocks == other.blocks;
  }
};

// Allocates an all-zero code with the layout the given net/span induces.
SplineCode make_code(const PwlNetwork& net, const LayerSpan& span);

SplineCode extract_code(const ActivationTrace& trace, const PwlNetwork& net,
                        const LayerSpan& span);

// Code of the polytope containing x, where x lives in the span's input space.
SplineCode span_code(const PwlNetwork& net, const LayerSpan& span,
                     const Eigen::VectorXd& x);

// Output of the span's last layer for span input x.
Eigen::VectorXd span_output(const PwlNetwork& net, const LayerSpan& span,
                            const Eigen::VectorXd& x);

// Number of differing bits. Throws unless spans and lengths match.
int hamming(const SplineCode& a, const SplineCode& b);

// Hex dump, most-significant bit first within each byte. Pads the final
// byte with zero bits; always 2*ceil(m/8) characters.
std::string code_to_hex(const SplineCode& code);
SplineCode code_from_hex(const std::string& hex, const PwlNetwork& net,
                         const LayerSpan& span);

// The affine map the code induces over the span: compose each layer while
// zeroing rows of neurons the code marks inactive. Well-defined even for
// codes no input realizes.
struct RegionAffine {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  LayerSpan span;
};

RegionAffine region_affine(const PwlNetwork& net, const SplineCode& code);

Eigen::VectorXd apply_region_affine(const RegionAffine& ra, const Eigen::VectorXd& x);

// sqrt(|A1-A2|_F^2 + |b1-b2|^2); the transformation-space distance between
// two polytopes of a shared span.
double region_affine_distance(const RegionAffine& r1, const RegionAffine& r2);

enum class HalfspaceSense { kGreater, kLessEqual };

struct Halfspace {
  Eigen::VectorXd normal;
  double offset = 0.0;
  HalfspaceSense sense = HalfspaceSense::kGreater;
};

// One halfspace per code bit, in span-input coordinates: bit i's neuron
// pre-activation, written affinely through the code's upstream masking,
// is > 0 (bit 1) or <= 0 (bit 0). x satisfies all halfspaces iff
// span_code(x) equals the generating code.
struct RegionConstraints {
  std::vector<Halfspace> halfspaces;
  LayerSpan span;

  bool contains(const Eigen::VectorXd& x) const;
};

RegionConstraints region_constraints(const PwlNetwork& net, const SplineCode& code);

// Probabilistic code for one span: p_i = logistic(temperature * pre_i).
struct SoftCode {
  Eigen::VectorXd probabilities;
  double temperature = 1.0;
  LayerSpan span;
};

SoftCode soft_code(const ActivationTrace& trace, const PwlNetwork& net,
                   const LayerSpan& span, double temperature);

// Soft single-layer map: output_i = logistic(temperature * pre_i) * pre_i.
// Converges to the hard ReLU output as temperature grows.
Eigen::VectorXd soft_region_map(const Layer& layer, const Eigen::VectorXd& x,
                                double temperature);

}  // namespace polytope
