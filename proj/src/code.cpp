#include "polytope/code.hpp"

#include <bit>
#include <cmath>

namespace polytope {

void LayerSpan::validate(const PwlNetwork& net) const {
  if (start < 0 || count < 1 || end() >= net.layer_count()) {
    throw ValidationError("span [" + std::to_string(start) + ", " +
                          std::to_string(end()) + "] out of range for a " +
                          std::to_string(net.layer_count()) + "-layer network");
  }
}

SplineCode make_code(const PwlNetwork& net, const LayerSpan& span) {
  span.validate(net);
  SplineCode code;
  code.span = span;
  for (int l = span.start; l <= span.end(); ++l) {
    if (net.layers[l].activation != ActivationKind::kRelu) continue;
    code.layer_offsets.push_back(code.m);
    code.m += net.layers[l].fan_out();
  }
  code.blocks.assign((code.m + 63) / 64, 0);
  return code;
}

SplineCode extract_code(const ActivationTrace& trace, const PwlNetwork& net,
                        const LayerSpan& span) {
  span.validate(net);
  if (span.start < trace.start_layer ||
      span.end() >= trace.start_layer + static_cast<int>(trace.pre.size())) {
    throw ValidationError("span not covered by the trace");
  }
  SplineCode code = make_code(net, span);
  int bit = 0;
  for (int l = span.start; l <= span.end(); ++l) {
    if (net.layers[l].activation != ActivationKind::kRelu) continue;
    const Eigen::VectorXd& pre = trace.pre_at(l);
    for (int i = 0; i < pre.size(); ++i, ++bit) {
      if (pre[i] > 0.0) code.set_bit(bit, true);
    }
  }
  return code;
}

SplineCode span_code(const PwlNetwork& net, const LayerSpan& span,
                     const Eigen::VectorXd& x) {
  return extract_code(forward_from_layer(net, span.start, x), net, span);
}

Eigen::VectorXd span_output(const PwlNetwork& net, const LayerSpan& span,
                            const Eigen::VectorXd& x) {
  span.validate(net);
  Eigen::VectorXd cur = x;
  for (int l = span.start; l <= span.end(); ++l) {
    const Layer& layer = net.layers[l];
    Eigen::VectorXd pre = layer.weights * cur + layer.bias;
    cur = layer.activation == ActivationKind::kRelu ? pre.cwiseMax(0.0).eval() : pre;
  }
  return cur;
}

int hamming(const SplineCode& a, const SplineCode& b) {
  if (a.m != b.m || !(a.span == b.span)) {
    throw ValidationError("hamming: codes come from different spans");
  }
  int distance = 0;
  for (std::size_t w = 0; w < a.blocks.size(); ++w) {
    distance += std::popcount(a.blocks[w] ^ b.blocks[w]);
  }
  return distance;
}

std::string code_to_hex(const SplineCode& code) {
  static const char* digits = "0123456789abcdef";
  const int n_bytes = (code.m + 7) / 8;
  std::string hex(2 * n_bytes, '0');
  for (int byte = 0; byte < n_bytes; ++byte) {
    unsigned value = 0;
    for (int k = 0; k < 8; ++k) {
      const int i = byte * 8 + k;
      if (i < code.m && code.bit(i)) value |= 1u << (7 - k);
    }
    hex[2 * byte] = digits[value >> 4];
    hex[2 * byte + 1] = digits[value & 15];
  }
  return hex;
}

SplineCode code_from_hex(const std::string& hex, const PwlNetwork& net,
                         const LayerSpan& span) {
  SplineCode code = make_code(net, span);
  const int n_bytes = (code.m + 7) / 8;
  if (static_cast<int>(hex.size()) != 2 * n_bytes) {
    throw ValidationError("code hex has length " + std::to_string(hex.size()) +
                          ", expected " + std::to_string(2 * n_bytes));
  }
  auto nibble = [&](char c) -> unsigned {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw ValidationError(std::string("invalid hex digit '") + c + "'");
  };
  for (int byte = 0; byte < n_bytes; ++byte) {
    const unsigned value = (nibble(hex[2 * byte]) << 4) | nibble(hex[2 * byte + 1]);
    for (int k = 0; k < 8; ++k) {
      const int i = byte * 8 + k;
      const bool bit = (value >> (7 - k)) & 1;
      if (i < code.m) {
        code.set_bit(i, bit);
      } else if (bit) {
        throw ValidationError("code hex has padding bits set beyond m");
      }
    }
  }
  return code;
}

namespace {

// Walks the span composing (A, b) from span input to each layer's output,
// masking ReLU rows by the code. visit(l, pre_a, pre_b) sees the affine form
// of layer l's pre-activation before masking.
template <typename Visitor>
void compose_span(const PwlNetwork& net, const SplineCode& code, Visitor&& visit,
                  Eigen::MatrixXd* a_out, Eigen::VectorXd* b_out) {
  const LayerSpan& span = code.span;
  span.validate(net);
  const SplineCode layout = make_code(net, span);
  if (layout.m != code.m) {
    throw ValidationError("code length " + std::to_string(code.m) +
                          " does not match span layout (" + std::to_string(layout.m) + ")");
  }
  const int in_dim = net.layers[span.start].fan_in();
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(in_dim, in_dim);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(in_dim);
  int bit = 0;
  for (int l = span.start; l <= span.end(); ++l) {
    const Layer& layer = net.layers[l];
    Eigen::MatrixXd pre_a = layer.weights * a;
    Eigen::VectorXd pre_b = layer.weights * b + layer.bias;
    visit(l, pre_a, pre_b);
    if (layer.activation == ActivationKind::kRelu) {
      for (int i = 0; i < layer.fan_out(); ++i, ++bit) {
        if (!code.bit(bit)) {
          pre_a.row(i).setZero();
          pre_b[i] = 0.0;
        }
      }
    }
    a = std::move(pre_a);
    b = std::move(pre_b);
  }
  if (a_out) *a_out = std::move(a);
  if (b_out) *b_out = std::move(b);
}

}  // namespace

RegionAffine region_affine(const PwlNetwork& net, const SplineCode& code) {
  RegionAffine ra;
  ra.span = code.span;
  compose_span(net, code, [](int, const Eigen::MatrixXd&, const Eigen::VectorXd&) {},
               &ra.a, &ra.b);
  return ra;
}

Eigen::VectorXd apply_region_affine(const RegionAffine& ra, const Eigen::VectorXd& x) {
  if (x.size() != ra.a.cols()) {
    throw ValidationError("apply_region_affine: input dimension " +
                          std::to_string(x.size()) + " does not match " +
                          std::to_string(ra.a.cols()));
  }
  return ra.a * x + ra.b;
}

double region_affine_distance(const RegionAffine& r1, const RegionAffine& r2) {
  if (r1.a.rows() != r2.a.rows() || r1.a.cols() != r2.a.cols() ||
      r1.b.size() != r2.b.size()) {
    throw ValidationError("region_affine_distance: shape mismatch");
  }
  const double a2 = (r1.a - r2.a).squaredNorm();
  const double b2 = (r1.b - r2.b).squaredNorm();
  return std::sqrt(a2 + b2);
}

bool RegionConstraints::contains(const Eigen::VectorXd& x) const {
  for (const Halfspace& h : halfspaces) {
    const double value = h.normal.dot(x) + h.offset;
    if (h.sense == HalfspaceSense::kGreater ? !(value > 0.0) : !(value <= 0.0)) {
      return false;
    }
  }
  return true;
}

RegionConstraints region_constraints(const PwlNetwork& net, const SplineCode& code) {
  RegionConstraints constraints;
  constraints.span = code.span;
  constraints.halfspaces.reserve(code.m);
  int bit = 0;
  compose_span(
      net, code,
      [&](int l, const Eigen::MatrixXd& pre_a, const Eigen::VectorXd& pre_b) {
        if (net.layers[l].activation != ActivationKind::kRelu) return;
        for (int i = 0; i < pre_a.rows(); ++i, ++bit) {
          Halfspace h;
          h.normal = pre_a.row(i).transpose();
          h.offset = pre_b[i];
          h.sense = code.bit(bit) ? HalfspaceSense::kGreater : HalfspaceSense::kLessEqual;
          constraints.halfspaces.push_back(std::move(h));
        }
      },
      nullptr, nullptr);
  return constraints;
}

SoftCode soft_code(const ActivationTrace& trace, const PwlNetwork& net,
                   const LayerSpan& span, double temperature) {
  if (!(temperature > 0.0)) throw ValidationError("soft_code: temperature must be positive");
  const SplineCode layout = make_code(net, span);
  if (span.start < trace.start_layer ||
      span.end() >= trace.start_layer + static_cast<int>(trace.pre.size())) {
    throw ValidationError("span not covered by the trace");
  }
  SoftCode soft;
  soft.span = span;
  soft.temperature = temperature;
  soft.probabilities.resize(layout.m);
  int bit = 0;
  for (int l = span.start; l <= span.end(); ++l) {
    if (net.layers[l].activation != ActivationKind::kRelu) continue;
    const Eigen::VectorXd& pre = trace.pre_at(l);
    for (int i = 0; i < pre.size(); ++i, ++bit) {
      soft.probabilities[bit] = 1.0 / (1.0 + std::exp(-temperature * pre[i]));
    }
  }
  return soft;
}

Eigen::VectorXd soft_region_map(const Layer& layer, const Eigen::VectorXd& x,
                                double temperature) {
  if (layer.activation != ActivationKind::kRelu) {
    throw ValidationError("soft_region_map: layer must use ReLU");
  }
  if (!(temperature > 0.0)) {
    throw ValidationError("soft_region_map: temperature must be positive");
  }
  if (x.size() != layer.fan_in()) {
    throw ValidationError("soft_region_map: input dimension mismatch");
  }
  const Eigen::VectorXd pre = layer.weights * x + layer.bias;
  Eigen::VectorXd out(pre.size());
  for (int i = 0; i < pre.size(); ++i) {
    out[i] = pre[i] / (1.0 + std::exp(-temperature * pre[i]));
  }
  return out;
}

}  // namespace polytope
