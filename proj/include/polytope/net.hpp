#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "polytope/error.hpp"

namespace polytope {

enum class ActivationKind { kRelu, kIdentity };

std::string to_string(ActivationKind kind);
ActivationKind activation_from_string(const std::string& name);

// One affine layer: y = act(W x + b). Weights are fan_out x fan_in.
struct Layer {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;
  ActivationKind activation = ActivationKind::kRelu;

  int fan_in() const { return static_cast<int>(weights.cols()); }
  int fan_out() const { return static_cast<int>(weights.rows()); }
};

// A feedforward piecewise-linear network. Hidden layers use ReLU; networks
// produced by init_random/train end in an Identity layer (raw logits).
// Immutable in practice: analyses share nets read-only across workers.
struct PwlNetwork {
  std::vector<Layer> layers;

  int layer_count() const { return static_cast<int>(layers.size()); }
  int input_dim() const { return layers.empty() ? 0 : layers.front().fan_in(); }
  int output_dim() const { return layers.empty() ? 0 : layers.back().fan_out(); }

  // Throws ValidationError if layer dimensions do not chain or any entry is
  // non-finite. Error messages name the offending layer.
  void validate() const;
};

// Pre/post activations for layers start_layer..last. start_layer is 0 for a
// full forward pass and L when evaluation was entered mid-network.
struct ActivationTrace {
  int start_layer = 0;
  Eigen::VectorXd input;  // the vector fed into layer start_layer
  std::vector<Eigen::VectorXd> pre;
  std::vector<Eigen::VectorXd> post;

  const Eigen::VectorXd& pre_at(int layer) const { return pre.at(layer - start_layer); }
  const Eigen::VectorXd& post_at(int layer) const { return post.at(layer - start_layer); }
  const Eigen::VectorXd& logits() const { return post.back(); }
};

struct LabeledDataset {
  Eigen::MatrixXd points;  // n x dim, one row per point
  std::vector<int> labels;

  int size() const { return static_cast<int>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }
  int num_classes() const;
  void validate() const;  // labels must form a contiguous range 0..k-1
};

struct TrainConfig {
  double learning_rate = 0.05;
  int epochs = 200;
  int batch_size = 32;
  std::uint64_t seed = 0;
};

Eigen::VectorXd forward(const PwlNetwork& net, const Eigen::VectorXd& x);
ActivationTrace forward_traced(const PwlNetwork& net, const Eigen::VectorXd& x);

// Evaluates layers layer_index..end on h (h lives in layer_index's input
// space). forward_from_layer(net, 0, x) is a full forward pass.
ActivationTrace forward_from_layer(const PwlNetwork& net, int layer_index,
                                   const Eigen::VectorXd& h);

// Weights uniform on [-sqrt(3/fan_in), +sqrt(3/fan_in)] (variance 1/fan_in),
// biases zero, ReLU everywhere except the Identity output layer.
PwlNetwork init_random(const std::vector<int>& layer_sizes, std::uint64_t seed);

// k Gaussian blobs with per-class centers drawn in [-4,4]^dim (the whole set
// is redrawn until centers are at least 2.5 apart) and noise stddev `spread`.
LabeledDataset make_blobs(int k, int n_per_class, int dim, double spread,
                          std::uint64_t seed);

struct TrainResult {
  PwlNetwork net;
  std::vector<double> loss_history;  // per-epoch mean cross-entropy
};

// Minibatch gradient descent on softmax cross-entropy. Single-threaded; the
// update order is part of the determinism contract. Throws RuntimeFailure if
// the loss becomes non-finite.
TrainResult train(const PwlNetwork& net, const LabeledDataset& data,
                  const TrainConfig& cfg);

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> bias;
};

// Mean cross-entropy over the batch plus its gradient; exposed so tests can
// check it against finite differences.
double loss_and_gradient(const PwlNetwork& net, const Eigen::MatrixXd& batch_points,
                         const std::vector<int>& batch_labels, Gradients* grads);

double classification_accuracy(const PwlNetwork& net, const LabeledDataset& data);

// JSON network file: {"layers":[{"weights":[[...]],"bias":[...],
// "activation":"relu"|"identity"}]}. Numbers round-trip exactly.
void save_network(const PwlNetwork& net, const std::string& path);
PwlNetwork load_network(const std::string& path);

// CSV dataset file: header "f0,...,f{d-1},label", one row per point.
void save_dataset(const LabeledDataset& data, const std::string& path);
LabeledDataset load_dataset(const std::string& path);

}  // namespace polytope
