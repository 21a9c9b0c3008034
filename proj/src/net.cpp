#include "polytope/net.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "polytope/rng.hpp"

namespace polytope {

std::string to_string(ActivationKind kind) {
  return kind == ActivationKind::kRelu ? "relu" : "identity";
}

ActivationKind activation_from_string(const std::string& name) {
  if (name == "relu") return ActivationKind::kRelu;
  if (name == "identity") return ActivationKind::kIdentity;
  throw ValidationError("unknown activation \"" + name + "\" (expected relu|identity)");
}

void PwlNetwork::validate() const {
  if (layers.empty()) throw ValidationError("network has no layers");
  for (int i = 0; i < layer_count(); ++i) {
    const Layer& layer = layers[i];
    const std::string where = "layer " + std::to_string(i);
    if (layer.weights.rows() != layer.bias.size()) {
      throw ValidationError(where + ": bias length " + std::to_string(layer.bias.size()) +
                            " does not match weight rows " +
                            std::to_string(layer.weights.rows()));
    }
    if (i > 0 && layers[i - 1].fan_out() != layer.fan_in()) {
      throw ValidationError(where + ": fan_in " + std::to_string(layer.fan_in()) +
                            " does not match previous fan_out " +
                            std::to_string(layers[i - 1].fan_out()));
    }
    if (!layer.weights.allFinite() || !layer.bias.allFinite()) {
      throw ValidationError(where + ": non-finite parameter");
    }
  }
}

int LabeledDataset::num_classes() const {
  int k = 0;
  for (int label : labels) k = std::max(k, label + 1);
  return k;
}

void LabeledDataset::validate() const {
  if (static_cast<int>(labels.size()) != size()) {
    throw ValidationError("dataset: label count does not match point count");
  }
  const int k = num_classes();
  std::vector<bool> seen(k, false);
  for (int label : labels) {
    if (label < 0) throw ValidationError("dataset: negative class label");
    seen[label] = true;
  }
  for (int c = 0; c < k; ++c) {
    if (!seen[c]) {
      throw ValidationError("dataset: labels are not contiguous (class " +
                            std::to_string(c) + " missing)");
    }
  }
}

ActivationTrace forward_from_layer(const PwlNetwork& net, int layer_index,
                                   const Eigen::VectorXd& h) {
  if (layer_index < 0 || layer_index >= net.layer_count()) {
    throw ValidationError("layer index " + std::to_string(layer_index) +
                          " out of range [0, " + std::to_string(net.layer_count()) + ")");
  }
  if (h.size() != net.layers[layer_index].fan_in()) {
    throw ValidationError("input dimension " + std::to_string(h.size()) +
                          " does not match layer " + std::to_string(layer_index) +
                          " fan_in " + std::to_string(net.layers[layer_index].fan_in()));
  }
  ActivationTrace trace;
  trace.start_layer = layer_index;
  trace.input = h;
  const int count = net.layer_count() - layer_index;
  trace.pre.reserve(count);
  trace.post.reserve(count);
  Eigen::VectorXd cur = h;
  for (int l = layer_index; l < net.layer_count(); ++l) {
    const Layer& layer = net.layers[l];
    Eigen::VectorXd pre = layer.weights * cur + layer.bias;
    Eigen::VectorXd post =
        layer.activation == ActivationKind::kRelu ? pre.cwiseMax(0.0).eval() : pre;
    trace.pre.push_back(std::move(pre));
    cur = post;
    trace.post.push_back(std::move(post));
  }
  return trace;
}

ActivationTrace forward_traced(const PwlNetwork& net, const Eigen::VectorXd& x) {
  return forward_from_layer(net, 0, x);
}

Eigen::VectorXd forward(const PwlNetwork& net, const Eigen::VectorXd& x) {
  return forward_from_layer(net, 0, x).logits();
}

PwlNetwork init_random(const std::vector<int>& layer_sizes, std::uint64_t seed) {
  if (layer_sizes.size() < 2) throw ValidationError("need at least input and output sizes");
  for (int s : layer_sizes) {
    if (s <= 0) throw ValidationError("layer sizes must be positive");
  }
  Rng rng(seed);
  PwlNetwork net;
  const int n_layers = static_cast<int>(layer_sizes.size()) - 1;
  net.layers.reserve(n_layers);
  for (int l = 0; l < n_layers; ++l) {
    Layer layer;
    const int fan_in = layer_sizes[l];
    const int fan_out = layer_sizes[l + 1];
    const double bound = std::sqrt(3.0 / fan_in);
    layer.weights.resize(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r) {
      for (int c = 0; c < fan_in; ++c) layer.weights(r, c) = rng.uniform(-bound, bound);
    }
    layer.bias = Eigen::VectorXd::Zero(fan_out);
    layer.activation =
        l == n_layers - 1 ? ActivationKind::kIdentity : ActivationKind::kRelu;
    net.layers.push_back(std::move(layer));
  }
  return net;
}

LabeledDataset make_blobs(int k, int n_per_class, int dim, double spread,
                          std::uint64_t seed) {
  if (k < 2) throw ValidationError("make_blobs: k must be >= 2");
  if (n_per_class < 1) throw ValidationError("make_blobs: n_per_class must be >= 1");
  if (dim < 1) throw ValidationError("make_blobs: dim must be >= 1");
  if (!(spread > 0.0)) throw ValidationError("make_blobs: spread must be positive");

  constexpr double kMinSeparation = 2.5;
  Eigen::MatrixXd centers(k, dim);
  bool ok = false;
  for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
    Rng rng(mix_seed(seed, attempt));
    for (int c = 0; c < k; ++c) {
      for (int d = 0; d < dim; ++d) centers(c, d) = rng.uniform(-4.0, 4.0);
    }
    ok = true;
    for (int a = 0; a < k && ok; ++a) {
      for (int b = a + 1; b < k && ok; ++b) {
        if ((centers.row(a) - centers.row(b)).norm() < kMinSeparation) ok = false;
      }
    }
  }
  if (!ok) throw ValidationError("make_blobs: could not place well-separated centers");

  LabeledDataset data;
  data.points.resize(k * n_per_class, dim);
  data.labels.resize(k * n_per_class);
  Rng noise(mix_seed(seed, 0x0b10b5));
  int row = 0;
  for (int c = 0; c < k; ++c) {
    for (int i = 0; i < n_per_class; ++i, ++row) {
      for (int d = 0; d < dim; ++d) {
        data.points(row, d) = centers(c, d) + spread * noise.normal();
      }
      data.labels[row] = c;
    }
  }
  return data;
}

namespace {

// Forward pass over a batch (columns are samples), keeping what backprop
// needs. Returns mean cross-entropy.
double batch_forward(const PwlNetwork& net, const Eigen::MatrixXd& x_cols,
                     const std::vector<int>& labels,
                     std::vector<Eigen::MatrixXd>* pre_out,
                     std::vector<Eigen::MatrixXd>* post_out) {
  const int n = static_cast<int>(x_cols.cols());
  std::vector<Eigen::MatrixXd> pre, post;
  Eigen::MatrixXd cur = x_cols;
  for (const Layer& layer : net.layers) {
    Eigen::MatrixXd z = (layer.weights * cur).colwise() + layer.bias;
    Eigen::MatrixXd a = layer.activation == ActivationKind::kRelu
                            ? z.cwiseMax(0.0).eval()
                            : z;
    pre.push_back(std::move(z));
    cur = a;
    post.push_back(std::move(a));
  }
  const Eigen::MatrixXd& logits = post.back();
  double loss = 0.0;
  for (int j = 0; j < n; ++j) {
    const double m = logits.col(j).maxCoeff();
    const double lse = m + std::log((logits.col(j).array() - m).exp().sum());
    loss += lse - logits(labels[j], j);
  }
  if (pre_out) *pre_out = std::move(pre);
  if (post_out) *post_out = std::move(post);
  return loss / n;
}

}  // namespace

double loss_and_gradient(const PwlNetwork& net, const Eigen::MatrixXd& batch_points,
                         const std::vector<int>& batch_labels, Gradients* grads) {
  const int n = static_cast<int>(batch_points.rows());
  if (n == 0) throw ValidationError("empty batch");
  if (static_cast<int>(batch_labels.size()) != n) {
    throw ValidationError("batch label count does not match point count");
  }
  for (int label : batch_labels) {
    if (label < 0 || label >= net.output_dim()) {
      throw ValidationError("label " + std::to_string(label) +
                            " out of range for output dimension " +
                            std::to_string(net.output_dim()));
    }
  }
  const Eigen::MatrixXd x_cols = batch_points.transpose();
  std::vector<Eigen::MatrixXd> pre, post;
  const double loss = batch_forward(net, x_cols, batch_labels, &pre, &post);
  if (!grads) return loss;

  const int n_layers = net.layer_count();
  grads->weights.assign(n_layers, Eigen::MatrixXd());
  grads->bias.assign(n_layers, Eigen::VectorXd());

  // d loss / d logits = (softmax - onehot) / n
  const Eigen::MatrixXd& logits = post.back();
  Eigen::MatrixXd delta(logits.rows(), logits.cols());
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd p = (logits.col(j).array() - logits.col(j).maxCoeff()).exp();
    p /= p.sum();
    p[batch_labels[j]] -= 1.0;
    delta.col(j) = p / n;
  }

  for (int l = n_layers - 1; l >= 0; --l) {
    if (net.layers[l].activation == ActivationKind::kRelu) {
      delta = ((pre[l].array() > 0.0).cast<double>() * delta.array()).matrix();
    }
    const Eigen::MatrixXd& input = l == 0 ? x_cols : post[l - 1];
    grads->weights[l] = delta * input.transpose();
    grads->bias[l] = delta.rowwise().sum();
    if (l > 0) delta = net.layers[l].weights.transpose() * delta;
  }
  return loss;
}

TrainResult train(const PwlNetwork& net, const LabeledDataset& data,
                  const TrainConfig& cfg) {
  data.validate();
  if (data.size() == 0) throw ValidationError("train: empty dataset");
  if (data.num_classes() != net.output_dim()) {
    throw ValidationError("train: dataset has " + std::to_string(data.num_classes()) +
                          " classes but network outputs " +
                          std::to_string(net.output_dim()));
  }
  if (data.dim() != net.input_dim()) {
    throw ValidationError("train: dataset dimension does not match network input");
  }
  if (cfg.learning_rate < 0.0) throw ValidationError("train: negative learning rate");
  if (cfg.epochs <= 0 || cfg.batch_size <= 0) {
    throw ValidationError("train: epochs and batch_size must be positive");
  }

  TrainResult result;
  result.net = net;
  result.loss_history.reserve(cfg.epochs);
  const int n = data.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(cfg.seed);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (int begin = 0; begin < n; begin += cfg.batch_size) {
      const int size = std::min(cfg.batch_size, n - begin);
      Eigen::MatrixXd batch(size, data.dim());
      std::vector<int> labels(size);
      for (int i = 0; i < size; ++i) {
        batch.row(i) = data.points.row(order[begin + i]);
        labels[i] = data.labels[order[begin + i]];
      }
      Gradients grads;
      const double loss = loss_and_gradient(result.net, batch, labels, &grads);
      if (!std::isfinite(loss)) {
        throw RuntimeFailure("train: loss diverged at epoch " + std::to_string(epoch));
      }
      epoch_loss += loss * size;
      for (int l = 0; l < result.net.layer_count(); ++l) {
        result.net.layers[l].weights -= cfg.learning_rate * grads.weights[l];
        result.net.layers[l].bias -= cfg.learning_rate * grads.bias[l];
      }
    }
    result.loss_history.push_back(epoch_loss / n);
  }
  return result;
}

double classification_accuracy(const PwlNetwork& net, const LabeledDataset& data) {
  int correct = 0;
  for (int i = 0; i < data.size(); ++i) {
    const Eigen::VectorXd logits = forward(net, data.points.row(i).transpose());
    int arg = 0;
    logits.maxCoeff(&arg);
    if (arg == data.labels[i]) ++correct;
  }
  return data.size() == 0 ? 0.0 : static_cast<double>(correct) / data.size();
}

}  // namespace polytope
