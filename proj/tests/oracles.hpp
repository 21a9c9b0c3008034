// Independent reference implementations used to check the library. These are
// deliberately written with plain loops over std::vector so they share no
// code path with the Eigen-based implementation they verify.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace oracles {

struct NaiveLayer {
  std::vector<std::vector<double>> weights;  // [out][in]
  std::vector<double> bias;
  bool relu = true;
};

using NaiveNet = std::vector<NaiveLayer>;

struct NaiveTrace {
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> post;
};

inline NaiveTrace naive_forward(const NaiveNet& net, const std::vector<double>& x) {
  NaiveTrace trace;
  std::vector<double> cur = x;
  for (const NaiveLayer& layer : net) {
    std::vector<double> pre(layer.weights.size(), 0.0);
    for (std::size_t r = 0; r < layer.weights.size(); ++r) {
      double acc = layer.bias[r];
      for (std::size_t c = 0; c < layer.weights[r].size(); ++c) {
        acc += layer.weights[r][c] * cur[c];
      }
      pre[r] = acc;
    }
    std::vector<double> post = pre;
    if (layer.relu) {
      for (double& v : post) v = v > 0.0 ? v : 0.0;
    }
    trace.pre.push_back(pre);
    trace.post.push_back(post);
    cur = post;
  }
  return trace;
}

inline std::vector<int> naive_code_bits(const NaiveNet& net, const std::vector<double>& x) {
  const NaiveTrace trace = naive_forward(net, x);
  std::vector<int> bits;
  for (std::size_t l = 0; l < net.size(); ++l) {
    if (!net[l].relu) continue;
    for (double v : trace.pre[l]) bits.push_back(v > 0.0 ? 1 : 0);
  }
  return bits;
}

inline int naive_hamming(const std::vector<int>& a, const std::vector<int>& b) {
  int distance = 0;
  for (std::size_t i = 0; i < a.size(); ++i) distance += a[i] != b[i];
  return distance;
}

inline double naive_euclidean(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc);
}

// Reference DBSCAN with the same canonical semantics the library documents:
// self-inclusive neighborhoods, components of core points via union-find,
// border points claimed by their nearest core neighbor (ties by index).
struct NaiveDbscan {
  std::vector<int> labels;
  int cluster_count = 0;
};

inline NaiveDbscan naive_dbscan(const std::vector<std::vector<double>>& dist, double eps,
                                int min_pts) {
  const int n = static_cast<int>(dist.size());
  std::vector<bool> core(n, false);
  for (int i = 0; i < n; ++i) {
    int count = 0;
    for (int j = 0; j < n; ++j) {
      if (dist[i][j] <= eps) ++count;
    }
    core[i] = count >= min_pts;
  }

  std::vector<int> parent(n);
  for (int i = 0; i < n; ++i) parent[i] = i;
  std::function<int(int)> find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (int i = 0; i < n; ++i) {
    if (!core[i]) continue;
    for (int j = i + 1; j < n; ++j) {
      if (core[j] && dist[i][j] <= eps) parent[find(i)] = find(j);
    }
  }

  NaiveDbscan result;
  result.labels.assign(n, -1);
  std::vector<int> root_to_id;
  for (int i = 0; i < n; ++i) {
    if (!core[i]) continue;
    const int root = find(i);
    int id = -1;
    for (std::size_t k = 0; k < root_to_id.size(); ++k) {
      if (root_to_id[k] == root) id = static_cast<int>(k);
    }
    if (id == -1) {
      id = static_cast<int>(root_to_id.size());
      root_to_id.push_back(root);
    }
    result.labels[i] = id;
  }
  result.cluster_count = static_cast<int>(root_to_id.size());
  for (int i = 0; i < n; ++i) {
    if (core[i]) continue;
    int best = -1;
    for (int j = 0; j < n; ++j) {
      if (j == i || !core[j] || dist[i][j] > eps) continue;
      if (best == -1 || dist[i][j] < dist[i][best]) best = j;
    }
    if (best != -1) result.labels[i] = result.labels[best];
  }
  return result;
}

// Relabels cluster ids by order of each cluster's smallest member so two
// labelings can be compared structurally.
inline std::vector<int> canonical_labels(const std::vector<int>& labels) {
  std::vector<int> mapping;
  std::vector<int> out(labels.size(), -1);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) continue;
    int id = -1;
    for (std::size_t k = 0; k < mapping.size(); ++k) {
      if (mapping[k] == labels[i]) id = static_cast<int>(k);
    }
    if (id == -1) {
      id = static_cast<int>(mapping.size());
      mapping.push_back(labels[i]);
    }
    out[i] = id;
  }
  return out;
}

}  // namespace oracles
