#include "polytope/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "polytope/parallel.hpp"
#include "polytope/rng.hpp"

namespace polytope {

namespace {

template <typename DistanceFn>
DistanceMatrix build_matrix(int n, Metric metric, DistanceFn&& distance) {
  if (n < 2) throw ValidationError("distance_matrix: need at least 2 items");
  DistanceMatrix dm;
  dm.n = n;
  dm.metric = metric;
  dm.condensed.resize(static_cast<std::size_t>(n) * (n - 1) / 2);
  parallel_for(n - 1, [&](std::int64_t i) {
    std::size_t base = static_cast<std::size_t>(i) * n -
                       static_cast<std::size_t>(i) * (i + 1) / 2;
    for (int j = static_cast<int>(i) + 1; j < n; ++j) {
      dm.condensed[base + (j - i - 1)] = distance(static_cast<int>(i), j);
    }
  });
  return dm;
}

}  // namespace

DistanceMatrix distance_matrix(const std::vector<Eigen::VectorXd>& items) {
  for (std::size_t i = 1; i < items.size(); ++i) {
    if (items[i].size() != items[0].size()) {
      throw ValidationError("distance_matrix: mixed dimensions");
    }
  }
  return build_matrix(static_cast<int>(items.size()), Metric::kEuclidean,
                      [&](int i, int j) { return (items[i] - items[j]).norm(); });
}

DistanceMatrix distance_matrix(const std::vector<SplineCode>& codes) {
  return build_matrix(static_cast<int>(codes.size()), Metric::kHamming,
                      [&](int i, int j) {
                        return static_cast<double>(hamming(codes[i], codes[j]));
                      });
}

double default_eps(const DistanceMatrix& dm) {
  std::vector<double> sorted = dm.condensed;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double median =
      n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  return 0.5 * median;
}

ClusterLabels cluster(const DistanceMatrix& dm, double eps, int min_pts) {
  if (!(eps > 0.0)) throw ValidationError("cluster: eps must be positive");
  if (min_pts < 1) throw ValidationError("cluster: min_pts must be >= 1");
  const int n = dm.n;

  std::vector<std::vector<int>> neighbors(n);
  for (int i = 0; i < n; ++i) neighbors[i].push_back(i);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (dm.at(i, j) <= eps) {
        neighbors[i].push_back(j);
        neighbors[j].push_back(i);
      }
    }
  }
  std::vector<bool> core(n);
  for (int i = 0; i < n; ++i) {
    core[i] = static_cast<int>(neighbors[i].size()) >= min_pts;
  }

  ClusterLabels result;
  result.labels.assign(n, -1);
  // Flood each unlabeled core point; components inherit ids in order of
  // their smallest core index.
  for (int i = 0; i < n; ++i) {
    if (!core[i] || result.labels[i] != -1) continue;
    const int id = result.cluster_count++;
    std::vector<int> queue{i};
    result.labels[i] = id;
    while (!queue.empty()) {
      const int p = queue.back();
      queue.pop_back();
      for (int q : neighbors[p]) {
        if (core[q] && result.labels[q] == -1) {
          result.labels[q] = id;
          queue.push_back(q);
        }
      }
    }
  }
  // Border points: the nearest core neighbor decides the cluster (ties by
  // core index), which keeps labels independent of input order.
  for (int i = 0; i < n; ++i) {
    if (core[i]) continue;
    int best = -1;
    for (int q : neighbors[i]) {
      if (q == i || !core[q]) continue;
      if (best == -1 || dm.at(i, q) < dm.at(i, best)) best = q;
    }
    if (best != -1) result.labels[i] = result.labels[best];
  }
  return result;
}

NmfFactors nmf(const Eigen::MatrixXd& x, int k, int iterations, std::uint64_t seed) {
  if (x.rows() < 1 || x.cols() < 1) throw ValidationError("nmf: empty matrix");
  if (x.minCoeff() < 0.0) throw ValidationError("nmf: input must be non-negative");
  if (k < 1) throw ValidationError("nmf: k must be >= 1");
  if (k > std::min(x.rows(), x.cols())) {
    throw ValidationError("nmf: k exceeds min(n_samples, dim)");
  }
  if (iterations < 1) throw ValidationError("nmf: need at least 1 iteration");

  constexpr double kEps = 1e-12;
  const double init_scale = std::sqrt(std::max(x.mean(), kEps) / k);
  Rng rng(seed);
  NmfFactors f;
  f.w.resize(x.rows(), k);
  f.h.resize(k, x.cols());
  for (int i = 0; i < f.w.rows(); ++i) {
    for (int j = 0; j < k; ++j) f.w(i, j) = init_scale * rng.uniform();
  }
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < f.h.cols(); ++j) f.h(i, j) = init_scale * rng.uniform();
  }

  f.reconstruction_history.reserve(iterations);
  for (int it = 0; it < iterations; ++it) {
    // W <- W .* (X H^T) ./ (W H H^T), then H <- H .* (W^T X) ./ (W^T W H)
    const Eigen::MatrixXd hht = f.h * f.h.transpose();
    f.w = (f.w.array() * (x * f.h.transpose()).array() /
           ((f.w * hht).array() + kEps))
              .matrix();
    const Eigen::MatrixXd wtw = f.w.transpose() * f.w;
    f.h = (f.h.array() * (f.w.transpose() * x).array() /
           ((wtw * f.h).array() + kEps))
              .matrix();
    f.reconstruction_history.push_back((x - f.w * f.h).squaredNorm());
  }
  return f;
}

CosineProfile cosine_profile(const Eigen::VectorXd& direction,
                             const std::vector<Eigen::VectorXd>& activations,
                             const ClusterLabels& labels) {
  const double direction_norm = direction.norm();
  if (direction_norm <= 0.0) throw ValidationError("cosine_profile: zero direction");
  if (labels.labels.size() != activations.size()) {
    throw ValidationError("cosine_profile: label count does not match activations");
  }
  CosineProfile profile;
  profile.per_cluster.resize(labels.cluster_count);
  std::vector<double> cosines(activations.size());
  parallel_for(static_cast<std::int64_t>(activations.size()), [&](std::int64_t i) {
    const double norm = activations[i].norm();
    cosines[i] = norm > 0.0 ? direction.dot(activations[i]) / (direction_norm * norm)
                            : std::numeric_limits<double>::quiet_NaN();
  });
  for (std::size_t i = 0; i < activations.size(); ++i) {
    if (std::isnan(cosines[i])) {
      ++profile.excluded_zero_norm;
    } else if (labels.labels[i] < 0) {
      profile.noise.push_back(cosines[i]);
    } else {
      profile.per_cluster[labels.labels[i]].push_back(cosines[i]);
    }
  }
  return profile;
}

PurityReport monosemanticity_score(const ClusterLabels& labels,
                                   const std::vector<int>& class_labels) {
  if (labels.labels.size() != class_labels.size()) {
    throw ValidationError("monosemanticity_score: length mismatch");
  }
  PurityReport report;
  report.per_cluster.assign(labels.cluster_count, 0.0);
  report.cluster_sizes.assign(labels.cluster_count, 0);
  std::vector<std::map<int, int>> counts(labels.cluster_count);
  for (std::size_t i = 0; i < labels.labels.size(); ++i) {
    const int c = labels.labels[i];
    if (c < 0) continue;
    ++counts[c][class_labels[i]];
    ++report.cluster_sizes[c];
  }
  double weighted = 0.0;
  int total = 0;
  for (int c = 0; c < labels.cluster_count; ++c) {
    int best = 0;
    for (const auto& [cls, count] : counts[c]) best = std::max(best, count);
    report.per_cluster[c] =
        report.cluster_sizes[c] > 0
            ? static_cast<double>(best) / report.cluster_sizes[c]
            : 0.0;
    weighted += report.per_cluster[c] * report.cluster_sizes[c];
    total += report.cluster_sizes[c];
  }
  report.mean_purity = total > 0 ? weighted / total : 0.0;
  return report;
}

double rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw ValidationError("rand_index: length mismatch");
  std::vector<int> kept;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] >= 0 && b[i] >= 0) kept.push_back(static_cast<int>(i));
  }
  const std::size_t n = kept.size();
  if (n < 2) return 1.0;
  std::size_t agree = 0, total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool same_a = a[kept[i]] == a[kept[j]];
      const bool same_b = b[kept[i]] == b[kept[j]];
      if (same_a == same_b) ++agree;
      ++total;
    }
  }
  return static_cast<double>(agree) / static_cast<double>(total);
}

}  // namespace polytope
