#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "polytope/code.hpp"

namespace polytope {

inline constexpr int kDefaultMinPts = 5;

enum class Metric { kEuclidean, kHamming };

// Condensed upper-triangular pairwise distances ((i,j) with i<j, row-major).
struct DistanceMatrix {
  int n = 0;
  Metric metric = Metric::kEuclidean;
  std::vector<double> condensed;

  double at(int i, int j) const {
    if (i == j) return 0.0;
    if (i > j) std::swap(i, j);
    return condensed[static_cast<std::size_t>(i) * n - static_cast<std::size_t>(i) * (i + 1) / 2 +
                     (j - i - 1)];
  }
};

DistanceMatrix distance_matrix(const std::vector<Eigen::VectorXd>& items);
DistanceMatrix distance_matrix(const std::vector<SplineCode>& codes);

// 0.5 * median pairwise distance: the default eps when none is given.
double default_eps(const DistanceMatrix& dm);

struct ClusterLabels {
  std::vector<int> labels;  // -1 marks noise
  int cluster_count = 0;
};

// Density-based clustering with DBSCAN semantics on a precomputed matrix.
// Core points have >= min_pts neighbors within eps (the point itself
// counts); clusters are the connected components of core points under the
// eps relation, numbered by their smallest member index; non-core points
// join the cluster of their nearest core neighbor within eps (distance
// ties broken by core index), or noise. Up to that canonical numbering the
// result is independent of input order, except for exact distance ties.
ClusterLabels cluster(const DistanceMatrix& dm, double eps, int min_pts);

struct NmfFactors {
  Eigen::MatrixXd w;  // n_samples x k
  Eigen::MatrixXd h;  // k x dim
  std::vector<double> reconstruction_history;  // squared Frobenius error per iteration
};

// Multiplicative-update NMF minimizing |X - WH|_F^2. X must be elementwise
// non-negative (ReLU outputs are; shift pre-activations yourself if needed).
NmfFactors nmf(const Eigen::MatrixXd& x, int k, int iterations, std::uint64_t seed);

struct CosineProfile {
  std::vector<std::vector<double>> per_cluster;  // indexed by cluster id
  std::vector<double> noise;                     // label -1 samples
  int excluded_zero_norm = 0;
};

// Cosine similarity of each activation against `direction`, grouped by
// cluster label. Zero-norm activations are excluded and counted.
CosineProfile cosine_profile(const Eigen::VectorXd& direction,
                             const std::vector<Eigen::VectorXd>& activations,
                             const ClusterLabels& labels);

struct PurityReport {
  std::vector<double> per_cluster;
  std::vector<int> cluster_sizes;
  double mean_purity = 0.0;  // weighted by cluster size, noise excluded
};

// Majority-class fraction per cluster against ground-truth class labels.
PurityReport monosemanticity_score(const ClusterLabels& labels,
                                   const std::vector<int>& class_labels);

// Fraction of point pairs on which two labelings agree (same/same or
// diff/diff). Points marked noise in either labeling are excluded.
double rand_index(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace polytope
