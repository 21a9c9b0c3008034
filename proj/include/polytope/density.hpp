#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "polytope/code.hpp"
#include "polytope/net.hpp"

namespace polytope {

inline constexpr int kDefaultMaxPairs = 2000;
inline constexpr int kDefaultLocalDensitySamples = 150;
inline constexpr int kDefaultPathSamples = 256;

// Boundary density between two points of the span's input space: spline-code
// Hamming distance divided by Euclidean distance.
double pair_density(const PwlNetwork& net, const LayerSpan& span,
                    const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// Fig-18-style report. Means and samples are normalized by the average raw
// density over every sampled pair (intra and inter together); coincident
// activation pairs are skipped and counted.
struct DensityReport {
  double intra_mean = 0.0;
  double inter_mean = 0.0;
  std::vector<double> intra_samples;
  std::vector<double> inter_samples;
  // Dataset index pairs aligned with the sample vectors.
  std::vector<std::pair<int, int>> intra_pairs;
  std::vector<std::pair<int, int>> inter_pairs;
  double normalization_constant = 0.0;
  int skipped_intra = 0;
  int skipped_inter = 0;
};

// Samples up to max_pairs same-class and max_pairs different-class pairs
// (seeded, without replacement), maps each point to the span's input space
// through the network and reports normalized pair densities.
DensityReport class_density_report(const PwlNetwork& net, const LayerSpan& span,
                                   const LabeledDataset& data, int max_pairs,
                                   std::uint64_t seed);

struct LayerGap {
  int span_start = 0;              // span covers span_start..last layer
  double gap = 0.0;                // inter_mean - intra_mean
  DensityReport report;
};

// One report per span start L (always L..output), for every L whose span
// still contains at least one ReLU layer.
std::vector<LayerGap> layerwise_density_gap(const PwlNetwork& net,
                                            const LabeledDataset& data, int max_pairs,
                                            std::uint64_t seed);

enum class PathMode { kLinear, kSpherical };

struct PathSpec {
  Eigen::VectorXd a;
  Eigen::VectorXd b;
  PathMode mode = PathMode::kLinear;
  int sample_count = kDefaultPathSamples;
};

// n samples with t uniform on [0,1], endpoints included. Spherical mode
// follows the great-circle arc (endpoints must be nonzero, not antiparallel).
std::vector<Eigen::VectorXd> interpolate(const PathSpec& spec);

struct PathCrossings {
  long long total_hamming = 0;
  std::vector<int> per_segment;
  double arc_length = 0.0;
  double density = 0.0;  // total_hamming / arc_length
};

PathCrossings path_crossings(const PwlNetwork& net, const LayerSpan& span,
                             const std::vector<Eigen::VectorXd>& path);

// Monte-Carlo local boundary density: mean pair density between x and
// n_samples points at distance `radius` in seeded uniform directions.
double local_density(const PwlNetwork& net, const LayerSpan& span,
                     const Eigen::VectorXd& x, double radius, int n_samples,
                     std::uint64_t seed);

// 0.05 * |x|, or 0.05 when x is the zero vector.
double default_local_radius(const Eigen::VectorXd& x);

struct SweepResult {
  std::vector<double> alphas;
  Eigen::MatrixXd logits;           // one row per alpha
  std::vector<int> predicted_class;  // argmax, ties to the lowest index
  std::vector<double> local_density;
};

// Scales the hidden vector entering layer_index by each alpha, evaluating
// the rest of the network and the local boundary density around the scaled
// vector (span layer_index..output).
SweepResult scaling_sweep(const PwlNetwork& net, int layer_index,
                          const Eigen::VectorXd& x, const std::vector<double>& alphas,
                          std::uint64_t seed,
                          int density_samples = kDefaultLocalDensitySamples);

// Same sweep along a Gaussian direction whose per-dimension scale matches
// the RMS hidden activation of `reference` at layer_index's input.
SweepResult noise_direction_sweep(const PwlNetwork& net, int layer_index,
                                  const LabeledDataset& reference, std::uint64_t seed,
                                  const std::vector<double>& alphas,
                                  int density_samples = kDefaultLocalDensitySamples);

}  // namespace polytope
