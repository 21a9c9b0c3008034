#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "polytope/code.hpp"
#include "polytope/net.hpp"

namespace polytope {

struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

// Exhaustive lattice census of the polytopes a span carves out of a low-
// dimensional input box. Regions thinner than the lattice step can be
// missed; enumerate at a refined resolution (2r-1 nests r) to check
// stability.
struct RegionCensus {
  struct Entry {
    SplineCode code;
    Eigen::VectorXd representative;  // first lattice point seen in the region
    long long count = 0;             // lattice points in the region
  };

  std::vector<Entry> entries;        // in order of first discovery
  std::vector<std::int32_t> cells;   // region index per lattice point, row-major
  Box bounds;
  int resolution = 0;                // points per axis, endpoints included
  LayerSpan span;

  int region_count() const { return static_cast<int>(entries.size()); }
  // Index into entries, or -1 if the code was never seen.
  int find(const SplineCode& code) const;
};

// Evaluates span_code on the full lattice (resolution points per axis,
// inclusive). Input dimension must be at most 3.
RegionCensus enumerate_regions(const PwlNetwork& net, const LayerSpan& span,
                               const Box& bounds, int resolution);

inline constexpr std::uint64_t kRegionCountCap = std::uint64_t{1} << 62;

// min(2^N, sum_{i<=d} C(N, i)): the exact cell count of N generic
// hyperplanes in d dimensions, saturating at kRegionCountCap.
std::uint64_t region_count_bound(int n_neurons, int input_dim);

struct VerifyReport {
  long long points_checked = 0;
  long long violations = 0;
  double max_relative_error = 0.0;
  struct Violation {
    Eigen::VectorXd point;
    int region = 0;
    double relative_error = 0.0;
  };
  std::vector<Violation> examples;  // first few violations
};

// Checks, at every lattice point, that the region affine of the point's code
// reproduces the traced span output within tolerance * (1 + |output|).
VerifyReport verify_regions(const PwlNetwork& net, const LayerSpan& span,
                            const RegionCensus& census, double tolerance);

// Same check against caller-supplied affines (index-aligned with census
// entries); lets tests corrupt a map and watch the report object.
VerifyReport verify_regions_with(const PwlNetwork& net, const LayerSpan& span,
                                 const RegionCensus& census,
                                 const std::vector<RegionAffine>& affines,
                                 double tolerance);

struct AdjacencyGraph {
  struct Edge {
    int a = 0, b = 0;  // census entry indices, a < b
    int hamming = 0;
  };
  std::vector<Edge> edges;  // sorted by (a, b)
};

// Edges between regions that touch across a lattice-adjacent sample pair
// (adjacency along each axis).
AdjacencyGraph adjacency_graph(const RegionCensus& census);

// Single ReLU layer with unit-norm rows and biases in [-1.5, 1.5], redrawn
// until no two hyperplanes are near-parallel (|cos| > 0.999) and, in 2-D,
// no three are near-concurrent. Used for region-count ground truth.
PwlNetwork make_generic_arrangement(int n_neurons, int dim, std::uint64_t seed);

// A box that contains every pairwise hyperplane intersection with generous
// padding, so all cells of the arrangement meet the box.
Box arrangement_bounds(const PwlNetwork& net);

}  // namespace polytope
