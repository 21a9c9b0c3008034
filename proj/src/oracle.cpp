#include "polytope/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "polytope/parallel.hpp"
#include "polytope/rng.hpp"

namespace polytope {

namespace {

void check_box(const Box& bounds, int dim) {
  if (bounds.lo.size() != dim || bounds.hi.size() != dim) {
    throw ValidationError("bounds dimension does not match the span input");
  }
  for (int d = 0; d < dim; ++d) {
    if (!(bounds.hi[d] > bounds.lo[d])) {
      throw ValidationError("bounds must have positive extent on every axis");
    }
  }
}

Eigen::VectorXd lattice_point(const Box& bounds, int resolution,
                              const std::vector<int>& index) {
  Eigen::VectorXd p(index.size());
  for (std::size_t d = 0; d < index.size(); ++d) {
    p[d] = bounds.lo[d] +
           (bounds.hi[d] - bounds.lo[d]) * static_cast<double>(index[d]) / (resolution - 1);
  }
  return p;
}

}  // namespace

int RegionCensus::find(const SplineCode& code) const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].code == code) return static_cast<int>(i);
  }
  return -1;
}

RegionCensus enumerate_regions(const PwlNetwork& net, const LayerSpan& span,
                               const Box& bounds, int resolution) {
  span.validate(net);
  const int dim = net.layers[span.start].fan_in();
  if (dim > 3) {
    throw ValidationError("enumerate_regions: input dimension " + std::to_string(dim) +
                          " unsupported (exhaustive lattices need dim <= 3)");
  }
  if (resolution < 8) throw ValidationError("enumerate_regions: resolution must be >= 8");
  check_box(bounds, dim);

  RegionCensus census;
  census.bounds = bounds;
  census.resolution = resolution;
  census.span = span;

  long long total = 1;
  for (int d = 0; d < dim; ++d) total *= resolution;
  census.cells.assign(total, -1);

  // Rows along the first axis evaluate in parallel; codes are packed into a
  // flat word buffer and folded into the census in deterministic row order.
  const SplineCode layout = make_code(net, span);
  const std::size_t words = layout.blocks.size();
  long long row_cells = total / resolution;
  std::vector<std::uint64_t> packed(static_cast<std::size_t>(total) * words);

  parallel_for(resolution, [&](std::int64_t row) {
    std::vector<int> index(dim, 0);
    index[0] = static_cast<int>(row);
    for (long long offset = 0; offset < row_cells; ++offset) {
      long long rest = offset;
      for (int d = dim - 1; d >= 1; --d) {
        index[d] = static_cast<int>(rest % resolution);
        rest /= resolution;
      }
      const SplineCode code = span_code(net, span, lattice_point(bounds, resolution, index));
      const std::size_t cell = static_cast<std::size_t>(row) * row_cells + offset;
      std::copy(code.blocks.begin(), code.blocks.end(), packed.begin() + cell * words);
    }
  });

  std::map<std::vector<std::uint64_t>, int> seen;
  std::vector<std::uint64_t> key(words);
  for (long long cell = 0; cell < total; ++cell) {
    key.assign(packed.begin() + cell * words, packed.begin() + (cell + 1) * words);
    auto it = seen.find(key);
    int id;
    if (it == seen.end()) {
      id = census.region_count();
      seen.emplace(key, id);
      RegionCensus::Entry entry;
      entry.code = layout;
      entry.code.blocks = key;
      std::vector<int> index(dim);
      long long rest = cell;
      for (int d = dim - 1; d >= 0; --d) {
        index[d] = static_cast<int>(rest % resolution);
        rest /= resolution;
      }
      entry.representative = lattice_point(bounds, resolution, index);
      census.entries.push_back(std::move(entry));
    } else {
      id = it->second;
    }
    ++census.entries[id].count;
    census.cells[cell] = id;
  }
  return census;
}

std::uint64_t region_count_bound(int n_neurons, int input_dim) {
  if (n_neurons < 0) throw ValidationError("region_count_bound: n must be >= 0");
  if (input_dim < 1) throw ValidationError("region_count_bound: dim must be >= 1");

  std::uint64_t power = n_neurons >= 62 ? kRegionCountCap
                                        : (std::uint64_t{1} << n_neurons);
  std::uint64_t sum = 0;
  std::uint64_t binom = 1;  // C(n, 0)
  for (int i = 0; i <= std::min(n_neurons, input_dim); ++i) {
    if (i > 0) {
      // C(n, i) = C(n, i-1) * (n-i+1) / i, guarding overflow.
      if (binom > kRegionCountCap / (n_neurons - i + 1)) {
        sum = kRegionCountCap;
        break;
      }
      binom = binom * (n_neurons - i + 1) / i;
    }
    if (sum > kRegionCountCap - binom) {
      sum = kRegionCountCap;
      break;
    }
    sum += binom;
  }
  return std::min(power, std::min(sum, kRegionCountCap));
}

VerifyReport verify_regions_with(const PwlNetwork& net, const LayerSpan& span,
                                 const RegionCensus& census,
                                 const std::vector<RegionAffine>& affines,
                                 double tolerance) {
  span.validate(net);
  if (static_cast<int>(affines.size()) != census.region_count()) {
    throw ValidationError("verify_regions: affine count does not match census");
  }
  const int dim = net.layers[span.start].fan_in();
  const int resolution = census.resolution;
  long long row_cells = static_cast<long long>(census.cells.size()) / resolution;

  struct RowResult {
    long long violations = 0;
    double max_relative_error = 0.0;
    std::vector<VerifyReport::Violation> examples;
  };
  std::vector<RowResult> rows(resolution);

  parallel_for(resolution, [&](std::int64_t row) {
    RowResult& r = rows[row];
    std::vector<int> index(dim, 0);
    index[0] = static_cast<int>(row);
    for (long long offset = 0; offset < row_cells; ++offset) {
      long long rest = offset;
      for (int d = dim - 1; d >= 1; --d) {
        index[d] = static_cast<int>(rest % resolution);
        rest /= resolution;
      }
      const Eigen::VectorXd p = lattice_point(census.bounds, resolution, index);
      const int id = census.cells[row * row_cells + offset];
      const Eigen::VectorXd truth = span_output(net, span, p);
      const Eigen::VectorXd predicted = apply_region_affine(affines[id], p);
      const double rel = (predicted - truth).norm() / (1.0 + truth.norm());
      r.max_relative_error = std::max(r.max_relative_error, rel);
      if (rel > tolerance) {
        ++r.violations;
        if (r.examples.size() < 8) {
          r.examples.push_back({p, id, rel});
        }
      }
    }
  });

  VerifyReport report;
  report.points_checked = static_cast<long long>(census.cells.size());
  for (const RowResult& r : rows) {
    report.violations += r.violations;
    report.max_relative_error = std::max(report.max_relative_error, r.max_relative_error);
    for (const auto& v : r.examples) {
      if (report.examples.size() < 32) report.examples.push_back(v);
    }
  }
  return report;
}

VerifyReport verify_regions(const PwlNetwork& net, const LayerSpan& span,
                            const RegionCensus& census, double tolerance) {
  std::vector<RegionAffine> affines;
  affines.reserve(census.region_count());
  for (const auto& entry : census.entries) {
    affines.push_back(region_affine(net, entry.code));
  }
  return verify_regions_with(net, span, census, affines, tolerance);
}

AdjacencyGraph adjacency_graph(const RegionCensus& census) {
  if (census.resolution < 32) {
    throw ValidationError("adjacency_graph: census resolution must be >= 32");
  }
  const int resolution = census.resolution;
  const int dim = static_cast<int>(census.bounds.lo.size());
  long long stride = 1;
  std::vector<long long> strides(dim);
  for (int d = dim - 1; d >= 0; --d) {
    strides[d] = stride;
    stride *= resolution;
  }

  std::map<std::pair<int, int>, int> edges;
  std::vector<int> index(dim, 0);
  const long long total = static_cast<long long>(census.cells.size());
  for (long long cell = 0; cell < total; ++cell) {
    long long rest = cell;
    for (int d = dim - 1; d >= 0; --d) {
      index[d] = static_cast<int>(rest % resolution);
      rest /= resolution;
    }
    const int a = census.cells[cell];
    for (int d = 0; d < dim; ++d) {
      if (index[d] + 1 >= resolution) continue;
      const int b = census.cells[cell + strides[d]];
      if (a == b) continue;
      const auto key = std::minmax(a, b);
      if (!edges.contains({key.first, key.second})) {
        edges[{key.first, key.second}] =
            hamming(census.entries[a].code, census.entries[b].code);
      }
    }
  }

  AdjacencyGraph graph;
  graph.edges.reserve(edges.size());
  for (const auto& [key, distance] : edges) {
    graph.edges.push_back({key.first, key.second, distance});
  }
  return graph;
}

PwlNetwork make_generic_arrangement(int n_neurons, int dim, std::uint64_t seed) {
  if (n_neurons < 1) throw ValidationError("make_generic_arrangement: need >= 1 neuron");
  if (dim < 1) throw ValidationError("make_generic_arrangement: dim must be >= 1");

  for (std::uint64_t attempt = 0; attempt < 1000; ++attempt) {
    Rng rng(mix_seed(seed, attempt));
    Eigen::MatrixXd w(n_neurons, dim);
    Eigen::VectorXd b(n_neurons);
    for (int i = 0; i < n_neurons; ++i) {
      Eigen::VectorXd row = rng.unit_vector(dim);
      w.row(i) = row.transpose();
      b[i] = rng.uniform(-1.5, 1.5);
    }

    bool generic = true;
    for (int i = 0; i < n_neurons && generic; ++i) {
      for (int j = i + 1; j < n_neurons && generic; ++j) {
        if (std::abs(w.row(i).dot(w.row(j))) > 0.999) generic = false;
      }
    }
    if (generic && dim == 2) {
      // No three lines nearly through one point.
      for (int i = 0; i < n_neurons && generic; ++i) {
        for (int j = i + 1; j < n_neurons && generic; ++j) {
          Eigen::Matrix2d m;
          m.row(0) = w.row(i);
          m.row(1) = w.row(j);
          const Eigen::Vector2d p = m.partialPivLu().solve(Eigen::Vector2d(-b[i], -b[j]));
          for (int k = 0; k < n_neurons && generic; ++k) {
            if (k == i || k == j) continue;
            if (std::abs(w.row(k).dot(p) + b[k]) < 0.05) generic = false;
          }
        }
      }
    }
    if (!generic) continue;

    PwlNetwork net;
    Layer layer;
    layer.weights = std::move(w);
    layer.bias = std::move(b);
    layer.activation = ActivationKind::kRelu;
    net.layers.push_back(std::move(layer));
    return net;
  }
  throw RuntimeFailure("make_generic_arrangement: could not find a generic draw");
}

Box arrangement_bounds(const PwlNetwork& net) {
  const Layer& layer = net.layers.front();
  const int dim = layer.fan_in();
  Box box;
  box.lo = Eigen::VectorXd::Constant(dim, -2.0);
  box.hi = Eigen::VectorXd::Constant(dim, 2.0);
  if (dim != 2 || layer.fan_out() < 2) return box;

  for (int i = 0; i < layer.fan_out(); ++i) {
    for (int j = i + 1; j < layer.fan_out(); ++j) {
      Eigen::Matrix2d m;
      m.row(0) = layer.weights.row(i);
      m.row(1) = layer.weights.row(j);
      if (std::abs(m.determinant()) < 1e-9) continue;
      const Eigen::Vector2d p =
          m.partialPivLu().solve(Eigen::Vector2d(-layer.bias[i], -layer.bias[j]));
      for (int d = 0; d < 2; ++d) {
        box.lo[d] = std::min(box.lo[d], p[d]);
        box.hi[d] = std::max(box.hi[d], p[d]);
      }
    }
  }
  const Eigen::VectorXd pad =
      0.5 * (box.hi - box.lo) + Eigen::VectorXd::Constant(dim, 1.0);
  box.lo -= pad;
  box.hi += pad;
  return box;
}

}  // namespace polytope
