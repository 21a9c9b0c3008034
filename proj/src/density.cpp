#include "polytope/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "polytope/parallel.hpp"
#include "polytope/rng.hpp"

namespace polytope {

namespace {
constexpr double kCoincidentDistance = 1e-12;
}

double pair_density(const PwlNetwork& net, const LayerSpan& span,
                    const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const double distance = (x - y).norm();
  if (distance <= kCoincidentDistance) {
    throw ValidationError("pair_density: points coincide, density undefined");
  }
  return hamming(span_code(net, span, x), span_code(net, span, y)) / distance;
}

namespace {

struct PairSet {
  std::vector<std::pair<int, int>> intra;
  std::vector<std::pair<int, int>> inter;
};

PairSet sample_pairs(const LabeledDataset& data, int max_pairs, std::uint64_t seed) {
  PairSet all;
  for (int i = 0; i < data.size(); ++i) {
    for (int j = i + 1; j < data.size(); ++j) {
      (data.labels[i] == data.labels[j] ? all.intra : all.inter).emplace_back(i, j);
    }
  }
  auto take = [max_pairs](std::vector<std::pair<int, int>>& pairs, Rng& rng) {
    if (static_cast<int>(pairs.size()) <= max_pairs) return;
    for (int t = 0; t < max_pairs; ++t) {
      const std::size_t pick =
          t + rng.uniform_int(static_cast<std::uint64_t>(pairs.size() - t));
      std::swap(pairs[t], pairs[pick]);
    }
    pairs.resize(max_pairs);
  };
  Rng rng_intra(mix_seed(seed, 1));
  Rng rng_inter(mix_seed(seed, 2));
  take(all.intra, rng_intra);
  take(all.inter, rng_inter);
  return all;
}

}  // namespace

DensityReport class_density_report(const PwlNetwork& net, const LayerSpan& span,
                                   const LabeledDataset& data, int max_pairs,
                                   std::uint64_t seed) {
  span.validate(net);
  data.validate();
  if (max_pairs < 1) throw ValidationError("class_density_report: max_pairs must be >= 1");
  if (data.num_classes() < 2) {
    throw ValidationError("class_density_report: need at least 2 classes");
  }
  std::vector<int> per_class(data.num_classes(), 0);
  for (int label : data.labels) ++per_class[label];
  for (int c = 0; c < data.num_classes(); ++c) {
    if (per_class[c] < 2) {
      throw ValidationError("class_density_report: class " + std::to_string(c) +
                            " has fewer than 2 points");
    }
  }

  // Span-input activation and code for every point.
  const int n = data.size();
  std::vector<Eigen::VectorXd> activations(n);
  std::vector<SplineCode> codes(n);
  parallel_for(n, [&](std::int64_t i) {
    const ActivationTrace trace = forward_traced(net, data.points.row(i).transpose());
    activations[i] = span.start == 0 ? trace.input : trace.post_at(span.start - 1);
    codes[i] = extract_code(trace, net, span);
  });

  const PairSet pairs = sample_pairs(data, max_pairs, seed);

  auto densities = [&](const std::vector<std::pair<int, int>>& group,
                       std::vector<double>* out,
                       std::vector<std::pair<int, int>>* kept) {
    int skipped = 0;
    out->reserve(group.size());
    std::vector<double> values(group.size());
    parallel_for(static_cast<std::int64_t>(group.size()), [&](std::int64_t g) {
      const auto [i, j] = group[g];
      const double distance = (activations[i] - activations[j]).norm();
      values[g] = distance <= kCoincidentDistance
                      ? -1.0
                      : hamming(codes[i], codes[j]) / distance;
    });
    for (std::size_t g = 0; g < values.size(); ++g) {
      if (values[g] < 0.0) {
        ++skipped;
      } else {
        out->push_back(values[g]);
        kept->push_back(group[g]);
      }
    }
    return skipped;
  };

  DensityReport report;
  report.skipped_intra = densities(pairs.intra, &report.intra_samples, &report.intra_pairs);
  report.skipped_inter = densities(pairs.inter, &report.inter_samples, &report.inter_pairs);
  if (report.intra_samples.empty() || report.inter_samples.empty()) {
    throw ValidationError("class_density_report: no valid pairs (coincident activations)");
  }

  double total = 0.0;
  for (double v : report.intra_samples) total += v;
  for (double v : report.inter_samples) total += v;
  const double count =
      static_cast<double>(report.intra_samples.size() + report.inter_samples.size());
  report.normalization_constant = total / count;

  if (report.normalization_constant > 0.0) {
    for (double& v : report.intra_samples) v /= report.normalization_constant;
    for (double& v : report.inter_samples) v /= report.normalization_constant;
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  report.intra_mean = mean(report.intra_samples);
  report.inter_mean = mean(report.inter_samples);
  return report;
}

std::vector<LayerGap> layerwise_density_gap(const PwlNetwork& net,
                                            const LabeledDataset& data, int max_pairs,
                                            std::uint64_t seed) {
  std::vector<LayerGap> gaps;
  for (int start = 0; start < net.layer_count(); ++start) {
    const LayerSpan span{start, net.layer_count() - start};
    if (make_code(net, span).m == 0) continue;  // no ReLU bits left of the output
    LayerGap gap;
    gap.span_start = start;
    gap.report = class_density_report(net, span, data, max_pairs, mix_seed(seed, start));
    gap.gap = gap.report.inter_mean - gap.report.intra_mean;
    gaps.push_back(std::move(gap));
  }
  if (gaps.empty()) {
    throw ValidationError("layerwise_density_gap: network has no ReLU layers");
  }
  return gaps;
}

std::vector<Eigen::VectorXd> interpolate(const PathSpec& spec) {
  if (spec.a.size() != spec.b.size()) {
    throw ValidationError("interpolate: endpoint dimensions differ");
  }
  if (spec.sample_count < 2) {
    throw ValidationError("interpolate: need at least 2 samples");
  }
  const int n = spec.sample_count;
  std::vector<Eigen::VectorXd> path(n);

  if (spec.mode == PathMode::kLinear) {
    for (int i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / (n - 1);
      path[i] = spec.a + t * (spec.b - spec.a);
    }
    return path;
  }

  const double norm_a = spec.a.norm();
  const double norm_b = spec.b.norm();
  if (norm_a < 1e-12 || norm_b < 1e-12) {
    throw ValidationError("interpolate: spherical endpoints must be nonzero");
  }
  const double cos_angle =
      std::clamp(spec.a.dot(spec.b) / (norm_a * norm_b), -1.0, 1.0);
  const double angle = std::acos(cos_angle);
  if (angle > std::numbers::pi - 1e-9) {
    throw ValidationError("interpolate: antiparallel endpoints make slerp degenerate");
  }
  if (angle < 1e-12) {
    // Parallel endpoints: the arc is a straight segment.
    for (int i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / (n - 1);
      path[i] = spec.a + t * (spec.b - spec.a);
    }
    return path;
  }
  const double sin_angle = std::sin(angle);
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / (n - 1);
    path[i] = (std::sin((1.0 - t) * angle) * spec.a + std::sin(t * angle) * spec.b) /
              sin_angle;
  }
  return path;
}

PathCrossings path_crossings(const PwlNetwork& net, const LayerSpan& span,
                             const std::vector<Eigen::VectorXd>& path) {
  if (path.size() < 2) throw ValidationError("path_crossings: need at least 2 points");
  const int n = static_cast<int>(path.size());
  std::vector<SplineCode> codes(n);
  parallel_for(n, [&](std::int64_t i) { codes[i] = span_code(net, span, path[i]); });

  PathCrossings result;
  result.per_segment.resize(n - 1);
  for (int i = 0; i + 1 < n; ++i) {
    result.per_segment[i] = hamming(codes[i], codes[i + 1]);
    result.total_hamming += result.per_segment[i];
    result.arc_length += (path[i + 1] - path[i]).norm();
  }
  if (result.arc_length <= 0.0) {
    throw ValidationError("path_crossings: zero arc length");
  }
  result.density = static_cast<double>(result.total_hamming) / result.arc_length;
  return result;
}

double default_local_radius(const Eigen::VectorXd& x) {
  const double norm = x.norm();
  return norm > 0.0 ? 0.05 * norm : 0.05;
}

double local_density(const PwlNetwork& net, const LayerSpan& span,
                     const Eigen::VectorXd& x, double radius, int n_samples,
                     std::uint64_t seed) {
  if (!(radius > 0.0)) throw ValidationError("local_density: radius must be positive");
  if (n_samples < 1) throw ValidationError("local_density: need at least 1 sample");
  const SplineCode center = span_code(net, span, x);
  std::vector<double> values(n_samples);
  parallel_for(n_samples, [&](std::int64_t s) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(s)));
    const Eigen::VectorXd direction = rng.unit_vector(static_cast<int>(x.size()));
    const Eigen::VectorXd probe = x + radius * direction;
    values[s] = hamming(center, span_code(net, span, probe)) / radius;
  });
  double total = 0.0;
  for (double v : values) total += v;
  return total / n_samples;
}

namespace {

SweepResult sweep_direction(const PwlNetwork& net, int layer_index,
                            const Eigen::VectorXd& base, const std::vector<double>& alphas,
                            std::uint64_t seed, int density_samples) {
  if (alphas.empty()) throw ValidationError("sweep: alpha list is empty");
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (alphas[i] < 0.0) throw ValidationError("sweep: alphas must be non-negative");
    if (i > 0 && !(alphas[i] > alphas[i - 1])) {
      throw ValidationError("sweep: alphas must be strictly increasing");
    }
  }
  const LayerSpan span{layer_index, net.layer_count() - layer_index};
  span.validate(net);

  const int n = static_cast<int>(alphas.size());
  SweepResult result;
  result.alphas = alphas;
  result.logits.resize(n, net.output_dim());
  result.predicted_class.resize(n);
  result.local_density.resize(n);

  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd h = alphas[i] * base;
    const ActivationTrace trace = forward_from_layer(net, layer_index, h);
    result.logits.row(i) = trace.logits().transpose();
    int best = 0;
    for (int c = 1; c < net.output_dim(); ++c) {
      if (trace.logits()[c] > trace.logits()[best]) best = c;
    }
    result.predicted_class[i] = best;
    result.local_density[i] =
        local_density(net, span, h, default_local_radius(h), density_samples,
                      mix_seed(seed, static_cast<std::uint64_t>(i)));
  }
  return result;
}

}  // namespace

SweepResult scaling_sweep(const PwlNetwork& net, int layer_index,
                          const Eigen::VectorXd& x, const std::vector<double>& alphas,
                          std::uint64_t seed, int density_samples) {
  const ActivationTrace trace = forward_traced(net, x);
  const Eigen::VectorXd base =
      layer_index == 0 ? x : trace.post_at(layer_index - 1);
  return sweep_direction(net, layer_index, base, alphas, seed, density_samples);
}

SweepResult noise_direction_sweep(const PwlNetwork& net, int layer_index,
                                  const LabeledDataset& reference, std::uint64_t seed,
                                  const std::vector<double>& alphas,
                                  int density_samples) {
  if (layer_index < 0 || layer_index >= net.layer_count()) {
    throw ValidationError("noise_direction_sweep: layer index out of range");
  }
  if (reference.size() == 0) {
    throw ValidationError("noise_direction_sweep: empty reference dataset");
  }
  const int dim = net.layers[layer_index].fan_in();
  Eigen::VectorXd mean_square = Eigen::VectorXd::Zero(dim);
  for (int i = 0; i < reference.size(); ++i) {
    const ActivationTrace trace = forward_traced(net, reference.points.row(i).transpose());
    const Eigen::VectorXd h =
        layer_index == 0 ? trace.input : trace.post_at(layer_index - 1);
    mean_square += h.cwiseProduct(h);
  }
  const Eigen::VectorXd scale = (mean_square / reference.size()).cwiseSqrt();

  Rng rng(mix_seed(seed, 0xd12ec7));
  Eigen::VectorXd base(dim);
  for (int d = 0; d < dim; ++d) base[d] = scale[d] * rng.normal();
  return sweep_direction(net, layer_index, base, alphas, seed, density_samples);
}

}  // namespace polytope
