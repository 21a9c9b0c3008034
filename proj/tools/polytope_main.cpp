// polytope: analyze piecewise-linear networks through their polytope
// partition. Every stochastic subcommand takes an explicit --seed and writes
// a manifest beside its outputs so runs can be reproduced exactly.

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "polytope/cluster.hpp"
#include "polytope/code.hpp"
#include "polytope/density.hpp"
#include "polytope/io.hpp"
#include "polytope/net.hpp"
#include "polytope/oracle.hpp"
#include "polytope/parallel.hpp"
#include "polytope/rng.hpp"
#include "polytope/slice.hpp"
#include "polytope/stats.hpp"
#include "polytope/version.hpp"

namespace fs = std::filesystem;
using namespace polytope;

namespace {

std::string fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  std::uint64_t hash = 0xcbf29ce484222325ull;
  char buffer[4096];
  while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(buffer[i]);
      hash *= 0x100000001b3ull;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));
  return hex;
}

// Collects argument echoes and input digests for the run manifest. No
// timestamps: outputs must be byte-identical across reruns.
class Manifest {
 public:
  explicit Manifest(std::string command) : command_(std::move(command)) {}

  void arg(const std::string& name, const std::string& value) { args_[name] = value; }
  void arg(const std::string& name, double value) { args_[name] = format_double(value); }
  void arg(const std::string& name, std::int64_t value) { args_[name] = std::to_string(value); }
  void input(const std::string& role, const std::string& path) {
    inputs_[role] = fnv1a64_file(path);
  }

  void write(const fs::path& dir) const {
    std::ofstream out(dir / "manifest.txt");
    if (!out) throw RuntimeFailure("cannot write manifest in " + dir.string());
    out << "tool=polytope " << kVersion << "\n";
    out << "command=" << command_ << "\n";
    for (const auto& [name, value] : args_) out << "arg." << name << "=" << value << "\n";
    for (const auto& [role, digest] : inputs_) {
      out << "input." << role << "=fnv64:" << digest << "\n";
    }
  }

 private:
  std::string command_;
  std::map<std::string, std::string> args_;
  std::map<std::string, std::string> inputs_;
};

fs::path ensure_dir(const std::string& out) {
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw RuntimeFailure("cannot create output directory " + out);
  return dir;
}

std::ofstream open_csv(const fs::path& path, const std::string& header) {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  out << header << "\n";
  return out;
}

Eigen::VectorXd parse_vector(const std::string& text) {
  const std::vector<double> values = parse_number_list(text);
  Eigen::VectorXd v(static_cast<int>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v[i] = values[i];
  return v;
}

LayerSpan span_from(const std::vector<int>& lk, const PwlNetwork& net) {
  LayerSpan span{lk[0], lk[1] + 1};
  span.validate(net);
  return span;
}

std::vector<int> parse_sizes(const std::string& text) {
  std::vector<int> sizes;
  for (double v : parse_number_list(text)) {
    if (v <= 0 || v != static_cast<int>(v)) {
      throw ValidationError("layer sizes must be positive integers");
    }
    sizes.push_back(static_cast<int>(v));
  }
  return sizes;
}

std::vector<double> alpha_grid(double alpha_max, int count) {
  if (count < 2 || !(alpha_max > 0)) {
    throw ValidationError("need alpha-count >= 2 and alpha-max > 0");
  }
  std::vector<double> alphas(count);
  for (int i = 0; i < count; ++i) alphas[i] = alpha_max * i / (count - 1);
  return alphas;
}

std::string offsets_string(const SplineCode& code) {
  std::string text;
  for (std::size_t i = 0; i < code.layer_offsets.size(); ++i) {
    if (i) text += ",";
    text += std::to_string(code.layer_offsets[i]);
  }
  return text;
}

// Span-input activation of a data point (the vector entering layer `start`).
Eigen::VectorXd span_input_activation(const PwlNetwork& net, int start,
                                      const Eigen::VectorXd& x) {
  const ActivationTrace trace = forward_traced(net, x);
  return start == 0 ? trace.input : trace.post_at(start - 1);
}

void write_sweep_csv(const fs::path& path, const SweepResult& sweep) {
  std::string header = "alpha,predicted_class,local_density";
  for (int c = 0; c < sweep.logits.cols(); ++c) header += ",logit_" + std::to_string(c);
  auto out = open_csv(path, header);
  for (std::size_t i = 0; i < sweep.alphas.size(); ++i) {
    out << format_double(sweep.alphas[i]) << "," << sweep.predicted_class[i] << ","
        << format_double(sweep.local_density[i]);
    for (int c = 0; c < sweep.logits.cols(); ++c) {
      out << "," << format_double(sweep.logits(i, c));
    }
    out << "\n";
  }
}

struct SweepShape {
  double peak_alpha = 0.0;
  double max_over_median = 0.0;
  bool peak_interior = false;  // argmax strictly inside (0, 1)
};

SweepShape sweep_shape(const SweepResult& sweep) {
  SweepShape shape;
  std::size_t best = 0;
  for (std::size_t i = 1; i < sweep.local_density.size(); ++i) {
    if (sweep.local_density[i] > sweep.local_density[best]) best = i;
  }
  shape.peak_alpha = sweep.alphas[best];
  std::vector<double> sorted = sweep.local_density;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted[sorted.size() / 2];
  shape.max_over_median = median > 0 ? sweep.local_density[best] / median
                                     : std::numeric_limits<double>::infinity();
  shape.peak_interior = shape.peak_alpha > 0.0 && shape.peak_alpha < 1.0;
  return shape;
}

void write_density_outputs(const fs::path& dir, const DensityReport& report,
                           std::uint64_t seed, double level, int resamples) {
  {
    auto out = open_csv(dir / "pairs.csv",
                        "group,index_a,index_b,normalized_density,raw_density");
    for (std::size_t g = 0; g < report.intra_samples.size(); ++g) {
      out << "intra," << report.intra_pairs[g].first << "," << report.intra_pairs[g].second
          << "," << format_double(report.intra_samples[g]) << ","
          << format_double(report.intra_samples[g] * report.normalization_constant) << "\n";
    }
    for (std::size_t g = 0; g < report.inter_samples.size(); ++g) {
      out << "inter," << report.inter_pairs[g].first << "," << report.inter_pairs[g].second
          << "," << format_double(report.inter_samples[g]) << ","
          << format_double(report.inter_samples[g] * report.normalization_constant) << "\n";
    }
  }
  const WelchResult welch = welch_t(report.intra_samples, report.inter_samples);
  const BootstrapCi intra_ci = bootstrap_ci(report.intra_samples, BootstrapStatistic::kMean,
                                            level, resamples, mix_seed(seed, 0xc1));
  const BootstrapCi inter_ci = bootstrap_ci(report.inter_samples, BootstrapStatistic::kMean,
                                            level, resamples, mix_seed(seed, 0xc2));
  auto out = open_csv(dir / "summary.csv",
                      "intra_mean,inter_mean,gap,normalization_constant,n_intra,n_inter,"
                      "skipped_intra,skipped_inter,welch_t,welch_dof,welch_p,"
                      "ci_level,intra_ci_low,intra_ci_high,inter_ci_low,inter_ci_high");
  out << format_double(report.intra_mean) << "," << format_double(report.inter_mean) << ","
      << format_double(report.inter_mean - report.intra_mean) << ","
      << format_double(report.normalization_constant) << "," << report.intra_samples.size()
      << "," << report.inter_samples.size() << "," << report.skipped_intra << ","
      << report.skipped_inter << "," << format_double(welch.t) << ","
      << format_double(welch.dof) << "," << format_double(welch.p_two_sided) << ","
      << format_double(level) << "," << format_double(intra_ci.low) << ","
      << format_double(intra_ci.high) << "," << format_double(inter_ci.low) << ","
      << format_double(inter_ci.high) << "\n";
}

void write_census_csv(const fs::path& path, const RegionCensus& census) {
  const int dim = static_cast<int>(census.bounds.lo.size());
  std::string header = "code_hex,count";
  for (int d = 0; d < dim; ++d) header += ",rep_" + std::to_string(d);
  auto out = open_csv(path, header);
  for (const auto& entry : census.entries) {
    out << code_to_hex(entry.code) << "," << entry.count;
    for (int d = 0; d < dim; ++d) out << "," << format_double(entry.representative[d]);
    out << "\n";
  }
}

// ---------------------------------------------------------------------------
// Subcommand handlers. Validation issues surface as ValidationError (exit 2),
// runtime problems as other exceptions (exit 1).

struct GenDataArgs {
  int k = 3, n = 100, dim = 2;
  double spread = 0.8;
  std::uint64_t seed = 0;
  std::string out;
};

void run_gen_data(const GenDataArgs& a) {
  const fs::path dir = ensure_dir(a.out);
  const LabeledDataset data = make_blobs(a.k, a.n, a.dim, a.spread, a.seed);
  save_dataset(data, (dir / "data.csv").string());
  Manifest m("gen-data");
  m.arg("k", static_cast<std::int64_t>(a.k));
  m.arg("n", static_cast<std::int64_t>(a.n));
  m.arg("dim", static_cast<std::int64_t>(a.dim));
  m.arg("spread", a.spread);
  m.arg("seed", static_cast<std::int64_t>(a.seed));
  m.write(dir);
  std::cout << "wrote " << (dir / "data.csv").string() << " (" << data.size()
            << " points)\n";
}

struct TrainArgs {
  std::string data, layers, out;
  double lr = 0.05;
  int epochs = 200, batch = 32;
  std::uint64_t seed = 0;
};

void run_train(const TrainArgs& a) {
  const fs::path dir = ensure_dir(a.out);
  const LabeledDataset data = load_dataset(a.data);
  const std::vector<int> sizes = parse_sizes(a.layers);
  TrainConfig cfg;
  cfg.learning_rate = a.lr;
  cfg.epochs = a.epochs;
  cfg.batch_size = a.batch;
  cfg.seed = mix_seed(a.seed, 0xb);
  const TrainResult result = train(init_random(sizes, mix_seed(a.seed, 0xa)), data, cfg);
  save_network(result.net, (dir / "net.json").string());
  {
    auto out = open_csv(dir / "loss.csv", "epoch,loss");
    for (std::size_t e = 0; e < result.loss_history.size(); ++e) {
      out << e << "," << format_double(result.loss_history[e]) << "\n";
    }
  }
  Manifest m("train");
  m.arg("layers", a.layers);
  m.arg("lr", a.lr);
  m.arg("epochs", static_cast<std::int64_t>(a.epochs));
  m.arg("batch-size", static_cast<std::int64_t>(a.batch));
  m.arg("seed", static_cast<std::int64_t>(a.seed));
  m.input("data", a.data);
  m.write(dir);
  std::cout << "final loss " << format_double(result.loss_history.back())
            << ", training accuracy "
            << format_double(classification_accuracy(result.net, data)) << "\n";
}

void run_code(const std::string& net_path, const std::string& input,
              const std::vector<int>& lk) {
  const PwlNetwork net = load_network(net_path);
  const LayerSpan span = span_from(lk, net);
  const SplineCode code = span_code(net, span, parse_vector(input));
  std::cout << "L=" << span.start << " K=" << span.count - 1 << " M=" << code.m
            << " offsets=" << offsets_string(code) << " hex=" << code_to_hex(code) << "\n";
}

struct DensityArgs {
  std::string net, data, out;
  std::vector<int> lk;
  int max_pairs = kDefaultMaxPairs;
  std::uint64_t seed = 0;
  double level = 0.99;
  int resamples = kDefaultBootstrapResamples;
};

void run_density(const DensityArgs& a) {
  const fs::path dir = ensure_dir(a.out);
  const PwlNetwork net = load_network(a.net);
  const LabeledDataset data = load_dataset(a.data);
  const LayerSpan span = span_from(a.lk, net);
  const DensityReport report = class_density_report(net, span, data, a.max_pairs, a.seed);
  write_density_outputs(dir, report, a.seed, a.level, a.resamples);
  Manifest m("density");
  m.arg("span", std::to_string(a.lk[0]) + " " + std::to_string(a.lk[1]));
  m.arg("max-pairs", static_cast<std::int64_t>(a.max_pairs));
  m.arg("seed", static_cast<std::int64_t>(a.seed));
  m.arg("level", a.level);
  m.arg("resamples", static_cast<std::int64_t>(a.resamples));
  m.input("net", a.net);
  m.input("data", a.data);
  m.write(dir);
  std::cout << "intra " << format_double(report.intra_mean) << ", inter "
            << format_double(report.inter_mean) << "\n";
}

struct LayerGapArgs {
  std::string net, data, out;
  int max_pairs = kDefaultMaxPairs;
  std::uint64_t seed = 0;
};

void run_layer_gap(const LayerGapArgs& a) {
  const fs::path dir = ensure_dir(a.out);
  const PwlNetwork net = load_network(a.net);
  const LabeledDataset data = load_dataset(a.data);
  const auto gaps = layerwise_density_gap(net, data, a.max_pairs, a.seed);
  auto out = open_csv(dir / "layer_gap.csv",
                      "span_start,intra_mean,inter_mean,gap,welch_t,welch_p");
  for (const LayerGap& gap : gaps) {
    const WelchResult welch = welch_t(gap.report.intra_samples, gap.report.inter_samples);
    out << gap.span_start << "," << format_double(gap.report.intra_mean) << ","
        << format_double(gap.report.inter_mean) << "," << format_double(gap.gap) << ","
        << format_double(welch.t) << "," << format_double(welch.p_two_sided) << "\n";
  }
  Manifest m("layer-gap");
  m.arg("max-pairs", static_cast<std::int64_t>(a.max_pairs));
  m.arg("seed", static_cast<std::int64_t>(a.seed));
  m.input("net", a.net);
  m.input("data", a.data);
  m.write(dir);
}

struct InterpolateArgs {
  std::string net, out, a_text, b_text, data, mode = "linear";
  int index_a = -1, index_b = -1;
  std::vector<int> lk;
  int samples = kDefaultPathSamples;
  int local_samples = kDefaultLocalDensitySamples;
  std::uint64_t seed = 0;
};

void run_interpolate(const InterpolateArgs& a) {
  const fs::path dir = ensure_dir(a.out);
  const PwlNetwork net = load_network(a.net);
  const LayerSpan span = span_from(a.lk, net);

  PathSpec spec;
  spec.mode = a.mode == "spherical" ? PathMode::kSpherical : PathMode::kLinear;
  spec.sample_count = a.samples;
  Manifest m("interpolate");
  if (!a.data.empty()) {
    const LabeledDataset data = load_dataset(a.data);
    if (a.index_a < 0 || a.index_b < 0 || a.index_a >= data.size() ||
        a.index_b >= data.size()) {
      throw ValidationError("interpolate: --index-a/--index-b out of range");
    }
    spec.a = span_input_activation(net, span.start, data.points.row(a.index_a).transpose());
    spec.b = span_input_activation(net, span.start, data.points.row(a.index_b).transpose());
    m.input("data", a.data);
    m.arg("index-a", static_cast<std::int64_t>(a.index_a));
    m.arg("index-b", static_cast<std::int64_t>(a.index_b));
  } else {
    if (a.a_text.empty() || a.b_text.empty()) {
      throw ValidationError("interpolate: give --a and --b, or --data with indices");
    }
    spec.a = parse_vector(a.a_text);
    spec.b = parse_vector(a.b_text);
    m.arg("a", a.a_text);
    m.arg("b", a.b_text);
  }

  const std::vector<Eigen::VectorXd> path = interpolate(spec);
  const PathCrossings crossings = path_crossings(net, span, path);
  auto out = open_csv(dir / "path.csv",
                      "index,t,local_density,hamming_to_next,segment_length");
  for (std::size_t i = 0; i < path.size(); ++i) {
    const double t = static_cast<double>(i) / (path.size() - 1);
    const double density =
        local_density(net, span, path[i], default_local_radius(path[i]), a.local_samples,
                      mix_seed(a.seed, i));
    const bool last = i + 1 == path.size();
    out << i << "," << format_double(t) << "," << format_double(density) << ","
        << (last ? 0 : crossings.per_segment[i]) << ","
        << format_double(last ? 0.0 : (path[i + 1] - path[i]).norm()) << "\n";
  }
  {
    auto summary = open_csv(dir / "summary.csv", "total_hamming,arc_length,density");
    summary << crossings.total_hamming << "," << format_double(crossings.arc_length) << ","
            << format_double(crossings.density) << "\n";
  }
  m.arg("mode", a.mode);
  m.arg("samples", static_cast<std::int64_t>(a.samples));
  m.arg("local-samples", static_cast<std::int64_t>(a.local_samples));
  m.arg("seed", static_cast<std::int64_t>(a.seed));
  m.arg("span", std::to_string(a.lk[0]) + " " + std::to_string(a.lk[1]));
  m.input("net", a.net);
  m.write(dir);
  std::cout << "total crossings " << crossings.total_hamming << ", density "
            << format_double(crossings.density) << "\n";
}

struct SweepArgs {
  std::string net, out, input, data;
  int index = -1, layer = 1;
  double alpha_max = 4.0;
  int alpha_count = 81;
  int local_samples = kDefaultLocalDensitySamples;
  bool noise = false;
  std::uint64_t seed = 0;
};

void run_sweep(const SweepArgs& a) {
  const fs::path dir = ensure_dir(a.out);
  const PwlNetwork net = load_network(a.net);
  const std::vector<double> alphas = alpha_grid(a.alpha_max, a.alpha_count);

  SweepResult sweep;
  Manifest m("sweep");
  if (a.noise) {
    if (a.data.empty()) throw ValidationError("sweep: --noise needs --data for scale");
    const LabeledDataset data = load_dataset(a.data);
    sweep = noise_direction_sweep(net, a.layer, data, a.seed, alphas, a.local_samples);
    m.input("data", a.data);
    m.arg("noise", "true");
  } else if (!a.input.empty()) {
    sweep = scaling_sweep(net, a.layer, parse_vector(a.input), alphas, a.seed,
                          a.local_samples);
    m.arg("input", a.input);
  } else if (!a.data.empty() && a.index >= 0) {
    const LabeledDataset data = load_dataset(a.data);
    if (a.index >= data.size()) throw ValidationError("sweep: --index out of range");
    sweep = scaling_sweep(net, a.layer, data.points.row(a.index).transpose(), alphas,
                          a.seed, a.local_samples);
    m.input("data", a.data);
    m.arg("index", static_cast<std::int64_t>(a.index));
  } else {
    throw ValidationError("sweep: give --input, --data with --index, or --noise");
  }
  write_sweep_csv(dir / "sweep.csv", sweep);

  const SweepShape shape = sweep_shape(sweep);
  m.arg("layer", static_cast<std::int64_t>(a.layer));
  m.arg("alpha-max", a.alpha_max);
  m.arg("alpha-count", static_cast<std::int64_t>(a.alpha_count));
  m.arg("local-samples", static_cast<std::int64_t>(a.local_samples));
  m.arg("seed", static_cast<std::int64_t>(a.seed));
  m.input("net", a.net);
  m.write(dir);
  std::cout << "density peak at alpha=" << format_double(shape.peak_alpha)
            << ", max/median " << format_double(shape.max_over_median) << "\n";
}

struct SliceArgs {
  std::string net, anchors, out, scale = "log1p";
  std::vector<int> lk;
  int res = 512;
  double sigma = 2.0;
};

void run_slice(const SliceArgs& a) {
  const fs::path dir = ensure_dir(a.out);
  const PwlNetwork net = load_network(a.net);
  const LayerSpan span = span_from(a.lk, net);
  const LabeledDataset anchors = load_dataset(a.anchors);
  if (anchors.size() < 3) throw ValidationError("slice: anchors file needs 3 rows");

  Eigen::VectorXd pa =
      span_input_activation(net, span.start, anchors.points.row(0).transpose());
  Eigen::VectorXd pb =
      span_input_activation(net, span.start, anchors.points.row(1).transpose());
  Eigen::VectorXd pc =
      span_input_activation(net, span.start, anchors.points.row(2).transpose());
  const Plane plane = plane_from_three(pa, pb, pc);
  const Extent extent = default_extent(plane, pa, pb, pc);
  const CodeGrid grid = evaluate_grid(net, span, plane, a.res, a.res, extent);
  const BoundaryField raw = boundary_field(grid);
  const BoundaryField smoothed = gaussian_smooth(raw, a.sigma);
  const GrayScale gray = a.scale == "linear" ? GrayScale::kLinear : GrayScale::kLog1p;
  export_image(smoothed, (dir / "slice.pgm").string(), gray);

  {
    std::ofstream meta(dir / "slice_meta.txt");
    meta << "span=" << span.start << " " << span.count - 1 << "\n";
    meta << "resolution=" << a.res << " " << a.res << "\n";
    meta << "extent=" << format_double(extent.s_min) << " " << format_double(extent.s_max)
         << " " << format_double(extent.t_min) << " " << format_double(extent.t_max)
         << "\n";
    meta << "sigma=" << format_double(a.sigma) << "\n";
    meta << "scale=" << a.scale << "\n";
    auto dump = [&meta](const char* name, const Eigen::VectorXd& v) {
      meta << name << "=";
      for (int i = 0; i < v.size(); ++i) meta << (i ? "," : "") << format_double(v[i]);
      meta << "\n";
    };
    dump("origin", plane.origin);
    dump("u", plane.u);
    dump("v", plane.v);
  }
  Manifest m("slice");
  m.arg("span", std::to_string(a.lk[0]) + " " + std::to_string(a.lk[1]));
  m.arg("res", static_cast<std::int64_t>(a.res));
  m.arg("sigma", a.sigma);
  m.arg("scale", a.scale);
  m.input("net", a.net);
  m.input("anchors", a.anchors);
  m.write(dir);
  std::cout << "wrote " << (dir / "slice.pgm").string() << "\n";
}

struct ClusterArgs {
  std::string net, data, out, metric = "euclidean";
  std::vector<int> lk;
  double eps = 0.0;  // 0 -> default rule
  int min_pts = kDefaultMinPts;
};

void run_cluster(const ClusterArgs& a) {
  const fs::path dir = ensure_dir(a.out);
  const PwlNetwork net = load_network(a.net);
  const LabeledDataset data = load_dataset(a.data);
  const LayerSpan span = span_from(a.lk, net);

  DistanceMatrix dm;
  if (a.metric == "hamming") {
    std::vector<SplineCode> codes(data.size());
    for (int i = 0; i < data.size(); ++i) {
      codes[i] =
          extract_code(forward_traced(net, data.points.row(i).transpose()), net, span);
    }
    dm = distance_matrix(codes);
  } else {
    std::vector<Eigen::VectorXd> activations(data.size());
    for (int i = 0; i < data.size(); ++i) {
      activations[i] =
          span_input_activation(net, span.start, data.points.row(i).transpose());
    }
    dm = distance_matrix(activations);
  }
  const double eps = a.eps > 0.0 ? a.eps : default_eps(dm);
  const ClusterLabels labels = cluster(dm, eps, a.min_pts);
  {
    auto out = open_csv(dir / "labels.csv", "index,cluster,class");
    for (int i = 0; i < data.size(); ++i) {
      out << i << "," << labels.labels[i] << "," << data.labels[i] << "\n";
    }
  }
  const PurityReport purity = monosemanticity_score(labels, data.labels);
  Manifest m("cluster");
  m.arg("metric", a.metric);
  m.arg("span", std::to_string(a.lk[0]) + " " + std::to_string(a.lk[1]));
  m.arg("eps", eps);
  m.arg("min-pts", static_cast<std::int64_t>(a.min_pts));
  m.input("net", a.net);
  m.input("data", a.data);
  m.write(dir);
  int noise = 0;
  for (int label : labels.labels) noise += label == -1;
  std::cout << labels.cluster_count << " clusters, " << noise << " noise points, eps "
            << format_double(eps) << ", mean purity " << format_double(purity.mean_purity)
            << "\n";
}

struct NmfArgs {
  std::string net, data, out, labels_path;
  int layer = 0, k = 8, iters = 500;
  bool use_pre = false, shift_min = false;
  std::uint64_t seed = 0;
};

void run_nmf(const NmfArgs& a) {
  const fs::path dir = ensure_dir(a.out);
  const PwlNetwork net = load_network(a.net);
  const LabeledDataset data = load_dataset(a.data);
  if (a.layer < 0 || a.layer >= net.layer_count()) {
    throw ValidationError("nmf: --layer out of range");
  }

  Eigen::MatrixXd x(data.size(), net.layers[a.layer].fan_out());
  for (int i = 0; i < data.size(); ++i) {
    const ActivationTrace trace = forward_traced(net, data.points.row(i).transpose());
    x.row(i) = (a.use_pre ? trace.pre_at(a.layer) : trace.post_at(a.layer)).transpose();
  }
  if (x.minCoeff() < 0.0) {
    if (!a.shift_min) {
      throw ValidationError(
          "nmf: activations have negative entries; rerun with --shift-min or use a "
          "ReLU layer's outputs");
    }
    x.array() -= x.minCoeff();
  }
  const NmfFactors factors = nmf(x, a.k, a.iters, a.seed);

  {
    std::string header;
    for (int j = 0; j < a.k; ++j) header += (j ? "," : "") + ("w" + std::to_string(j));
    auto out = open_csv(dir / "w.csv", header);
    for (int i = 0; i < factors.w.rows(); ++i) {
      for (int j = 0; j < a.k; ++j) out << (j ? "," : "") << format_double(factors.w(i, j));
      out << "\n";
    }
  }
  {
    std::string header;
    for (int j = 0; j < factors.h.cols(); ++j) {
      header += (j ? "," : "") + ("d" + std::to_string(j));
    }
    auto out = open_csv(dir / "h.csv", header);
    for (int i = 0; i < factors.h.rows(); ++i) {
      for (int j = 0; j < factors.h.cols(); ++j) {
        out << (j ? "," : "") << format_double(factors.h(i, j));
      }
      out << "\n";
    }
  }
  {
    auto out = open_csv(dir / "history.csv", "iteration,squared_error");
    for (std::size_t i = 0; i < factors.reconstruction_history.size(); ++i) {
      out << i << "," << format_double(factors.reconstruction_history[i]) << "\n";
    }
  }

  // Cosine histograms of each component direction against the activations,
  // grouped by cluster labels when provided (fixed 50 bins over [-1, 1]).
  ClusterLabels labels;
  labels.labels.assign(data.size(), 0);
  labels.cluster_count = 1;
  if (!a.labels_path.empty()) {
    const CsvTable table = read_csv(a.labels_path);
    const int col = table.column_index("cluster");
    if (static_cast<int>(table.columns[col].size()) != data.size()) {
      throw ValidationError("nmf: labels file row count does not match data");
    }
    labels.cluster_count = 0;
    labels.labels.resize(data.size());
    for (int i = 0; i < data.size(); ++i) {
      labels.labels[i] = static_cast<int>(table.columns[col][i]);
      labels.cluster_count = std::max(labels.cluster_count, labels.labels[i] + 1);
    }
  }
  std::vector<Eigen::VectorXd> activations(data.size());
  for (int i = 0; i < data.size(); ++i) activations[i] = x.row(i).transpose();
  {
    auto out = open_csv(dir / "cosine_hist.csv",
                        "component,cluster,bin_index,bin_low,bin_high,count");
    constexpr int kBins = 50;
    for (int comp = 0; comp < a.k; ++comp) {
      const Eigen::VectorXd direction = factors.h.row(comp).transpose();
      if (direction.norm() == 0.0) continue;
      const CosineProfile profile = cosine_profile(direction, activations, labels);
      for (int c = -1; c < labels.cluster_count; ++c) {
        const std::vector<double>& values = c < 0 ? profile.noise : profile.per_cluster[c];
        std::vector<int> bins(kBins, 0);
        for (double v : values) {
          int bin = static_cast<int>((v + 1.0) / 2.0 * kBins);
          bin = std::clamp(bin, 0, kBins - 1);
          ++bins[bin];
        }
        for (int b = 0; b < kBins; ++b) {
          if (bins[b] == 0) continue;
          out << comp << "," << c << "," << b << ","
              << format_double(-1.0 + 2.0 * b / kBins) << ","
              << format_double(-1.0 + 2.0 * (b + 1) / kBins) << "," << bins[b] << "\n";
        }
      }
    }
  }
  Manifest m("nmf");
  m.arg("layer", static_cast<std::int64_t>(a.layer));
  m.arg("k", static_cast<std::int64_t>(a.k));
  m.arg("iters", static_cast<std::int64_t>(a.iters));
  m.arg("seed", static_cast<std::int64_t>(a.seed));
  m.arg("pre", a.use_pre ? "true" : "false");
  m.arg("shift-min", a.shift_min ? "true" : "false");
  m.input("net", a.net);
  m.input("data", a.data);
  if (!a.labels_path.empty()) m.input("labels", a.labels_path);
  m.write(dir);
  std::cout << "final squared error "
            << format_double(factors.reconstruction_history.back()) << "\n";
}

struct OracleArgs {
  std::string net, out, bounds_text;
  std::vector<int> lk;
  int res = 256;
  double tol = 1e-9;
};

Box parse_bounds(const std::string& text, int dim) {
  const std::vector<double> values = parse_number_list(text);
  if (static_cast<int>(values.size()) != 2 * dim) {
    throw ValidationError("bounds must give lo,hi per input dimension");
  }
  Box box;
  box.lo.resize(dim);
  box.hi.resize(dim);
  for (int d = 0; d < dim; ++d) {
    box.lo[d] = values[2 * d];
    box.hi[d] = values[2 * d + 1];
  }
  return box;
}

RegionCensus oracle_census(const OracleArgs& a, PwlNetwork* net_out, LayerSpan* span_out) {
  *net_out = load_network(a.net);
  *span_out = span_from(a.lk, *net_out);
  const int dim = net_out->layers[span_out->start].fan_in();
  const Box box = a.bounds_text.empty() ? arrangement_bounds(*net_out)
                                        : parse_bounds(a.bounds_text, dim);
  return enumerate_regions(*net_out, *span_out, box, a.res);
}

void oracle_manifest(const OracleArgs& a, const std::string& sub, const fs::path& dir) {
  Manifest m("oracle " + sub);
  m.arg("span", std::to_string(a.lk[0]) + " " + std::to_string(a.lk[1]));
  m.arg("res", static_cast<std::int64_t>(a.res));
  if (!a.bounds_text.empty()) m.arg("bounds", a.bounds_text);
  if (sub == "verify") m.arg("tol", a.tol);
  m.input("net", a.net);
  m.write(dir);
}

void run_oracle_enumerate(const OracleArgs& a) {
  const fs::path dir = ensure_dir(a.out);
  PwlNetwork net;
  LayerSpan span{0, 1};
  const RegionCensus census = oracle_census(a, &net, &span);
  write_census_csv(dir / "census.csv", census);
  oracle_manifest(a, "enumerate", dir);
  std::cout << census.region_count() << " regions over " << census.cells.size()
            << " lattice points\n";
}

void run_oracle_verify(const OracleArgs& a) {
  const fs::path dir = ensure_dir(a.out);
  PwlNetwork net;
  LayerSpan span{0, 1};
  const RegionCensus census = oracle_census(a, &net, &span);
  write_census_csv(dir / "census.csv", census);
  const VerifyReport report = verify_regions(net, span, census, a.tol);
  {
    auto out = open_csv(dir / "verify.csv",
                        "points_checked,violations,max_relative_error,tolerance");
    out << report.points_checked << "," << report.violations << ","
        << format_double(report.max_relative_error) << "," << format_double(a.tol) << "\n";
  }
  oracle_manifest(a, "verify", dir);
  std::cout << report.violations << " violations over " << report.points_checked
            << " points (max rel err " << format_double(report.max_relative_error)
            << ")\n";
}

void run_oracle_adjacency(const OracleArgs& a) {
  const fs::path dir = ensure_dir(a.out);
  PwlNetwork net;
  LayerSpan span{0, 1};
  const RegionCensus census = oracle_census(a, &net, &span);
  write_census_csv(dir / "census.csv", census);
  const AdjacencyGraph graph = adjacency_graph(census);
  {
    auto out = open_csv(dir / "edges.csv", "region_a,region_b,code_a,code_b,hamming");
    for (const auto& edge : graph.edges) {
      out << edge.a << "," << edge.b << "," << code_to_hex(census.entries[edge.a].code)
          << "," << code_to_hex(census.entries[edge.b].code) << "," << edge.hamming
          << "\n";
    }
  }
  oracle_manifest(a, "adjacency", dir);
  std::cout << graph.edges.size() << " edges between " << census.region_count()
            << " regions\n";
}

struct StatsWelchArgs {
  std::string file, col_a, col_b;
};

void run_stats_welch(const StatsWelchArgs& a) {
  const CsvTable table = read_csv(a.file);
  const WelchResult r = welch_t(table.columns[table.column_index(a.col_a)],
                                table.columns[table.column_index(a.col_b)]);
  std::cout << "t=" << format_double(r.t) << "\n"
            << "dof=" << format_double(r.dof) << "\n"
            << "p=" << format_double(r.p_two_sided) << "\n";
}

struct StatsBootstrapArgs {
  std::string file, col, stat = "mean";
  double level = 0.99;
  int resamples = kDefaultBootstrapResamples;
  std::uint64_t seed = 0;
};

void run_stats_bootstrap(const StatsBootstrapArgs& a) {
  const CsvTable table = read_csv(a.file);
  const BootstrapCi ci = bootstrap_ci(
      table.columns[table.column_index(a.col)],
      a.stat == "median" ? BootstrapStatistic::kMedian : BootstrapStatistic::kMean,
      a.level, a.resamples, a.seed);
  std::cout << "low=" << format_double(ci.low) << "\n"
            << "high=" << format_double(ci.high) << "\n"
            << "point=" << format_double(ci.point_estimate) << "\n";
}

struct ReproArgs {
  std::uint64_t seed = 0;
  std::string out;
};

// The full Prediction 1-3 pipeline on one seeded toy net. Every artifact is
// deterministic in (seed); the summary states pass/fail for the single-seed
// versions of the acceptance checks.
void run_repro(const ReproArgs& a) {
  const fs::path dir = ensure_dir(a.out);
  std::vector<std::pair<std::string, bool>> checks;

  const LabeledDataset data = make_blobs(3, 150, 2, 0.8, mix_seed(a.seed, 1));
  save_dataset(data, (dir / "data.csv").string());

  TrainConfig cfg;
  cfg.learning_rate = 0.05;
  cfg.epochs = 300;
  cfg.batch_size = 32;
  cfg.seed = mix_seed(a.seed, 2);
  const PwlNetwork untrained = init_random({2, 16, 16, 16, 3}, mix_seed(a.seed, 3));
  const TrainResult trained = train(untrained, data, cfg);
  save_network(trained.net, (dir / "net.json").string());
  {
    auto out = open_csv(dir / "loss.csv", "epoch,loss");
    for (std::size_t e = 0; e < trained.loss_history.size(); ++e) {
      out << e << "," << format_double(trained.loss_history[e]) << "\n";
    }
  }
  const double accuracy = classification_accuracy(trained.net, data);
  checks.emplace_back("training accuracy >= 0.95", accuracy >= 0.95);

  // Prediction 2: intra-class boundary density below inter-class, trained only.
  const LayerSpan span1{1, trained.net.layer_count() - 1};
  const DensityReport trained_report =
      class_density_report(trained.net, span1, data, 1000, mix_seed(a.seed, 4));
  const fs::path trained_dir = ensure_dir((dir / "density_trained").string());
  write_density_outputs(trained_dir, trained_report, mix_seed(a.seed, 5), 0.99, 2000);
  const WelchResult trained_welch =
      welch_t(trained_report.intra_samples, trained_report.inter_samples);
  checks.emplace_back("trained intra < inter (welch p < 0.01)",
                      trained_report.intra_mean < trained_report.inter_mean &&
                          trained_welch.p_two_sided < 0.01);

  const DensityReport untrained_report =
      class_density_report(untrained, span1, data, 1000, mix_seed(a.seed, 4));
  const fs::path untrained_dir = ensure_dir((dir / "density_untrained").string());
  write_density_outputs(untrained_dir, untrained_report, mix_seed(a.seed, 6), 0.99, 2000);
  const WelchResult untrained_welch =
      welch_t(untrained_report.intra_samples, untrained_report.inter_samples);
  checks.emplace_back("untrained difference not significant (p >= 0.01)",
                      untrained_welch.p_two_sided >= 0.01);

  const auto gaps = layerwise_density_gap(trained.net, data, 1000, mix_seed(a.seed, 7));
  {
    auto out = open_csv(dir / "layer_gap.csv", "span_start,intra_mean,inter_mean,gap");
    for (const LayerGap& gap : gaps) {
      out << gap.span_start << "," << format_double(gap.report.intra_mean) << ","
          << format_double(gap.report.inter_mean) << "," << format_double(gap.gap)
          << "\n";
    }
  }
  double first_hidden_gap = 0.0, last_hidden_gap = 0.0;
  for (const LayerGap& gap : gaps) {
    if (gap.span_start == 1) first_hidden_gap = gap.gap;
    if (gap.span_start == gaps.back().span_start) last_hidden_gap = gap.gap;
  }
  checks.emplace_back("gap grows toward the output", last_hidden_gap > first_hidden_gap);

  // Prediction 3: density peak between the origin and the unscaled vector.
  const std::vector<double> alphas = alpha_grid(4.0, 81);
  int interior = 0, total_sweeps = 0;
  double trained_ratio = 0.0, untrained_ratio = 0.0;
  const int n_inputs = 5;
  for (int i = 0; i < n_inputs; ++i) {
    const Eigen::VectorXd x = data.points.row(i * 7).transpose();
    const SweepResult sweep =
        scaling_sweep(trained.net, 1, x, alphas, mix_seed(a.seed, 100 + i), 150);
    write_sweep_csv(dir / ("sweep_trained_" + std::to_string(i) + ".csv"), sweep);
    const SweepShape shape = sweep_shape(sweep);
    interior += shape.peak_interior;
    trained_ratio += shape.max_over_median;
    ++total_sweeps;

    const SweepResult usweep =
        scaling_sweep(untrained, 1, x, alphas, mix_seed(a.seed, 100 + i), 150);
    write_sweep_csv(dir / ("sweep_untrained_" + std::to_string(i) + ".csv"), usweep);
    untrained_ratio += sweep_shape(usweep).max_over_median;
  }
  checks.emplace_back("density peak inside (0,1) for >= 70% of inputs",
                      interior >= static_cast<int>(std::ceil(0.7 * total_sweeps)));

  const SweepResult noise_sweep =
      noise_direction_sweep(trained.net, 1, data, mix_seed(a.seed, 200), alphas, 150);
  write_sweep_csv(dir / "sweep_noise.csv", noise_sweep);
  checks.emplace_back("noise-direction peak inside (0,1)",
                      sweep_shape(noise_sweep).peak_interior);
  checks.emplace_back("untrained max/median ratio below trained",
                      untrained_ratio / n_inputs < trained_ratio / n_inputs);

  // Prediction 1: clustering activations and codes finds the same structure,
  // and clusters are purer than a label-shuffled control.
  std::vector<Eigen::VectorXd> activations(data.size());
  std::vector<SplineCode> codes(data.size());
  for (int i = 0; i < data.size(); ++i) {
    const ActivationTrace trace =
        forward_traced(trained.net, data.points.row(i).transpose());
    activations[i] = trace.post_at(0);
    codes[i] = extract_code(trace, trained.net, span1);
  }
  const DistanceMatrix adm = distance_matrix(activations);
  const DistanceMatrix cdm = distance_matrix(codes);
  const ClusterLabels alabels = cluster(adm, default_eps(adm), kDefaultMinPts);
  const ClusterLabels clabels = cluster(cdm, default_eps(cdm), kDefaultMinPts);
  {
    auto out =
        open_csv(dir / "clusters.csv", "index,activation_cluster,code_cluster,class");
    for (int i = 0; i < data.size(); ++i) {
      out << i << "," << alabels.labels[i] << "," << clabels.labels[i] << ","
          << data.labels[i] << "\n";
    }
  }
  const double agreement = rand_index(alabels.labels, clabels.labels);
  double shuffled_agreement = 0.0;
  const int controls = 20;
  for (int control = 0; control < controls; ++control) {
    std::vector<int> shuffled = clabels.labels;
    Rng rng(mix_seed(a.seed, 300 + control));
    rng.shuffle(shuffled);
    shuffled_agreement += rand_index(alabels.labels, shuffled);
  }
  shuffled_agreement /= controls;
  checks.emplace_back("code/activation cluster agreement beats shuffled control",
                      agreement > shuffled_agreement);

  const double purity = monosemanticity_score(clabels, data.labels).mean_purity;
  double shuffled_purity = 0.0;
  for (int control = 0; control < controls; ++control) {
    std::vector<int> shuffled = data.labels;
    Rng rng(mix_seed(a.seed, 400 + control));
    rng.shuffle(shuffled);
    shuffled_purity += monosemanticity_score(clabels, shuffled).mean_purity;
  }
  shuffled_purity /= controls;
  checks.emplace_back("code clusters purer than shuffled control",
                      purity > shuffled_purity);

  Eigen::MatrixXd post0(data.size(), activations[0].size());
  for (int i = 0; i < data.size(); ++i) post0.row(i) = activations[i].transpose();
  const NmfFactors factors = nmf(post0, 8, 300, mix_seed(a.seed, 8));
  bool monotone = true;
  for (std::size_t i = 1; i < factors.reconstruction_history.size(); ++i) {
    monotone &=
        factors.reconstruction_history[i] <= factors.reconstruction_history[i - 1];
  }
  checks.emplace_back("nmf reconstruction error non-increasing", monotone);

  std::ofstream summary(dir / "summary.txt");
  int failed = 0;
  for (const auto& [name, ok] : checks) {
    summary << (ok ? "PASS" : "FAIL") << " " << name << "\n";
    std::cout << (ok ? "PASS" : "FAIL") << " " << name << "\n";
    failed += !ok;
  }
  summary << "accuracy=" << format_double(accuracy) << "\n";
  summary << "agreement=" << format_double(agreement)
          << " shuffled=" << format_double(shuffled_agreement) << "\n";
  summary << "purity=" << format_double(purity)
          << " shuffled=" << format_double(shuffled_purity) << "\n";

  Manifest m("repro");
  m.arg("seed", static_cast<std::int64_t>(a.seed));
  m.write(dir);
  std::cout << (failed == 0 ? "all checks passed" : "some checks FAILED") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"polytope: spline-code analysis of piecewise-linear networks"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "worker threads (never affects results)")
      ->default_val(1);

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "generate a Gaussian-blob dataset");
  gen_cmd->add_option("--k", gen.k, "number of classes")->default_val(3);
  gen_cmd->add_option("--n", gen.n, "points per class")->default_val(100);
  gen_cmd->add_option("--dim", gen.dim, "input dimension")->default_val(2);
  gen_cmd->add_option("--spread", gen.spread, "noise stddev")->default_val(0.8);
  gen_cmd->add_option("--seed", gen.seed, "rng seed")->required();
  gen_cmd->add_option("--out", gen.out, "output directory")->required();

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "train a network on a dataset");
  train_cmd->add_option("--data", tr.data, "dataset csv")->required();
  train_cmd->add_option("--layers", tr.layers, "sizes, e.g. 2,16,16,3")->required();
  train_cmd->add_option("--lr", tr.lr, "learning rate")->default_val(0.05);
  train_cmd->add_option("--epochs", tr.epochs)->default_val(200);
  train_cmd->add_option("--batch-size", tr.batch)->default_val(32);
  train_cmd->add_option("--seed", tr.seed, "rng seed (init + shuffling)")->required();
  train_cmd->add_option("--out", tr.out, "output directory")->required();

  std::string code_net, code_input;
  std::vector<int> code_span;
  auto* code_cmd = app.add_subcommand("code", "print the spline code of one input");
  code_cmd->add_option("--net", code_net)->required();
  code_cmd->add_option("--input", code_input, "comma-separated input vector")->required();
  code_cmd->add_option("--span", code_span, "L K (layers L..L+K)")->expected(2)->required();

  DensityArgs de;
  auto* density_cmd =
      app.add_subcommand("density", "intra/inter-class boundary density report");
  density_cmd->add_option("--net", de.net)->required();
  density_cmd->add_option("--data", de.data)->required();
  density_cmd->add_option("--span", de.lk, "L K")->expected(2)->required();
  density_cmd->add_option("--max-pairs", de.max_pairs)->default_val(kDefaultMaxPairs);
  density_cmd->add_option("--seed", de.seed)->required();
  density_cmd->add_option("--level", de.level, "bootstrap CI level")->default_val(0.99);
  density_cmd->add_option("--resamples", de.resamples)
      ->default_val(kDefaultBootstrapResamples);
  density_cmd->add_option("--out", de.out)->required();

  LayerGapArgs lg;
  auto* gap_cmd = app.add_subcommand("layer-gap", "density gap per span start");
  gap_cmd->add_option("--net", lg.net)->required();
  gap_cmd->add_option("--data", lg.data)->required();
  gap_cmd->add_option("--max-pairs", lg.max_pairs)->default_val(kDefaultMaxPairs);
  gap_cmd->add_option("--seed", lg.seed)->required();
  gap_cmd->add_option("--out", lg.out)->required();

  InterpolateArgs in;
  auto* interp_cmd = app.add_subcommand("interpolate", "boundary crossings along a path");
  interp_cmd->add_option("--net", in.net)->required();
  interp_cmd->add_option("--span", in.lk, "L K")->expected(2)->required();
  interp_cmd->add_option("--mode", in.mode)->check(CLI::IsMember({"linear", "spherical"}));
  interp_cmd->add_option("--samples", in.samples)->default_val(kDefaultPathSamples);
  interp_cmd->add_option("--a", in.a_text, "endpoint in span-input coordinates");
  interp_cmd->add_option("--b", in.b_text, "endpoint in span-input coordinates");
  interp_cmd->add_option("--data", in.data, "dataset csv (with --index-a/--index-b)");
  interp_cmd->add_option("--index-a", in.index_a);
  interp_cmd->add_option("--index-b", in.index_b);
  interp_cmd->add_option("--local-samples", in.local_samples)
      ->default_val(kDefaultLocalDensitySamples);
  interp_cmd->add_option("--seed", in.seed)->required();
  interp_cmd->add_option("--out", in.out)->required();

  SweepArgs sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "scale a hidden vector, track density");
  sweep_cmd->add_option("--net", sw.net)->required();
  sweep_cmd->add_option("--layer", sw.layer, "layer whose input is scaled")->default_val(1);
  sweep_cmd->add_option("--input", sw.input, "input vector (data space)");
  sweep_cmd->add_option("--data", sw.data, "dataset csv");
  sweep_cmd->add_option("--index", sw.index, "row in --data");
  sweep_cmd->add_flag("--noise", sw.noise, "sweep a Gaussian-noise direction");
  sweep_cmd->add_option("--alpha-max", sw.alpha_max)->default_val(4.0);
  sweep_cmd->add_option("--alpha-count", sw.alpha_count)->default_val(81);
  sweep_cmd->add_option("--local-samples", sw.local_samples)
      ->default_val(kDefaultLocalDensitySamples);
  sweep_cmd->add_option("--seed", sw.seed)->required();
  sweep_cmd->add_option("--out", sw.out)->required();

  SliceArgs sl;
  auto* slice_cmd = app.add_subcommand("slice", "rasterize boundaries on a 2-D plane");
  slice_cmd->add_option("--net", sl.net)->required();
  slice_cmd
      ->add_option("--anchors", sl.anchors, "dataset csv; first 3 rows anchor the plane")
      ->required();
  slice_cmd->add_option("--span", sl.lk, "L K")->expected(2)->required();
  slice_cmd->add_option("--res", sl.res)->default_val(512);
  slice_cmd->add_option("--sigma", sl.sigma)->default_val(2.0);
  slice_cmd->add_option("--scale", sl.scale)->check(CLI::IsMember({"linear", "log1p"}));
  slice_cmd->add_option("--out", sl.out)->required();

  ClusterArgs cl;
  auto* cluster_cmd = app.add_subcommand("cluster", "dbscan over activations or codes");
  cluster_cmd->add_option("--net", cl.net)->required();
  cluster_cmd->add_option("--data", cl.data)->required();
  cluster_cmd->add_option("--span", cl.lk, "L K")->expected(2)->required();
  cluster_cmd->add_option("--metric", cl.metric)
      ->check(CLI::IsMember({"euclidean", "hamming"}));
  cluster_cmd->add_option("--eps", cl.eps, "0 uses 0.5 * median pairwise distance");
  cluster_cmd->add_option("--min-pts", cl.min_pts)->default_val(kDefaultMinPts);
  cluster_cmd->add_option("--out", cl.out)->required();

  NmfArgs nm;
  auto* nmf_cmd = app.add_subcommand("nmf", "factorize activations, profile directions");
  nmf_cmd->add_option("--net", nm.net)->required();
  nmf_cmd->add_option("--data", nm.data)->required();
  nmf_cmd->add_option("--layer", nm.layer, "layer whose activations feed NMF")->required();
  nmf_cmd->add_option("--k", nm.k)->default_val(8);
  nmf_cmd->add_option("--iters", nm.iters)->default_val(500);
  nmf_cmd->add_flag("--pre", nm.use_pre, "use pre-activations instead of outputs");
  nmf_cmd->add_flag("--shift-min", nm.shift_min, "shift negative inputs to zero");
  nmf_cmd->add_option("--labels", nm.labels_path, "labels.csv from `polytope cluster`");
  nmf_cmd->add_option("--seed", nm.seed)->required();
  nmf_cmd->add_option("--out", nm.out)->required();

  OracleArgs ora;
  auto* oracle_cmd = app.add_subcommand("oracle", "exhaustive region ground truth");
  oracle_cmd->require_subcommand(1);
  auto add_oracle_options = [&](CLI::App* sub) {
    sub->add_option("--net", ora.net)->required();
    sub->add_option("--span", ora.lk, "L K")->expected(2)->required();
    sub->add_option("--bounds", ora.bounds_text,
                    "lo,hi per dimension (default: generous box around all "
                    "hyperplane intersections)");
    sub->add_option("--res", ora.res)->default_val(256);
    sub->add_option("--out", ora.out)->required();
    return sub;
  };
  auto* enum_cmd = add_oracle_options(oracle_cmd->add_subcommand("enumerate"));
  auto* verify_cmd = add_oracle_options(oracle_cmd->add_subcommand("verify"));
  verify_cmd->add_option("--tol", ora.tol)->default_val(1e-9);
  auto* adj_cmd = add_oracle_options(oracle_cmd->add_subcommand("adjacency"));

  StatsWelchArgs swl;
  StatsBootstrapArgs sbo;
  auto* stats_cmd =
      app.add_subcommand("stats", "welch t-test / bootstrap CI on csv columns");
  stats_cmd->require_subcommand(1);
  auto* welch_cmd = stats_cmd->add_subcommand("welch");
  welch_cmd->add_option("--file", swl.file)->required();
  welch_cmd->add_option("--col-a", swl.col_a, "column name or index")->required();
  welch_cmd->add_option("--col-b", swl.col_b, "column name or index")->required();
  auto* boot_cmd = stats_cmd->add_subcommand("bootstrap");
  boot_cmd->add_option("--file", sbo.file)->required();
  boot_cmd->add_option("--col", sbo.col)->required();
  boot_cmd->add_option("--stat", sbo.stat)->check(CLI::IsMember({"mean", "median"}));
  boot_cmd->add_option("--level", sbo.level)->default_val(0.99);
  boot_cmd->add_option("--resamples", sbo.resamples)
      ->default_val(kDefaultBootstrapResamples);
  boot_cmd->add_option("--seed", sbo.seed)->required();

  ReproArgs re;
  auto* repro_cmd =
      app.add_subcommand("repro", "run the full prediction 1-3 pipeline on a toy net");
  repro_cmd->add_option("--seed", re.seed)->required();
  repro_cmd->add_option("--out", re.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << e.what() << "\n";
    std::cerr << app.help() << "\n";
    return 2;
  }

  set_default_threads(threads);
  try {
    if (*gen_cmd) run_gen_data(gen);
    if (*train_cmd) run_train(tr);
    if (*code_cmd) run_code(code_net, code_input, code_span);
    if (*density_cmd) run_density(de);
    if (*gap_cmd) run_layer_gap(lg);
    if (*interp_cmd) run_interpolate(in);
    if (*sweep_cmd) run_sweep(sw);
    if (*slice_cmd) run_slice(sl);
    if (*cluster_cmd) run_cluster(cl);
    if (*nmf_cmd) run_nmf(nm);
    if (*enum_cmd) run_oracle_enumerate(ora);
    if (*verify_cmd) run_oracle_verify(ora);
    if (*adj_cmd) run_oracle_adjacency(ora);
    if (*welch_cmd) run_stats_welch(swl);
    if (*boot_cmd) run_stats_bootstrap(sbo);
    if (*repro_cmd) run_repro(re);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
