#include <fstream>

#include "polytope/io.hpp"
#include "polytope/net.hpp"

#include <json.hpp>

namespace polytope {

using nlohmann::json;

void save_network(const PwlNetwork& net, const std::string& path) {
  json doc;
  doc["layers"] = json::array();
  for (const Layer& layer : net.layers) {
    json rows = json::array();
    for (int r = 0; r < layer.fan_out(); ++r) {
      json row = json::array();
      for (int c = 0; c < layer.fan_in(); ++c) row.push_back(layer.weights(r, c));
      rows.push_back(std::move(row));
    }
    json bias = json::array();
    for (int r = 0; r < layer.bias.size(); ++r) bias.push_back(layer.bias[r]);
    doc["layers"].push_back({{"weights", std::move(rows)},
                             {"bias", std::move(bias)},
                             {"activation", to_string(layer.activation)}});
  }
  std::ofstream out(path);
  if (!out) throw RuntimeFailure("cannot write " + path);
  out << doc.dump(1) << "\n";
  if (!out) throw RuntimeFailure("write failed for " + path);
}

PwlNetwork load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ValidationError(path + ": parse error: " + e.what());
  }
  if (!doc.is_object() || !doc.contains("layers") || !doc["layers"].is_array()) {
    throw ValidationError(path + ": expected top-level object with a \"layers\" array");
  }
  PwlNetwork net;
  int index = 0;
  for (const json& entry : doc["layers"]) {
    const std::string where = path + ": layer " + std::to_string(index);
    if (!entry.is_object() || !entry.contains("weights") || !entry.contains("bias") ||
        !entry.contains("activation")) {
      throw ValidationError(where + ": needs weights, bias and activation fields");
    }
    const json& rows = entry["weights"];
    if (!rows.is_array() || rows.empty()) {
      throw ValidationError(where + ": weights must be a non-empty 2-D array");
    }
    const std::size_t fan_in = rows[0].size();
    Layer layer;
    layer.weights.resize(rows.size(), fan_in);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (!rows[r].is_array() || rows[r].size() != fan_in) {
        throw ValidationError(where + ": weights row " + std::to_string(r) +
                              " is not length " + std::to_string(fan_in));
      }
      for (std::size_t c = 0; c < fan_in; ++c) {
        if (!rows[r][c].is_number()) {
          throw ValidationError(where + ": weights entry is not a number");
        }
        layer.weights(r, c) = rows[r][c].get<double>();
      }
    }
    const json& bias = entry["bias"];
    if (!bias.is_array()) throw ValidationError(where + ": bias must be an array");
    layer.bias.resize(bias.size());
    for (std::size_t r = 0; r < bias.size(); ++r) {
      if (!bias[r].is_number()) throw ValidationError(where + ": bias entry is not a number");
      layer.bias[r] = bias[r].get<double>();
    }
    if (!entry["activation"].is_string()) {
      throw ValidationError(where + ": activation must be a string");
    }
    try {
      layer.activation = activation_from_string(entry["activation"].get<std::string>());
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
    net.layers.push_back(std::move(layer));
    ++index;
  }
  try {
    net.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
  return net;
}

void save_dataset(const LabeledDataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure("cannot write " + path);
  for (int d = 0; d < data.dim(); ++d) out << "f" << d << ",";
  out << "label\n";
  for (int i = 0; i < data.size(); ++i) {
    for (int d = 0; d < data.dim(); ++d) out << format_double(data.points(i, d)) << ",";
    out << data.labels[i] << "\n";
  }
  if (!out) throw RuntimeFailure("write failed for " + path);
}

LabeledDataset load_dataset(const std::string& path) {
  const CsvTable table = read_csv(path);
  if (table.header.empty() || table.header.back() != "label") {
    throw ValidationError(path + ": last column must be \"label\"");
  }
  const int dim = static_cast<int>(table.header.size()) - 1;
  if (dim < 1) throw ValidationError(path + ": no feature columns");
  const int n = static_cast<int>(table.columns[0].size());
  LabeledDataset data;
  data.points.resize(n, dim);
  data.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < dim; ++d) data.points(i, d) = table.columns[d][i];
    const double label = table.columns[dim][i];
    if (label < 0 || label != static_cast<int>(label)) {
      throw ValidationError(path + " row " + std::to_string(i + 1) +
                            ": label must be a non-negative integer");
    }
    data.labels[i] = static_cast<int>(label);
  }
  data.validate();
  return data;
}

}  // namespace polytope
