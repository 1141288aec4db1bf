#include "adl/snapshot.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>

#include "adl/streams.hpp"

namespace adl {
namespace {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

// JSON has no infinity; an untouched running minimum is written as null.
ordered_json finite_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(); }

double number_or_inf(const json& v) {
  return v.is_null() ? std::numeric_limits<double>::infinity() : v.get<double>();
}

ordered_json matrix_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()},
          {"data", std::vector<double>(m.values().begin(), m.values().end())}};
}

Matrix matrix_from(const json& doc) {
  const auto rows = doc.at("rows").get<std::size_t>();
  const auto cols = doc.at("cols").get<std::size_t>();
  const auto data = doc.at("data").get<std::vector<double>>();
  if (data.size() != rows * cols) throw std::invalid_argument("snapshot: matrix data size");
  Matrix m(rows, cols);
  std::copy(data.begin(), data.end(), m.values().begin());
  return m;
}

ordered_json stat_json(const RecursiveStat& s) {
  return {{"count", s.count()}, {"mean", s.mean()}, {"sq_accum", s.sq_accum()}};
}

RecursiveStat stat_from(const json& doc) {
  return RecursiveStat::restore(doc.at("count").get<std::uint64_t>(), doc.at("mean").get<double>(),
                                doc.at("sq_accum").get<double>());
}

ordered_json min_stat_json(const MinTrackedStat& s) {
  return {{"stat", stat_json(s.inner())},
          {"mean_min", finite_or_null(s.mean_min())},
          {"std_min", finite_or_null(s.std_min())}};
}

MinTrackedStat min_stat_from(const json& doc) {
  return MinTrackedStat::restore(stat_from(doc.at("stat")), number_or_inf(doc.at("mean_min")),
                                 number_or_inf(doc.at("std_min")));
}

}  // namespace

nlohmann::ordered_json snapshot_to_json(const AdlNetwork& net, const WidthState& width) {
  ordered_json doc;
  doc["format"] = "adl-network";
  doc["version"] = kSnapshotVersion;
  doc["inputs"] = net.inputs();
  doc["classes"] = net.classes();
  auto& layers = doc["layers"] = ordered_json::array();
  for (const auto& layer : net.layers()) {
    layers.push_back({{"nodes", layer.nodes()},
                      {"input_width", layer.input_width()},
                      {"W", matrix_json(layer.W)},
                      {"b", layer.b},
                      {"Ws", matrix_json(layer.Ws)},
                      {"bs", layer.bs}});
  }
  const auto& voting = net.voting();
  doc["beta"] = voting.beta;
  doc["p"] = voting.p;
  doc["output_active"] = voting.active;
  auto& stats = doc["input_stats"] = ordered_json::array();
  for (const auto& s : net.input_stats()) stats.push_back(stat_json(s));
  doc["width"] = {{"bias", min_stat_json(width.bias_stat)},
                  {"variance", min_stat_json(width.var_stat)},
                  {"samples_seen", width.samples_seen},
                  {"grew_this_sample", width.grew_this_sample}};
  return doc;
}

Snapshot snapshot_from_json(const nlohmann::json& doc) {
  try {
    if (doc.value("format", std::string{}) != "adl-network") {
      throw std::invalid_argument("snapshot: not an adl-network document");
    }
    const int version = doc.at("version").get<int>();
    if (version != kSnapshotVersion) {
      throw std::invalid_argument("snapshot: unsupported version " + std::to_string(version));
    }
    std::vector<LayerParams> layers;
    for (const auto& entry : doc.at("layers")) {
      LayerParams layer;
      layer.W = matrix_from(entry.at("W"));
      layer.b = entry.at("b").get<Vector>();
      layer.Ws = matrix_from(entry.at("Ws"));
      layer.bs = entry.at("bs").get<Vector>();
      layers.push_back(std::move(layer));
    }
    VotingState voting;
    voting.beta = doc.at("beta").get<std::vector<double>>();
    voting.p = doc.at("p").get<std::vector<double>>();
    voting.active = doc.at("output_active").get<std::vector<bool>>();
    std::vector<RecursiveStat> input_stats;
    for (const auto& s : doc.at("input_stats")) input_stats.push_back(stat_from(s));

    WidthState width;
    if (doc.contains("width")) {
      const auto& w = doc.at("width");
      width.bias_stat = min_stat_from(w.at("bias"));
      width.var_stat = min_stat_from(w.at("variance"));
      width.samples_seen = w.at("samples_seen").get<std::uint64_t>();
      width.grew_this_sample = w.at("grew_this_sample").get<bool>();
    }
    return {AdlNetwork::from_parts(doc.at("inputs").get<std::size_t>(),
                                   doc.at("classes").get<std::size_t>(), std::move(layers),
                                   std::move(voting), std::move(input_stats)),
            width};
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("snapshot: malformed document: ") + e.what());
  }
}

void save_snapshot(const std::filesystem::path& path, const AdlNetwork& net,
                   const WidthState& width) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << snapshot_to_json(net, width).dump(1) << '\n';
  if (!out) throw IoError("write error on '" + path.string() + "'");
}

Snapshot load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("snapshot '" + path.string() + "': " + e.what());
  }
  return snapshot_from_json(doc);
}

}  // namespace adl
