#include "adl/streams.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

namespace adl {

std::string_view to_string(StreamKind kind) noexcept {
  switch (kind) {
    case StreamKind::sea: return "sea";
    case StreamKind::hyperplane: return "hyperplane";
    case StreamKind::gaussians: return "gaussians";
    case StreamKind::csv: return "csv";
  }
  return "sea";
}

StreamKind parse_stream_kind(std::string_view name) {
  if (name == "sea") return StreamKind::sea;
  if (name == "hyperplane") return StreamKind::hyperplane;
  if (name == "gaussians") return StreamKind::gaussians;
  if (name == "csv") return StreamKind::csv;
  throw std::invalid_argument("unknown stream kind '" + std::string(name) + "'");
}

void StreamSpec::validate() const {
  if (batch_size < 4) throw std::invalid_argument("batch_size must be at least 4");
  if (kind != StreamKind::csv && total == 0) throw std::invalid_argument("total must be positive");
  for (std::size_t i = 0; i < drift_schedule.size(); ++i) {
    const auto& point = drift_schedule[i];
    if (kind != StreamKind::csv && point.sample >= total) {
      throw std::invalid_argument("drift index " + std::to_string(point.sample) +
                                  " lies outside the stream");
    }
    if (i > 0 && point.sample <= drift_schedule[i - 1].sample) {
      throw std::invalid_argument("drift indices must be strictly increasing");
    }
    if (point.concept_id < 0) throw std::invalid_argument("concept ids must be non-negative");
  }
  if (!(label_noise >= 0.0 && label_noise <= 1.0)) {
    throw std::invalid_argument("label noise must lie in [0, 1]");
  }
  switch (kind) {
    case StreamKind::sea:
      if (sea_thresholds.empty()) throw std::invalid_argument("SEA needs at least one threshold");
      break;
    case StreamKind::hyperplane:
      if (dims < 2) throw std::invalid_argument("hyperplane needs at least 2 dimensions");
      break;
    case StreamKind::gaussians:
      if (dims < 2) throw std::invalid_argument("gaussians need at least 2 dimensions");
      if (classes < 2) throw std::invalid_argument("gaussians need at least 2 classes");
      if (!(separation >= 0.0)) throw std::invalid_argument("separation must be non-negative");
      break;
    case StreamKind::csv:
      if (csv.path.empty()) throw std::invalid_argument("csv stream needs a path");
      if (csv.classes && *csv.classes < 2) throw std::invalid_argument("csv needs >= 2 classes");
      break;
  }
}

StreamSpec sea_scenario(std::uint64_t seed) {
  StreamSpec spec;
  spec.kind = StreamKind::sea;
  spec.total = 50000;
  spec.batch_size = 500;
  spec.label_noise = 0.1;
  spec.drift_schedule = {{12500, 1}, {25000, 2}, {37500, 3}};
  spec.seed = seed;
  return spec;
}

StreamSpec default_scenario(StreamKind kind, std::uint64_t seed) {
  if (kind == StreamKind::sea) return sea_scenario(seed);
  StreamSpec spec;
  spec.kind = kind;
  spec.seed = seed;
  if (kind != StreamKind::csv) {
    spec.total = 20000;
    spec.drift_schedule = {{5250, 1}, {10250, 2}, {15250, 3}};
  }
  return spec;
}

int concept_at(const std::vector<DriftPoint>& schedule, std::size_t sample) noexcept {
  int active = 0;
  for (const auto& point : schedule) {
    if (point.sample > sample) break;
    active = point.concept_id;
  }
  return active;
}

std::size_t sea_label(double f1, double f2, double threshold) noexcept {
  return f1 + f2 <= threshold ? 1 : 0;
}

Hyperplane hyperplane_concept(const StreamSpec& spec, int concept_id) {
  // Orthonormal pair (a, b) fixed by the seed; concept k uses
  // cos(k phi) a + sin(k phi) b.
  Rng basis_rng(spec.seed ^ 0xC2B2AE3D27D4EB4FULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> a(spec.dims), b(spec.dims);
  for (auto& v : a) v = gauss(basis_rng);
  for (auto& v : b) v = gauss(basis_rng);
  auto dot = [](const std::vector<double>& u, const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s;
  };
  const double na = std::sqrt(dot(a, a));
  for (auto& v : a) v /= na;
  const double proj = dot(a, b);
  for (std::size_t i = 0; i < b.size(); ++i) b[i] -= proj * a[i];
  const double nb = std::sqrt(dot(b, b));
  for (auto& v : b) v /= nb;

  Hyperplane plane;
  const double angle = spec.rotation * concept_id;
  plane.normal.resize(spec.dims);
  for (std::size_t i = 0; i < spec.dims; ++i) {
    plane.normal[i] = std::cos(angle) * a[i] + std::sin(angle) * b[i];
  }
  for (double w : plane.normal) plane.offset += 0.5 * w;
  return plane;
}

std::size_t hyperplane_label(const Hyperplane& plane, std::span<const double> x) noexcept {
  double s = -plane.offset;
  for (std::size_t i = 0; i < x.size(); ++i) s += plane.normal[i] * x[i];
  return s > 0.0 ? 1 : 0;
}

std::vector<std::vector<double>> gaussian_means(const StreamSpec& spec, int concept_id) {
  const std::size_t m = spec.classes;
  const double radius = spec.separation / (2.0 * std::sin(std::numbers::pi / static_cast<double>(m)));
  std::vector<std::vector<double>> means(m, std::vector<double>(spec.dims, 0.0));
  for (std::size_t c = 0; c < m; ++c) {
    const std::size_t slot = (c + static_cast<std::size_t>(concept_id)) % m;
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(slot) / static_cast<double>(m);
    means[c][0] = radius * std::cos(angle);
    means[c][1] = radius * std::sin(angle);
  }
  return means;
}

namespace {

// Shared batching logic for the synthetic generators: subclasses draw one
// labelled sample given the concept in force.
class SyntheticStream : public BatchSource {
 public:
  SyntheticStream(const StreamSpec& spec, std::size_t features, std::size_t classes)
      : spec_(spec), rng_(spec.seed), features_(features), classes_(classes) {}

  std::optional<StreamBatch> next() override {
    if (emitted_ >= spec_.total) return std::nullopt;
    const std::size_t T = std::min(spec_.batch_size, spec_.total - emitted_);
    StreamBatch batch;
    batch.batch_index = batch_index_++;
    batch.features = Matrix(T, features_);
    batch.labels = Matrix(T, classes_);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t t = 0; t < T; ++t) {
      const int concept_id = concept_at(spec_.drift_schedule, emitted_ + t);
      std::size_t label = draw(concept_id, batch.features.row(t));
      if (spec_.label_noise > 0.0 && unit(rng_) < spec_.label_noise) {
        std::uniform_int_distribution<std::size_t> other(0, classes_ - 2);
        const std::size_t pick = other(rng_);
        label = pick >= label ? pick + 1 : pick;
      }
      batch.labels(t, label) = 1.0;
    }
    emitted_ += T;
    return batch;
  }

  std::size_t features() const noexcept override { return features_; }
  std::size_t classes() const noexcept override { return classes_; }

 protected:
  virtual std::size_t draw(int concept_id, std::span<double> x) = 0;

  StreamSpec spec_;
  Rng rng_;

 private:
  std::size_t features_;
  std::size_t classes_;
  std::size_t emitted_ = 0;
  std::int64_t batch_index_ = 0;
};

class SeaStream final : public SyntheticStream {
 public:
  explicit SeaStream(const StreamSpec& spec) : SyntheticStream(spec, 3, 2) {}

 protected:
  std::size_t draw(int concept_id, std::span<double> x) override {
    std::uniform_real_distribution<double> feature(0.0, 10.0);
    for (auto& v : x) v = feature(rng_);
    const auto& th = spec_.sea_thresholds;
    return sea_label(x[0], x[1], th[static_cast<std::size_t>(concept_id) % th.size()]);
  }
};

class HyperplaneStream final : public SyntheticStream {
 public:
  explicit HyperplaneStream(const StreamSpec& spec) : SyntheticStream(spec, spec.dims, 2) {}

 protected:
  std::size_t draw(int concept_id, std::span<double> x) override {
    std::uniform_real_distribution<double> feature(0.0, 1.0);
    for (auto& v : x) v = feature(rng_);
    auto it = planes_.find(concept_id);
    if (it == planes_.end()) it = planes_.emplace(concept_id, hyperplane_concept(spec_, concept_id)).first;
    return hyperplane_label(it->second, x);
  }

 private:
  std::map<int, Hyperplane> planes_;
};

class GaussianStream final : public SyntheticStream {
 public:
  explicit GaussianStream(const StreamSpec& spec)
      : SyntheticStream(spec, spec.dims, spec.classes) {}

 protected:
  std::size_t draw(int concept_id, std::span<double> x) override {
    auto it = means_.find(concept_id);
    if (it == means_.end()) it = means_.emplace(concept_id, gaussian_means(spec_, concept_id)).first;
    std::uniform_int_distribution<std::size_t> pick(0, spec_.classes - 1);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::size_t label = pick(rng_);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = it->second[label][i] + gauss(rng_);
    return label;
  }

 private:
  std::map<int, std::vector<std::vector<double>>> means_;
};

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    auto field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                     : comma - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
      field.remove_suffix(1);
    }
    fields.push_back(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

bool parse_double(std::string_view text, double& out) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end && std::isfinite(out);
}

// Reads rows in file order, batch by batch. Class count comes from the
// schema or from one scan over the label column.
class CsvStream final : public BatchSource {
 public:
  CsvStream(const StreamSpec& spec) : spec_(spec), in_(spec.csv.path) {
    if (!in_) throw IoError("cannot open '" + spec.csv.path.string() + "'");
    if (spec.csv.classes) {
      classes_ = *spec.csv.classes;
    } else {
      scan_labels();
    }
    rewind();
  }

  std::optional<StreamBatch> next() override {
    std::vector<double> features;
    std::vector<std::size_t> labels;
    std::string line;
    while (labels.size() < spec_.batch_size && std::getline(in_, line)) {
      ++line_no_;
      if (is_blank(line)) continue;
      std::size_t label = 0;
      parse_row(line, features, label);
      labels.push_back(label);
    }
    if (in_.bad()) throw IoError("read error in '" + spec_.csv.path.string() + "'");
    if (labels.empty()) return std::nullopt;
    StreamBatch batch;
    batch.batch_index = batch_index_++;
    batch.features = Matrix(labels.size(), features_);
    std::copy(features.begin(), features.end(), batch.features.values().begin());
    batch.labels = Matrix(labels.size(), classes_);
    for (std::size_t t = 0; t < labels.size(); ++t) batch.labels(t, labels[t]) = 1.0;
    return batch;
  }

  std::size_t features() const noexcept override { return features_; }
  std::size_t classes() const noexcept override { return classes_; }

 private:
  static bool is_blank(const std::string& line) {
    return line.find_first_not_of(" \t\r") == std::string::npos;
  }

  void rewind() {
    in_.clear();
    in_.seekg(0);
    line_no_ = 0;
    std::string line;
    if (spec_.csv.has_header && std::getline(in_, line)) ++line_no_;
  }

  // Fixes the column layout from the first data row.
  void layout(std::size_t columns) {
    if (columns < 2) {
      throw std::invalid_argument("line " + std::to_string(line_no_) + ": need at least 2 columns");
    }
    columns_ = columns;
    label_col_ = spec_.csv.label_column.value_or(columns - 1);
    if (label_col_ >= columns) throw std::invalid_argument("label column out of range");
    feature_cols_ = spec_.csv.feature_columns;
    if (feature_cols_.empty()) {
      for (std::size_t c = 0; c < columns; ++c) {
        if (c != label_col_) feature_cols_.push_back(c);
      }
    }
    for (auto c : feature_cols_) {
      if (c >= columns || c == label_col_) throw std::invalid_argument("bad feature column");
    }
    features_ = feature_cols_.size();
  }

  double label_value(std::string_view field) const {
    double value = 0.0;
    if (!parse_double(field, value) || value != std::floor(value)) {
      throw std::invalid_argument("line " + std::to_string(line_no_) + ": label '" +
                                  std::string(field) + "' is not an integer");
    }
    return value;
  }

  void scan_labels() {
    rewind();
    std::map<double, std::size_t> seen;
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (is_blank(line)) continue;
      const auto fields = split_fields(line);
      if (columns_ == 0) layout(fields.size());
      if (fields.size() != columns_) {
        throw std::invalid_argument("line " + std::to_string(line_no_) + ": expected " +
                                    std::to_string(columns_) + " columns, found " +
                                    std::to_string(fields.size()));
      }
      seen.emplace(label_value(fields[label_col_]), 0);
    }
    if (in_.bad()) throw IoError("read error in '" + spec_.csv.path.string() + "'");
    if (seen.size() < 2) throw std::invalid_argument("csv stream needs at least two labels");
    std::size_t next = 0;
    for (auto& [value, index] : seen) index = next++;
    label_map_ = std::move(seen);
    classes_ = label_map_.size();
  }

  void parse_row(const std::string& line, std::vector<double>& features, std::size_t& label) {
    const auto fields = split_fields(line);
    if (columns_ == 0) layout(fields.size());
    if (fields.size() != columns_) {
      throw std::invalid_argument("line " + std::to_string(line_no_) + ": expected " +
                                  std::to_string(columns_) + " columns, found " +
                                  std::to_string(fields.size()));
    }
    for (auto c : feature_cols_) {
      double v = 0.0;
      if (!parse_double(fields[c], v)) {
        throw std::invalid_argument("line " + std::to_string(line_no_) + ": cannot parse '" +
                                    std::string(fields[c]) + "' as a number");
      }
      features.push_back(v);
    }
    const double value = label_value(fields[label_col_]);
    if (!label_map_.empty()) {
      const auto it = label_map_.find(value);
      if (it == label_map_.end()) {
        throw std::invalid_argument("line " + std::to_string(line_no_) + ": unknown label " +
                                    std::string(fields[label_col_]));
      }
      label = it->second;
    } else {
      if (value < 0.0 || value >= static_cast<double>(classes_)) {
        throw std::invalid_argument("line " + std::to_string(line_no_) + ": unknown label " +
                                    std::string(fields[label_col_]) + " (expected 0.." +
                                    std::to_string(classes_ - 1) + ")");
      }
      label = static_cast<std::size_t>(value);
    }
  }

  StreamSpec spec_;
  std::ifstream in_;
  std::size_t line_no_ = 0;
  std::size_t columns_ = 0;
  std::size_t label_col_ = 0;
  std::vector<std::size_t> feature_cols_;
  std::size_t features_ = 0;
  std::size_t classes_ = 0;
  std::map<double, std::size_t> label_map_;
  std::int64_t batch_index_ = 0;
};

}  // namespace

std::unique_ptr<BatchSource> make_stream(const StreamSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case StreamKind::sea: return std::make_unique<SeaStream>(spec);
    case StreamKind::hyperplane: return std::make_unique<HyperplaneStream>(spec);
    case StreamKind::gaussians: return std::make_unique<GaussianStream>(spec);
    case StreamKind::csv: return std::make_unique<CsvStream>(spec);
  }
  throw std::invalid_argument("unknown stream kind");
}

std::size_t dump_csv(BatchSource& source, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  for (std::size_t i = 0; i < source.features(); ++i) out << 'f' << i << ',';
  out << "label\n";
  std::size_t rows = 0;
  char buf[64];
  while (auto batch = source.next()) {
    for (std::size_t t = 0; t < batch->size(); ++t) {
      for (double v : batch->features.row(t)) {
        const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
        out.write(buf, end - buf);
        out << ',';
      }
      out << batch->label_of(t) << '\n';
      ++rows;
    }
  }
  out.flush();
  if (!out) throw IoError("write error on '" + path.string() + "'");
  return rows;
}

}  // namespace adl
