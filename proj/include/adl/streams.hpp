#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "adl/batch.hpp"

namespace adl {

/// Raised for unreadable or unwritable files, as opposed to bad input.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class StreamKind { sea, hyperplane, gaussians, csv };

std::string_view to_string(StreamKind kind) noexcept;
StreamKind parse_stream_kind(std::string_view name);

/// Concept `concept_id` is in force from sample index `sample` on.
struct DriftPoint {
  std::size_t sample = 0;
  int concept_id = 0;

  friend bool operator==(const DriftPoint&, const DriftPoint&) = default;
};

struct CsvSchema {
  std::filesystem::path path;
  bool has_header = false;
  std::optional<std::size_t> label_column;  // default: last column
  std::vector<std::size_t> feature_columns; // default: every other column
  std::optional<std::size_t> classes;       // default: distinct labels found
};

struct StreamSpec {
  StreamKind kind = StreamKind::sea;
  std::size_t total = 50000;
  std::size_t batch_size = 500;
  std::vector<DriftPoint> drift_schedule;
  std::uint64_t seed = 0;

  double label_noise = 0.0;
  std::vector<double> sea_thresholds{8.0, 9.0, 7.0, 9.5};
  std::size_t dims = 10;              // hyperplane and gaussians
  double rotation = 1.5707963267948966;  // hyperplane angle per concept step
  std::size_t classes = 2;            // gaussians
  double separation = 6.0;            // gaussians: adjacent means, in units of sigma
  CsvSchema csv;

  void validate() const;
};

/// SEA stream with the benchmark's usual shape: 50,000 samples in batches
/// of 500, 10% label noise, concepts 8, 9, 7, 9.5 switching every 12,500.
StreamSpec sea_scenario(std::uint64_t seed = 0);

/// Default stream for each kind. Synthetic kinds other than SEA get 20,000
/// samples with abrupt drifts at 5,250, 10,250 and 15,250, placed inside
/// batches so the detector sees both concepts in one window.
StreamSpec default_scenario(StreamKind kind, std::uint64_t seed = 0);
// Lazy producer of consecutive batches.
class BatchSource {
 public:
  virtual ~BatchSource() = default;
  virtual std::optional<StreamBatch> next() = 0;
  virtual std::size_t features() const noexcept = 0;
  virtual std::size_t classes() const noexcept = 0;
};

std::unique_ptr<BatchSource> make_stream(const StreamSpec& spec);

/// Concept in force at a sample index under a schedule (0 before the first point).
int concept_at(const std::vector<DriftPoint>& schedule, std::size_t sample) noexcept;

/// SEA rule: class 1 iff f1 + f2 <= threshold.
std::size_t sea_label(double f1, double f2, double threshold) noexcept;

/// Unit normal of the hyperplane for a concept, and its offset through the
/// centre of the unit cube.
struct Hyperplane {
  std::vector<double> normal;
  double offset = 0.0;
};
Hyperplane hyperplane_concept(const StreamSpec& spec, int concept_id);

/// Class 1 iff normal . x - offset > 0; points on the plane are class 0.
std::size_t hyperplane_label(const Hyperplane& plane, std::span<const double> x) noexcept;

/// Class means for a concept: means sit on a circle in the first two
/// dimensions, adjacent means `separation` apart; concept k rotates the
/// class-to-mean assignment by k.
std::vector<std::vector<double>> gaussian_means(const StreamSpec& spec, int concept_id);

/// Writes every batch of the source as CSV rows f0..f{n-1},label with a header.
std::size_t dump_csv(BatchSource& source, const std::filesystem::path& path);

}  // namespace adl
