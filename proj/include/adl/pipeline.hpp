#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adl/batch.hpp"
#include "adl/depth.hpp"
#include "adl/model.hpp"
#include "adl/width.hpp"

namespace adl {

struct PipelineConfig {
  DriftConfig drift;
  double zeta = 0.001;
  double learning_rate = 0.01;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Batch held back on a warning, used to train a new layer if the next
/// batch confirms the drift.
struct WarningBuffer {
  std::optional<StreamBatch> buffered;
};

/// Predictions of the network before it sees any label of the batch.
struct TestPhaseResult {
  std::vector<std::size_t> predicted;                 // per sample, from the vote
  std::vector<std::vector<Vector>> layer_outputs;     // [t][l] = y^(l)
};

/// Predictions joined with the labels once they arrive.
struct ScoredBatch {
  ErrorWindow window;
  std::vector<std::vector<bool>> layer_correct;       // [t][l]
  std::vector<Vector> true_class_confidence;          // [l][t] = y^(l)_{true class}
  double rate = 0.0;
};

/// Runs the network over the features only; never mutates it.
TestPhaseResult test_phase(const AdlNetwork& net, const Matrix& features);

ScoredBatch score(const TestPhaseResult& predictions, const Matrix& labels,
                  std::int64_t batch_index = 0);

struct LayerGradient {
  Matrix dW;
  Vector db;
  Matrix dWs;
  Vector dbs;
};

/// Cross-entropy of layer l's own head against the one-hot label.
double layer_loss(const AdlNetwork& net, std::size_t layer, std::span<const double> x,
                  std::span<const double> label);

/// Gradient of layer_loss with respect to layer l's parameters, with the
/// layer's input treated as a constant.
LayerGradient layer_gradient(const AdlNetwork& net, std::size_t layer, std::span<const double> x,
                             std::span<const double> label);

/// One plain SGD step on layer l; every other layer is left untouched.
void sgd_layer(AdlNetwork& net, std::size_t layer, std::span<const double> x,
               std::span<const double> label, double learning_rate);

struct LowLevelOptions {
  std::optional<std::size_t> target_layer;  // defaults to the winning layer
  bool update_input_stats = true;
};

struct LowLevelStats {
  std::size_t layer = 0;
  std::size_t grow_events = 0;
  std::size_t prune_events = 0;
  double bias_sq_sum = 0.0;
  double variance_sum = 0.0;
  std::size_t samples = 0;
};

/// Single pass over the batch: input statistics, NS at the target layer,
/// node growing, SGD on the target layer, node pruning.
LowLevelStats low_level_learning(AdlNetwork& net, WidthState& width, const StreamBatch& batch,
                                 double learning_rate, Rng& rng,
                                 const LowLevelOptions& options = {});

struct LayerEvent {
  std::string kind;  // "add" or "deactivate"
  std::size_t layer = 0;
};

struct BatchReport {
  std::int64_t batch = 0;
  std::size_t samples = 0;
  double rate = 0.0;
  StructureCounts structure;
  DriftOutcome drift;
  std::size_t grow_events = 0;
  std::size_t prune_events = 0;
  std::vector<LayerEvent> layer_events;
  std::vector<double> beta;
  std::vector<double> p;
  std::optional<MiciScan> mici;
  double ns_bias_mean = 0.0;
  double ns_var_mean = 0.0;
  std::size_t winning_layer = 0;
  double wall_time_ms = 0.0;
};

// Owns one evolving network and runs the per-batch learning policy:
// score, vote, train the winning layer, prune redundant layers, react to
// drift.
class AdlLearner {
 public:
  AdlLearner(std::size_t inputs, std::size_t classes, PipelineConfig config);

  BatchReport process_batch(const StreamBatch& batch);

  const AdlNetwork& network() const noexcept { return net_; }
  AdlNetwork& network() noexcept { return net_; }
  const WidthState& width() const noexcept { return width_; }
  const WarningBuffer& buffer() const noexcept { return buffer_; }
  const PipelineConfig& config() const noexcept { return config_; }
  Rng& rng() noexcept { return rng_; }

  /// Replaces the network and width statistics, e.g. from a snapshot.
  void restore(AdlNetwork net, WidthState width);

  /// Engine seed derived from a run seed; keeps model draws apart from the
  /// stream generator that shares the same run seed.
  static std::uint64_t model_seed(std::uint64_t seed) noexcept;

 private:
  PipelineConfig config_;
  Rng rng_;
  AdlNetwork net_;
  WidthState width_;
  WarningBuffer buffer_;
};

}  // namespace adl
