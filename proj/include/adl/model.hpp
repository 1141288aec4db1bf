#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "adl/numerics.hpp"
#include "adl/vote.hpp"

namespace adl {

/// One hidden layer (W, b) and its private softmax head (Ws, bs).
struct LayerParams {
  Matrix W;   // nodes x input_width
  Vector b;   // nodes
  Matrix Ws;  // classes x nodes
  Vector bs;  // classes

  std::size_t nodes() const noexcept { return W.rows(); }
  std::size_t input_width() const noexcept { return W.cols(); }
  std::size_t classes() const noexcept { return Ws.rows(); }
  std::size_t param_count() const noexcept;

  Vector hidden(std::span<const double> input) const { return sigmoid(affine(W, input, b)); }
  Vector head(std::span<const double> hidden) const { return softmax(affine(Ws, hidden, bs)); }

  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

struct ForwardResult {
  std::vector<Vector> hidden;   // h^(l), every layer
  std::vector<Vector> outputs;  // y^(l), every layer, active or not
  Vector global;                // sum over active layers of beta * y
  std::size_t predicted = 0;
};

struct StructureCounts {
  std::size_t hidden_layers = 0;  // output-active layers
  std::size_t hidden_nodes = 0;
  std::size_t parameters = 0;
};

// The different-depth network: a stack of sigmoid layers, each with its
// own softmax head, combined by weighted voting. Layers are indexed from 0.
class AdlNetwork {
 public:
  /// One layer with a single node; beta = [1], p = [1].
  AdlNetwork(std::size_t inputs, std::size_t classes, Rng& rng);

  std::size_t inputs() const noexcept { return inputs_; }
  std::size_t classes() const noexcept { return classes_; }
  std::size_t depth() const noexcept { return layers_.size(); }

  const LayerParams& layer(std::size_t l) const { return layers_.at(l); }
  LayerParams& layer(std::size_t l) { return layers_.at(l); }
  const std::vector<LayerParams>& layers() const noexcept { return layers_; }

  const VotingState& voting() const noexcept { return voting_; }
  VotingState& voting() noexcept { return voting_; }
  bool output_active(std::size_t l) const { return voting_.active.at(l); }
  std::size_t winning_layer() const { return vote::winning_layer(voting_); }

  const std::vector<RecursiveStat>& input_stats() const noexcept { return input_stats_; }
  void observe_input(std::span<const double> x);
  Vector input_mean() const;
  Vector input_stddev() const;

  /// First-layer input: x z-scored with the running input statistics.
  /// Identity until two samples have been observed; a constant feature is
  /// only centred.
  Vector standardize(std::span<const double> x) const;
  /// Raw input moments mapped through the same transform.
  void standardize_moments(Vector& mu, Vector& sigma) const;

  /// Appends a Xavier-initialized node to layer l. A successor layer gains
  /// a matching Xavier-initialized input column.
  void add_node(std::size_t l, Rng& rng);

  /// Removes node i of layer l (and the successor's matching column).
  /// Refuses to empty a layer.
  void prune_node(std::size_t l, std::size_t i);

  /// Appends a one-node layer fed by the current last layer, with
  /// beta = p = 1 before the weights are renormalized. Returns its index.
  std::size_t add_layer(Rng& rng);

  /// Detaches layer l from the vote. Its forward pass is kept.
  void deactivate_layer_output(std::size_t l);

  /// Restores a network from its parts; used by snapshot loading.
  static AdlNetwork from_parts(std::size_t inputs, std::size_t classes,
                               std::vector<LayerParams> layers, VotingState voting,
                               std::vector<RecursiveStat> input_stats);

  friend bool operator==(const AdlNetwork&, const AdlNetwork&) = default;

 private:
  AdlNetwork() = default;
  void check_consistency() const;

  std::size_t inputs_ = 0;
  std::size_t classes_ = 0;
  std::vector<LayerParams> layers_;
  VotingState voting_;
  std::vector<RecursiveStat> input_stats_;
};

ForwardResult forward(const AdlNetwork& net, std::span<const double> x);

StructureCounts count_params(const AdlNetwork& net);

/// FNV-1a over the raw bytes of every parameter of layer l.
std::uint64_t layer_hash(const LayerParams& layer);

}  // namespace adl
