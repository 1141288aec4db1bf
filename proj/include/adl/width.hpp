#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "adl/model.hpp"
#include "adl/numerics.hpp"

namespace adl {

// Network significance of the winning layer under a Gaussian input
// assumption, split into its squared bias and variance.
struct NsEstimate {
  Vector exp_h1;                  // E[h^(1)]
  std::vector<Vector> exp_hidden; // E[h^(l)] for l = 1..l_w (index 0 is E[h^(1)])
  Vector exp_y;                   // E[y^(l_w)]
  Vector exp_y_sq;                // E[(y^(l_w))^2]
  double bias_sq = 0.0;
  double variance = 0.0;
};

// Streaming statistics of the Bias^2 and Var series that drive node
// growing and pruning on the winning layer.
struct WidthState {
  /// Checks stay inert until this many samples have been observed.
  static constexpr std::uint64_t kWarmupSamples = 2;

  MinTrackedStat bias_stat;
  MinTrackedStat var_stat;
  std::uint64_t samples_seen = 0;
  bool grew_this_sample = false;

  /// Feeds one sample's NS decomposition and clears the per-sample flag.
  void observe(double bias_sq, double variance) noexcept;
  void reset() noexcept { *this = WidthState{}; }

  friend bool operator==(const WidthState&, const WidthState&) = default;
};

/// E[h^(1)] = sigmoid(W (mu / sqrt(1 + pi sigma^2 / 8)) + b), element-wise scaling.
Vector expected_first_hidden(const LayerParams& first, std::span<const double> mu,
                             std::span<const double> sigma);

struct ExpectedChain {
  std::vector<Vector> hidden;  // E[h^(1)] .. E[h^(l_w)]
  Vector output;               // softmax head of layer l_w on E[h^(l_w)]
};

/// Chains E[h^(l)] = sigmoid(W^(l) E[h^(l-1)] + b^(l)) up to layer l_w
/// starting from a first-layer expectation, then applies l_w's head.
ExpectedChain expected_output(const AdlNetwork& net, std::span<const double> exp_h1,
                              std::size_t winning);

/// mu and sigma are raw input moments; they pass through the network's input
/// standardization before the first-layer expectation.
NsEstimate ns_estimate(const AdlNetwork& net, std::size_t winning, std::span<const double> mu,
                       std::span<const double> sigma, std::span<const double> label);

/// 1.3 exp(-x) + 0.7, the confidence multiplier of the k-sigma rules.
double adaptive_sigma(double x) noexcept;

/// High-bias condition: mu_t + sigma_t >= mu_min + k sigma_min with
/// k = adaptive_sigma(bias_sq).
bool check_grow(const WidthState& state, double bias_sq) noexcept;

/// High-variance condition with multiplier 2 * adaptive_sigma(variance).
/// Never fires on a sample that grew a node.
bool check_prune(const WidthState& state, double variance) noexcept;

/// Node with the smallest expected activation, lowest index on ties.
std::size_t select_prune_index(std::span<const double> exp_hidden);

}  // namespace adl
