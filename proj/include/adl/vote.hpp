#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace adl {

// Voting block of a network: one entry per layer. Entries of layers whose
// output head was deactivated stay in place but are frozen and ignored.
struct VotingState {
  std::vector<double> beta;
  std::vector<double> p;
  std::vector<bool> active;

  std::size_t size() const noexcept { return beta.size(); }
  std::size_t active_count() const noexcept;

  friend bool operator==(const VotingState&, const VotingState&) = default;
};

namespace vote {

/// Smallest voting weight a penalty can leave behind.
inline constexpr double kBetaFloor = 1e-6;

double update_factor(double p, bool correct, double zeta) noexcept;

/// min(beta * (1 + p), 1)
double apply_reward(double beta, double p) noexcept;

/// p * beta, floored at kBetaFloor so a layer can always be rewarded back.
double apply_penalty(double beta, double p) noexcept;

/// Rescales the active weights to sum to one.
void normalize(VotingState& state);

/// Index of the active layer with the largest weight; ties go to the
/// shallower layer.
std::size_t winning_layer(const VotingState& state);

/// One per-sample update over every active layer: the factor moves by
/// +-zeta on that layer's own correctness, then the weight is rewarded
/// or penalized. Normalization is left to the caller.
void update_sample(VotingState& state, const std::vector<bool>& layer_correct, double zeta);

}  // namespace vote
}  // namespace adl
