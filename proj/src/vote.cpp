#include "adl/vote.hpp"

#include <algorithm>
#include <stdexcept>

namespace adl {

std::size_t VotingState::active_count() const noexcept {
  return static_cast<std::size_t>(std::count(active.begin(), active.end(), true));
}

namespace vote {

double update_factor(double p, bool correct, double zeta) noexcept {
  return std::clamp(correct ? p + zeta : p - zeta, 0.0, 1.0);
}

double apply_reward(double beta, double p) noexcept { return std::min(beta * (1.0 + p), 1.0); }

double apply_penalty(double beta, double p) noexcept { return std::max(p * beta, kBetaFloor); }

void normalize(VotingState& state) {
  double total = 0.0;
  for (std::size_t l = 0; l < state.size(); ++l) {
    if (state.active[l]) total += state.beta[l];
  }
  if (!(total > 0.0)) throw std::logic_error("normalize: active voting weights sum to zero");
  for (std::size_t l = 0; l < state.size(); ++l) {
    if (state.active[l]) state.beta[l] /= total;
  }
}

std::size_t winning_layer(const VotingState& state) {
  std::size_t best = state.size();
  for (std::size_t l = 0; l < state.size(); ++l) {
    if (!state.active[l]) continue;
    if (best == state.size() || state.beta[l] > state.beta[best]) best = l;
  }
  if (best == state.size()) throw std::logic_error("winning_layer: no active layer");
  return best;
}

void update_sample(VotingState& state, const std::vector<bool>& layer_correct, double zeta) {
  if (layer_correct.size() != state.size()) {
    throw std::invalid_argument("update_sample: one correctness flag per layer expected");
  }
  for (std::size_t l = 0; l < state.size(); ++l) {
    if (!state.active[l]) continue;
    const bool correct = layer_correct[l];
    state.p[l] = update_factor(state.p[l], correct, zeta);
    state.beta[l] = correct ? apply_reward(state.beta[l], state.p[l])
                            : apply_penalty(state.beta[l], state.p[l]);
  }
}

}  // namespace vote
}  // namespace adl
