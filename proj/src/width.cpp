#include "adl/width.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace adl {

void WidthState::observe(double bias_sq, double variance) noexcept {
  bias_stat.update(bias_sq);
  var_stat.update(variance);
  ++samples_seen;
  grew_this_sample = false;
}

Vector expected_first_hidden(const LayerParams& first, std::span<const double> mu,
                             std::span<const double> sigma) {
  if (mu.size() != first.input_width() || sigma.size() != first.input_width()) {
    throw std::invalid_argument("expected_first_hidden: mu/sigma width mismatch");
  }
  Vector scaled(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    scaled[i] = mu[i] / std::sqrt(1.0 + std::numbers::pi * sigma[i] * sigma[i] / 8.0);
  }
  return first.hidden(scaled);
}

ExpectedChain expected_output(const AdlNetwork& net, std::span<const double> exp_h1,
                              std::size_t winning) {
  if (winning >= net.depth()) throw std::out_of_range("expected_output: layer out of range");
  ExpectedChain chain;
  chain.hidden.reserve(winning + 1);
  chain.hidden.emplace_back(exp_h1.begin(), exp_h1.end());
  for (std::size_t l = 1; l <= winning; ++l) {
    chain.hidden.push_back(net.layer(l).hidden(chain.hidden.back()));
  }
  chain.output = net.layer(winning).head(chain.hidden.back());
  return chain;
}

NsEstimate ns_estimate(const AdlNetwork& net, std::size_t winning, std::span<const double> mu,
                       std::span<const double> sigma, std::span<const double> label) {
  if (label.size() != net.classes()) throw std::invalid_argument("ns_estimate: label width");
  NsEstimate ns;
  Vector z_mu(mu.begin(), mu.end());
  Vector z_sigma(sigma.begin(), sigma.end());
  net.standardize_moments(z_mu, z_sigma);
  ns.exp_h1 = expected_first_hidden(net.layer(0), z_mu, z_sigma);
  auto mean_chain = expected_output(net, ns.exp_h1, winning);

  Vector h1_sq(ns.exp_h1.size());
  for (std::size_t i = 0; i < h1_sq.size(); ++i) h1_sq[i] = ns.exp_h1[i] * ns.exp_h1[i];
  auto sq_chain = expected_output(net, h1_sq, winning);

  ns.exp_hidden = std::move(mean_chain.hidden);
  ns.exp_y = std::move(mean_chain.output);
  ns.exp_y_sq = std::move(sq_chain.output);

  const auto m = static_cast<double>(net.classes());
  double bias = 0.0;
  double var = 0.0;
  for (std::size_t o = 0; o < net.classes(); ++o) {
    const double e = ns.exp_y[o];
    bias += (e - label[o]) * (e - label[o]);
    var += ns.exp_y_sq[o] - e * e;
  }
  ns.bias_sq = bias / m;
  ns.variance = std::max(var / m, 0.0);
  return ns;
}

double adaptive_sigma(double x) noexcept { return 1.3 * std::exp(-x) + 0.7; }

namespace {

// A statistic sitting exactly at its minima has not grown; without this the
// inequality holds with equality on any constant series (sigma_min = 0).
bool at_minimum(const MinTrackedStat& s) noexcept {
  return s.mean() <= s.mean_min() && s.stddev() <= s.std_min();
}

}  // namespace

bool check_grow(const WidthState& state, double bias_sq) noexcept {
  if (state.samples_seen <= WidthState::kWarmupSamples) return false;
  const auto& s = state.bias_stat;
  if (at_minimum(s)) return false;
  return s.mean() + s.stddev() >= s.mean_min() + adaptive_sigma(bias_sq) * s.std_min();
}

bool check_prune(const WidthState& state, double variance) noexcept {
  if (state.samples_seen <= WidthState::kWarmupSamples || state.grew_this_sample) return false;
  const auto& s = state.var_stat;
  if (at_minimum(s)) return false;
  return s.mean() + s.stddev() >= s.mean_min() + 2.0 * adaptive_sigma(variance) * s.std_min();
}

std::size_t select_prune_index(std::span<const double> exp_hidden) {
  if (exp_hidden.size() < 2) {
    throw std::invalid_argument("select_prune_index: a single-node layer cannot be pruned");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < exp_hidden.size(); ++i) {
    if (exp_hidden[i] < exp_hidden[best]) best = i;
  }
  return best;
}

}  // namespace adl
