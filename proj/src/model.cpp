#include "adl/model.hpp"

#include <cstring>
#include <stdexcept>
#include <string>

namespace adl {
namespace {

LayerParams make_layer(std::size_t input_width, std::size_t nodes, std::size_t classes, Rng& rng) {
  LayerParams layer;
  layer.W = xavier_init(input_width, nodes, rng);
  layer.b.assign(nodes, 0.0);
  layer.Ws = xavier_init(nodes, classes, rng);
  layer.bs.assign(classes, 0.0);
  return layer;
}

Vector xavier_vector(std::size_t length, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double bound = xavier_bound(fan_in, fan_out);
  std::uniform_real_distribution<double> dist(-bound, bound);
  Vector v(length);
  for (auto& x : v) x = dist(rng);
  return v;
}

}  // namespace

std::size_t LayerParams::param_count() const noexcept {
  return W.rows() * W.cols() + b.size() + Ws.rows() * Ws.cols() + bs.size();
}

AdlNetwork::AdlNetwork(std::size_t inputs, std::size_t classes, Rng& rng)
    : inputs_(inputs), classes_(classes) {
  if (inputs < 1) throw std::invalid_argument("network needs at least one input feature");
  if (classes < 2) throw std::invalid_argument("network needs at least two classes");
  layers_.push_back(make_layer(inputs, 1, classes, rng));
  voting_.beta = {1.0};
  voting_.p = {1.0};
  voting_.active = {true};
  input_stats_.resize(inputs);
}

void AdlNetwork::observe_input(std::span<const double> x) {
  if (x.size() != inputs_) throw std::invalid_argument("observe_input: feature width mismatch");
  for (std::size_t i = 0; i < inputs_; ++i) input_stats_[i].update(x[i]);
}

Vector AdlNetwork::input_mean() const {
  Vector mu(inputs_);
  for (std::size_t i = 0; i < inputs_; ++i) mu[i] = input_stats_[i].mean();
  return mu;
}

Vector AdlNetwork::input_stddev() const {
  Vector sigma(inputs_);
  for (std::size_t i = 0; i < inputs_; ++i) sigma[i] = input_stats_[i].stddev();
  return sigma;
}

Vector AdlNetwork::standardize(std::span<const double> x) const {
  if (x.size() != inputs_) throw std::invalid_argument("standardize: feature width mismatch");
  Vector z(inputs_);
  for (std::size_t i = 0; i < inputs_; ++i) z[i] = adl::standardize(input_stats_[i], x[i]);
  return z;
}

void AdlNetwork::standardize_moments(Vector& mu, Vector& sigma) const {
  if (mu.size() != inputs_ || sigma.size() != inputs_) {
    throw std::invalid_argument("standardize_moments: width mismatch");
  }
  for (std::size_t i = 0; i < inputs_; ++i) {
    const auto& stat = input_stats_[i];
    const double slope = adl::standardize(stat, 1.0) - adl::standardize(stat, 0.0);
    mu[i] = adl::standardize(stat, mu[i]);
    sigma[i] *= slope;
  }
}

void AdlNetwork::add_node(std::size_t l, Rng& rng) {
  auto& layer = layers_.at(l);
  const std::size_t grown = layer.nodes() + 1;
  layer.W.append_row(xavier_vector(layer.input_width(), layer.input_width(), grown, rng));
  layer.b.push_back(0.0);
  layer.Ws.append_col(xavier_vector(classes_, grown, classes_, rng));
  if (l + 1 < layers_.size()) {
    auto& next = layers_[l + 1];
    next.W.append_col(xavier_vector(next.nodes(), grown, next.nodes(), rng));
  }
}

void AdlNetwork::prune_node(std::size_t l, std::size_t i) {
  auto& layer = layers_.at(l);
  if (layer.nodes() < 2) {
    throw std::logic_error("prune_node: layer " + std::to_string(l) + " has a single node");
  }
  if (i >= layer.nodes()) throw std::out_of_range("prune_node: node index out of range");
  layer.W.erase_row(i);
  layer.b.erase(layer.b.begin() + static_cast<std::ptrdiff_t>(i));
  layer.Ws.erase_col(i);
  if (l + 1 < layers_.size()) layers_[l + 1].W.erase_col(i);
}

std::size_t AdlNetwork::add_layer(Rng& rng) {
  layers_.push_back(make_layer(layers_.back().nodes(), 1, classes_, rng));
  voting_.beta.push_back(1.0);
  voting_.p.push_back(1.0);
  voting_.active.push_back(true);
  vote::normalize(voting_);
  return layers_.size() - 1;
}

void AdlNetwork::deactivate_layer_output(std::size_t l) {
  if (!voting_.active.at(l)) return;
  if (voting_.active_count() < 2) {
    throw std::logic_error("deactivate_layer_output: refusing to detach the only active layer");
  }
  voting_.active[l] = false;
  vote::normalize(voting_);
}

AdlNetwork AdlNetwork::from_parts(std::size_t inputs, std::size_t classes,
                                  std::vector<LayerParams> layers, VotingState voting,
                                  std::vector<RecursiveStat> input_stats) {
  AdlNetwork net;
  net.inputs_ = inputs;
  net.classes_ = classes;
  net.layers_ = std::move(layers);
  net.voting_ = std::move(voting);
  net.input_stats_ = std::move(input_stats);
  net.check_consistency();
  return net;
}

void AdlNetwork::check_consistency() const {
  if (inputs_ < 1 || classes_ < 2) throw std::invalid_argument("network: invalid dimensions");
  if (layers_.empty()) throw std::invalid_argument("network: no layers");
  const auto L = layers_.size();
  if (voting_.beta.size() != L || voting_.p.size() != L || voting_.active.size() != L) {
    throw std::invalid_argument("network: voting state does not match layer count");
  }
  if (voting_.active_count() == 0) throw std::invalid_argument("network: no active output");
  if (input_stats_.size() != inputs_) throw std::invalid_argument("network: input stats width");
  std::size_t width = inputs_;
  for (std::size_t l = 0; l < L; ++l) {
    const auto& layer = layers_[l];
    if (layer.nodes() < 1 || layer.input_width() != width || layer.b.size() != layer.nodes() ||
        layer.Ws.rows() != classes_ || layer.Ws.cols() != layer.nodes() ||
        layer.bs.size() != classes_) {
      throw std::invalid_argument("network: layer " + std::to_string(l) +
                                  " has inconsistent dimensions");
    }
    width = layer.nodes();
  }
}

ForwardResult forward(const AdlNetwork& net, std::span<const double> x) {
  if (x.size() != net.inputs()) {
    throw std::invalid_argument("forward: expected " + std::to_string(net.inputs()) +
                                " features, got " + std::to_string(x.size()));
  }
  ForwardResult out;
  out.hidden.reserve(net.depth());
  out.outputs.reserve(net.depth());
  out.global.assign(net.classes(), 0.0);
  const auto& voting = net.voting();
  const Vector z = net.standardize(x);
  std::span<const double> input = z;
  for (std::size_t l = 0; l < net.depth(); ++l) {
    const auto& layer = net.layer(l);
    out.hidden.push_back(layer.hidden(input));
    out.outputs.push_back(layer.head(out.hidden.back()));
    if (voting.active[l]) {
      for (std::size_t o = 0; o < net.classes(); ++o) {
        out.global[o] += voting.beta[l] * out.outputs.back()[o];
      }
    }
    input = out.hidden.back();
  }
  out.predicted = argmax(out.global);
  return out;
}

StructureCounts count_params(const AdlNetwork& net) {
  StructureCounts counts;
  counts.hidden_layers = net.voting().active_count();
  for (const auto& layer : net.layers()) {
    counts.hidden_nodes += layer.nodes();
    counts.parameters += layer.param_count();
  }
  return counts;
}

std::uint64_t layer_hash(const LayerParams& layer) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::span<const double> values) {
    for (double v : values) {
      unsigned char bytes[sizeof(double)];
      std::memcpy(bytes, &v, sizeof(double));
      for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
      }
    }
  };
  mix(layer.W.values());
  mix(layer.b);
  mix(layer.Ws.values());
  mix(layer.bs);
  return h;
}

}  // namespace adl
