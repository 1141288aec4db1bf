#include "adl/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

namespace adl {

void StreamBatch::validate() const {
  if (features.rows() == 0) throw std::invalid_argument("batch is empty");
  if (labels.rows() != features.rows()) {
    throw std::invalid_argument("batch has " + std::to_string(features.rows()) +
                                " feature rows but " + std::to_string(labels.rows()) +
                                " label rows");
  }
  for (std::size_t t = 0; t < labels.rows(); ++t) {
    double total = 0.0;
    for (double v : labels.row(t)) {
      if (v != 0.0 && v != 1.0) throw std::invalid_argument("label row is not binary");
      total += v;
    }
    if (total != 1.0) throw std::invalid_argument("label row is not one-hot");
  }
}

void PipelineConfig::validate() const {
  drift.validate();
  if (!(zeta > 0.0 && zeta <= 1.0)) throw std::invalid_argument("zeta must lie in (0, 1]");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning_rate must be positive");
  }
}

TestPhaseResult test_phase(const AdlNetwork& net, const Matrix& features) {
  if (features.cols() != net.inputs()) {
    throw std::invalid_argument("test_phase: batch has " + std::to_string(features.cols()) +
                                " features, network expects " + std::to_string(net.inputs()));
  }
  TestPhaseResult out;
  out.predicted.reserve(features.rows());
  out.layer_outputs.reserve(features.rows());
  for (std::size_t t = 0; t < features.rows(); ++t) {
    auto fwd = forward(net, features.row(t));
    out.predicted.push_back(fwd.predicted);
    out.layer_outputs.push_back(std::move(fwd.outputs));
  }
  return out;
}

ScoredBatch score(const TestPhaseResult& predictions, const Matrix& labels,
                  std::int64_t batch_index) {
  const std::size_t T = predictions.predicted.size();
  if (labels.rows() != T) throw std::invalid_argument("score: label count mismatch");
  ScoredBatch out;
  out.window.batch_index = batch_index;
  out.window.errors.resize(T);
  out.layer_correct.resize(T);
  const std::size_t L = T == 0 ? 0 : predictions.layer_outputs.front().size();
  out.true_class_confidence.assign(L, Vector(T));
  std::size_t correct = 0;
  for (std::size_t t = 0; t < T; ++t) {
    const std::size_t truth = argmax(labels.row(t));
    const bool hit = predictions.predicted[t] == truth;
    out.window.errors[t] = hit ? 0 : 1;
    correct += hit ? 1 : 0;
    out.layer_correct[t].resize(L);
    for (std::size_t l = 0; l < L; ++l) {
      const auto& y = predictions.layer_outputs[t][l];
      out.layer_correct[t][l] = argmax(y) == truth;
      out.true_class_confidence[l][t] = y[truth];
    }
  }
  out.rate = T == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(T);
  return out;
}

namespace {

// Input of layer l: standardized x for the first layer, otherwise h^(l-1).
Vector layer_input(const AdlNetwork& net, std::size_t layer, std::span<const double> x) {
  if (x.size() != net.inputs()) throw std::invalid_argument("feature width mismatch");
  Vector input = net.standardize(x);
  for (std::size_t l = 0; l < layer; ++l) input = net.layer(l).hidden(input);
  return input;
}

}  // namespace

double layer_loss(const AdlNetwork& net, std::size_t layer, std::span<const double> x,
                  std::span<const double> label) {
  const auto& params = net.layer(layer);
  const auto y = params.head(params.hidden(layer_input(net, layer, x)));
  double loss = 0.0;
  for (std::size_t o = 0; o < y.size(); ++o) {
    if (label[o] != 0.0) loss -= label[o] * std::log(std::max(y[o], 1e-300));
  }
  return loss;
}

LayerGradient layer_gradient(const AdlNetwork& net, std::size_t layer, std::span<const double> x,
                             std::span<const double> label) {
  const auto& params = net.layer(layer);
  if (label.size() != params.classes()) throw std::invalid_argument("label width mismatch");
  const auto input = layer_input(net, layer, x);
  const auto h = params.hidden(input);
  const auto y = params.head(h);

  LayerGradient g;
  g.dbs.resize(y.size());
  for (std::size_t o = 0; o < y.size(); ++o) g.dbs[o] = y[o] - label[o];

  g.dWs = Matrix(params.Ws.rows(), params.Ws.cols());
  for (std::size_t o = 0; o < g.dWs.rows(); ++o) {
    for (std::size_t r = 0; r < g.dWs.cols(); ++r) g.dWs(o, r) = g.dbs[o] * h[r];
  }

  g.db.assign(h.size(), 0.0);
  for (std::size_t r = 0; r < h.size(); ++r) {
    double back = 0.0;
    for (std::size_t o = 0; o < y.size(); ++o) back += params.Ws(o, r) * g.dbs[o];
    g.db[r] = back * h[r] * (1.0 - h[r]);
  }

  g.dW = Matrix(params.W.rows(), params.W.cols());
  for (std::size_t r = 0; r < g.dW.rows(); ++r) {
    for (std::size_t c = 0; c < g.dW.cols(); ++c) g.dW(r, c) = g.db[r] * input[c];
  }
  return g;
}

void sgd_layer(AdlNetwork& net, std::size_t layer, std::span<const double> x,
               std::span<const double> label, double learning_rate) {
  const auto g = layer_gradient(net, layer, x, label);
  auto& params = net.layer(layer);
  auto step = [learning_rate](std::span<double> w, std::span<const double> dw) {
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= learning_rate * dw[i];
  };
  step(params.W.values(), g.dW.values());
  step(params.b, g.db);
  step(params.Ws.values(), g.dWs.values());
  step(params.bs, g.dbs);
}

LowLevelStats low_level_learning(AdlNetwork& net, WidthState& width, const StreamBatch& batch,
                                 double learning_rate, Rng& rng, const LowLevelOptions& options) {
  LowLevelStats stats;
  stats.layer = options.target_layer.value_or(net.winning_layer());
  if (stats.layer >= net.depth()) throw std::out_of_range("low_level_learning: layer out of range");
  const std::size_t lw = stats.layer;

  for (std::size_t t = 0; t < batch.size(); ++t) {
    const auto x = batch.features.row(t);
    const auto label = batch.labels.row(t);
    if (options.update_input_stats) net.observe_input(x);

    const auto ns = ns_estimate(net, lw, net.input_mean(), net.input_stddev(), label);
    width.observe(ns.bias_sq, ns.variance);
    stats.bias_sq_sum += ns.bias_sq;
    stats.variance_sum += ns.variance;
    ++stats.samples;

    if (check_grow(width, ns.bias_sq)) {
      net.add_node(lw, rng);
      width.bias_stat.reset_min();
      width.grew_this_sample = true;
      ++stats.grow_events;
    }

    sgd_layer(net, lw, x, label, learning_rate);

    if (check_prune(width, ns.variance)) {
      width.var_stat.reset_min();
      if (net.layer(lw).nodes() >= 2) {
        net.prune_node(lw, select_prune_index(ns.exp_hidden[lw]));
        ++stats.prune_events;
      }
    }
  }
  return stats;
}

AdlLearner::AdlLearner(std::size_t inputs, std::size_t classes, PipelineConfig config)
    : config_((config.validate(), config)),
      rng_(model_seed(config.seed)),
      net_(inputs, classes, rng_) {}

std::uint64_t AdlLearner::model_seed(std::uint64_t seed) noexcept {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void AdlLearner::restore(AdlNetwork net, WidthState width) {
  net_ = std::move(net);
  width_ = width;
  buffer_.buffered.reset();
}

BatchReport AdlLearner::process_batch(const StreamBatch& batch) {
  const auto start = std::chrono::steady_clock::now();
  batch.validate();
  if (batch.labels.cols() != net_.classes()) {
    throw std::invalid_argument("batch has " + std::to_string(batch.labels.cols()) +
                                " classes, network expects " + std::to_string(net_.classes()));
  }

  BatchReport report;
  report.batch = batch.batch_index;
  report.samples = batch.size();

  // Test phase: prediction is fixed before any label is consumed.
  const auto predictions = test_phase(net_, batch.features);
  const auto scored = score(predictions, batch.labels, batch.batch_index);
  report.rate = scored.rate;

  // Voting weights follow the prequential error of each layer's own head.
  for (const auto& correct : scored.layer_correct) {
    vote::update_sample(net_.voting(), correct, config_.zeta);
  }
  vote::normalize(net_.voting());

  const auto low = low_level_learning(net_, width_, batch, config_.learning_rate, rng_);
  report.grow_events = low.grow_events;
  report.prune_events = low.prune_events;
  report.winning_layer = low.layer;
  if (low.samples > 0) {
    report.ns_bias_mean = low.bias_sq_sum / static_cast<double>(low.samples);
    report.ns_var_mean = low.variance_sum / static_cast<double>(low.samples);
  }

  if (net_.voting().active_count() >= 2 && batch.size() >= 2) {
    auto scan = layer_prune_candidate(net_, scored.true_class_confidence, config_.drift.delta_mici);
    if (scan.prune) {
      net_.deactivate_layer_output(*scan.prune);
      report.layer_events.push_back({"deactivate", *scan.prune});
    }
    report.mici = scan;
  }

  report.drift = detect(scored.window, config_.drift);
  switch (report.drift.status) {
    case DriftStatus::drift: {
      const std::size_t added = net_.add_layer(rng_);
      width_.reset();
      report.layer_events.push_back({"add", added});
      const LowLevelOptions replay{added, false};
      if (buffer_.buffered) {
        const auto more = low_level_learning(net_, width_, *buffer_.buffered,
                                             config_.learning_rate, rng_, replay);
        report.grow_events += more.grow_events;
        report.prune_events += more.prune_events;
      }
      const auto more = low_level_learning(net_, width_, batch, config_.learning_rate, rng_, replay);
      report.grow_events += more.grow_events;
      report.prune_events += more.prune_events;
      buffer_.buffered.reset();
      break;
    }
    case DriftStatus::warning:
      buffer_.buffered = batch;
      break;
    case DriftStatus::stable:
      buffer_.buffered.reset();
      break;
  }

  report.structure = count_params(net_);
  report.beta = net_.voting().beta;
  report.p = net_.voting().p;
  report.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace adl
