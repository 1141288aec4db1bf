#include "adl/harness.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <sstream>
#include <stdexcept>

namespace adl {
namespace {

std::string number(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write error on '" + path.string() + "'");
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
}

StreamSpec seeded(StreamSpec spec, std::uint64_t seed) {
  spec.seed = seed;
  return spec;
}

BatchReport fixed_batch(FixedDnn& dnn, const StreamBatch& batch, double learning_rate) {
  const auto start = std::chrono::steady_clock::now();
  batch.validate();
  BatchReport report;
  report.batch = batch.batch_index;
  report.samples = batch.size();
  std::size_t correct = 0;
  for (std::size_t t = 0; t < batch.size(); ++t) {
    if (dnn.predict(batch.features.row(t)) == batch.label_of(t)) ++correct;
  }
  report.rate = static_cast<double>(correct) / static_cast<double>(batch.size());
  for (std::size_t t = 0; t < batch.size(); ++t) {
    dnn.sgd(batch.features.row(t), batch.labels.row(t), learning_rate);
  }
  report.structure = dnn.structure();
  report.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return report;
}

RepetitionResult run_repetition(const ExperimentConfig& config, std::uint64_t seed) {
  RepetitionResult rep;
  rep.seed = seed;
  const auto start = std::chrono::steady_clock::now();
  auto stream = make_stream(seeded(config.stream, seed));
  auto pipeline = config.pipeline;
  pipeline.seed = seed;

  if (config.model == ModelKind::adl) {
    AdlLearner learner(stream->features(), stream->classes(), pipeline);
    while (auto batch = stream->next()) rep.reports.push_back(learner.process_batch(*batch));
    if (config.keep_final_model) rep.final_model = Snapshot{learner.network(), learner.width()};
  } else {
    Rng rng(AdlLearner::model_seed(seed));
    FixedDnn dnn(stream->features(), stream->classes(), config.fixed_layers, rng);
    while (auto batch = stream->next()) {
      rep.reports.push_back(fixed_batch(dnn, *batch, pipeline.learning_rate));
    }
  }
  rep.summary = summarize(rep.reports);
  rep.summary.seed = seed;
  rep.summary.model = config.model_name();
  rep.summary.stream = std::string(to_string(config.stream.kind));
  rep.summary.et_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  if (!config.record_timing) {
    rep.summary.et_ms = 0.0;
    for (auto& r : rep.reports) r.wall_time_ms = 0.0;
  }
  return rep;
}

}  // namespace

void ExperimentConfig::validate() const {
  stream.validate();
  pipeline.validate();
  if (repetitions < 1) throw std::invalid_argument("repetitions must be at least 1");
  if (threads < 1) throw std::invalid_argument("threads must be at least 1");
  if (model == ModelKind::fixed_dnn) {
    if (fixed_layers.empty()) throw std::invalid_argument("fixed DNN needs at least one hidden layer");
    for (auto size : fixed_layers) {
      if (size == 0) throw std::invalid_argument("fixed DNN layer sizes must be positive");
    }
  }
}

std::string ExperimentConfig::model_name() const {
  if (model == ModelKind::adl) return "adl";
  std::string name = "fixed:";
  for (std::size_t i = 0; i < fixed_layers.size(); ++i) {
    if (i) name += 'x';
    name += std::to_string(fixed_layers[i]);
  }
  return name;
}

RunSummary summarize(const std::vector<BatchReport>& reports) {
  RunSummary s;
  s.batches = reports.size();
  if (reports.empty()) return s;
  const double n = static_cast<double>(reports.size());
  for (const auto& r : reports) {
    s.rate_mean += r.rate;
    s.hl_mean += static_cast<double>(r.structure.hidden_layers);
    s.hn_mean += static_cast<double>(r.structure.hidden_nodes);
    s.nop_mean += static_cast<double>(r.structure.parameters);
    s.et_ms += r.wall_time_ms;
    s.grow_events += r.grow_events;
    s.prune_events += r.prune_events;
    if (r.drift.status == DriftStatus::drift) ++s.drifts;
    if (r.drift.status == DriftStatus::warning) ++s.warnings;
    for (const auto& e : r.layer_events) {
      if (e.kind == "add") ++s.layers_added;
      if (e.kind == "deactivate") ++s.layers_deactivated;
    }
  }
  s.rate_mean /= n;
  s.hl_mean /= n;
  s.hn_mean /= n;
  s.nop_mean /= n;
  double var = 0.0;
  for (const auto& r : reports) var += (r.rate - s.rate_mean) * (r.rate - s.rate_mean);
  s.rate_std = std::sqrt(var / n);
  const auto& last = reports.back().structure;
  s.hl_final = static_cast<double>(last.hidden_layers);
  s.hn_final = static_cast<double>(last.hidden_nodes);
  s.nop_final = static_cast<double>(last.parameters);
  return s;
}

FixedDnn::FixedDnn(std::size_t inputs, std::size_t classes, const std::vector<std::size_t>& hidden,
                   Rng& rng) {
  if (hidden.empty()) throw std::invalid_argument("fixed DNN needs at least one hidden layer");
  if (inputs < 1 || classes < 2) throw std::invalid_argument("fixed DNN: invalid dimensions");
  std::size_t width = inputs;
  for (auto size : hidden) {
    if (size == 0) throw std::invalid_argument("fixed DNN layer sizes must be positive");
    W_.push_back(xavier_init(width, size, rng));
    b_.emplace_back(size, 0.0);
    width = size;
  }
  Ws_ = xavier_init(width, classes, rng);
  bs_.assign(classes, 0.0);
  input_stats_.resize(inputs);
}

Vector FixedDnn::standardize(std::span<const double> x) const {
  if (x.size() != input_stats_.size()) throw std::invalid_argument("fixed DNN: feature width mismatch");
  Vector z(x.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = adl::standardize(input_stats_[i], x[i]);
  return z;
}

Vector FixedDnn::predict_proba(std::span<const double> x) const {
  Vector h = standardize(x);
  for (std::size_t l = 0; l < W_.size(); ++l) h = sigmoid(affine(W_[l], h, b_[l]));
  return softmax(affine(Ws_, h, bs_));
}

void FixedDnn::sgd(std::span<const double> x, std::span<const double> label, double learning_rate) {
  if (x.size() != input_stats_.size()) throw std::invalid_argument("fixed DNN: feature width mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) input_stats_[i].update(x[i]);
  std::vector<Vector> acts;
  acts.push_back(standardize(x));
  for (std::size_t l = 0; l < W_.size(); ++l) acts.push_back(sigmoid(affine(W_[l], acts.back(), b_[l])));
  const auto y = softmax(affine(Ws_, acts.back(), bs_));

  Vector delta(y.size());
  for (std::size_t o = 0; o < y.size(); ++o) delta[o] = y[o] - label[o];

  // Head, then hidden layers from the top down.
  const auto& top = acts.back();
  Vector back(top.size(), 0.0);
  for (std::size_t o = 0; o < Ws_.rows(); ++o) {
    for (std::size_t r = 0; r < Ws_.cols(); ++r) {
      back[r] += Ws_(o, r) * delta[o];
      Ws_(o, r) -= learning_rate * delta[o] * top[r];
    }
    bs_[o] -= learning_rate * delta[o];
  }
  for (std::size_t l = W_.size(); l-- > 0;) {
    const auto& h = acts[l + 1];
    const auto& input = acts[l];
    Vector pre(h.size());
    for (std::size_t r = 0; r < h.size(); ++r) pre[r] = back[r] * h[r] * (1.0 - h[r]);
    Vector below(input.size(), 0.0);
    auto& W = W_[l];
    for (std::size_t r = 0; r < W.rows(); ++r) {
      for (std::size_t c = 0; c < W.cols(); ++c) {
        below[c] += W(r, c) * pre[r];
        W(r, c) -= learning_rate * pre[r] * input[c];
      }
      b_[l][r] -= learning_rate * pre[r];
    }
    back = std::move(below);
  }
}

StructureCounts FixedDnn::structure() const {
  StructureCounts s;
  s.hidden_layers = W_.size();
  for (std::size_t l = 0; l < W_.size(); ++l) {
    s.hidden_nodes += W_[l].rows();
    s.parameters += W_[l].rows() * W_[l].cols() + b_[l].size();
  }
  s.parameters += Ws_.rows() * Ws_.cols() + bs_.size();
  return s;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult result;
  result.repetitions.resize(config.repetitions);
  const auto base = config.pipeline.seed;
  if (config.threads <= 1 || config.repetitions == 1) {
    for (std::size_t i = 0; i < config.repetitions; ++i) {
      result.repetitions[i] = run_repetition(config, base + i);
    }
  } else {
    for (std::size_t first = 0; first < config.repetitions; first += config.threads) {
      std::vector<std::future<RepetitionResult>> running;
      const auto last = std::min(config.repetitions, first + config.threads);
      for (std::size_t i = first; i < last; ++i) {
        running.push_back(std::async(std::launch::async, run_repetition, std::cref(config), base + i));
      }
      for (std::size_t i = first; i < last; ++i) result.repetitions[i] = running[i - first].get();
    }
  }

  std::vector<BatchReport> all;
  double et = 0.0;
  for (const auto& rep : result.repetitions) {
    all.insert(all.end(), rep.reports.begin(), rep.reports.end());
    et += rep.summary.et_ms;
  }
  result.overall = summarize(all);
  result.overall.et_ms = et;
  result.overall.seed = base;
  result.overall.model = config.model_name();
  result.overall.stream = std::string(to_string(config.stream.kind));
  return result;
}

ExperimentResult run_fixed_dnn(const ExperimentConfig& config) {
  auto fixed = config;
  fixed.model = ModelKind::fixed_dnn;
  return run_experiment(fixed);
}

nlohmann::ordered_json report_to_json(const BatchReport& r, std::uint64_t seed) {
  nlohmann::ordered_json j;
  j["batch"] = r.batch;
  j["rate"] = r.rate;
  j["HL"] = r.structure.hidden_layers;
  j["HN"] = r.structure.hidden_nodes;
  j["NoP"] = r.structure.parameters;
  j["drift_status"] = std::string(to_string(r.drift.status));
  j["cut"] = r.drift.cut ? nlohmann::ordered_json(*r.drift.cut) : nlohmann::ordered_json();
  j["grow_events"] = r.grow_events;
  j["prune_events"] = r.prune_events;
  auto& events = j["layer_events"] = nlohmann::ordered_json::array();
  for (const auto& e : r.layer_events) events.push_back({{"kind", e.kind}, {"layer", e.layer}});
  j["beta"] = r.beta;
  j["p"] = r.p;
  j["wall_time_ms"] = r.wall_time_ms;
  j["seed"] = seed;
  j["samples"] = r.samples;
  j["winning_layer"] = r.winning_layer;
  const auto& s = r.drift.stats;
  j["drift_stats"] = {{"F", s.f_mean}, {"G", s.g_mean}, {"H", s.h_mean}, {"eps_F", s.eps_f},
                      {"eps_G", s.eps_g}, {"eps_W", s.eps_w}, {"eps_D", s.eps_d}};
  if (r.mici && r.mici->first) {
    j["mici"] = {{"pair", {*r.mici->first, *r.mici->second}},
                 {"gamma", r.mici->gamma},
                 {"rho", r.mici->rho}};
  }
  j["ns"] = {{"bias_sq", r.ns_bias_mean}, {"variance", r.ns_var_mean}};
  return j;
}

std::string summary_csv(const std::vector<const ExperimentResult*>& results) {
  std::string out = "model,stream,seed,rate_mean,rate_std,HL,HN,NoP,ET_ms\n";
  for (const auto* result : results) {
    for (const auto& rep : result->repetitions) {
      const auto& s = rep.summary;
      out += s.model + ',' + s.stream + ',' + std::to_string(s.seed) + ',' + number(s.rate_mean) +
             ',' + number(s.rate_std) + ',' + number(s.hl_mean) + ',' + number(s.hn_mean) + ',' +
             number(s.nop_mean) + ',' + number(s.et_ms) + '\n';
    }
  }
  return out;
}

void emit_reports(const ExperimentResult& result, const std::filesystem::path& dir) {
  ensure_dir(dir);
  {
    const auto path = dir / "batches.jsonl";
    auto out = open_output(path);
    for (const auto& rep : result.repetitions) {
      for (const auto& r : rep.reports) out << report_to_json(r, rep.seed).dump() << '\n';
    }
    finish(out, path);
  }
  {
    const auto path = dir / "summary.csv";
    auto out = open_output(path);
    out << summary_csv({&result});
    finish(out, path);
  }
  {
    const auto path = dir / "plot.csv";
    auto out = open_output(path);
    out << "seed,batch,rate,HL,HN\n";
    for (const auto& rep : result.repetitions) {
      for (const auto& r : rep.reports) {
        out << rep.seed << ',' << r.batch << ',' << number(r.rate) << ','
            << r.structure.hidden_layers << ',' << r.structure.hidden_nodes << '\n';
      }
    }
    finish(out, path);
  }
}

Comparison run_comparison(const ExperimentConfig& config, const std::vector<std::size_t>& fixed_layers) {
  Comparison c;
  c.adl_config = config;
  c.adl_config.model = ModelKind::adl;
  c.fixed_config = config;
  c.fixed_config.model = ModelKind::fixed_dnn;
  c.fixed_config.fixed_layers = fixed_layers;
  c.fixed_config.validate();
  c.adl = run_experiment(c.adl_config);
  c.fixed = run_experiment(c.fixed_config);
  return c;
}

void emit_comparison(const Comparison& c, const std::filesystem::path& dir) {
  ensure_dir(dir);
  {
    const auto path = dir / "summary.csv";
    auto out = open_output(path);
    out << summary_csv({&c.adl, &c.fixed});
    finish(out, path);
  }
  {
    const auto path = dir / "delta.csv";
    auto out = open_output(path);
    out << "seed,batch,rate_adl,rate_fixed,delta\n";
    for (std::size_t i = 0; i < c.adl.repetitions.size(); ++i) {
      const auto& a = c.adl.repetitions[i];
      const auto& f = c.fixed.repetitions[i];
      for (std::size_t k = 0; k < a.reports.size() && k < f.reports.size(); ++k) {
        out << a.seed << ',' << a.reports[k].batch << ',' << number(a.reports[k].rate) << ','
            << number(f.reports[k].rate) << ',' << number(a.reports[k].rate - f.reports[k].rate)
            << '\n';
      }
    }
    finish(out, path);
  }
}

}  // namespace adl
