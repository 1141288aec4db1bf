#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "adl/pipeline.hpp"
#include "adl/snapshot.hpp"
#include "adl/streams.hpp"
#include "json.hpp"

namespace adl {

enum class ModelKind { adl, fixed_dnn };

struct ExperimentConfig {
  StreamSpec stream;
  PipelineConfig pipeline;
  ModelKind model = ModelKind::adl;
  std::vector<std::size_t> fixed_layers;  // hidden sizes of the fixed baseline
  std::size_t repetitions = 1;            // repetition i runs with seed pipeline.seed + i
  std::size_t threads = 1;
  bool record_timing = true;              // false writes 0 for every time field
  bool keep_final_model = false;          // ADL only: snapshot each repetition's network

  void validate() const;
  std::string model_name() const;
};

struct RunSummary {
  std::string model;
  std::string stream;
  std::uint64_t seed = 0;
  std::size_t batches = 0;
  double rate_mean = 0.0;  // over batches
  double rate_std = 0.0;   // population std over batches
  double hl_final = 0.0, hn_final = 0.0, nop_final = 0.0;
  double hl_mean = 0.0, hn_mean = 0.0, nop_mean = 0.0;
  double et_ms = 0.0;
  std::size_t drifts = 0;
  std::size_t warnings = 0;
  std::size_t grow_events = 0;
  std::size_t prune_events = 0;
  std::size_t layers_added = 0;
  std::size_t layers_deactivated = 0;
};

struct RepetitionResult {
  std::uint64_t seed = 0;
  std::vector<BatchReport> reports;
  RunSummary summary;
  std::optional<Snapshot> final_model;
};

struct ExperimentResult {
  std::vector<RepetitionResult> repetitions;
  RunSummary overall;  // over every batch of every repetition
};

/// Aggregates per-batch reports. et_ms is left to the caller.
RunSummary summarize(const std::vector<BatchReport>& reports);

// Static multilayer perceptron trained end to end by per-sample SGD; the
// reference point for structural learning. Inputs are standardized with
// running statistics exactly as in AdlNetwork.
class FixedDnn {
 public:
  FixedDnn(std::size_t inputs, std::size_t classes, const std::vector<std::size_t>& hidden,
           Rng& rng);

  Vector predict_proba(std::span<const double> x) const;
  std::size_t predict(std::span<const double> x) const { return argmax(predict_proba(x)); }
  void sgd(std::span<const double> x, std::span<const double> label, double learning_rate);
  StructureCounts structure() const;

  const std::vector<Matrix>& weights() const noexcept { return W_; }

 private:
  Vector standardize(std::span<const double> x) const;

  std::vector<RecursiveStat> input_stats_;
  std::vector<Matrix> W_;
  std::vector<Vector> b_;
  Matrix Ws_;
  Vector bs_;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

/// run_experiment with the model forced to the fixed baseline.
ExperimentResult run_fixed_dnn(const ExperimentConfig& config);

nlohmann::ordered_json report_to_json(const BatchReport& report, std::uint64_t seed);

/// Writes batches.jsonl, summary.csv and plot.csv into `dir`.
void emit_reports(const ExperimentResult& result, const std::filesystem::path& dir);

/// Summary rows: model,stream,seed,rate_mean,rate_std,HL,HN,NoP,ET_ms
std::string summary_csv(const std::vector<const ExperimentResult*>& results);

struct Comparison {
  ExperimentConfig adl_config;
  ExperimentConfig fixed_config;
  ExperimentResult adl;
  ExperimentResult fixed;
};

/// ADL and the fixed baseline on identical streams and seeds.
Comparison run_comparison(const ExperimentConfig& config, const std::vector<std::size_t>& fixed_layers);

/// Writes summary.csv (both models) and delta.csv (per-batch rate difference).
void emit_comparison(const Comparison& comparison, const std::filesystem::path& dir);

}  // namespace adl
