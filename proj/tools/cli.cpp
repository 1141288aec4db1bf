#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string_view>

#include "CLI11.hpp"
#include "adl/harness.hpp"
#include "adl/snapshot.hpp"
#include "adl/streams.hpp"

namespace adl::cli {
namespace {

namespace fs = std::filesystem;

std::size_t parse_size(std::string_view text, std::string_view what) {
  std::size_t value = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    throw std::invalid_argument(std::string(what) + ": cannot parse '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view text, std::string_view seps) {
  std::vector<std::string_view> parts;
  while (true) {
    const auto pos = text.find_first_of(seps);
    parts.push_back(text.substr(0, pos));
    if (pos == std::string_view::npos) return parts;
    text.remove_prefix(pos + 1);
  }
}

// "5250:1,10250:2" or "none".
std::vector<DriftPoint> parse_drift(std::string_view text) {
  std::vector<DriftPoint> schedule;
  if (text == "none" || text.empty()) return schedule;
  for (auto item : split(text, ",")) {
    const auto colon = item.find(':');
    if (colon == std::string_view::npos) {
      throw std::invalid_argument("--drift: expected SAMPLE:CONCEPT, got '" + std::string(item) + "'");
    }
    schedule.push_back({parse_size(item.substr(0, colon), "--drift"),
                        static_cast<int>(parse_size(item.substr(colon + 1), "--drift"))});
  }
  return schedule;
}

// "10", "10x5" or "10,5".
std::vector<std::size_t> parse_sizes(std::string_view text) {
  std::vector<std::size_t> sizes;
  for (auto item : split(text, "x,")) sizes.push_back(parse_size(item, "layer sizes"));
  return sizes;
}

// Open interval (0, 1).
const CLI::Validator kUnitOpen(
    [](std::string& text) -> std::string {
      double v = 0.0;
      if (!CLI::detail::lexical_cast(text, v) || !(v > 0.0 && v < 1.0)) {
        return "value " + text + " not in (0, 1)";
      }
      return {};
    },
    "(0,1)");

struct StreamFlags {
  std::string stream = "sea";
  std::optional<std::size_t> batch_size, total, dims, classes, label_column;
  std::optional<double> noise, separation;
  std::optional<std::string> drift;
  bool csv_header = false;
  std::uint64_t seed = 0;

  void attach(CLI::App& app) {
    app.add_option("--stream", stream, "sea | hyperplane | gaussians | csv:PATH")->capture_default_str();
    app.add_option("--batch-size", batch_size, "Samples per batch (default 500)")
        ->check(CLI::Range(std::size_t{4}, std::numeric_limits<std::size_t>::max()));
    app.add_option("--total", total, "Samples to generate (default 50000 for sea, 20000 otherwise)");
    app.add_option("--seed", seed, "Base seed; repetition i uses seed + i")->capture_default_str();
    app.add_option("--noise", noise, "Label noise probability (default 0.1 for sea, 0 otherwise)")
        ->check(CLI::Range(0.0, 1.0));
    app.add_option("--drift", drift, "Drift schedule SAMPLE:CONCEPT,... or none");
    app.add_option("--dims", dims, "Feature dimensions for hyperplane and gaussians (default 10)");
    app.add_option("--classes", classes, "Classes for gaussians, or label count for csv");
    app.add_option("--separation", separation, "Gaussian mean spacing in sigmas (default 6)");
    app.add_flag("--csv-header", csv_header, "CSV input starts with a header row");
    app.add_option("--label-column", label_column, "CSV label column (default last)");
  }

  StreamSpec spec() const {
    StreamSpec s;
    if (stream.starts_with("csv:")) {
      s = default_scenario(StreamKind::csv, seed);
      s.csv.path = stream.substr(4);
      s.csv.has_header = csv_header;
      s.csv.label_column = label_column;
      s.csv.classes = classes;
    } else {
      s = default_scenario(parse_stream_kind(stream), seed);
      if (dims) s.dims = *dims;
      if (classes) s.classes = *classes;
    }
    if (batch_size) s.batch_size = *batch_size;
    if (total) {
      s.total = *total;
      if (s.kind != StreamKind::csv && *total == 0) throw std::invalid_argument("--total must be positive");
      if (!drift) std::erase_if(s.drift_schedule, [&](const DriftPoint& p) { return p.sample >= *total; });
    }
    if (noise) s.label_noise = *noise;
    if (separation) s.separation = *separation;
    if (drift) s.drift_schedule = parse_drift(*drift);
    s.validate();
    return s;
  }
};

struct PipelineFlags {
  PipelineConfig config;

  void attach(CLI::App& app) {
    app.add_option("--alpha-d", config.drift.alpha_drift, "Drift confidence level")
        ->check(kUnitOpen)
        ->capture_default_str();
    app.add_option("--alpha-w", config.drift.alpha_warning, "Warning confidence level")
        ->check(kUnitOpen)
        ->capture_default_str();
    app.add_option("--delta", config.drift.delta_mici, "MICI layer-pruning threshold")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app.add_option("--zeta", config.zeta, "Penalty/reward step")
        ->check(CLI::Range(0.0, 1.0) & CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--lr", config.learning_rate, "SGD learning rate")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  }
};

struct RunFlags {
  std::size_t reps = 1;
  std::size_t threads = 1;
  std::string out;
  bool no_timing = false;

  void attach(CLI::App& app) {
    app.add_option("--reps", reps, "Repetitions")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--threads", threads, "Repetitions run concurrently")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--out", out, "Output directory (default: summary to stdout)");
    app.add_flag("--no-timing", no_timing, "Write 0 for wall times so outputs are byte-stable");
  }

  ExperimentConfig experiment(const StreamFlags& s, const PipelineFlags& p) const {
    ExperimentConfig cfg;
    cfg.stream = s.spec();
    cfg.pipeline = p.config;
    cfg.pipeline.seed = s.seed;
    cfg.repetitions = reps;
    cfg.threads = threads;
    cfg.record_timing = !no_timing;
    return cfg;
  }
};

void configure_model(ExperimentConfig& cfg, std::string_view model) {
  if (model == "adl") {
    cfg.model = ModelKind::adl;
  } else if (model.starts_with("fixed:")) {
    cfg.model = ModelKind::fixed_dnn;
    cfg.fixed_layers = parse_sizes(model.substr(6));
  } else {
    throw std::invalid_argument("--model: expected adl or fixed:SIZES, got '" + std::string(model) + "'");
  }
  cfg.validate();
}

constexpr const char* kConfigHelp =
    "File of `key = value` lines; keys are long flag names without dashes. Flags win";

std::string_view trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r");
  return text.substr(first, last - first + 1);
}

// Appends `--key value` for every config entry whose flag is absent from
// the command line. `[section]` headers and `#`/`;` comments are skipped.
void append_config(const CLI::App& sub, const fs::path& path, std::vector<std::string>& args) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';' || line.front() == '[') continue;
    const auto eq = line.find('=');
    const auto where = path.string() + ":" + std::to_string(line_no);
    if (eq == std::string_view::npos) throw std::invalid_argument(where + ": expected key = value");
    const auto key = std::string(trim(line.substr(0, eq)));
    auto value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
        value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    const auto* opt = sub.get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config") {
      throw std::invalid_argument(where + ": unknown key '" + key + "'");
    }
    if (opt->count() > 0) continue;
    args.push_back("--" + key + "=" + std::string(value));
  }
  if (in.bad()) throw IoError("read error in '" + path.string() + "'");
}

nlohmann::ordered_json describe(const AdlNetwork& net) {
  const auto counts = count_params(net);
  nlohmann::ordered_json doc;
  doc["inputs"] = net.inputs();
  doc["classes"] = net.classes();
  doc["depth"] = net.depth();
  doc["active_layers"] = counts.hidden_layers;
  doc["hidden_nodes"] = counts.hidden_nodes;
  doc["parameters"] = counts.parameters;
  doc["winning_layer"] = net.winning_layer();
  auto& layers = doc["layers"] = nlohmann::ordered_json::array();
  for (std::size_t l = 0; l < net.depth(); ++l) {
    const auto& layer = net.layer(l);
    char hash[17];
    const auto res = std::to_chars(hash, hash + 16, layer_hash(layer), 16);
    layers.push_back({{"nodes", layer.nodes()},
                      {"input_width", layer.input_width()},
                      {"beta", net.voting().beta[l]},
                      {"p", net.voting().p[l]},
                      {"active", net.output_active(l)},
                      {"hash", std::string(hash, res.ptr)}});
  }
  return doc;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Autonomous deep learning on data streams", "adl"};
  app.require_subcommand(1);

  StreamFlags stream;
  PipelineFlags pipeline;
  RunFlags run_flags;
  std::string model = "adl";
  std::string save_model;

  std::string config_path;
  auto* run = app.add_subcommand("run", "Prequential run of ADL or a fixed baseline");
  run->add_option("--config", config_path, kConfigHelp);
  stream.attach(*run);
  pipeline.attach(*run);
  run_flags.attach(*run);
  run->add_option("--model", model, "adl or fixed:SIZES, e.g. fixed:10x5")->capture_default_str();
  run->add_option("--save-model", save_model, "Write the first repetition's final network (adl only)");

  std::string dump;
  auto* generate = app.add_subcommand("generate", "Write a stream to CSV");
  generate->add_option("--config", config_path, kConfigHelp);
  stream.attach(*generate);
  generate->add_option("--dump", dump, "Output CSV path")->required();

  std::string fixed = "1";
  auto* compare = app.add_subcommand("compare", "Paired ADL versus fixed-structure run");
  compare->add_option("--config", config_path, kConfigHelp);
  stream.attach(*compare);
  pipeline.attach(*compare);
  run_flags.attach(*compare);
  compare->add_option("--fixed", fixed, "Hidden sizes of the baseline, e.g. 10x5")->capture_default_str();

  std::string model_path;
  auto* inspect = app.add_subcommand("inspect", "Describe a saved network");
  inspect->add_option("model", model_path, "Network file written by run --save-model")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    if (!config_path.empty()) {
      auto* sub = app.get_subcommands().front();
      auto augmented = args;
      append_config(*sub, config_path, augmented);
      app.clear();
      reversed.assign(augmented.rbegin(), augmented.rend());
      app.parse(reversed);
    }
  } catch (const IoError& e) {
    err << "adl: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    err << "adl: " << e.what() << '\n';
    return kExitConfig;
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "adl: " << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }

  try {
    if (run->parsed()) {
      auto cfg = run_flags.experiment(stream, pipeline);
      cfg.keep_final_model = !save_model.empty();
      configure_model(cfg, model);
      if (!save_model.empty() && cfg.model != ModelKind::adl) {
        throw std::invalid_argument("--save-model needs --model adl");
      }
      const auto result = run_experiment(cfg);
      if (run_flags.out.empty()) {
        out << summary_csv({&result});
      } else {
        emit_reports(result, run_flags.out);
      }
      if (!save_model.empty()) {
        const auto& snap = *result.repetitions.front().final_model;
        save_snapshot(save_model, snap.network, snap.width);
      }
    } else if (generate->parsed()) {
      auto source = make_stream(stream.spec());
      const auto rows = dump_csv(*source, dump);
      out << rows << " rows written to " << dump << '\n';
    } else if (compare->parsed()) {
      auto cfg = run_flags.experiment(stream, pipeline);
      const auto sizes = parse_sizes(fixed);
      cfg.validate();
      const auto comparison = run_comparison(cfg, sizes);
      if (run_flags.out.empty()) {
        out << summary_csv({&comparison.adl, &comparison.fixed});
      } else {
        emit_comparison(comparison, run_flags.out);
      }
    } else if (inspect->parsed()) {
      const auto snap = load_snapshot(model_path);
      out << describe(snap.network).dump(2) << '\n';
    }
  } catch (const IoError& e) {
    err << "adl: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "adl: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    err << "adl: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::out_of_range& e) {
    err << "adl: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}

}  // namespace adl::cli
