#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "adl/depth.hpp"
#include "adl/harness.hpp"
#include "adl/pipeline.hpp"
#include "adl/snapshot.hpp"
#include "adl/streams.hpp"
#include "adl/width.hpp"

namespace py = pybind11;
using namespace adl;

namespace {

using FeatureArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using LabelArray = py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const FeatureArray& x) {
  if (x.ndim() != 2) throw std::invalid_argument("features must be a 2-d array");
  Matrix m(static_cast<std::size_t>(x.shape(0)), static_cast<std::size_t>(x.shape(1)));
  std::copy(x.data(), x.data() + x.size(), m.values().begin());
  return m;
}

StreamBatch to_batch(const FeatureArray& x, const LabelArray& y, std::size_t classes, std::int64_t index) {
  StreamBatch b;
  b.features = to_matrix(x);
  if (y.ndim() != 1 || static_cast<std::size_t>(y.shape(0)) != b.features.rows()) {
    throw std::invalid_argument("labels must be a 1-d array with one entry per row");
  }
  b.labels = Matrix(b.features.rows(), classes);
  for (py::ssize_t t = 0; t < y.shape(0); ++t) {
    const auto label = y.at(t);
    if (label < 0 || static_cast<std::size_t>(label) >= classes) {
      throw std::invalid_argument("label " + std::to_string(label) + " outside [0, " + std::to_string(classes) + ")");
    }
    b.labels(static_cast<std::size_t>(t), static_cast<std::size_t>(label)) = 1.0;
  }
  b.batch_index = index;
  return b;
}

py::dict structure_dict(const StructureCounts& s) {
  py::dict d;
  d["hidden_layers"] = s.hidden_layers;
  d["hidden_nodes"] = s.hidden_nodes;
  d["parameters"] = s.parameters;
  return d;
}

py::dict report_dict(const BatchReport& r) {
  py::dict d;
  d["batch"] = r.batch;
  d["rate"] = r.rate;
  d["structure"] = structure_dict(r.structure);
  d["drift_status"] = std::string(to_string(r.drift.status));
  d["grow_events"] = r.grow_events;
  d["prune_events"] = r.prune_events;
  py::list events;
  for (const auto& e : r.layer_events) events.append(py::make_tuple(e.kind, e.layer));
  d["layer_events"] = events;
  d["beta"] = r.beta;
  d["p"] = r.p;
  d["winning_layer"] = r.winning_layer;
  return d;
}

py::dict summary_dict(const RunSummary& s) {
  py::dict d;
  d["model"] = s.model;
  d["stream"] = s.stream;
  d["seed"] = s.seed;
  d["batches"] = s.batches;
  d["rate_mean"] = s.rate_mean;
  d["rate_std"] = s.rate_std;
  d["hl_mean"] = s.hl_mean;
  d["hn_mean"] = s.hn_mean;
  d["nop_mean"] = s.nop_mean;
  d["hl_final"] = s.hl_final;
  d["hn_final"] = s.hn_final;
  d["drifts"] = s.drifts;
  d["warnings"] = s.warnings;
  d["layers_added"] = s.layers_added;
  d["et_ms"] = s.et_ms;
  return d;
}

StreamSpec make_spec(const std::string& stream, std::optional<std::size_t> total, std::uint64_t seed,
                     std::optional<std::size_t> batch_size, std::optional<double> noise,
                     std::optional<std::vector<std::pair<std::size_t, int>>> drifts, std::optional<std::size_t> dims,
                     std::optional<std::size_t> classes) {
  auto spec = default_scenario(parse_stream_kind(stream), seed);
  if (batch_size) spec.batch_size = *batch_size;
  if (total) {
    spec.total = *total;
    if (!drifts) std::erase_if(spec.drift_schedule, [&](const DriftPoint& p) { return p.sample >= *total; });
  }
  if (noise) spec.label_noise = *noise;
  if (drifts) {
    spec.drift_schedule.clear();
    for (const auto& [sample, concept_id] : *drifts) spec.drift_schedule.push_back({sample, concept_id});
  }
  if (dims) spec.dims = *dims;
  if (classes) spec.classes = *classes;
  spec.validate();
  return spec;
}

PipelineConfig make_pipeline(double alpha_d, double alpha_w, double delta, double zeta, double lr, std::uint64_t seed) {
  PipelineConfig c;
  c.drift.alpha_drift = alpha_d;
  c.drift.alpha_warning = alpha_w;
  c.drift.delta_mici = delta;
  c.zeta = zeta;
  c.learning_rate = lr;
  c.seed = seed;
  c.validate();
  return c;
}

class PyLearner {
 public:
  PyLearner(std::size_t inputs, std::size_t classes, PipelineConfig config)
      : learner_(inputs, classes, config) {}

  py::dict partial_fit(const FeatureArray& x, const LabelArray& y) {
    const auto batch = to_batch(x, y, learner_.network().classes(), next_index_++);
    return report_dict(learner_.process_batch(batch));
  }

  py::array_t<std::int64_t> predict(const FeatureArray& x) const {
    const auto out = test_phase(learner_.network(), to_matrix(x));
    py::array_t<std::int64_t> labels(static_cast<py::ssize_t>(out.predicted.size()));
    auto view = labels.mutable_unchecked<1>();
    for (std::size_t t = 0; t < out.predicted.size(); ++t) view(static_cast<py::ssize_t>(t)) = static_cast<std::int64_t>(out.predicted[t]);
    return labels;
  }

  py::dict structure() const {
    auto d = structure_dict(count_params(learner_.network()));
    d["depth"] = learner_.network().depth();
    std::vector<std::size_t> nodes;
    for (const auto& layer : learner_.network().layers()) nodes.push_back(layer.nodes());
    d["nodes"] = nodes;
    d["beta"] = learner_.network().voting().beta;
    return d;
  }

  void save(const std::string& path) const { save_snapshot(path, learner_.network(), learner_.width()); }

 private:
  AdlLearner learner_;
  std::int64_t next_index_ = 0;
};

}  // namespace

PYBIND11_MODULE(_adl, m) {
  m.doc() = "Autonomous deep learning for data streams";

  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::class_<PyLearner>(m, "Learner")
      .def(py::init([](std::size_t inputs, std::size_t classes, double alpha_d, double alpha_w, double delta,
                       double zeta, double lr, std::uint64_t seed) {
             return PyLearner(inputs, classes, make_pipeline(alpha_d, alpha_w, delta, zeta, lr, seed));
           }),
           py::arg("inputs"), py::arg("classes"), py::kw_only(), py::arg("alpha_d") = 0.0001,
           py::arg("alpha_w") = 0.0005, py::arg("delta") = 0.05, py::arg("zeta") = 0.001, py::arg("lr") = 0.01,
           py::arg("seed") = 0)
      .def("partial_fit", &PyLearner::partial_fit, py::arg("x"), py::arg("y"),
           "Test on the batch, then train on it. Returns the batch report.")
      .def("predict", &PyLearner::predict, py::arg("x"))
      .def("structure", &PyLearner::structure)
      .def("save", &PyLearner::save, py::arg("path"));

  m.def(
      "generate",
      [](const std::string& stream, std::optional<std::size_t> total, std::uint64_t seed,
         std::optional<double> noise, std::optional<std::vector<std::pair<std::size_t, int>>> drifts,
         std::optional<std::size_t> dims, std::optional<std::size_t> classes) {
        const auto spec = make_spec(stream, total, seed, std::nullopt, noise, drifts, dims, classes);
        auto source = make_stream(spec);
        const auto n = static_cast<py::ssize_t>(spec.total);
        const auto d = static_cast<py::ssize_t>(source->features());
        py::array_t<double> x({n, d});
        py::array_t<std::int64_t> y(n);
        auto xv = x.mutable_unchecked<2>();
        auto yv = y.mutable_unchecked<1>();
        py::ssize_t row = 0;
        while (auto b = source->next()) {
          for (std::size_t t = 0; t < b->size(); ++t, ++row) {
            for (py::ssize_t i = 0; i < d; ++i) xv(row, i) = b->features(t, static_cast<std::size_t>(i));
            yv(row) = static_cast<std::int64_t>(b->label_of(t));
          }
        }
        return py::make_tuple(x, y);
      },
      py::arg("stream") = "sea", py::kw_only(), py::arg("total") = py::none(), py::arg("seed") = 0,
      py::arg("noise") = py::none(), py::arg("drifts") = py::none(), py::arg("dims") = py::none(),
      py::arg("classes") = py::none(), "Draw a synthetic stream as (features, labels) arrays.");

  m.def(
      "run",
      [](const std::string& stream, std::optional<std::size_t> total, std::uint64_t seed,
         std::optional<std::size_t> batch_size, std::optional<double> noise,
         std::optional<std::vector<std::pair<std::size_t, int>>> drifts, std::size_t reps,
         std::optional<std::vector<std::size_t>> fixed, double alpha_d, double alpha_w, double delta, double zeta,
         double lr, bool timing) {
        ExperimentConfig cfg;
        cfg.stream = make_spec(stream, total, seed, batch_size, noise, drifts, std::nullopt, std::nullopt);
        cfg.pipeline = make_pipeline(alpha_d, alpha_w, delta, zeta, lr, seed);
        cfg.repetitions = reps;
        cfg.record_timing = timing;
        if (fixed) {
          cfg.model = ModelKind::fixed_dnn;
          cfg.fixed_layers = *fixed;
        }
        cfg.validate();
        ExperimentResult result;
        {
          py::gil_scoped_release release;
          result = run_experiment(cfg);
        }
        py::dict out;
        out["summary"] = summary_dict(result.overall);
        py::list reps_out;
        for (const auto& rep : result.repetitions) {
          py::dict r;
          r["seed"] = rep.seed;
          r["summary"] = summary_dict(rep.summary);
          py::list reports;
          for (const auto& b : rep.reports) reports.append(report_dict(b));
          r["batches"] = reports;
          reps_out.append(r);
        }
        out["repetitions"] = reps_out;
        return out;
      },
      py::arg("stream") = "sea", py::kw_only(), py::arg("total") = py::none(), py::arg("seed") = 0,
      py::arg("batch_size") = py::none(), py::arg("noise") = py::none(), py::arg("drifts") = py::none(),
      py::arg("reps") = 1, py::arg("fixed") = py::none(), py::arg("alpha_d") = 0.0001, py::arg("alpha_w") = 0.0005,
      py::arg("delta") = 0.05, py::arg("zeta") = 0.001, py::arg("lr") = 0.01, py::arg("timing") = true,
      "Prequential run of ADL, or of a fixed baseline when `fixed` lists hidden sizes.");

  m.def("hoeffding_bound", &hoeffding_bound, py::arg("range"), py::arg("n"), py::arg("alpha"));
  m.def(
      "mici",
      [](const std::vector<double>& a, const std::vector<double>& b) { return mici(a, b); },
      py::arg("a"), py::arg("b"));
  m.def("adaptive_sigma", &adaptive_sigma, py::arg("x"));
}
