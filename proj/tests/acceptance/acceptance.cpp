// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when
// any criterion fails.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "adl/depth.hpp"
#include "adl/harness.hpp"
#include "adl/pipeline.hpp"
#include "adl/vote.hpp"
#include "adl/width.hpp"
#include "support.hpp"

using namespace adl;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

bool added_layer(const BatchReport& r) {
  return std::any_of(r.layer_events.begin(), r.layer_events.end(),
                     [](const LayerEvent& e) { return e.kind == "add"; });
}

// 1. SEA rate and runtime.
Verdict sea_rate() {
  ExperimentConfig cfg;
  cfg.stream = sea_scenario();
  cfg.repetitions = 5;
  const auto result = run_experiment(cfg);
  double worst_ms = 0.0;
  for (const auto& rep : result.repetitions) worst_ms = std::max(worst_ms, rep.summary.et_ms);
  const double rate = result.overall.rate_mean;
  return {rate >= 0.85 && worst_ms < 120'000.0,
          fmt("mean rate %.4f over 5 seeds (need >= 0.85), slowest seed %.2f s (need < 120 s)", rate,
              worst_ms / 1000.0)};
}

// 2. ADL beats the fixed baseline right after drifts.
Verdict structural_advantage() {
  ExperimentConfig cfg;
  cfg.stream = default_scenario(StreamKind::gaussians);
  cfg.repetitions = 10;
  cfg.record_timing = false;
  const auto c = run_comparison(cfg, {1});
  int wins = 0;
  for (std::size_t i = 0; i < 10; ++i) {
    const auto& a = c.adl.repetitions[i].reports;
    const auto& f = c.fixed.repetitions[i].reports;
    double sa = 0.0, sf = 0.0;
    for (const auto& d : cfg.stream.drift_schedule) {
      const std::size_t b0 = d.sample / cfg.stream.batch_size;
      for (std::size_t b = b0; b < b0 + 5 && b < a.size(); ++b) {
        sa += a[b].rate;
        sf += f[b].rate;
      }
    }
    wins += sa > sf;
  }
  return {wins >= 7, fmt("ADL ahead of fixed:1 in %d/10 seeds over the 5 batches after each drift (need >= 7)", wins)};
}

// 3. Drift detection and false layer additions.
Verdict drift_responsiveness() {
  ExperimentConfig cfg;
  cfg.stream = default_scenario(StreamKind::gaussians);
  cfg.repetitions = 10;
  cfg.record_timing = false;
  const auto result = run_experiment(cfg);
  int hits = 0, drifts = 0;
  for (const auto& rep : result.repetitions) {
    for (const auto& d : cfg.stream.drift_schedule) {
      const std::size_t b0 = d.sample / cfg.stream.batch_size;
      bool hit = false;
      for (std::size_t b = b0; b < b0 + 3 && b < rep.reports.size(); ++b) {
        hit = hit || (rep.reports[b].drift.status == DriftStatus::drift && added_layer(rep.reports[b]));
      }
      hits += hit;
      ++drifts;
    }
  }

  int quiet = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    ExperimentConfig st = cfg;
    st.repetitions = 1;
    st.stream.drift_schedule.clear();
    st.pipeline.seed = 100 + s;
    const auto r = run_experiment(st);
    quiet += r.overall.layers_added * 20 <= r.overall.batches;
  }
  const bool pass = hits * 5 >= drifts * 4 && quiet >= 18;
  return {pass, fmt("%d/%d drifts answered within 3 batches (need >= 80%%), %d/20 stationary runs within 1 add per 20 batches (need >= 18)",
                    hits, drifts, quiet)};
}

// 4. NS estimate against Monte-Carlo.
Verdict ns_oracle() {
  Rng rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> n01(0.0, 1.0);

  double worst_h = 0.0;
  for (int k = 0; k < 20; ++k) {
    const std::size_t n = 2 + k % 4;
    auto net = test::random_network(n, 2, 1, rng, 3);
    Vector mu(n), sigma(n);
    for (auto& v : mu) v = u(rng);
    for (auto& v : sigma) v = 0.1 + 0.45 * (u(rng) + 1.0);
    const auto& layer = net.layer(0);
    const auto analytic = expected_first_hidden(layer, mu, sigma);
    Vector acc(layer.nodes(), 0.0), x(n);
    for (int s = 0; s < 1'000'000; ++s) {
      for (std::size_t i = 0; i < n; ++i) x[i] = mu[i] + sigma[i] * n01(rng);
      for (std::size_t r = 0; r < layer.nodes(); ++r) {
        double z = layer.b[r];
        for (std::size_t c = 0; c < n; ++c) z += layer.W(r, c) * x[c];
        acc[r] += sigmoid(z);
      }
    }
    for (std::size_t r = 0; r < layer.nodes(); ++r) worst_h = std::max(worst_h, std::abs(analytic[r] - acc[r] / 1e6));
  }

  double worst_bias = 0.0, worst_var = 0.0;
  for (int k = 0; k < 10; ++k) {
    const std::size_t n = 2 + k % 3;
    const std::size_t m = 2 + k % 2;
    auto net = test::random_network(n, m, 1 + k % 3, rng);
    Vector mu(n), sigma(n);
    for (auto& v : mu) v = u(rng);
    for (auto& v : sigma) v = 0.1 + 0.45 * (u(rng) + 1.0);
    const auto label = test::one_hot(static_cast<std::size_t>(k) % m, m);
    const std::size_t lw = net.depth() - 1;
    const auto ns = ns_estimate(net, lw, mu, sigma, label);
    std::vector<RecursiveStat> y(m);
    Vector x(n);
    for (int s = 0; s < 100'000; ++s) {
      for (std::size_t i = 0; i < n; ++i) x[i] = mu[i] + sigma[i] * n01(rng);
      const auto f = forward(net, x);
      for (std::size_t o = 0; o < m; ++o) y[o].update(f.outputs[lw][o]);
    }
    double bias = 0.0, var = 0.0;
    for (std::size_t o = 0; o < m; ++o) {
      bias += (y[o].mean() - label[o]) * (y[o].mean() - label[o]);
      var += y[o].variance();
    }
    worst_bias = std::max(worst_bias, std::abs(ns.bias_sq - bias / static_cast<double>(m)));
    worst_var = std::max(worst_var, std::abs(ns.variance - var / static_cast<double>(m)));
  }
  const bool pass = worst_h <= 0.02 && worst_bias <= 0.05 && worst_var <= 0.05;
  return {pass, fmt("E[h1] worst |diff| %.4f on 20 nets (need <= 0.02); bias^2 worst %.4f, variance worst %.4f on 10 nets (need <= 0.05)",
                    worst_h, worst_bias, worst_var)};
}

// 5. Winning-layer gradient against central differences.
Verdict gradient_oracle() {
  Rng rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const std::size_t n = 2 + k % 4;
    const std::size_t m = 2 + k % 3;
    auto net = test::random_network(n, m, 1 + k % 3, rng);
    const std::size_t layer = static_cast<std::size_t>(rng() % net.depth());
    Vector x(n);
    for (auto& v : x) v = 2.0 * u(rng);
    const auto label = test::one_hot(static_cast<std::size_t>(rng() % m), m);
    const auto g = layer_gradient(net, layer, x, label);
    auto check = [&](double& param, double analytic) {
      const double h = 1e-6;
      const double saved = param;
      param = saved + h;
      const double up = layer_loss(net, layer, x, label);
      param = saved - h;
      const double down = layer_loss(net, layer, x, label);
      param = saved;
      const double numeric = (up - down) / (2.0 * h);
      worst = std::max(worst, std::abs(numeric - analytic) / std::max(1e-3, std::abs(numeric) + std::abs(analytic)));
    };
    auto& p = net.layer(layer);
    for (std::size_t r = 0; r < p.W.rows(); ++r)
      for (std::size_t c = 0; c < p.W.cols(); ++c) check(p.W(r, c), g.dW(r, c));
    for (std::size_t r = 0; r < p.b.size(); ++r) check(p.b[r], g.db[r]);
    for (std::size_t o = 0; o < p.Ws.rows(); ++o)
      for (std::size_t r = 0; r < p.Ws.cols(); ++r) check(p.Ws(o, r), g.dWs(o, r));
    for (std::size_t o = 0; o < p.bs.size(); ++o) check(p.bs[o], g.dbs[o]);
  }
  return {worst < 1e-5, fmt("worst relative error %.2e on 20 nets (need < 1e-5)", worst)};
}

// 6. Invariants.
Verdict invariants() {
  std::vector<std::string> broken;
  auto expect = [&](bool ok, const char* what) {
    if (!ok && std::find(broken.begin(), broken.end(), what) == broken.end()) broken.emplace_back(what);
  };

  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto spec = default_scenario(StreamKind::gaussians, seed);
    spec.label_noise = 0.05;
    auto stream = make_stream(spec);
    PipelineConfig config;
    config.seed = seed;
    AdlLearner learner(10, 2, config);
    while (auto batch = stream->next()) {
      // Purity: a twin trained on flipped labels scores the exact complement.
      const double expected = score(test_phase(learner.network(), batch->features), batch->labels).rate;
      AdlLearner twin = learner;
      auto flipped = *batch;
      for (std::size_t t = 0; t < flipped.size(); ++t) {
        const auto label = flipped.label_of(t);
        flipped.labels(t, label) = 0.0;
        flipped.labels(t, 1 - label) = 1.0;
      }
      expect(std::abs(twin.process_batch(flipped).rate - (1.0 - expected)) < 1e-12, "prequential purity");
      expect(learner.process_batch(*batch).rate == expected, "prequential purity");

      const auto& net = learner.network();
      const auto& v = net.voting();
      double total = 0.0;
      for (std::size_t l = 0; l < v.size(); ++l) {
        expect(v.p[l] >= 0.0 && v.p[l] <= 1.0, "p in [0,1]");
        if (v.active[l]) total += v.beta[l];
      }
      expect(std::abs(total - 1.0) < 1e-9, "sum beta = 1");
      expect(net.depth() >= 1 && v.active_count() >= 1, "L >= 1 and one active head");
      for (const auto& layer : net.layers()) expect(layer.nodes() >= 1, "R_l >= 1");
    }
  }

  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    std::vector<double> a(30), b(30);
    const double scale = std::exp(n01(rng));
    RecursiveStat sa, sb;
    for (std::size_t t = 0; t < 30; ++t) {
      a[t] = n01(rng);
      b[t] = scale * (0.5 * a[t] + n01(rng));
      sa.update(a[t]);
      sb.update(b[t]);
    }
    const double g = mici(a, b);
    expect(std::abs(g - mici(b, a)) <= 1e-12, "MICI symmetry");
    expect(g >= 0.0 && g <= std::min(sa.variance(), sb.variance()) + 1e-12, "MICI bounds");
  }

  for (std::size_t n = 1; n < 1000; ++n) {
    expect(hoeffding_bound(1.0, n + 1, 0.01) < hoeffding_bound(1.0, n, 0.01), "Hoeffding monotone in n");
  }
  for (double a = 1e-6; a * 1.5 < 1.0; a *= 1.5) {
    expect(hoeffding_bound(1.0, 50, a * 1.5) < hoeffding_bound(1.0, 50, a), "Hoeffding monotone in alpha");
  }

  {
    auto spec = default_scenario(StreamKind::gaussians, 6);
    spec.total = 5000;
    spec.drift_schedule = {{2250, 1}};
    auto stream = make_stream(spec);
    Rng model_rng(6);
    AdlNetwork net(10, 2, model_rng);
    WidthState width;
    while (auto batch = stream->next()) {
      for (std::size_t t = 0; t < batch->size(); ++t) {
        const auto one = test::make_batch({Vector(batch->features.row(t).begin(), batch->features.row(t).end())},
                                          {batch->label_of(t)}, 2);
        const auto s = low_level_learning(net, width, one, 0.05, model_rng);
        expect(s.grow_events + s.prune_events <= 1, "grow/prune exclusion");
      }
    }
  }

  auto run = [] {
    auto spec = default_scenario(StreamKind::gaussians, 10);
    auto stream = make_stream(spec);
    PipelineConfig config;
    config.seed = 10;
    AdlLearner learner(10, 2, config);
    std::vector<double> rates;
    while (auto batch = stream->next()) rates.push_back(learner.process_batch(*batch).rate);
    return std::pair{rates, learner.network()};
  };
  expect(run() == run(), "bit-determinism");

  std::string detail = "Σβ=1, p∈[0,1], structure floors, MICI symmetry/bounds, Hoeffding monotonicity, "
                       "grow/prune exclusion, prequential purity, bit-determinism";
  if (!broken.empty()) {
    detail = "broken:";
    for (const auto& b : broken) detail += " [" + b + "]";
  }
  return {broken.empty(), detail};
}

// 7. Hand-checked values.
Verdict hand_checked() {
  std::vector<std::string> bad;
  auto near = [&](double got, double want, double tol, const std::string& what) {
    if (!(std::abs(got - want) <= tol)) bad.push_back(what + fmt(" = %.6f, want %.6f", got, want));
  };
  near(adaptive_sigma(0.0), 2.0, 1e-12, "pi(0)");
  near(adaptive_sigma(0.0), 2.0, 1e-12, "chi(0)");
  near(hoeffding_bound(1.0, 100, 0.0001), 0.21460, 1e-4, "hoeffding_bound(1,100,0.0001)");
  const std::vector<double> a{1, 2, 3, 4, 5, 2, 7};
  near(mici(a, a), 0.0, 1e-12, "MICI(identical)");

  // (p, correct, zeta) -> p'
  struct Factor { double p; bool correct; double zeta; double want; };
  for (const auto& f : {Factor{0.5, true, 0.001, 0.501}, Factor{0.5, false, 0.001, 0.499},
                        Factor{1.0, true, 0.001, 1.0}, Factor{0.0, false, 0.001, 0.0}}) {
    near(vote::update_factor(f.p, f.correct, f.zeta), f.want, 1e-12, fmt("factor(%.3f,%d)", f.p, int(f.correct)));
  }
  // (beta, p) -> rewarded / penalized beta
  struct Weight { double beta; double p; double reward; double penalty; };
  for (const auto& w : {Weight{0.5, 0.1, 0.55, 0.05}, Weight{0.9, 0.5, 1.0, 0.45}, Weight{0.5, 0.8, 0.9, 0.4}}) {
    near(vote::apply_reward(w.beta, w.p), w.reward, 1e-12, fmt("reward(%.2f,%.2f)", w.beta, w.p));
    near(vote::apply_penalty(w.beta, w.p), w.penalty, 1e-12, fmt("penalty(%.2f,%.2f)", w.beta, w.p));
  }
  VotingState s;
  s.beta = {0.2, 0.6};
  s.p = {1.0, 1.0};
  s.active = {true, true};
  vote::normalize(s);
  near(s.beta[0], 0.25, 1e-12, "normalize[0]");
  near(s.beta[1], 0.75, 1e-12, "normalize[1]");

  std::string detail = "pi(0), chi(0), hoeffding_bound(1,100,1e-4), MICI(identical), voting tables";
  if (!bad.empty()) {
    detail = "mismatch:";
    for (const auto& b : bad) detail += " [" + b + "]";
  }
  return {bad.empty(), detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"1 SEA rate", sea_rate},
      {"2 structural advantage", structural_advantage},
      {"3 drift responsiveness", drift_responsiveness},
      {"4 NS oracle", ns_oracle},
      {"5 gradient oracle", gradient_oracle},
      {"6 invariants", invariants},
      {"7 hand-checked numerics", hand_checked},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    const auto v = check();
    std::printf("%s criterion %s: %s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
    std::fflush(stdout);
    failed += !v.pass;
  }
  return failed == 0 ? 0 : 1;
}
