// Checks against independent oracles: Monte-Carlo expectations, central
// finite differences and brute-force recomputation.
#include <cmath>
#include <numbers>
#include <random>

#include "adl/depth.hpp"
#include "adl/pipeline.hpp"
#include "adl/width.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace adl;

namespace {

// Brute-force E[h] = E[sigmoid(W x + b)] for x ~ N(mu, diag(sigma^2)).
Vector mc_first_hidden(const LayerParams& layer, const Vector& mu, const Vector& sigma,
                       std::size_t samples, Rng& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Vector acc(layer.nodes(), 0.0);
  Vector x(mu.size());
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = mu[i] + sigma[i] * n01(rng);
    for (std::size_t r = 0; r < layer.nodes(); ++r) {
      double z = layer.b[r];
      for (std::size_t c = 0; c < x.size(); ++c) z += layer.W(r, c) * x[c];
      acc[r] += 1.0 / (1.0 + std::exp(-z));
    }
  }
  for (auto& v : acc) v /= static_cast<double>(samples);
  return acc;
}

}  // namespace

TEST_SUITE("oracles") {

TEST_CASE("first-layer expectation tracks Monte-Carlo on a 2x2 layer") {
  Rng rng(11);
  AdlNetwork net(2, 2, rng);
  net.add_node(0, rng);
  auto& layer = net.layer(0);
  layer.b = {0.2, -0.3};
  const Vector mu{0.3, -0.1};
  const Vector sigma{0.5, 0.2};
  const auto analytic = expected_first_hidden(layer, mu, sigma);
  const auto mc = mc_first_hidden(layer, mu, sigma, 1'000'000, rng);
  for (std::size_t r = 0; r < 2; ++r) CHECK(std::abs(analytic[r] - mc[r]) < 0.02);
}

TEST_CASE("bias term of NS tracks Monte-Carlo on random nets") {
  Rng rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> n01(0.0, 1.0);
  for (int k = 0; k < 5; ++k) {
    const std::size_t n = 2 + k % 3;
    const std::size_t m = 2 + k % 2;
    auto net = test::random_network(n, m, 1 + k % 3, rng);
    Vector mu(n), sigma(n);
    for (auto& v : mu) v = u(rng);
    for (auto& v : sigma) v = 0.1 + 0.45 * (u(rng) + 1.0);
    const auto label = test::one_hot(k % m, m);
    const std::size_t lw = net.depth() - 1;
    const auto ns = ns_estimate(net, lw, mu, sigma, label);

    std::vector<RecursiveStat> y(m);
    Vector x(n);
    for (int s = 0; s < 100'000; ++s) {
      for (std::size_t i = 0; i < n; ++i) x[i] = mu[i] + sigma[i] * n01(rng);
      const auto f = forward(net, x);
      for (std::size_t o = 0; o < m; ++o) y[o].update(f.outputs[lw][o]);
    }
    double bias = 0.0;
    for (std::size_t o = 0; o < m; ++o) bias += (y[o].mean() - label[o]) * (y[o].mean() - label[o]);
    CHECK(std::abs(ns.bias_sq - bias / static_cast<double>(m)) < 0.05);
  }
}

TEST_CASE("expected chain equals an independent composition of the formulas") {
  Rng rng(3);
  auto net = test::random_network(3, 2, 2, rng);
  const Vector mu{0.4, -0.2, 1.0};
  const Vector sigma{0.3, 0.6, 0.1};
  const auto label = test::one_hot(1, 2);
  const auto ns = ns_estimate(net, 1, mu, sigma, label);

  auto layer_map = [](const LayerParams& p, const Vector& in) {
    Vector out(p.nodes());
    for (std::size_t r = 0; r < p.nodes(); ++r) {
      double z = p.b[r];
      for (std::size_t c = 0; c < in.size(); ++c) z += p.W(r, c) * in[c];
      out[r] = 1.0 / (1.0 + std::exp(-z));
    }
    return out;
  };
  auto head = [](const LayerParams& p, const Vector& h) {
    Vector z(p.classes());
    double total = 0.0;
    for (std::size_t o = 0; o < z.size(); ++o) {
      double a = p.bs[o];
      for (std::size_t r = 0; r < h.size(); ++r) a += p.Ws(o, r) * h[r];
      z[o] = std::exp(a);
      total += z[o];
    }
    for (auto& v : z) v /= total;
    return z;
  };
  Vector scaled(3);
  for (std::size_t i = 0; i < 3; ++i) scaled[i] = mu[i] / std::sqrt(1.0 + std::numbers::pi * sigma[i] * sigma[i] / 8.0);
  const auto h1 = layer_map(net.layer(0), scaled);
  Vector h1_sq(h1.size());
  for (std::size_t i = 0; i < h1.size(); ++i) h1_sq[i] = h1[i] * h1[i];
  const auto ey = head(net.layer(1), layer_map(net.layer(1), h1));
  const auto ey2 = head(net.layer(1), layer_map(net.layer(1), h1_sq));

  double bias = 0.0, var = 0.0;
  for (std::size_t o = 0; o < 2; ++o) {
    CHECK(ns.exp_y[o] == doctest::Approx(ey[o]).epsilon(1e-12));
    CHECK(ns.exp_y_sq[o] == doctest::Approx(ey2[o]).epsilon(1e-12));
    bias += (ey[o] - label[o]) * (ey[o] - label[o]);
    var += ey2[o] - ey[o] * ey[o];
  }
  CHECK(ns.bias_sq == doctest::Approx(bias / 2.0).epsilon(1e-12));
  CHECK(ns.variance == doctest::Approx(std::max(var / 2.0, 0.0)).epsilon(1e-12));
}

TEST_CASE("winning-layer gradient matches central finite differences") {
  Rng rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const std::size_t n = 2 + k % 3;
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
      const double rel = std::abs(numeric - analytic) / std::max(1e-3, std::abs(numeric) + std::abs(analytic));
      worst = std::max(worst, rel);
    };
    auto& p = net.layer(layer);
    for (std::size_t r = 0; r < p.W.rows(); ++r)
      for (std::size_t c = 0; c < p.W.cols(); ++c) check(p.W(r, c), g.dW(r, c));
    for (std::size_t r = 0; r < p.b.size(); ++r) check(p.b[r], g.db[r]);
    for (std::size_t o = 0; o < p.Ws.rows(); ++o)
      for (std::size_t r = 0; r < p.Ws.cols(); ++r) check(p.Ws(o, r), g.dWs(o, r));
    for (std::size_t o = 0; o < p.bs.size(); ++o) check(p.bs[o], g.dbs[o]);
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("Welford statistics equal batch recomputation") {
  Rng rng(2);
  std::normal_distribution<double> d(3.0, 2.0);
  RecursiveStat s;
  std::vector<double> xs;
  for (int i = 0; i < 1000; ++i) {
    xs.push_back(d(rng));
    s.update(xs.back());
  }
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size());
  CHECK(s.mean() == doctest::Approx(mean).epsilon(1e-12));
  CHECK(s.variance() == doctest::Approx(var).epsilon(1e-10));
}

TEST_CASE("MICI equals the smaller eigenvalue found by bisection") {
  Rng rng(8);
  std::normal_distribution<double> n01(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    std::vector<double> a(50), b(50);
    const double mix = n01(rng);
    for (std::size_t t = 0; t < a.size(); ++t) {
      a[t] = n01(rng);
      b[t] = mix * a[t] + n01(rng);
    }
    RecursiveStat sa, sb;
    double ma = 0, mb = 0;
    for (std::size_t t = 0; t < a.size(); ++t) { sa.update(a[t]); sb.update(b[t]); ma += a[t]; mb += b[t]; }
    ma /= 50; mb /= 50;
    double cov = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) cov += (a[t] - ma) * (b[t] - mb);
    cov /= 50;
    const double va = sa.variance(), vb = sb.variance();
    // det([va - l, cov; cov, vb - l]) changes sign at the smaller root.
    auto det = [&](double l) { return (va - l) * (vb - l) - cov * cov; };
    double lo = 0.0, hi = std::min(va, vb);
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (det(mid) > 0.0 ? lo : hi) = mid;
    }
    CHECK(mici(a, b) == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-9));
  }
}

TEST_CASE("find_cut on a 0/1 step agrees with a brute-force scan of its rule") {
  ErrorWindow w;
  w.errors.assign(100, 0);
  w.errors.resize(200, 1);
  const double alpha = 1e-4;
  // Upper bound of each prefix; the cut is the last prefix reaching the
  // running minimum of that bound.
  std::optional<std::size_t> expect;
  double best = 0.0;
  double sum = 0.0;
  for (std::size_t c = 1; c <= 198; ++c) {
    sum += w.errors[c - 1];
    if (c < 2) continue;
    const double upper = sum / static_cast<double>(c) + std::sqrt(std::log(1.0 / alpha) / (2.0 * static_cast<double>(c)));
    if (!expect || upper <= best) {
      expect = c;
      best = upper;
    }
  }
  const auto cut = find_cut(w, alpha);
  REQUIRE(cut.has_value());
  CHECK(*cut == *expect);
  CHECK(*cut <= 110);
}

TEST_CASE("detector false-positive rate on Bernoulli(0.1) windows") {
  Rng rng(99);
  std::bernoulli_distribution err(0.1);
  int drifts = 0;
  for (int trial = 0; trial < 200; ++trial) {
    ErrorWindow w;
    for (int t = 0; t < 500; ++t) w.errors.push_back(err(rng) ? 1 : 0);
    if (detect(w, DriftConfig{}).status == DriftStatus::drift) ++drifts;
  }
  CHECK(drifts <= 4);
}

TEST_CASE("detector false-positive rate on p=0.5 windows") {
  Rng rng(7);
  std::bernoulli_distribution err(0.5);
  int drifts = 0;
  for (int trial = 0; trial < 20; ++trial) {
    ErrorWindow w;
    for (int t = 0; t < 500; ++t) w.errors.push_back(err(rng) ? 1 : 0);
    if (detect(w, DriftConfig{}).status == DriftStatus::drift) ++drifts;
  }
  CHECK(drifts == 0);  // under 5% of 20 trials
}

}  // TEST_SUITE
