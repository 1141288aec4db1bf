#include "adl/depth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace adl {
namespace {

void check_alpha(double alpha, const char* name) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument(std::string(name) + " must lie in (0, 1), got " +
                                std::to_string(alpha));
  }
}

double window_range(const ErrorWindow& window) {
  const auto [lo, hi] = std::minmax_element(window.errors.begin(), window.errors.end());
  return static_cast<double>(*hi) - static_cast<double>(*lo);
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

double ErrorWindow::mean() const noexcept {
  if (errors.empty()) return 0.0;
  return static_cast<double>(std::accumulate(errors.begin(), errors.end(), std::size_t{0})) /
         static_cast<double>(errors.size());
}

void DriftConfig::validate() const {
  check_alpha(alpha_drift, "alpha_drift");
  check_alpha(alpha_warning, "alpha_warning");
  if (!(alpha_drift < alpha_warning)) {
    throw std::invalid_argument("alpha_drift must be smaller than alpha_warning");
  }
  if (!(delta_mici >= 0.0)) throw std::invalid_argument("delta must be non-negative");
}

std::string_view to_string(DriftStatus status) noexcept {
  switch (status) {
    case DriftStatus::stable: return "stable";
    case DriftStatus::warning: return "warning";
    case DriftStatus::drift: return "drift";
  }
  return "stable";
}

double hoeffding_bound(double range, std::size_t n, double alpha) {
  check_alpha(alpha, "alpha");
  if (n == 0) throw std::invalid_argument("hoeffding_bound: n must be positive");
  return range * std::sqrt(std::log(1.0 / alpha) / (2.0 * static_cast<double>(n)));
}

double hoeffding_bound_two_sample(double range, std::size_t n_a, std::size_t n_b, double alpha) {
  check_alpha(alpha, "alpha");
  if (n_a == 0 || n_b == 0) throw std::invalid_argument("hoeffding_bound: empty sample");
  const double a = static_cast<double>(n_a);
  const double b = static_cast<double>(n_b);
  return range * std::sqrt((a + b) / (2.0 * a * b) * std::log(1.0 / alpha));
}

std::optional<std::size_t> find_cut(const ErrorWindow& window, double alpha) {
  const std::size_t T = window.size();
  if (T < 4) return std::nullopt;
  const double range = window_range(window);
  if (range == 0.0) return std::nullopt;

  std::optional<std::size_t> cut;
  double cut_upper = 0.0;
  std::size_t wrong = window.errors[0];
  for (std::size_t c = 2; c + 2 <= T; ++c) {
    wrong += window.errors[c - 1];
    const double upper =
        static_cast<double>(wrong) / static_cast<double>(c) + hoeffding_bound(range, c, alpha);
    if (!cut || upper <= cut_upper) {
      cut = c;
      cut_upper = upper;
    }
  }
  return cut;
}

DriftOutcome detect(const ErrorWindow& window, const DriftConfig& config) {
  DriftOutcome out;
  const std::size_t T = window.size();
  out.stats.f_mean = window.mean();
  out.cut = find_cut(window, config.alpha_drift);
  if (!out.cut) return out;

  const std::size_t cut = *out.cut;
  const double range = window_range(window);
  const auto wrong_before = std::accumulate(window.errors.begin(),
                                            window.errors.begin() + static_cast<std::ptrdiff_t>(cut),
                                            std::size_t{0});
  const auto wrong_after =
      std::accumulate(window.errors.begin() + static_cast<std::ptrdiff_t>(cut), window.errors.end(),
                      std::size_t{0});
  auto& s = out.stats;
  s.g_mean = static_cast<double>(wrong_before) / static_cast<double>(cut);
  s.h_mean = static_cast<double>(wrong_after) / static_cast<double>(T - cut);
  s.eps_f = hoeffding_bound(range, T, config.alpha_drift);
  s.eps_g = hoeffding_bound(range, cut, config.alpha_drift);
  s.eps_d = hoeffding_bound_two_sample(range, cut, T - cut, config.alpha_drift);
  s.eps_w = hoeffding_bound_two_sample(range, cut, T - cut, config.alpha_warning);

  const double gap = std::abs(s.h_mean - s.g_mean);
  if (gap > s.eps_d && s.h_mean > s.g_mean) {
    out.status = DriftStatus::drift;
  } else if (gap >= s.eps_w) {
    out.status = DriftStatus::warning;
  }
  return out;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::invalid_argument("pearson: series must have equal length >= 2");
  }
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
    sab += (a[i] - ma) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double mici(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::invalid_argument("mici: series must have equal length >= 2");
  }
  const double n = static_cast<double>(a.size());
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  double va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  va /= n;
  vb /= n;
  if (va <= 0.0 || vb <= 0.0) return 0.0;
  const double rho = pearson(a, b);
  const double sum = va + vb;
  const double radicand = std::max(sum * sum - 4.0 * va * vb * (1.0 - rho * rho), 0.0);
  const double gamma = 0.5 * (sum - std::sqrt(radicand));
  return std::clamp(gamma, 0.0, std::min(va, vb));
}

MiciScan layer_prune_candidate(const AdlNetwork& net, std::span<const Vector> series,
                               double delta) {
  if (series.size() != net.depth()) {
    throw std::invalid_argument("layer_prune_candidate: one series per layer expected");
  }
  MiciScan scan;
  const auto& voting = net.voting();
  if (voting.active_count() < 2) return scan;
  for (std::size_t i = 0; i < net.depth(); ++i) {
    if (!voting.active[i]) continue;
    for (std::size_t j = i + 1; j < net.depth(); ++j) {
      if (!voting.active[j]) continue;
      const double gamma = mici(series[i], series[j]);
      if (!scan.first || gamma > scan.gamma) {
        scan.first = i;
        scan.second = j;
        scan.gamma = gamma;
        scan.rho = pearson(series[i], series[j]);
      }
    }
  }
  if (scan.first && scan.gamma > delta) {
    // Lower beta goes; on a tie the deeper layer.
    scan.prune = voting.beta[*scan.first] < voting.beta[*scan.second] ? scan.first : scan.second;
  }
  return scan;
}

}  // namespace adl
