#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "adl/model.hpp"

namespace adl {

/// Per-sample misclassification record of one evaluated batch (1 = wrong).
struct ErrorWindow {
  std::vector<std::uint8_t> errors;
  std::int64_t batch_index = 0;

  std::size_t size() const noexcept { return errors.size(); }
  double mean() const noexcept;
};

struct DriftConfig {
  double alpha_drift = 0.0001;
  double alpha_warning = 0.0005;
  double delta_mici = 0.05;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

enum class DriftStatus { stable, warning, drift };

std::string_view to_string(DriftStatus status) noexcept;

struct DriftStats {
  double f_mean = 0.0;  // whole window
  double g_mean = 0.0;  // errors before the cut
  double h_mean = 0.0;  // errors from the cut on
  double eps_f = 0.0;
  double eps_g = 0.0;
  double eps_w = 0.0;
  double eps_d = 0.0;
};

struct DriftOutcome {
  DriftStatus status = DriftStatus::stable;
  std::optional<std::size_t> cut;
  DriftStats stats;
};

/// range * sqrt(ln(1/alpha) / (2n)) for the mean of n bounded samples.
double hoeffding_bound(double range, std::size_t n, double alpha);

/// Bound on the difference of two sample means of sizes n_a and n_b:
/// range * sqrt((n_a + n_b) / (2 n_a n_b) * ln(1/alpha)).
double hoeffding_bound_two_sample(double range, std::size_t n_a, std::size_t n_b, double alpha);

/// Switching point of a window: prefixes c = 2..T-2 are scanned and the cut
/// moves to c whenever the prefix's upper bound does not exceed the upper
/// bound at the current cut. Clean (or all-wrong) windows have no cut.
std::optional<std::size_t> find_cut(const ErrorWindow& window, double alpha);

/// Drift when the post-cut error exceeds the pre-cut error by more than
/// the alpha_drift bound, warning when the gap reaches the alpha_warning
/// bound, stable otherwise.
DriftOutcome detect(const ErrorWindow& window, const DriftConfig& config);

double pearson(std::span<const double> a, std::span<const double> b);

/// Maximum information compression index: the smaller eigenvalue of the
/// 2x2 covariance of the two series.
double mici(std::span<const double> a, std::span<const double> b);

struct MiciScan {
  std::optional<std::size_t> prune;  // layer to detach, when the pair clears delta
  std::optional<std::size_t> first;  // maximal-gamma pair
  std::optional<std::size_t> second;
  double gamma = 0.0;
  double rho = 0.0;
};

/// Scans every pair of output-active layers. series[l] is layer l's
/// per-sample summary; entries of inactive layers are ignored.
MiciScan layer_prune_candidate(const AdlNetwork& net, std::span<const Vector> series,
                               double delta);

}  // namespace adl
