#include "adl/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace adl {

void Matrix::append_row(std::span<const double> values) {
  if (rows_ > 0 && values.size() != cols_) {
    throw std::invalid_argument("append_row: expected " + std::to_string(cols_) + " values, got " +
                                std::to_string(values.size()));
  }
  if (rows_ == 0) cols_ = values.size();
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

void Matrix::append_col(std::span<const double> values) {
  if (values.size() != rows_) {
    throw std::invalid_argument("append_col: expected " + std::to_string(rows_) + " values, got " +
                                std::to_string(values.size()));
  }
  std::vector<double> out;
  out.reserve(rows_ * (cols_ + 1));
  for (std::size_t r = 0; r < rows_; ++r) {
    auto src = row(r);
    out.insert(out.end(), src.begin(), src.end());
    out.push_back(values[r]);
  }
  data_ = std::move(out);
  ++cols_;
}

void Matrix::erase_row(std::size_t r) {
  if (r >= rows_) throw std::out_of_range("erase_row: index out of range");
  const auto first = data_.begin() + static_cast<std::ptrdiff_t>(r * cols_);
  data_.erase(first, first + static_cast<std::ptrdiff_t>(cols_));
  --rows_;
}

void Matrix::erase_col(std::size_t c) {
  if (c >= cols_) throw std::out_of_range("erase_col: index out of range");
  std::vector<double> out;
  out.reserve(rows_ * (cols_ - 1));
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t j = 0; j < cols_; ++j) {
      if (j != c) out.push_back((*this)(r, j));
    }
  }
  data_ = std::move(out);
  --cols_;
}

Vector affine(const Matrix& a, std::span<const double> x, std::span<const double> b) {
  if (a.cols() != x.size() || a.rows() != b.size()) {
    throw std::invalid_argument("affine: dimension mismatch (" + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " with x=" + std::to_string(x.size()) +
                                ", b=" + std::to_string(b.size()) + ")");
  }
  Vector y(b.begin(), b.end());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const auto w = a.row(r);
    double acc = 0.0;
    for (std::size_t c = 0; c < w.size(); ++c) acc += w[c] * x[c];
    y[r] += acc;
  }
  return y;
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Vector sigmoid(Vector v) noexcept {
  for (auto& x : v) x = sigmoid(x);
  return v;
}

Vector softmax(std::span<const double> logits) {
  if (logits.size() < 2) throw std::invalid_argument("softmax: need at least two logits");
  const double top = *std::max_element(logits.begin(), logits.end());
  Vector out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - top);
    total += out[i];
  }
  for (auto& v : out) v /= total;
  return out;
}

std::size_t argmax(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("argmax: empty vector");
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

double xavier_bound(std::size_t fan_in, std::size_t fan_out) {
  if (fan_in == 0 || fan_out == 0) {
    throw std::invalid_argument("xavier_init: fan_in and fan_out must be positive");
  }
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

Matrix xavier_init(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double bound = xavier_bound(fan_in, fan_out);
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix m(fan_out, fan_in);
  for (auto& v : m.values()) v = dist(rng);
  return m;
}

double RecursiveStat::stddev() const noexcept { return std::sqrt(variance()); }

double standardize(const RecursiveStat& stat, double x) noexcept {
  if (stat.count() < 2) return x;
  const double sd = stat.stddev();
  return sd > 1e-12 ? (x - stat.mean()) / sd : x - stat.mean();
}

void MinTrackedStat::update(double x) noexcept {
  inner_.update(x);
  mean_min_ = std::min(mean_min_, inner_.mean());
  std_min_ = std::min(std_min_, inner_.stddev());
}

void MinTrackedStat::reset_min() noexcept {
  mean_min_ = inner_.mean();
  std_min_ = inner_.stddev();
}

}  // namespace adl
