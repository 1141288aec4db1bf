#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

namespace adl {

using Vector = std::vector<double>;

/// The single random engine owned by an experiment. Every stochastic
/// operation on a model draws from the one instance it is handed.
using Rng = std::mt19937_64;

// Dense row-major matrix with the handful of structural edits an
// evolving network needs (append/erase of rows and columns).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<const double> values() const noexcept { return data_; }
  std::span<double> values() noexcept { return data_; }

  void append_row(std::span<const double> values);
  void append_col(std::span<const double> values);
  void erase_row(std::size_t r);
  void erase_col(std::size_t c);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// y = A x + b
Vector affine(const Matrix& a, std::span<const double> x, std::span<const double> b);

double sigmoid(double x) noexcept;
Vector sigmoid(Vector v) noexcept;

/// Max-shifted softmax; requires at least two entries.
Vector softmax(std::span<const double> logits);

std::size_t argmax(std::span<const double> v);

/// Uniform Glorot initialization on [-sqrt(6/(fan_in+fan_out)), +sqrt(...)],
/// returned as a fan_out x fan_in matrix.
Matrix xavier_init(std::size_t fan_in, std::size_t fan_out, Rng& rng);
double xavier_bound(std::size_t fan_in, std::size_t fan_out);

/// Welford running mean and population variance of a scalar series.
class RecursiveStat {
 public:
  void update(double x) noexcept {
    ++count_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    sq_accum_ += delta * (x - mean_);
    if (sq_accum_ < 0.0) sq_accum_ = 0.0;
  }

  std::uint64_t count() const noexcept { return count_; }
  double mean() const noexcept { return mean_; }
  double sq_accum() const noexcept { return sq_accum_; }
  double variance() const noexcept {
    return count_ == 0 ? 0.0 : sq_accum_ / static_cast<double>(count_);
  }
  double stddev() const noexcept;

  static RecursiveStat restore(std::uint64_t count, double mean, double sq_accum) {
    RecursiveStat s;
    s.count_ = count;
    s.mean_ = mean;
    s.sq_accum_ = sq_accum;
    return s;
  }

  friend bool operator==(const RecursiveStat&, const RecursiveStat&) = default;

 private:
  std::uint64_t count_ = 0;
  double mean_ = 0.0;
  double sq_accum_ = 0.0;
};

/// z-score of x under a running statistic. Identity below two samples; a
/// zero-spread series is only centred.
double standardize(const RecursiveStat& stat, double x) noexcept;

// Running statistic plus the minima of its mean and standard deviation
// since the last reset. The minima start at +inf so the first update
// seeds them.
class MinTrackedStat {
 public:
  void update(double x) noexcept;
  void reset_min() noexcept;

  const RecursiveStat& inner() const noexcept { return inner_; }
  double mean() const noexcept { return inner_.mean(); }
  double stddev() const noexcept { return inner_.stddev(); }
  double mean_min() const noexcept { return mean_min_; }
  double std_min() const noexcept { return std_min_; }

  static MinTrackedStat restore(RecursiveStat inner, double mean_min, double std_min) {
    MinTrackedStat s;
    s.inner_ = inner;
    s.mean_min_ = mean_min;
    s.std_min_ = std_min;
    return s;
  }

  friend bool operator==(const MinTrackedStat&, const MinTrackedStat&) = default;

 private:
  RecursiveStat inner_;
  double mean_min_ = std::numeric_limits<double>::infinity();
  double std_min_ = std::numeric_limits<double>::infinity();
};

}  // namespace adl
