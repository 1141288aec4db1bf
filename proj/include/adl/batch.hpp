#pragma once

#include <cstddef>
#include <cstdint>

#include "adl/numerics.hpp"

namespace adl {

/// A timestamped chunk of the stream: T feature rows and their one-hot
/// labels. Labels are only meant to be read after the batch was scored.
struct StreamBatch {
  Matrix features;  // T x n
  Matrix labels;    // T x m, one-hot
  std::int64_t batch_index = 0;

  std::size_t size() const noexcept { return features.rows(); }
  std::size_t label_of(std::size_t t) const { return argmax(labels.row(t)); }

  /// Throws std::invalid_argument on an empty batch, mismatched row counts
  /// or a label row that is not one-hot.
  void validate() const;

  friend bool operator==(const StreamBatch&, const StreamBatch&) = default;
};

}  // namespace adl
