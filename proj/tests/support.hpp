#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "adl/batch.hpp"
#include "adl/model.hpp"
#include "adl/numerics.hpp"

namespace adl::test {

// Random network of the given depth with 1..max_extra+1 nodes per layer and
// small random biases (construction leaves them at zero).
inline AdlNetwork random_network(std::size_t inputs, std::size_t classes, std::size_t depth,
                                 Rng& rng, std::size_t max_extra = 2, double bias_scale = 0.25) {
  AdlNetwork net(inputs, classes, rng);
  for (std::size_t l = 1; l < depth; ++l) net.add_layer(rng);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t l = 0; l < net.depth(); ++l) {
    const auto extra = static_cast<std::size_t>(rng() % (max_extra + 1));
    for (std::size_t r = 0; r < extra; ++r) net.add_node(l, rng);
  }
  for (std::size_t l = 0; l < net.depth(); ++l) {
    for (auto& b : net.layer(l).b) b = bias_scale * u(rng);
    for (auto& b : net.layer(l).bs) b = bias_scale * u(rng);
  }
  return net;
}

inline Vector one_hot(std::size_t label, std::size_t classes) {
  Vector v(classes, 0.0);
  v.at(label) = 1.0;
  return v;
}

inline StreamBatch make_batch(const std::vector<Vector>& xs, const std::vector<std::size_t>& labels,
                              std::size_t classes, std::int64_t index = 0) {
  StreamBatch b;
  b.features = Matrix(xs.size(), xs.front().size());
  b.labels = Matrix(xs.size(), classes);
  for (std::size_t t = 0; t < xs.size(); ++t) {
    for (std::size_t i = 0; i < xs[t].size(); ++i) b.features(t, i) = xs[t][i];
    b.labels(t, labels[t]) = 1.0;
  }
  b.batch_index = index;
  return b;
}

}  // namespace adl::test
