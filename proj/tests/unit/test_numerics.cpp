#include <cmath>
#include <limits>
#include <stdexcept>

#include "adl/numerics.hpp"
#include "doctest.h"

using namespace adl;

TEST_SUITE("numerics") {

TEST_CASE("sigmoid") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(1.0) == doctest::Approx(0.7310585786300049).epsilon(1e-15));
  CHECK(sigmoid(std::numeric_limits<double>::infinity()) == 1.0);
  CHECK(sigmoid(-std::numeric_limits<double>::infinity()) == 0.0);
  CHECK(sigmoid(-800.0) >= 0.0);
  CHECK(sigmoid(800.0) == 1.0);
  CHECK(sigmoid(3.0) + sigmoid(-3.0) == doctest::Approx(1.0));
}

TEST_CASE("softmax") {
  const auto even = softmax(Vector{0.0, 0.0});
  CHECK(even[0] == 0.5);
  CHECK(even[1] == 0.5);
  const auto big = softmax(Vector{1000.0, 1000.0});
  CHECK(big[0] == 0.5);
  CHECK(big[1] == 0.5);
  const auto skew = softmax(Vector{1.0, 0.0});
  CHECK(skew[0] == doctest::Approx(0.7311).epsilon(1e-4));
  CHECK(skew[1] == doctest::Approx(0.2689).epsilon(1e-4));
  CHECK_THROWS_AS(softmax(Vector{1.0}), std::invalid_argument);
}

TEST_CASE("affine and argmax") {
  Matrix a(2, 3);
  a(0, 0) = 1; a(0, 1) = 2; a(0, 2) = 3;
  a(1, 0) = -1; a(1, 1) = 0; a(1, 2) = 1;
  const auto y = affine(a, Vector{1, 1, 1}, Vector{0.5, -0.5});
  CHECK(y == Vector{6.5, -0.5});
  CHECK_THROWS_AS(affine(a, Vector{1, 1}, Vector{0, 0}), std::invalid_argument);
  CHECK(argmax(Vector{0.1, 0.7, 0.7}) == 1);
}

TEST_CASE("matrix structural edits") {
  Matrix m(2, 2);
  m(0, 0) = 1; m(0, 1) = 2; m(1, 0) = 3; m(1, 1) = 4;
  m.append_row(Vector{5, 6});
  CHECK(m.rows() == 3);
  m.append_col(Vector{7, 8, 9});
  CHECK(m.cols() == 3);
  CHECK(m(2, 2) == 9);
  m.erase_row(0);
  CHECK(m(0, 0) == 3);
  m.erase_col(1);
  CHECK(m(1, 1) == 9);
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 2);
}

TEST_CASE("xavier bounds and determinism") {
  CHECK(xavier_bound(3, 2) == doctest::Approx(std::sqrt(6.0 / 5.0)));
  CHECK(xavier_bound(1, 1) == doctest::Approx(std::sqrt(3.0)));
  CHECK_THROWS(xavier_bound(0, 3));
  Rng a(42), b(42);
  const auto wa = xavier_init(3, 2, a);
  const auto wb = xavier_init(3, 2, b);
  CHECK(wa == wb);
  CHECK(wa.rows() == 2);
  CHECK(wa.cols() == 3);
  for (double v : wa.values()) CHECK(std::abs(v) <= 1.0954451150103321);
  Rng c(1);
  for (int i = 0; i < 100; ++i) CHECK(std::abs(xavier_init(1, 1, c)(0, 0)) <= std::sqrt(3.0));
}

TEST_CASE("recursive statistics") {
  RecursiveStat s;
  for (double x : {2.0, 2.0, 2.0}) s.update(x);
  CHECK(s.mean() == 2.0);
  CHECK(s.stddev() == 0.0);

  RecursiveStat t;
  t.update(1.0);
  t.update(3.0);
  CHECK(t.mean() == 2.0);
  CHECK(t.variance() == 1.0);

  RecursiveStat u;
  u.update(5.0);
  CHECK(u.mean() == 5.0);
  CHECK(u.stddev() == 0.0);
}

TEST_CASE("running minima") {
  MinTrackedStat s;
  s.update(3.0);  // mean 3
  s.update(-1.0); // mean 1
  s.update(4.0);  // mean 2
  CHECK(s.mean() == doctest::Approx(2.0));
  CHECK(s.mean_min() == doctest::Approx(1.0));

  s.reset_min();
  CHECK(s.mean_min() == doctest::Approx(2.0));
  CHECK(s.std_min() == doctest::Approx(s.stddev()));

  MinTrackedStat fresh;
  CHECK(std::isinf(fresh.mean_min()));
  CHECK(std::isinf(fresh.std_min()));
}

TEST_CASE("std minimum follows the smallest observed deviation") {
  // Deviations of the series 0, 1, 1, 1, 10: 0, 0.5, 0.471, 0.433, 3.88.
  MinTrackedStat s;
  for (double x : {0.0, 1.0, 1.0, 1.0}) s.update(x);
  const double low = s.stddev();
  s.update(10.0);
  CHECK(s.std_min() == doctest::Approx(0.0));
  CHECK(s.stddev() > low);
}

TEST_CASE("standardize") {
  RecursiveStat s;
  CHECK(standardize(s, 7.0) == 7.0);
  s.update(1.0);
  CHECK(standardize(s, 7.0) == 7.0);
  s.update(3.0);
  CHECK(standardize(s, 4.0) == doctest::Approx(2.0));
  RecursiveStat flat;
  flat.update(2.0);
  flat.update(2.0);
  CHECK(standardize(flat, 5.0) == 3.0);
}

}  // TEST_SUITE
