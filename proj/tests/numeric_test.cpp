#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "rattn/numeric.hpp"
#include "rattn/rng.hpp"

using namespace rattn;

TEST_CASE("check_finite passes finite data and names the site on failure") {
  Matrix ok(2, 2);
  ok << 1.0, -2.0, 0.0, 1e300;
  CHECK_NOTHROW(check_finite(ok, "here"));

  Matrix bad = ok;
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_WITH_AS(check_finite(bad, "loss"),
                       doctest::Contains("loss"), std::runtime_error);

  bad(1, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(check_finite(bad, "loss"), std::runtime_error);
}

TEST_CASE("matmul matches a hand-computed product") {
  Matrix a(2, 3);
  a << 1, 2, 3, 4, 5, 6;
  Matrix b(3, 2);
  b << 7, 8, 9, 10, 11, 12;
  Matrix c = matmul(a, b);
  CHECK(c.rows() == 2);
  CHECK(c.cols() == 2);
  CHECK(c(0, 0) == doctest::Approx(58));
  CHECK(c(0, 1) == doctest::Approx(64));
  CHECK(c(1, 0) == doctest::Approx(139));
  CHECK(c(1, 1) == doctest::Approx(154));
}

TEST_CASE("matmul reports both shapes on mismatch") {
  Matrix a = Matrix::Zero(2, 3);
  Matrix b = Matrix::Zero(4, 2);
  CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("2x3"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("4x2"),
                       std::invalid_argument);
}

TEST_CASE("softmax_rows: hand value for [0, ln 2]") {
  Matrix x(1, 2);
  x << 0.0, std::log(2.0);
  Matrix p = softmax_rows(x);
  CHECK(p(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(p(0, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("softmax_rows rows sum to one and order is preserved") {
  RngState r = RngState::make(17, Stream::test);
  Matrix x(5, 7);
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = 0; j < x.cols(); ++j) x(i, j) = 4.0 * r.next_gaussian();
  Matrix p = softmax_rows(x);
  for (Index i = 0; i < p.rows(); ++i) {
    CHECK(p.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
    for (Index j = 0; j < p.cols(); ++j) {
      CHECK(p(i, j) > 0.0);
      for (Index k = 0; k < p.cols(); ++k) {
        if (x(i, j) < x(i, k)) CHECK(p(i, j) < p(i, k));
      }
    }
  }
}

TEST_CASE("softmax_rows is shift-invariant and survives huge logits") {
  Matrix x(1, 3);
  x << 1000.0, 1001.0, 999.0;
  Matrix p = softmax_rows(x);
  Matrix y(1, 3);
  y << 0.0, 1.0, -1.0;
  Matrix q = softmax_rows(y);
  for (Index j = 0; j < 3; ++j) {
    CHECK(std::isfinite(p(0, j)));
    CHECK(p(0, j) == doctest::Approx(q(0, j)).epsilon(1e-12));
  }
}

TEST_CASE("pairwise_distances: hand values and exact symmetry") {
  Matrix pts(3, 1);
  pts << 0.0, 1.0, 3.0;
  Matrix d = pairwise_distances(pts);
  CHECK(d(0, 1) == doctest::Approx(1.0));
  CHECK(d(0, 2) == doctest::Approx(3.0));
  CHECK(d(1, 2) == doctest::Approx(2.0));
  for (Index i = 0; i < 3; ++i) {
    CHECK(d(i, i) == 0.0);
    for (Index j = 0; j < 3; ++j) {
      // Bitwise equality, not approx: the loop computes each pair once.
      CHECK(d(i, j) == d(j, i));
    }
  }
}

TEST_CASE("pairwise_distances matches the norm definition on random data") {
  RngState r = RngState::make(29, Stream::test);
  Matrix pts(6, 4);
  for (Index i = 0; i < pts.rows(); ++i)
    for (Index j = 0; j < pts.cols(); ++j) pts(i, j) = r.next_gaussian();
  Matrix d = pairwise_distances(pts);
  for (Index i = 0; i < pts.rows(); ++i) {
    for (Index j = 0; j < pts.rows(); ++j) {
      double expect = (pts.row(i) - pts.row(j)).norm();
      CHECK(d(i, j) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}
