#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "smnae/errors.hpp"
#include "smnae/matrix.hpp"

using namespace smnae;
using namespace smnae::testing;

TEST_CASE("matmul identity and projector") {
  const Matrix a{{1, 2}, {3, 4}};
  CHECK(matmul(Matrix::identity(2), a) == a);

  const Matrix proj{{1, 0}, {0, 0}};
  const Matrix v{{5}, {7}};
  const Matrix out = matmul(proj, v);
  CHECK(out(0, 0) == 5.0);
  CHECK(out(1, 0) == 0.0);
}

TEST_CASE("matmul matches the triple-loop oracle") {
  const Matrix a = random_matrix(4, 3, Seed{11});
  const Matrix b = random_matrix(3, 2, Seed{12});
  CHECK(max_abs_diff(matmul(a, b), matmul_oracle(a, b)) < 1e-12);
}

TEST_CASE("matmul rejects mismatched shapes") {
  CHECK_THROWS_AS(matmul(random_matrix(2, 3, Seed{1}), random_matrix(2, 3, Seed{2})),
                  ValidationError);
}

TEST_CASE("transpose-product helpers agree with explicit transposes") {
  const Matrix a = random_matrix(4, 6, Seed{21});
  const Matrix b = random_matrix(5, 6, Seed{22});
  CHECK(max_abs_diff(matmul_nt(a, b), matmul_oracle(a, b.transposed())) < 1e-12);
  const Matrix c = random_matrix(4, 5, Seed{23});
  CHECK(max_abs_diff(matmul_tn(a, c), matmul_oracle(a.transposed(), c)) < 1e-12);
}

TEST_CASE("matmul is associative on random conformable triples") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Matrix a = random_matrix(3, 4, Seed{100 + s});
    const Matrix b = random_matrix(4, 5, Seed{200 + s});
    const Matrix c = random_matrix(5, 2, Seed{300 + s});
    const Matrix left = matmul(matmul(a, b), c);
    const Matrix right = matmul(a, matmul(b, c));
    for (std::size_t i = 0; i < left.size(); ++i) {
      const double denom = std::max({1.0, std::abs(left.data()[i]), std::abs(right.data()[i])});
      CHECK(std::abs(left.data()[i] - right.data()[i]) / denom < 1e-9);
    }
  }
}

TEST_CASE("sigmoid fixed points and saturation") {
  const Matrix zero(1, 1);
  CHECK(sigmoid(zero)(0, 0) == 0.5);

  Matrix deep(1, 1);
  deep(0, 0) = -50.0;
  const double v = sigmoid(deep)(0, 0);
  CHECK(v < 1e-20);
  CHECK(std::isfinite(v));

  Matrix one(1, 1);
  one(0, 0) = 1.0;
  CHECK(sigmoid(one)(0, 0) == doctest::Approx(0.7310585786).epsilon(1e-9));
}

TEST_CASE("sigmoid(x) + sigmoid(-x) = 1") {
  const Matrix x = random_matrix(6, 6, Seed{31}, -30.0, 30.0);
  const Matrix s = sigmoid(x);
  const Matrix sn = sigmoid(-1.0 * Matrix(x));
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(s.data()[i] + sn.data()[i] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("frobenius_sq basics and loop oracle") {
  CHECK(frobenius_sq(Matrix(3, 3)) == 0.0);
  CHECK(frobenius_sq(Matrix{{3, 4}}) == 25.0);

  const Matrix m = random_matrix(5, 5, Seed{41});
  double acc = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) acc += m(i, j) * m(i, j);
  CHECK(frobenius_sq(m) == doctest::Approx(acc).epsilon(1e-12));
}

TEST_CASE("frobenius_sq parallelogram bound") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Matrix a = random_matrix(4, 4, Seed{500 + s});
    const Matrix b = random_matrix(4, 4, Seed{600 + s});
    CHECK(frobenius_sq(a + b) <= 2.0 * (frobenius_sq(a) + frobenius_sq(b)) + 1e-12);
  }
}

TEST_CASE("init_weights determinism, bound, and seed sensitivity") {
  const Matrix a = init_weights(7, 5, Seed{42});
  const Matrix b = init_weights(7, 5, Seed{42});
  CHECK(a == b);

  const double r = std::sqrt(6.0 / 12.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.data()[i] >= -r);
    CHECK(a.data()[i] <= r);
  }

  const Matrix c = init_weights(7, 5, Seed{43});
  CHECK(max_abs_diff(a, c) > 0.0);
}

TEST_CASE("stacking helpers") {
  const Matrix a{{1, 2}, {3, 4}};
  const Matrix b{{5, 6}};
  const Matrix v = vstack(a, b);
  CHECK(v.rows() == 3);
  CHECK(v(2, 1) == 6.0);
  const Matrix h = hstack(a, a);
  CHECK(h.cols() == 4);
  CHECK(h(1, 3) == 4.0);
}
