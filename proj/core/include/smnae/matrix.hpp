#ifndef SMNAE_MATRIX_HPP
#define SMNAE_MATRIX_HPP

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace smnae {

// Deterministic seed for weight initialization and data generation.
// The same seed always reproduces the same value sequence bit for bit.
struct Seed {
  std::uint64_t value = 0;

  // Derives an independent stream (e.g. one per layer) from this seed.
  Seed stream(std::uint64_t idx) const;
};

// Deterministic RNG. Wraps std::mt19937_64 (whose output sequence is fixed
// by the standard) and maps to doubles by hand so results do not depend on
// the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(Seed seed);

  std::uint64_t next_u64();
  double uniform();                       // [0, 1)
  double uniform(double lo, double hi);   // [lo, hi)
  double normal();                        // standard normal, Box-Muller

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Dense 2-D matrix of doubles, row-major storage. Data batches follow the
// column-per-sample convention: an n-feature, N-sample batch is n x N.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols);  // zero-initialized
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  const std::vector<double>& values() const { return values_; }

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  Matrix transposed() const;
  Matrix column(std::size_t c) const;            // single column as a rows x 1 matrix
  void set_column(std::size_t c, const Matrix& col);

  // True when every entry is finite (no NaN, no Inf).
  bool all_finite() const;

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double s, Matrix m);

// a * b. Throws ValidationError on dimension mismatch.
Matrix matmul(const Matrix& a, const Matrix& b);
// a * b^T without materializing the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);
// a^T * b without materializing the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);

// Element-wise product.
Matrix hadamard(const Matrix& a, const Matrix& b);

// Element-wise logistic function 1 / (1 + exp(-x)), numerically stable at
// both tails.
Matrix sigmoid(const Matrix& m);
double sigmoid_scalar(double x);

// Sum of squared entries.
double frobenius_sq(const Matrix& m);

// Uniform initialization on [-r, r] with r = sqrt(6 / (rows + cols)),
// filled row-major. Pure function of (rows, cols, seed).
Matrix init_weights(std::size_t rows, std::size_t cols, Seed seed);

// Stacks b below a (same column count).
Matrix vstack(const Matrix& a, const Matrix& b);
// Appends the columns of b to the right of a (same row count).
Matrix hstack(const Matrix& a, const Matrix& b);

}  // namespace smnae

#endif
