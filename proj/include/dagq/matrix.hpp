#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace dagq {

// Dense row-major matrix of doubles. Small and value-semantic; this library
// never needs anything faster than straightforward loops.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols)
      : rows_(rows), cols_(cols),
        data_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0.0) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("Matrix: negative dimension");
  }

  static Matrix filled(int rows, int cols, double value) {
    Matrix m(rows, cols);
    for (double& x : m.data_) x = value;
    return m;
  }

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  std::size_t count() const noexcept { return data_.size(); }

  double& operator()(int r, int c) {
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }
  double operator()(int r, int c) const {
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }

  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  std::string shape() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
  }

  bool same_shape(const Matrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  bool operator==(const Matrix&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

namespace detail {
inline void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}
}  // namespace detail

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  detail::require(a.cols() == b.rows(),
                  "matmul: lhs is " + a.shape() + ", rhs is " + b.shape());
  Matrix out(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

inline Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

inline Matrix concat_cols(const Matrix& a, const Matrix& b, const Matrix& c) {
  detail::require(a.rows() == b.rows() && b.rows() == c.rows(),
                  "concat_cols: row counts differ: " + a.shape() + ", " + b.shape() +
                      ", " + c.shape());
  Matrix out(a.rows(), a.cols() + b.cols() + c.cols());
  for (int i = 0; i < a.rows(); ++i) {
    int j = 0;
    for (int k = 0; k < a.cols(); ++k) out(i, j++) = a(i, k);
    for (int k = 0; k < b.cols(); ++k) out(i, j++) = b(i, k);
    for (int k = 0; k < c.cols(); ++k) out(i, j++) = c(i, k);
  }
  return out;
}

// Gradient at exactly 0 is defined as 0 (see relu_mask).
inline Matrix relu(const Matrix& a) {
  Matrix out = a;
  for (double& x : out.data())
    if (x < 0.0) x = 0.0;
  return out;
}

// bias is a 1 x cols row added to every row of a.
inline Matrix add_row_bias(const Matrix& a, const Matrix& bias) {
  detail::require(bias.rows() == 1 && bias.cols() == a.cols(),
                  "add_row_bias: matrix is " + a.shape() + ", bias is " + bias.shape());
  Matrix out = a;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out(i, j) += bias(0, j);
  return out;
}

// Column-wise sums: n x d -> 1 x d.
inline Matrix sum_rows(const Matrix& a) {
  Matrix out(1, a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out(0, j) += a(i, j);
  return out;
}

inline Matrix affine(const Matrix& x, const Matrix& w, const Matrix& b) {
  return add_row_bias(matmul(x, w), b);
}

inline Matrix sub(const Matrix& a, const Matrix& b) {
  detail::require(a.same_shape(b), "sub: shapes " + a.shape() + " and " + b.shape());
  Matrix out = a;
  for (std::size_t i = 0; i < out.count(); ++i) out.data()[i] -= b.data()[i];
  return out;
}

inline Matrix add(const Matrix& a, const Matrix& b) {
  detail::require(a.same_shape(b), "add: shapes " + a.shape() + " and " + b.shape());
  Matrix out = a;
  for (std::size_t i = 0; i < out.count(); ++i) out.data()[i] += b.data()[i];
  return out;
}

inline Matrix square(const Matrix& a) {
  Matrix out = a;
  for (double& x : out.data()) x *= x;
  return out;
}

inline Matrix absval(const Matrix& a) {
  Matrix out = a;
  for (double& x : out.data()) x = std::abs(x);
  return out;
}

inline Matrix scale(const Matrix& a, double c) {
  Matrix out = a;
  for (double& x : out.data()) x *= c;
  return out;
}

inline void accumulate(Matrix& into, const Matrix& from) {
  detail::require(into.same_shape(from),
                  "accumulate: shapes " + into.shape() + " and " + from.shape());
  for (std::size_t i = 0; i < into.count(); ++i) into.data()[i] += from.data()[i];
}

inline bool all_finite(const Matrix& a) {
  for (double x : a.data())
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace dagq
