#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace linkpoison::tensor {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix zeros(std::size_t rows, std::size_t cols) { return {rows, cols}; }
  static Matrix ones(std::size_t rows, std::size_t cols) { return {rows, cols, 1.0}; }
  static Matrix identity(std::size_t n);
  static Matrix scalar(double v) { return {1, 1, v}; }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  bool is_scalar() const noexcept { return rows_ == 1 && cols_ == 1; }
  bool same_shape(const Matrix& o) const noexcept {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator[](std::size_t flat) { return data_[flat]; }
  double operator[](std::size_t flat) const { return data_[flat]; }

  /// Value of a 1x1 matrix.
  double item() const;

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  bool all_finite() const noexcept;
  std::string shape_string() const;

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

std::string shape_of(const Matrix& m);

// Value-level kernels. The autodiff tape exposes overloads of the same names
// for traced values so gradient rules can be written once for both.

/// op(a) * op(b), where op transposes when the flag is set.
Matrix matmul(const Matrix& a, const Matrix& b, bool transpose_a = false,
              bool transpose_b = false);
Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix mul(const Matrix& a, const Matrix& b);
Matrix mul_const(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);
Matrix add_scalar(const Matrix& a, double s);
Matrix sigmoid(const Matrix& a);
Matrix exp(const Matrix& a);
Matrix log(const Matrix& a);
Matrix relu(const Matrix& a);
Matrix leaky_relu(const Matrix& a, double slope);
Matrix elu(const Matrix& a);
Matrix pow(const Matrix& a, double p);
Matrix clamp(const Matrix& a, double lo, double hi);

Matrix sum(const Matrix& a);
Matrix mean(const Matrix& a);
Matrix frobenius_norm(const Matrix& a);
Matrix row_sum(const Matrix& a);
Matrix col_sum(const Matrix& a);
Matrix broadcast_scalar(const Matrix& s, std::size_t rows, std::size_t cols);
Matrix broadcast_col(const Matrix& v, std::size_t cols);
Matrix broadcast_row(const Matrix& v, std::size_t rows);

/// Flat row-major entries of `a` at `indices`, as a column vector.
Matrix gather(const Matrix& a, std::span<const std::size_t> indices);
/// Inverse of gather: a rows x cols matrix with `v` added at `indices`.
Matrix scatter(const Matrix& v, std::span<const std::size_t> indices,
               std::size_t rows, std::size_t cols);
Matrix gather_rows(const Matrix& a, std::span<const std::size_t> rows);
Matrix scatter_rows(const Matrix& v, std::span<const std::size_t> rows,
                    std::size_t total_rows);

/// Row-wise softmax restricted to entries where mask != 0; masked entries are
/// exactly zero. A row with an empty mask is a DomainError.
Matrix masked_row_softmax(const Matrix& logits, const Matrix& mask);

double frobenius(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);

}  // namespace linkpoison::tensor
