#include "linkpoison/tensor/matrix.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>

#include "linkpoison/errors.hpp"

namespace linkpoison::tensor {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_string() +
                     " vs " + b.shape_string());
  }
}

template <class F>
Matrix map_unary(const Matrix& a, F f) {
  Matrix out(a.rows(), a.cols());
  auto src = a.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = f(src[i]);
  return out;
}

template <class F>
Matrix map_binary(const Matrix& a, const Matrix& b, const char* op, F f) {
  require_same_shape(a, b, op);
  Matrix out(a.rows(), a.cols());
  auto x = a.data();
  auto y = b.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < x.size(); ++i) dst[i] = f(x[i], y[i]);
  return out;
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw ShapeError("Matrix: data length " + std::to_string(data_.size()) +
                     " does not match " + std::to_string(rows) + "x" +
                     std::to_string(cols));
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

double Matrix::item() const {
  if (!is_scalar()) throw ShapeError("item() on non-scalar " + shape_string());
  return data_[0];
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

std::string Matrix::shape_string() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

std::string shape_of(const Matrix& m) { return m.shape_string(); }

Matrix matmul(const Matrix& a, const Matrix& b, bool transpose_a, bool transpose_b) {
  const std::size_t ar = transpose_a ? a.cols() : a.rows();
  const std::size_t ac = transpose_a ? a.rows() : a.cols();
  const std::size_t br = transpose_b ? b.cols() : b.rows();
  const std::size_t bc = transpose_b ? b.rows() : b.cols();
  if (ac != br) {
    throw ShapeError("matmul: inner dimensions differ (" + a.shape_string() +
                     (transpose_a ? "^T" : "") + " * " + b.shape_string() +
                     (transpose_b ? "^T" : "") + ")");
  }
  Matrix out(ar, bc);
  if (out.empty() || ac == 0) return out;
  ConstMap ma(a.data().data(), static_cast<Eigen::Index>(a.rows()),
              static_cast<Eigen::Index>(a.cols()));
  ConstMap mb(b.data().data(), static_cast<Eigen::Index>(b.rows()),
              static_cast<Eigen::Index>(b.cols()));
  MutMap mo(out.data().data(), static_cast<Eigen::Index>(ar),
            static_cast<Eigen::Index>(bc));
  if (!transpose_a && !transpose_b) {
    mo.noalias() = ma * mb;
  } else if (transpose_a && !transpose_b) {
    mo.noalias() = ma.transpose() * mb;
  } else if (!transpose_a && transpose_b) {
    mo.noalias() = ma * mb.transpose();
  } else {
    mo.noalias() = ma.transpose() * mb.transpose();
  }
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out(c, r) = a(r, c);
  return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
  return map_binary(a, b, "add", [](double x, double y) { return x + y; });
}

Matrix sub(const Matrix& a, const Matrix& b) {
  return map_binary(a, b, "sub", [](double x, double y) { return x - y; });
}

Matrix mul(const Matrix& a, const Matrix& b) {
  return map_binary(a, b, "mul", [](double x, double y) { return x * y; });
}

Matrix mul_const(const Matrix& a, const Matrix& b) { return mul(a, b); }

Matrix scale(const Matrix& a, double s) {
  return map_unary(a, [s](double x) { return x * s; });
}

Matrix add_scalar(const Matrix& a, double s) {
  return map_unary(a, [s](double x) { return x + s; });
}

Matrix sigmoid(const Matrix& a) {
  return map_unary(a, [](double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  });
}

Matrix exp(const Matrix& a) {
  return map_unary(a, [](double x) { return std::exp(x); });
}

Matrix log(const Matrix& a) {
  for (double v : a.data()) {
    if (!(v > 0.0)) throw DomainError("log: non-positive entry " + std::to_string(v));
  }
  return map_unary(a, [](double x) { return std::log(x); });
}

Matrix relu(const Matrix& a) {
  return map_unary(a, [](double x) { return x > 0.0 ? x : 0.0; });
}

Matrix leaky_relu(const Matrix& a, double slope) {
  return map_unary(a, [slope](double x) { return x > 0.0 ? x : slope * x; });
}

Matrix elu(const Matrix& a) {
  return map_unary(a, [](double x) { return x > 0.0 ? x : std::expm1(x); });
}

Matrix pow(const Matrix& a, double p) {
  return map_unary(a, [p](double x) { return std::pow(x, p); });
}

Matrix clamp(const Matrix& a, double lo, double hi) {
  return map_unary(a, [lo, hi](double x) { return std::clamp(x, lo, hi); });
}

Matrix sum(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += v;
  return Matrix::scalar(s);
}

Matrix mean(const Matrix& a) {
  if (a.empty()) return Matrix::scalar(0.0);
  return Matrix::scalar(sum(a).item() / static_cast<double>(a.size()));
}

Matrix frobenius_norm(const Matrix& a) { return Matrix::scalar(frobenius(a)); }

Matrix row_sum(const Matrix& a) {
  Matrix out(a.rows(), 1);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double s = 0.0;
    for (double v : a.row(r)) s += v;
    out(r, 0) = s;
  }
  return out;
}

Matrix col_sum(const Matrix& a) {
  Matrix out(1, a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto row = a.row(r);
    for (std::size_t c = 0; c < a.cols(); ++c) out(0, c) += row[c];
  }
  return out;
}

Matrix broadcast_scalar(const Matrix& s, std::size_t rows, std::size_t cols) {
  return Matrix(rows, cols, s.item());
}

Matrix broadcast_col(const Matrix& v, std::size_t cols) {
  if (v.cols() != 1) throw ShapeError("broadcast_col: expected column vector, got " + v.shape_string());
  Matrix out(v.rows(), cols);
  for (std::size_t r = 0; r < v.rows(); ++r) {
    auto row = out.row(r);
    std::fill(row.begin(), row.end(), v(r, 0));
  }
  return out;
}

Matrix broadcast_row(const Matrix& v, std::size_t rows) {
  if (v.rows() != 1) throw ShapeError("broadcast_row: expected row vector, got " + v.shape_string());
  Matrix out(rows, v.cols());
  for (std::size_t r = 0; r < rows; ++r) std::copy(v.data().begin(), v.data().end(), out.row(r).begin());
  return out;
}

Matrix gather(const Matrix& a, std::span<const std::size_t> indices) {
  Matrix out(indices.size(), 1);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= a.size()) throw ShapeError("gather: index out of range");
    out[i] = a[indices[i]];
  }
  return out;
}

Matrix scatter(const Matrix& v, std::span<const std::size_t> indices, std::size_t rows,
               std::size_t cols) {
  if (v.size() != indices.size()) throw ShapeError("scatter: value/index length mismatch");
  Matrix out(rows, cols);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= out.size()) throw ShapeError("scatter: index out of range");
    out[indices[i]] += v[i];
  }
  return out;
}

Matrix gather_rows(const Matrix& a, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), a.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= a.rows()) throw ShapeError("gather_rows: row out of range");
    auto src = a.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

Matrix scatter_rows(const Matrix& v, std::span<const std::size_t> rows, std::size_t total_rows) {
  if (v.rows() != rows.size()) throw ShapeError("scatter_rows: row count mismatch");
  Matrix out(total_rows, v.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= total_rows) throw ShapeError("scatter_rows: row out of range");
    auto src = v.row(i);
    auto dst = out.row(rows[i]);
    for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
  }
  return out;
}

Matrix masked_row_softmax(const Matrix& logits, const Matrix& mask) {
  require_same_shape(logits, mask, "masked_row_softmax");
  Matrix out(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    auto x = logits.row(r);
    auto m = mask.row(r);
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < x.size(); ++c)
      if (m[c] != 0.0) mx = std::max(mx, x[c]);
    if (mx == -std::numeric_limits<double>::infinity()) {
      throw DomainError("masked_row_softmax: row " + std::to_string(r) +
                        " has no unmasked entries");
    }
    auto y = out.row(r);
    double z = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) {
      if (m[c] != 0.0) {
        y[c] = std::exp(x[c] - mx);
        z += y[c];
      }
    }
    for (double& v : y) v /= z;
  }
  return out;
}

double frobenius(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace linkpoison::tensor
