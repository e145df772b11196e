#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "linkpoison/tensor/matrix.hpp"

namespace linkpoison::tensor {

enum class OptimizerKind { kGradientDescent, kAdam };

std::string_view optimizer_name(OptimizerKind kind);
/// Accepts "gd" and "adam"; throws DomainError otherwise.
OptimizerKind parse_optimizer(std::string_view name);

/// In-place first-order optimizer over a fixed list of parameter matrices.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double lr, double beta1 = 0.9, double beta2 = 0.999,
            double eps = 1e-8);

  /// params[i] -= update(grads[i]). Shapes must match across calls.
  void step(std::span<Matrix* const> params, std::span<const Matrix> grads);

  OptimizerKind kind() const noexcept { return kind_; }
  double lr() const noexcept { return lr_; }
  std::size_t steps() const noexcept { return t_; }

 private:
  OptimizerKind kind_;
  double lr_;
  double beta1_;
  double beta2_;
  double eps_;
  std::size_t t_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

}  // namespace linkpoison::tensor
