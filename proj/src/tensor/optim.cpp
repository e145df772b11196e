#include "linkpoison/tensor/optim.hpp"

#include <cmath>
#include <string>

#include "linkpoison/errors.hpp"

namespace linkpoison::tensor {

std::string_view optimizer_name(OptimizerKind kind) {
  return kind == OptimizerKind::kAdam ? "adam" : "gd";
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "gd") return OptimizerKind::kGradientDescent;
  throw DomainError("unknown optimizer '" + std::string(name) + "'");
}

Optimizer::Optimizer(OptimizerKind kind, double lr, double beta1, double beta2, double eps)
    : kind_(kind), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw DomainError("optimizer: invalid learning rate");
}

void Optimizer::step(std::span<Matrix* const> params, std::span<const Matrix> grads) {
  if (params.size() != grads.size()) throw ShapeError("optimizer: parameter/gradient count");
  for (std::size_t p = 0; p < params.size(); ++p)
    if (!params[p]->same_shape(grads[p]))
      throw ShapeError("optimizer: gradient shape " + grads[p].shape_string() +
                       " does not match parameter " + params[p]->shape_string());
  ++t_;
  if (kind_ == OptimizerKind::kGradientDescent) {
    for (std::size_t p = 0; p < params.size(); ++p) {
      auto w = params[p]->data();
      auto g = grads[p].data();
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr_ * g[i];
    }
    return;
  }
  if (m_.empty()) {
    for (const auto& g : grads) {
      m_.emplace_back(g.rows(), g.cols());
      v_.emplace_back(g.rows(), g.cols());
    }
  }
  if (m_.size() != params.size()) throw ShapeError("optimizer: parameter count changed");
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto w = params[p]->data();
    auto g = grads[p].data();
    auto m = m_[p].data();
    auto v = v_[p].data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      w[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
    }
  }
}

}  // namespace linkpoison::tensor
