#pragma once

// Loop-based VGAE forward pass written independently of the library, used as
// the function under finite differences and as a check on forward values.

#include <algorithm>
#include <cmath>

#include "linkpoison/tensor/matrix.hpp"

namespace oracle {

inline Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k)
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += a(i, k) * b(k, j);
  return c;
}

inline Matrix naive_normalize(const Matrix& a) {
  const std::size_t n = a.rows();
  Matrix out(n, n);
  std::vector<double> deg(n, 1.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) deg[i] += a(i, j);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out(i, j) = (a(i, j) + (i == j)) / std::sqrt(deg[i] * deg[j]);
  return out;
}

struct NaiveLoss {
  double bce = 0.0;
  double kl = 0.0;
  double total() const { return bce + kl; }
};

/// Weighted reconstruction loss plus node-averaged KL for adjacency `a`
/// (also the reconstruction target), features x, weights w0/wmu/wlv.
inline NaiveLoss naive_vgae_loss(const Matrix& a, const Matrix& x, const Matrix& w0,
                                 const Matrix& wmu, const Matrix& wlv, const Matrix& noise,
                                 double pos_weight) {
  const std::size_t n = a.rows();
  const Matrix an = naive_normalize(a);
  Matrix h = naive_matmul(an, naive_matmul(x, w0));
  for (double& v : h.data()) v = std::max(v, 0.0);
  const Matrix mu = naive_matmul(an, naive_matmul(h, wmu));
  const Matrix lv = naive_matmul(an, naive_matmul(h, wlv));
  Matrix z(mu.rows(), mu.cols());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = mu[i] + std::exp(lv[i] / 2.0) * noise[i];
  NaiveLoss out;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < z.cols(); ++k) dot += z(i, k) * z(j, k);
      // Log-sigmoid form: log(1 - p) taken from a p near 1 loses ~eps/(1 - p)
      // of accuracy, enough to swamp a finite difference.
      const double p = 1.0 / (1.0 + std::exp(-dot));
      const double lo = 1e-7, hi = 1.0 - 1e-7;
      double log_p = -std::log1p(std::exp(-dot)), log_q = -std::log1p(std::exp(dot));
      if (p <= lo) {
        log_p = std::log(lo);
        log_q = std::log(1.0 - lo);
      } else if (p >= hi) {
        log_p = std::log(hi);
        log_q = std::log(1.0 - hi);
      }
      out.bce += -pos_weight * a(i, j) * log_p - (1.0 - a(i, j)) * log_q;
    }
  for (std::size_t i = 0; i < mu.size(); ++i)
    out.kl += -0.5 * (1.0 + lv[i] - mu[i] * mu[i] - std::exp(lv[i]));
  out.kl /= static_cast<double>(n);
  return out;
}

}  // namespace oracle
