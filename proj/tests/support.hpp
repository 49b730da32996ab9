#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "sstgnn/rng.hpp"
#include "sstgnn/tensor.hpp"

namespace testing {

inline sstgnn::Tensor random_matrix(std::size_t r, std::size_t c, std::uint64_t seed, double lo = -1.0,
                                    double hi = 1.0) {
  const sstgnn::rng::Stream s(seed, "test_matrix");
  sstgnn::Tensor t = sstgnn::Tensor::zeros(r, c);
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = s.uniform(k, lo, hi);
  return t;
}

// Plain triple loop, written independently of the library kernels.
inline sstgnn::Tensor naive_matmul(const sstgnn::Tensor& a, const sstgnn::Tensor& b) {
  sstgnn::Tensor c = sstgnn::Tensor::zeros(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

inline double rel_diff(const sstgnn::Tensor& a, const sstgnn::Tensor& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    num += (a[k] - b[k]) * (a[k] - b[k]);
    den += b[k] * b[k];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

// Random symmetric nonnegative adjacency with zero diagonal and edge
// probability p.
inline sstgnn::Tensor random_adjacency(std::size_t n, std::uint64_t seed, double p = 0.5) {
  const sstgnn::rng::Stream s(seed, "test_adjacency");
  sstgnn::Tensor a = sstgnn::Tensor::zeros(n, n);
  std::uint64_t c = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j, c += 2)
      if (s.uniform(c) < p) a(i, j) = a(j, i) = s.uniform(c + 1, 0.1, 1.0);
  return a;
}

}  // namespace testing
