#include "sstgnn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sstgnn/errors.hpp"

namespace sstgnn::ops {

Tensor leaky_relu(const Tensor& x, double slope) {
  Tensor y = x;
  for (double& v : y.data()) v = v > 0.0 ? v : slope * v;
  return y;
}

Tensor masked_softmax(const Tensor& scores, const BoolMatrix& support, bool* isolated) {
  if (support.rows != scores.rows() || support.cols != scores.cols()) {
    throw DimensionError("masked_softmax: support shape does not match scores");
  }
  Tensor out = Tensor::zeros(scores.rows(), scores.cols());
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < scores.cols(); ++j)
      if (support(i, j)) mx = std::max(mx, scores(i, j));
    if (mx == -std::numeric_limits<double>::infinity()) {
      if (isolated) *isolated = true;
      continue;
    }
    double z = 0.0;
    for (std::size_t j = 0; j < scores.cols(); ++j) {
      if (!support(i, j)) continue;
      const double e = std::exp(scores(i, j) - mx);
      out(i, j) = e;
      z += e;
    }
    for (std::size_t j = 0; j < scores.cols(); ++j) out(i, j) /= z;
  }
  return out;
}

Tensor softmax_rows(const Tensor& logits) {
  Tensor out = logits;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto row = out.row_span(i);
    const double mx = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double& v : row) {
      v = std::exp(v - mx);
      z += v;
    }
    for (double& v : row) v /= z;
  }
  return out;
}

double cross_entropy(const Tensor& logits, std::span<const int> labels) {
  if (logits.cols() != 2) throw DimensionError("cross_entropy: expected two logit columns");
  if (labels.size() != logits.rows()) throw DimensionError("cross_entropy: label count");
  if (labels.empty()) throw InputError("cross_entropy: empty batch");
  double total = 0.0;
  for (std::size_t b = 0; b < labels.size(); ++b) {
    const int y = labels[b];
    if (y != 0 && y != 1) throw InputError("cross_entropy: label " + std::to_string(y) + " not in {0,1}");
    const double l0 = logits(b, 0), l1 = logits(b, 1);
    const double mx = std::max(l0, l1);
    const double lse = mx + std::log(std::exp(l0 - mx) + std::exp(l1 - mx));
    total += lse - logits(b, static_cast<std::size_t>(y));
  }
  return total / static_cast<double>(labels.size());
}

}  // namespace sstgnn::ops
