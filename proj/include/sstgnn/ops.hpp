#pragma once

#include <cstddef>
#include <span>

#include "sstgnn/tensor.hpp"

// Value-only versions of the nonlinear ops. The autodiff layer calls these
// for its forward pass; other modules use them directly when no gradient is
// needed.
namespace sstgnn::ops {

inline constexpr double kLeakySlope = 0.2;

Tensor leaky_relu(const Tensor& x, double slope = kLeakySlope);

// Row-wise softmax restricted to `support`. Unsupported entries are exactly 0.
// A row with empty support becomes all zero and `isolated` (if given) is set.
Tensor masked_softmax(const Tensor& scores, const BoolMatrix& support, bool* isolated = nullptr);

// Row-wise softmax over all entries.
Tensor softmax_rows(const Tensor& logits);

// Mean over rows of -log softmax(logits)[label]. Labels must be 0 or 1 and
// logits must have two columns.
double cross_entropy(const Tensor& logits, std::span<const int> labels);

}  // namespace sstgnn::ops
