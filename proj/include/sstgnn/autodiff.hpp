#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "sstgnn/ops.hpp"
#include "sstgnn/tensor.hpp"

namespace sstgnn::ad {

class Tape;

/// Handle to a node on a tape. Cheap to copy; only valid while its tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  const Tensor& value() const;
  const Tensor& grad() const;
  bool requires_grad() const;
  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Reverse-mode tape. Nodes are appended in evaluation order, so walking the
/// vector backwards from the root is a valid topological order and visits
/// each node once. One tape per forward pass; tapes are not shared between
/// threads.
class Tape {
 public:
  using Backward = std::function<void(Tape&, const Tensor& out_grad)>;

  Var variable(Tensor value, bool requires_grad = true);
  Var constant(Tensor value) { return variable(std::move(value), false); }

  // Appends an op result. `backward` runs only if some parent needs a gradient.
  Var record(Tensor value, std::span<const Var> parents, Backward backward);

  // Seeds d(root)/d(root) = 1; root must hold a single element.
  void backward(Var root);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  const Tensor& grad(std::size_t id) const;
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

  // Adds `g` into the gradient of node `id` if that node tracks gradients.
  void accumulate(std::size_t id, const Tensor& g);
  // Same, but lets the caller write in place.
  Tensor* grad_slot(std::size_t id);

  std::size_t size() const noexcept { return nodes_.size(); }
  void clear() noexcept { nodes_.clear(); isolated_rows_ = false; }

  // Set when a masked softmax met a row with empty support.
  bool isolated_rows() const noexcept { return isolated_rows_; }
  void flag_isolated_rows() noexcept { isolated_rows_ = true; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    Backward backward;
  };
  std::vector<Node> nodes_;
  bool isolated_rows_ = false;
};

// ---- op set -------------------------------------------------------------

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var add_row(Var a, Var row);                 // broadcast a 1xn row over every row of a
Var scale(Var a, double s);
Var mul_const(Var a, const Tensor& c);       // elementwise product with a constant
Var concat_cols(Var a, Var b);
Var concat_rows(std::span<const Var> parts);
Var slice_rows(Var a, std::size_t begin, std::size_t end);
Var leaky_relu(Var a, double slope = ops::kLeakySlope);
Var masked_softmax(Var scores, const BoolMatrix& support);
Var mean_rows(Var a);                        // -> 1xn
Var sum(Var a);                              // -> 1x1
Var diag_scale(Var gains, Var x);            // diag(gains) * x, gains is Mx1
Var outer_sum(Var u, Var v);                 // out(i,j) = u(i) + v(j), u,v are column vectors
Var cross_entropy(Var logits, std::span<const int> labels);

/// Dense affine layer applied row-wise: x * weight + bias.
struct Affine {
  Var weight;  // in x out
  Var bias;    // 1 x out
};
Var affine(Var x, const Affine& layer);

}  // namespace sstgnn::ad
