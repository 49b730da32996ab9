#include "sstgnn/autodiff.hpp"

#include <array>
#include <string>

#include "sstgnn/errors.hpp"
#include "sstgnn/kernels.hpp"

namespace sstgnn::ad {

const Tensor& Var::value() const { return tape_->value(id_); }
const Tensor& Var::grad() const { return tape_->grad(id_); }
bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Var Tape::variable(Tensor value, bool requires_grad) {
  nodes_.push_back(Node{std::move(value), Tensor{}, requires_grad, {}});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::span<const Var> parents, Backward backward) {
  bool needs = false;
  for (const Var& p : parents) {
    if (&p.tape() != this) throw InputError("autodiff: operands live on different tapes");
    needs = needs || nodes_[p.id()].requires_grad;
  }
  nodes_.push_back(Node{std::move(value), Tensor{}, needs, needs ? std::move(backward) : Backward{}});
  return Var(this, nodes_.size() - 1);
}

const Tensor& Tape::grad(std::size_t id) const { return nodes_[id].grad; }

Tensor* Tape::grad_slot(std::size_t id) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return nullptr;
  if (n.grad.empty()) n.grad = Tensor(n.value.shape(), 0.0);
  return &n.grad;
}

void Tape::accumulate(std::size_t id, const Tensor& g) {
  Tensor* slot = grad_slot(id);
  if (!slot) return;
  require_same_shape(*slot, g, "gradient accumulation");
  auto dst = slot->data();
  auto src = g.data();
  for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
}

void Tape::backward(Var root) {
  if (root.value().size() != 1) throw DimensionError("backward: root must be a scalar");
  for (Node& n : nodes_) n.grad = Tensor{};
  Tensor* seed = grad_slot(root.id());
  if (!seed) return;
  (*seed)[0] = 1.0;
  for (std::size_t i = root.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.backward || n.grad.empty()) continue;
    const Tensor g = n.grad;
    n.backward(*this, g);
  }
}

// ---- ops ----------------------------------------------------------------

Var matmul(Var a, Var b) {
  Tensor out = kernels::matmul(a.value(), b.value());
  const std::array parents{a, b};
  return a.tape().record(std::move(out), parents, [a, b](Tape& t, const Tensor& g) {
    if (t.requires_grad(a.id())) t.accumulate(a.id(), kernels::matmul_nt(g, b.value()));
    if (t.requires_grad(b.id())) t.accumulate(b.id(), kernels::matmul_tn(a.value(), g));
  });
}

Var add(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += b.value()[k];
  const std::array parents{a, b};
  return a.tape().record(std::move(out), parents, [a, b](Tape& t, const Tensor& g) {
    t.accumulate(a.id(), g);
    t.accumulate(b.id(), g);
  });
}

Var add_row(Var a, Var row) {
  const Tensor& x = a.value();
  const Tensor& r = row.value();
  if (r.rows() != 1 || r.cols() != x.cols()) {
    throw DimensionError("add_row: bias " + shape_string(r.shape()) + " vs input " + shape_string(x.shape()));
  }
  Tensor out = x;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += r(0, j);
  const std::array parents{a, row};
  return a.tape().record(std::move(out), parents, [a, row](Tape& t, const Tensor& g) {
    t.accumulate(a.id(), g);
    if (Tensor* slot = t.grad_slot(row.id())) {
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) (*slot)(0, j) += g(i, j);
    }
  });
}

Var scale(Var a, double s) {
  Tensor out = a.value();
  for (double& v : out.data()) v *= s;
  const std::array parents{a};
  return a.tape().record(std::move(out), parents, [a, s](Tape& t, const Tensor& g) {
    Tensor ga = g;
    for (double& v : ga.data()) v *= s;
    t.accumulate(a.id(), ga);
  });
}

Var mul_const(Var a, const Tensor& c) {
  require_same_shape(a.value(), c, "mul_const");
  Tensor out = a.value();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] *= c[k];
  const std::array parents{a};
  return a.tape().record(std::move(out), parents, [a, c](Tape& t, const Tensor& g) {
    Tensor ga = g;
    for (std::size_t k = 0; k < ga.size(); ++k) ga[k] *= c[k];
    t.accumulate(a.id(), ga);
  });
}

Var concat_cols(Var a, Var b) {
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  if (x.rows() != y.rows()) throw DimensionError("concat_cols: row counts differ");
  const std::size_t ca = x.cols(), cb = y.cols();
  Tensor out = Tensor::zeros(x.rows(), ca + cb);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < ca; ++j) out(i, j) = x(i, j);
    for (std::size_t j = 0; j < cb; ++j) out(i, ca + j) = y(i, j);
  }
  const std::array parents{a, b};
  return a.tape().record(std::move(out), parents, [a, b, ca, cb](Tape& t, const Tensor& g) {
    if (Tensor* sa = t.grad_slot(a.id()))
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < ca; ++j) (*sa)(i, j) += g(i, j);
    if (Tensor* sb = t.grad_slot(b.id()))
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < cb; ++j) (*sb)(i, j) += g(i, ca + j);
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  const std::size_t cols = parts[0].value().cols();
  std::size_t rows = 0;
  for (const Var& p : parts) {
    if (p.value().cols() != cols) throw DimensionError("concat_rows: column counts differ");
    rows += p.value().rows();
  }
  Tensor out = Tensor::zeros(rows, cols);
  std::size_t r = 0;
  for (const Var& p : parts) {
    for (std::size_t i = 0; i < p.value().rows(); ++i)
      for (std::size_t j = 0; j < cols; ++j) out(r + i, j) = p.value()(i, j);
    r += p.value().rows();
  }
  std::vector<Var> keep(parts.begin(), parts.end());
  return parts[0].tape().record(std::move(out), parts, [keep](Tape& t, const Tensor& g) {
    std::size_t r0 = 0;
    for (const Var& p : keep) {
      const std::size_t n = p.value().rows();
      if (Tensor* s = t.grad_slot(p.id()))
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < g.cols(); ++j) (*s)(i, j) += g(r0 + i, j);
      r0 += n;
    }
  });
}

Var slice_rows(Var a, std::size_t begin, std::size_t end) {
  const Tensor& x = a.value();
  if (begin > end || end > x.rows()) throw DimensionError("slice_rows: range out of bounds");
  Tensor out = Tensor::zeros(end - begin, x.cols());
  for (std::size_t i = begin; i < end; ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) out(i - begin, j) = x(i, j);
  const std::array parents{a};
  return a.tape().record(std::move(out), parents, [a, begin](Tape& t, const Tensor& g) {
    if (Tensor* s = t.grad_slot(a.id()))
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) (*s)(begin + i, j) += g(i, j);
  });
}

Var leaky_relu(Var a, double slope) {
  Tensor out = ops::leaky_relu(a.value(), slope);
  const std::array parents{a};
  return a.tape().record(std::move(out), parents, [a, slope](Tape& t, const Tensor& g) {
    Tensor ga = g;
    const Tensor& x = a.value();
    for (std::size_t k = 0; k < ga.size(); ++k)
      if (!(x[k] > 0.0)) ga[k] *= slope;
    t.accumulate(a.id(), ga);
  });
}

Var masked_softmax(Var scores, const BoolMatrix& support) {
  bool isolated = false;
  Tensor out = ops::masked_softmax(scores.value(), support, &isolated);
  Tape& tape = scores.tape();
  if (isolated) tape.flag_isolated_rows();
  // The rule needs the output; it will occupy the next slot on the tape.
  const Var y(&tape, tape.size());
  const std::array parents{scores};
  return tape.record(std::move(out), parents, [scores, y](Tape& t, const Tensor& g) {
    const Tensor& s = y.value();
    Tensor gx = Tensor::zeros(s.rows(), s.cols());
    for (std::size_t i = 0; i < s.rows(); ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < s.cols(); ++j) dot += g(i, j) * s(i, j);
      for (std::size_t j = 0; j < s.cols(); ++j) gx(i, j) = s(i, j) * (g(i, j) - dot);
    }
    t.accumulate(scores.id(), gx);
  });
}

Var mean_rows(Var a) {
  const Tensor& x = a.value();
  if (x.rows() == 0) throw DimensionError("mean_rows: no rows");
  Tensor out = Tensor::zeros(1, x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) out(0, j) += x(i, j);
  const double inv = 1.0 / static_cast<double>(x.rows());
  for (double& v : out.data()) v *= inv;
  const std::array parents{a};
  return a.tape().record(std::move(out), parents, [a, inv](Tape& t, const Tensor& g) {
    if (Tensor* s = t.grad_slot(a.id()))
      for (std::size_t i = 0; i < s->rows(); ++i)
        for (std::size_t j = 0; j < s->cols(); ++j) (*s)(i, j) += g(0, j) * inv;
  });
}

Var sum(Var a) {
  double total = 0.0;
  for (double v : a.value().data()) total += v;
  const std::array parents{a};
  return a.tape().record(Tensor({1, 1}, total), parents, [a](Tape& t, const Tensor& g) {
    if (Tensor* s = t.grad_slot(a.id()))
      for (double& v : s->data()) v += g[0];
  });
}

Var diag_scale(Var gains, Var x) {
  const Tensor& d = gains.value();
  const Tensor& xv = x.value();
  if (d.cols() != 1 || d.rows() != xv.rows()) {
    throw DimensionError("diag_scale: gains " + shape_string(d.shape()) + " vs input " + shape_string(xv.shape()));
  }
  Tensor out = xv;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) *= d(i, 0);
  const std::array parents{gains, x};
  return gains.tape().record(std::move(out), parents, [gains, x](Tape& t, const Tensor& g) {
    const Tensor& dv = gains.value();
    const Tensor& xv2 = x.value();
    if (Tensor* sd = t.grad_slot(gains.id()))
      for (std::size_t i = 0; i < g.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < g.cols(); ++j) acc += g(i, j) * xv2(i, j);
        (*sd)(i, 0) += acc;
      }
    if (Tensor* sx = t.grad_slot(x.id()))
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) (*sx)(i, j) += dv(i, 0) * g(i, j);
  });
}

Var outer_sum(Var u, Var v) {
  const Tensor& a = u.value();
  const Tensor& b = v.value();
  if (a.cols() != 1 || b.cols() != 1) throw DimensionError("outer_sum: expected column vectors");
  Tensor out = Tensor::zeros(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) out(i, j) = a(i, 0) + b(j, 0);
  const std::array parents{u, v};
  return u.tape().record(std::move(out), parents, [u, v](Tape& t, const Tensor& g) {
    if (Tensor* su = t.grad_slot(u.id()))
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) (*su)(i, 0) += g(i, j);
    if (Tensor* sv = t.grad_slot(v.id()))
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) (*sv)(j, 0) += g(i, j);
  });
}

Var cross_entropy(Var logits, std::span<const int> labels) {
  const double loss = ops::cross_entropy(logits.value(), labels);
  std::vector<int> y(labels.begin(), labels.end());
  const std::array parents{logits};
  return logits.tape().record(Tensor({1, 1}, loss), parents, [logits, y](Tape& t, const Tensor& g) {
    Tensor p = ops::softmax_rows(logits.value());
    const double inv_b = 1.0 / static_cast<double>(y.size());
    for (std::size_t b = 0; b < y.size(); ++b) {
      p(b, static_cast<std::size_t>(y[b])) -= 1.0;
      p(b, 0) *= inv_b * g[0];
      p(b, 1) *= inv_b * g[0];
    }
    t.accumulate(logits.id(), p);
  });
}

Var affine(Var x, const Affine& layer) { return add_row(matmul(x, layer.weight), layer.bias); }

}  // namespace sstgnn::ad
