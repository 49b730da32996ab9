#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sstgnn/autodiff.hpp"
#include "sstgnn/rng.hpp"
#include "sstgnn/tensor.hpp"

namespace sstgnn {

struct NamedTensor {
  std::string name;
  Tensor value;
};

/// Ordered collection of named parameter tensors. Order is insertion order and
/// is what checkpoints, optimizers and gradient checks iterate over.
class ParamSet {
 public:
  Tensor& add(std::string name, Tensor value);
  Tensor& at(std::string_view name);
  const Tensor& at(std::string_view name) const;
  bool contains(std::string_view name) const;

  std::vector<NamedTensor>& entries() noexcept { return entries_; }
  const std::vector<NamedTensor>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t scalar_count() const noexcept;

  // Same names and shapes, all values zero.
  ParamSet zeros_like() const;
  // this += other (names and shapes must match).
  void accumulate(const ParamSet& other);
  void scale(double s);

  bool operator==(const ParamSet& other) const;

 private:
  std::vector<NamedTensor> entries_;
};

/// Tape leaves for every entry of a ParamSet, in the same order.
struct BoundParams {
  std::vector<ad::Var> vars;
  const ParamSet* source = nullptr;
  ad::Var operator[](std::string_view name) const;
};

BoundParams bind(ad::Tape& tape, const ParamSet& params, bool requires_grad = true);
// Gradients of the bound leaves after tape.backward(); untouched leaves read as zero.
ParamSet collect_gradients(const BoundParams& bound);

// Glorot-uniform fan_in x fan_out matrix drawn from `init`.
Tensor xavier_uniform(std::size_t fan_in, std::size_t fan_out, const rng::Stream& init);

struct AdamOptions {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamOptions options;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::uint64_t t = 0;

  AdamState() = default;
  AdamState(const ParamSet& params, AdamOptions opts);
};

// One bias-corrected Adam update. Throws NumericError, leaving params and
// state untouched, if any gradient is non-finite.
void adam_step(ParamSet& params, const ParamSet& grads, AdamState& state);

// Central-difference check of reverse-mode gradients.
using ScalarFunction = std::function<ad::Var(ad::Tape&, const BoundParams&)>;

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::vector<std::pair<std::string, double>> per_param;  // max error per entry
  std::size_t coordinates = 0;
};

// Max over coordinates of |a - n| / max(|a|, |n|, 1e-12), a = reverse mode,
// n = (f(x+h) - f(x-h)) / 2h.
GradCheckReport finite_diff_check(const ScalarFunction& f, const ParamSet& params, double h = 1e-6);

}  // namespace sstgnn
