#include "sstgnn/optim.hpp"

#include <algorithm>
#include <cmath>

#include "sstgnn/errors.hpp"

namespace sstgnn {

Tensor& ParamSet::add(std::string name, Tensor value) {
  if (contains(name)) throw ConfigError("duplicate parameter name " + name);
  entries_.push_back({std::move(name), std::move(value)});
  return entries_.back().value;
}

Tensor& ParamSet::at(std::string_view name) {
  for (auto& e : entries_)
    if (e.name == name) return e.value;
  throw ConfigError("unknown parameter " + std::string(name));
}

const Tensor& ParamSet::at(std::string_view name) const {
  for (const auto& e : entries_)
    if (e.name == name) return e.value;
  throw ConfigError("unknown parameter " + std::string(name));
}

bool ParamSet::contains(std::string_view name) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const NamedTensor& e) { return e.name == name; });
}

std::size_t ParamSet::scalar_count() const noexcept {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.size();
  return n;
}

ParamSet ParamSet::zeros_like() const {
  ParamSet out;
  for (const auto& e : entries_) out.add(e.name, Tensor(e.value.shape(), 0.0));
  return out;
}

void ParamSet::accumulate(const ParamSet& other) {
  if (other.size() != size()) throw DimensionError("ParamSet::accumulate: entry count");
  for (std::size_t k = 0; k < size(); ++k) {
    auto& dst = entries_[k];
    const auto& src = other.entries_[k];
    if (dst.name != src.name) throw DimensionError("ParamSet::accumulate: name mismatch " + dst.name);
    require_same_shape(dst.value, src.value, dst.name.c_str());
    for (std::size_t i = 0; i < dst.value.size(); ++i) dst.value[i] += src.value[i];
  }
}

void ParamSet::scale(double s) {
  for (auto& e : entries_)
    for (double& v : e.value.data()) v *= s;
}

bool ParamSet::operator==(const ParamSet& other) const {
  if (size() != other.size()) return false;
  for (std::size_t k = 0; k < size(); ++k)
    if (entries_[k].name != other.entries_[k].name || !(entries_[k].value == other.entries_[k].value))
      return false;
  return true;
}

ad::Var BoundParams::operator[](std::string_view name) const {
  const auto& e = source->entries();
  for (std::size_t k = 0; k < e.size(); ++k)
    if (e[k].name == name) return vars[k];
  throw ConfigError("unbound parameter " + std::string(name));
}

BoundParams bind(ad::Tape& tape, const ParamSet& params, bool requires_grad) {
  BoundParams b;
  b.source = &params;
  b.vars.reserve(params.size());
  for (const auto& e : params.entries()) b.vars.push_back(tape.variable(e.value, requires_grad));
  return b;
}

ParamSet collect_gradients(const BoundParams& bound) {
  ParamSet out = bound.source->zeros_like();
  for (std::size_t k = 0; k < bound.vars.size(); ++k) {
    const Tensor& g = bound.vars[k].grad();
    if (!g.empty()) out.entries()[k].value = g;
  }
  return out;
}

Tensor xavier_uniform(std::size_t fan_in, std::size_t fan_out, const rng::Stream& init) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor w = Tensor::zeros(fan_in, fan_out);
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = init.uniform(k, -limit, limit);
  return w;
}

AdamState::AdamState(const ParamSet& params, AdamOptions opts) : options(opts) {
  for (const auto& e : params.entries()) {
    m.emplace_back(e.value.shape(), 0.0);
    v.emplace_back(e.value.shape(), 0.0);
  }
}

void adam_step(ParamSet& params, const ParamSet& grads, AdamState& state) {
  if (grads.size() != params.size() || state.m.size() != params.size()) {
    throw DimensionError("adam_step: parameter, gradient and state counts differ");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto& g = grads.entries()[k].value;
    require_same_shape(params.entries()[k].value, g, "adam_step");
    require_same_shape(state.m[k], g, "adam_step state");
    if (!g.all_finite()) throw NumericError("adam_step: non-finite gradient in " + grads.entries()[k].name);
  }
  const auto& o = state.options;
  state.t += 1;
  const double bc1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.t));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto p = params.entries()[k].value.data();
    auto g = grads.entries()[k].value.data();
    auto m = state.m[k].data();
    auto v = state.v[k].data();
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = o.beta1 * m[i] + (1.0 - o.beta1) * g[i];
      v[i] = o.beta2 * v[i] + (1.0 - o.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= o.lr * mhat / (std::sqrt(vhat) + o.eps);
    }
  }
}

namespace {

double evaluate(const ScalarFunction& f, const ParamSet& params) {
  ad::Tape tape;
  const BoundParams bound = bind(tape, params, false);
  const double v = f(tape, bound).value()[0];
  if (!std::isfinite(v)) throw NumericError("finite_diff_check: function returned a non-finite value");
  return v;
}

}  // namespace

GradCheckReport finite_diff_check(const ScalarFunction& f, const ParamSet& params, double h) {
  if (!(h > 0.0)) throw InputError("finite_diff_check: step must be positive");
  ParamSet analytic;
  {
    ad::Tape tape;
    const BoundParams bound = bind(tape, params, true);
    ad::Var out = f(tape, bound);
    if (!std::isfinite(out.value()[0])) throw NumericError("finite_diff_check: non-finite function value");
    tape.backward(out);
    analytic = collect_gradients(bound);
  }

  GradCheckReport report;
  ParamSet probe = params;
  for (std::size_t k = 0; k < probe.size(); ++k) {
    auto& entry = probe.entries()[k];
    double entry_max = 0.0;
    for (std::size_t i = 0; i < entry.value.size(); ++i) {
      const double x0 = entry.value[i];
      entry.value[i] = x0 + h;
      const double fp = evaluate(f, probe);
      entry.value[i] = x0 - h;
      const double fm = evaluate(f, probe);
      entry.value[i] = x0;
      const double numeric = (fp - fm) / (2.0 * h);
      const double a = analytic.entries()[k].value[i];
      const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-12});
      ++report.coordinates;
      entry_max = std::max(entry_max, err);
      if (report.worst_param.empty() || err > report.max_rel_error) {
        report.max_rel_error = err;
        report.worst_param = entry.name;
        report.worst_index = i;
        report.worst_analytic = a;
        report.worst_numeric = numeric;
      }
    }
    report.per_param.emplace_back(entry.name, entry_max);
  }
  return report;
}

}  // namespace sstgnn
