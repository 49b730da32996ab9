#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace sstgnn {

/// Dense row-major float64 array. Almost everything in the library is a
/// matrix, so the 2-D accessors are the common path; higher ranks are only
/// carried through serialization.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  static Tensor zeros(std::size_t rows, std::size_t cols) { return Tensor({rows, cols}); }
  static Tensor filled(std::size_t rows, std::size_t cols, double v) { return Tensor({rows, cols}, v); }
  static Tensor identity(std::size_t n);
  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor column(std::span<const double> values);
  static Tensor row(std::span<const double> values);

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  // 2-D view. A rank-1 tensor reads as a single row.
  std::size_t rows() const noexcept;
  std::size_t cols() const noexcept;

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols() + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols() + j]; }
  double& operator[](std::size_t k) noexcept { return data_[k]; }
  double operator[](std::size_t k) const noexcept { return data_[k]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> row_span(std::size_t i) noexcept { return {data_.data() + i * cols(), cols()}; }
  std::span<const double> row_span(std::size_t i) const noexcept {
    return {data_.data() + i * cols(), cols()};
  }

  bool same_shape(const Tensor& other) const noexcept { return shape_ == other.shape_; }
  bool all_finite() const noexcept;
  Tensor transposed() const;
  void fill(double v) noexcept;

  bool operator==(const Tensor&) const = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

std::string shape_string(const std::vector<std::size_t>& shape);

// Throws DimensionError unless a and b have identical shapes.
void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

double max_abs_diff(const Tensor& a, const Tensor& b);
double frobenius_norm(const Tensor& a);

/// Row-major boolean matrix used for attention support.
struct BoolMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<unsigned char> bits;

  BoolMatrix() = default;
  BoolMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), bits(r * c, 0) {}

  bool operator()(std::size_t i, std::size_t j) const noexcept { return bits[i * cols + j] != 0; }
  void set(std::size_t i, std::size_t j, bool v = true) noexcept { bits[i * cols + j] = v ? 1 : 0; }
};

}  // namespace sstgnn
