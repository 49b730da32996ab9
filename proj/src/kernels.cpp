#include "sstgnn/kernels.hpp"

#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sstgnn/errors.hpp"

namespace sstgnn::kernels {

namespace {

void check_inner(std::size_t lhs, std::size_t rhs, const char* op, const Tensor& a, const Tensor& b) {
  if (lhs != rhs) {
    throw DimensionError(std::string(op) + ": inner dimensions disagree, " + shape_string(a.shape()) +
                         " vs " + shape_string(b.shape()));
  }
}

// Below this many multiply-adds the fork/join overhead dominates.
constexpr std::size_t kParallelWork = 1u << 15;

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  Tensor c = Tensor::zeros(a.rows(), b.cols());
  matmul_accumulate(a, b, c);
  return c;
}

void matmul_accumulate(const Tensor& a, const Tensor& b, Tensor& c) {
  check_inner(a.cols(), b.rows(), "matmul", a, b);
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (c.rows() != m || c.cols() != n) throw DimensionError("matmul_accumulate: output shape");
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* pc = c.data().data();
  const long long rows = static_cast<long long>(m);
#pragma omp parallel for schedule(static) if (m * k * n > kParallelWork)
  for (long long i = 0; i < rows; ++i) {
    double* ci = pc + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = pa[i * k + p];
      if (aip == 0.0) continue;
      const double* bp = pb + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  check_inner(a.rows(), b.rows(), "matmul_tn", a, b);
  const std::size_t m = a.cols(), k = a.rows(), n = b.cols();
  Tensor c = Tensor::zeros(m, n);
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* pc = c.data().data();
  const long long rows = static_cast<long long>(m);
#pragma omp parallel for schedule(static) if (m * k * n > kParallelWork)
  for (long long i = 0; i < rows; ++i) {
    double* ci = pc + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double api = pa[p * m + i];
      if (api == 0.0) continue;
      const double* bp = pb + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += api * bp[j];
    }
  }
  return c;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  check_inner(a.cols(), b.cols(), "matmul_nt", a, b);
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  Tensor c = Tensor::zeros(m, n);
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* pc = c.data().data();
  const long long rows = static_cast<long long>(m);
#pragma omp parallel for schedule(static) if (m * k * n > kParallelWork)
  for (long long i = 0; i < rows; ++i) {
    const double* ai = pa + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const double* bj = pb + j * k;
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += ai[p] * bj[p];
      pc[i * n + j] = s;
    }
  }
  return c;
}

namespace serial {

Tensor matmul(const Tensor& a, const Tensor& b) {
  check_inner(a.cols(), b.rows(), "matmul", a, b);
  Tensor c = Tensor::zeros(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < a.cols(); ++p) s += a(i, p) * b(p, j);
      c(i, j) = s;
    }
  return c;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  check_inner(a.rows(), b.rows(), "matmul_tn", a, b);
  Tensor c = Tensor::zeros(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.cols(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < a.rows(); ++p) s += a(p, i) * b(p, j);
      c(i, j) = s;
    }
  return c;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  check_inner(a.cols(), b.cols(), "matmul_nt", a, b);
  Tensor c = Tensor::zeros(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < a.cols(); ++p) s += a(i, p) * b(j, p);
      c(i, j) = s;
    }
  return c;
}

}  // namespace serial

void set_num_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
  else omp_set_num_threads(omp_get_num_procs());
#else
  (void)n;
#endif
}

int num_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace sstgnn::kernels
