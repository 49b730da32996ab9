#pragma once

#include "sstgnn/tensor.hpp"

// Dense kernels. The default entry points are OpenMP-parallel over output
// rows; the serial namespace holds the straightforward loops they are tested
// and benchmarked against. Both accumulate over the inner index in the same
// order, so results agree bit for bit.
namespace sstgnn::kernels {

Tensor matmul(const Tensor& a, const Tensor& b);     // a * b
Tensor matmul_tn(const Tensor& a, const Tensor& b);  // a^T * b
Tensor matmul_nt(const Tensor& a, const Tensor& b);  // a * b^T

// c += a * b, in place.
void matmul_accumulate(const Tensor& a, const Tensor& b, Tensor& c);

namespace serial {
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor matmul_tn(const Tensor& a, const Tensor& b);
Tensor matmul_nt(const Tensor& a, const Tensor& b);
}  // namespace serial

// Threads used by the parallel kernels; 0 restores the OpenMP default.
void set_num_threads(int n);
int num_threads();

}  // namespace sstgnn::kernels
