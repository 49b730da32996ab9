#pragma once

#include <vector>

#include "sstgnn/tensor.hpp"

namespace sstgnn {

/// Eigenpairs of a real symmetric matrix: values ascending, vectors as the
/// columns of an orthonormal matrix. Each vector is sign-normalized so that
/// its first component with magnitude above 1e-10 is positive.
struct SymmetricEigen {
  std::vector<double> values;
  Tensor vectors;
};

// Householder tridiagonalization followed by implicit QL. The reduction's
// matrix-vector and rank-2 update loops run under OpenMP. Throws
// NumericError (with iteration diagnostics) if QL fails to converge and
// InputError if `a` is not square and symmetric.
SymmetricEigen eigh(const Tensor& a);

namespace serial {
// Cyclic Jacobi rotations. Slow but independent of the production path;
// kept as the reference the fast solver is tested against.
SymmetricEigen eigh_jacobi(const Tensor& a);
}  // namespace serial

// Sorts ascending and applies the sign convention in place.
void canonicalize(SymmetricEigen& e);

}  // namespace sstgnn
