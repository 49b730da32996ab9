#include "sstgnn/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sstgnn/errors.hpp"

namespace sstgnn {

namespace {

void require_symmetric(const Tensor& a) {
  if (a.rank() != 2 || a.rows() != a.cols()) throw InputError("eigh: matrix must be square");
  double scale = 0.0, asym = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      scale = std::max(scale, std::abs(a(i, j)));
      asym = std::max(asym, std::abs(a(i, j) - a(j, i)));
    }
  if (!a.all_finite()) throw NumericError("eigh: matrix has non-finite entries");
  if (asym > 1e-10 * std::max(scale, 1.0)) {
    throw InputError("eigh: matrix is not symmetric (max asymmetry " + std::to_string(asym) + ")");
  }
}

constexpr int kMaxQlIterations = 60;

// Householder reduction to tridiagonal form. On return v holds the
// orthogonal transform (row-major, v(k, j)), d the diagonal and e the
// subdiagonal in e[1..n-1].
void tridiagonalize(Tensor& v, std::vector<double>& d, std::vector<double>& e) {
  const std::size_t n = v.rows();
  for (std::size_t j = 0; j < n; ++j) d[j] = v(n - 1, j);

  for (std::size_t i = n - 1; i > 0; --i) {
    double scale = 0.0, h = 0.0;
    for (std::size_t k = 0; k < i; ++k) scale += std::abs(d[k]);
    if (scale == 0.0) {
      e[i] = d[i - 1];
      for (std::size_t j = 0; j < i; ++j) {
        d[j] = v(i - 1, j);
        v(i, j) = 0.0;
        v(j, i) = 0.0;
      }
    } else {
      for (std::size_t k = 0; k < i; ++k) {
        d[k] /= scale;
        h += d[k] * d[k];
      }
      double f = d[i - 1];
      double g = std::sqrt(h);
      if (f > 0) g = -g;
      e[i] = scale * g;
      h -= f * g;
      d[i - 1] = f - g;
      for (std::size_t j = 0; j < i; ++j) v(j, i) = d[j];

      // e = A u over the active leading block; A is held in the lower
      // triangle v(k, j), k >= j.
      const long long active = static_cast<long long>(i);
#pragma omp parallel for schedule(static) if (i > 256)
      for (long long jj = 0; jj < active; ++jj) {
        const std::size_t j = static_cast<std::size_t>(jj);
        double acc = 0.0;
        for (std::size_t k = 0; k < j; ++k) acc += v(j, k) * d[k];
        for (std::size_t k = j; k < i; ++k) acc += v(k, j) * d[k];
        e[j] = acc;
      }

      f = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        e[j] /= h;
        f += e[j] * d[j];
      }
      const double hh = f / (h + h);
      for (std::size_t j = 0; j < i; ++j) e[j] -= hh * d[j];

      // Rank-2 update of the lower triangle, one column per iteration.
#pragma omp parallel for schedule(dynamic, 16) if (i > 256)
      for (long long jj = 0; jj < active; ++jj) {
        const std::size_t j = static_cast<std::size_t>(jj);
        const double fj = d[j], gj = e[j];
        for (std::size_t k = j; k < i; ++k) v(k, j) -= (fj * e[k] + gj * d[k]);
      }
      for (std::size_t j = 0; j < i; ++j) {
        d[j] = v(i - 1, j);
        v(i, j) = 0.0;
      }
    }
    d[i] = h;
  }

  // Accumulate the transformations.
  for (std::size_t i = 0; i + 1 < n; ++i) {
    v(n - 1, i) = v(i, i);
    v(i, i) = 1.0;
    const double h = d[i + 1];
    if (h != 0.0) {
      for (std::size_t k = 0; k <= i; ++k) d[k] = v(k, i + 1) / h;
      const long long cols = static_cast<long long>(i + 1);
#pragma omp parallel for schedule(static) if (i > 256)
      for (long long jj = 0; jj < cols; ++jj) {
        const std::size_t j = static_cast<std::size_t>(jj);
        double g = 0.0;
        for (std::size_t k = 0; k <= i; ++k) g += v(k, i + 1) * v(k, j);
        for (std::size_t k = 0; k <= i; ++k) v(k, j) -= g * d[k];
      }
    }
    for (std::size_t k = 0; k <= i; ++k) v(k, i + 1) = 0.0;
  }
  for (std::size_t j = 0; j < n; ++j) {
    d[j] = v(n - 1, j);
    v(n - 1, j) = 0.0;
  }
  v(n - 1, n - 1) = 1.0;
  e[0] = 0.0;
}

// Implicit QL on the tridiagonal (d, e). Rotations are applied to the rows
// of `vt`, the transpose of the eigenvector matrix, so each touches two
// contiguous rows.
void ql_implicit(Tensor& vt, std::vector<double>& d, std::vector<double>& e) {
  const std::size_t n = d.size();
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;

  double f = 0.0, tst1 = 0.0;
  const double eps = std::ldexp(1.0, -52);
  for (std::size_t l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    std::size_t m = l;
    while (m < n) {
      if (std::abs(e[m]) <= eps * tst1) break;
      ++m;
    }
    if (m == n) m = n - 1;
    if (m > l) {
      int iter = 0;
      do {
        if (++iter > kMaxQlIterations) {
          throw NumericError("eigh: QL iteration did not converge for eigenvalue " + std::to_string(l) + " after " +
                             std::to_string(kMaxQlIterations) + " iterations (|e| = " +
                             std::to_string(std::abs(e[l])) + ", tolerance " + std::to_string(eps * tst1) + ")");
        }
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
        f += h;

        p = d[m];
        double c = 1.0, c2 = c, c3 = c;
        const double el1 = e[l + 1];
        double s = 0.0, s2 = 0.0;
        for (std::size_t ii = m; ii-- > l;) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[ii];
          h = c * p;
          r = std::hypot(p, e[ii]);
          e[ii + 1] = s * r;
          s = e[ii] / r;
          c = p / r;
          p = c * d[ii] - s * g;
          d[ii + 1] = h + s * (c * g + s * d[ii]);
          auto lo = vt.row_span(ii);
          auto hi = vt.row_span(ii + 1);
          for (std::size_t k = 0; k < n; ++k) {
            const double t = hi[k];
            hi[k] = s * lo[k] + c * t;
            lo[k] = c * lo[k] - s * t;
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > eps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }
}

}  // namespace

void canonicalize(SymmetricEigen& eig) {
  const std::size_t n = eig.values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return eig.values[a] < eig.values[b]; });
  SymmetricEigen out;
  out.values.resize(n);
  out.vectors = Tensor::zeros(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    const std::size_t src = order[c];
    out.values[c] = eig.values[src];
    double sign = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double x = eig.vectors(k, src);
      if (std::abs(x) > 1e-10) {
        sign = x > 0 ? 1.0 : -1.0;
        break;
      }
    }
    for (std::size_t k = 0; k < n; ++k) out.vectors(k, c) = sign * eig.vectors(k, src);
  }
  eig = std::move(out);
}

SymmetricEigen eigh(const Tensor& a) {
  require_symmetric(a);
  const std::size_t n = a.rows();
  SymmetricEigen out;
  if (n == 0) {
    out.vectors = Tensor::zeros(0, 0);
    return out;
  }
  Tensor v = a;
  std::vector<double> d(n), e(n);
  tridiagonalize(v, d, e);
  Tensor vt = v.transposed();
  ql_implicit(vt, d, e);
  out.values = std::move(d);
  out.vectors = vt.transposed();
  canonicalize(out);
  return out;
}

namespace serial {

SymmetricEigen eigh_jacobi(const Tensor& a_in) {
  require_symmetric(a_in);
  const std::size_t n = a_in.rows();
  Tensor a = a_in;
  Tensor v = Tensor::identity(n);
  double total = 0.0;
  for (double x : a.data()) total += x * x;
  const double target = 1e-30 * std::max(total, 1e-300);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += 2.0 * a(p, q) * a(p, q);
    if (off <= target) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
  }
  SymmetricEigen out;
  out.values.resize(n);
  for (std::size_t k = 0; k < n; ++k) out.values[k] = a(k, k);
  out.vectors = std::move(v);
  canonicalize(out);
  return out;
}

}  // namespace serial

}  // namespace sstgnn
