#include "sstgnn/differential.hpp"

#include <algorithm>
#include <cmath>

#include "sstgnn/errors.hpp"
#include "sstgnn/kernels.hpp"

namespace sstgnn {

Tensor npr_reference(const Tensor& grid, std::size_t tile) {
  if (tile == 0) throw InputError("npr_reference: tile size must be >= 1");
  const std::size_t h = grid.rows() / tile * tile, w = grid.cols() / tile * tile;
  const std::size_t oy = (grid.rows() - h) / 2, ox = (grid.cols() - w) / 2;
  Tensor out = Tensor::zeros(h, w);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const double anchor = grid(oy + y / tile * tile, ox + x / tile * tile);
      out(y, x) = grid(oy + y, ox + x) - anchor;
    }
  return out;
}

Tensor npr_patch_vectors(const PatchTensor& p, std::size_t tile) {
  if (tile == 0) throw InputError("npr_patch_vectors: tile size must be >= 1");
  const std::size_t l = p.patch, ch = p.channels, full = l / tile * tile;
  Tensor out = Tensor::zeros(p.vectors.rows(), p.vectors.cols());
  for (std::size_t k = 0; k < out.rows(); ++k) {
    const auto src = p.vectors.row_span(k);
    auto dst = out.row_span(k);
    for (std::size_t dy = 0; dy < full; ++dy)
      for (std::size_t dx = 0; dx < full; ++dx)
        for (std::size_t c = 0; c < ch; ++c) {
          const std::size_t ay = dy / tile * tile, ax = dx / tile * tile;
          dst[(dy * l + dx) * ch + c] = src[(dy * l + dx) * ch + c] - src[(ay * l + ax) * ch + c];
        }
  }
  return out;
}

Tensor build_spatial_negative(const NodeIndex& index, std::size_t tile) {
  if (tile == 0) throw InputError("build_spatial_negative: tile size must be >= 1");
  const std::size_t m = index.nodes();
  Tensor a = Tensor::zeros(m, m);
  const std::size_t th = index.grid_h / tile, tw = index.grid_w / tile;
  std::vector<std::size_t> members;
  for (std::size_t t = 0; t < index.frames; ++t)
    for (std::size_t bi = 0; bi < th; ++bi)
      for (std::size_t bj = 0; bj < tw; ++bj) {
        members.clear();
        for (std::size_t di = 0; di < tile; ++di)
          for (std::size_t dj = 0; dj < tile; ++dj) members.push_back(index.flat(t, bi * tile + di, bj * tile + dj));
        const std::size_t anchor = members.front();
        for (std::size_t u : members) {
          a(anchor, u) = -1.0;
          a(u, anchor) = -1.0;
        }
        for (std::size_t u : members) a(u, u) = 1.0;
      }
  return a;
}

Tensor sgc_aggregate(const Tensor& x, const Tensor& negative_spatial) {
  return kernels::matmul(negative_spatial, x);
}

NprEquivalence npr_equivalence_check(const Tensor& image, std::size_t tile) {
  if (tile == 0) throw InputError("npr_equivalence_check: tile size must be >= 1");
  const std::size_t h = image.rows(), w = image.cols();
  const NodeIndex index{1, h, w};
  Tensor x = Tensor::zeros(h * w, 1);
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j) x(index.flat(0, i, j), 0) = image(i, j);

  const Tensor aggregated = sgc_aggregate(x, build_spatial_negative(index, tile));
  const Tensor npr = npr_reference(image, tile);  // no crop when divisible

  NprEquivalence r;
  const std::size_t ch = h / tile * tile, cw = w / tile * tile;
  for (std::size_t i = 0; i < ch; ++i)
    for (std::size_t j = 0; j < cw; ++j) {
      const double graph_value = aggregated(index.flat(0, i, j), 0);
      const bool is_anchor = (i % tile == 0) && (j % tile == 0);
      if (!is_anchor) {
        ++r.non_anchor_nodes;
        r.max_non_anchor_deviation = std::max(r.max_non_anchor_deviation, std::abs(graph_value - npr(i, j)));
        continue;
      }
      ++r.anchor_nodes;
      double others = 0.0;
      for (std::size_t di = 0; di < tile; ++di)
        for (std::size_t dj = 0; dj < tile; ++dj)
          if (di || dj) others += image(i + di, j + dj);
      r.anchor_convention_deviation =
          std::max(r.anchor_convention_deviation, std::abs(graph_value - (image(i, j) - others)));
      r.anchor_vs_npr = std::max(r.anchor_vs_npr, std::abs(graph_value - npr(i, j)));
    }
  r.exact = r.max_non_anchor_deviation == 0.0;
  return r;
}

Tensor next_frame_selector(const NodeIndex& index) {
  const std::size_t m = index.nodes(), n = index.per_frame();
  Tensor p = Tensor::zeros(m, m);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t t = k / n;
    p(k, t + 1 < index.frames ? k + n : k) = 1.0;
  }
  return p;
}

ad::Var temporal_concat(ad::Var x, const NodeIndex& index, const ad::Affine& mlp) {
  if (x.value().rows() != index.nodes()) throw DimensionError("temporal_concat: rows != node count");
  ad::Var next = ad::matmul(x.tape().constant(next_frame_selector(index)), x);
  return ad::affine(ad::concat_cols(x, next), mlp);
}

Tensor add_temporal_negative(const Tensor& temporal, const NodeIndex& index) {
  if (temporal.rows() != index.nodes() || temporal.cols() != index.nodes()) {
    throw DimensionError("add_temporal_negative: adjacency shape");
  }
  Tensor out = temporal;
  const std::size_t n = index.per_frame();
  for (std::size_t t = 0; t + 1 < index.frames; ++t)
    for (std::size_t v = 0; v < n; ++v) {
      out(t * n + v, (t + 1) * n + v) = -1.0;
      out((t + 1) * n + v, t * n + v) = -1.0;
    }
  return out;
}

}  // namespace sstgnn
