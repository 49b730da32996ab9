#include "sstgnn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "sstgnn/errors.hpp"
#include "sstgnn/kernels.hpp"

namespace sstgnn {

PatchTensor patchify(const FrameSequence& clip, std::size_t patch) {
  if (patch == 0) throw InputError("patchify: patch size must be >= 1");
  if (patch > std::min(clip.height, clip.width)) {
    throw InputError("patchify: patch size " + std::to_string(patch) + " exceeds frame " +
                     std::to_string(clip.height) + "x" + std::to_string(clip.width));
  }
  PatchTensor p;
  p.patch = patch;
  p.channels = clip.channels;
  p.index = {clip.frames, clip.height / patch, clip.width / patch};
  p.crop_y = (clip.height - p.index.grid_h * patch) / 2;
  p.crop_x = (clip.width - p.index.grid_w * patch) / 2;
  p.vectors = Tensor::zeros(p.index.nodes(), p.dim());
  for (std::size_t k = 0; k < p.index.nodes(); ++k) {
    const NodeCoord c = p.index.coord(k);
    std::size_t col = 0;
    for (std::size_t dy = 0; dy < patch; ++dy)
      for (std::size_t dx = 0; dx < patch; ++dx)
        for (std::size_t ch = 0; ch < clip.channels; ++ch)
          p.vectors(k, col++) = clip.at(c.t, p.crop_y + c.i * patch + dy, p.crop_x + c.j * patch + dx, ch);
  }
  return p;
}

FrameSequence unpatchify(const PatchTensor& p) {
  FrameSequence clip(p.index.frames, p.index.grid_h * p.patch, p.index.grid_w * p.patch, p.channels);
  for (std::size_t k = 0; k < p.index.nodes(); ++k) {
    const NodeCoord c = p.index.coord(k);
    std::size_t col = 0;
    for (std::size_t dy = 0; dy < p.patch; ++dy)
      for (std::size_t dx = 0; dx < p.patch; ++dx)
        for (std::size_t ch = 0; ch < p.channels; ++ch)
          clip.at(c.t, c.i * p.patch + dy, c.j * p.patch + dx, ch) = static_cast<float>(p.vectors(k, col++));
  }
  return clip;
}

Tensor row_normalize(const Tensor& x, double eps) {
  if (!(eps > 0.0)) throw InputError("row_normalize: eps must be positive");
  Tensor out = x;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto row = out.row_span(i);
    double n = 0.0;
    for (double v : row) n += v * v;
    const double div = std::sqrt(n) + eps;
    for (double& v : row) v /= div;
  }
  return out;
}

Tensor intra_frame_adjacency(const Tensor& xnorm, double tau_s) {
  Tensor a = kernels::matmul_nt(xnorm, xnorm);
  const std::size_t n = a.rows();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      // Symmetrize explicitly; the kernel computes both triangles separately.
      const double w = a(i, j) >= tau_s ? a(i, j) : 0.0;
      a(i, j) = w;
      a(j, i) = w;
    }
  return a;
}

namespace {

double cosine(std::span<const double> u, std::span<const double> v) {
  double uv = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    uv += u[k] * v[k];
    uu += u[k] * u[k];
    vv += v[k] * v[k];
  }
  if (uu == 0.0 || vv == 0.0) return 0.0;
  return uv / (std::sqrt(uu) * std::sqrt(vv));
}

}  // namespace

TemporalBridge temporal_bridge(const Tensor& adj_t, const Tensor& adj_next, const Tensor& x_t, const Tensor& x_next,
                               double tau_t) {
  const std::size_t n = adj_t.rows();
  if (adj_next.rows() != n || x_t.rows() != n || x_next.rows() != n || adj_t.cols() != n || adj_next.cols() != n) {
    throw InputError("temporal_bridge: frames disagree on node count");
  }
  if (x_t.cols() != x_next.cols()) throw DimensionError("temporal_bridge: embedding widths differ");
  TemporalBridge b;
  b.structural.resize(n);
  b.feature.resize(n);
  b.score.resize(n);
  b.kept.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    b.structural[v] = cosine(adj_t.row_span(v), adj_next.row_span(v));
    b.feature[v] = cosine(x_t.row_span(v), x_next.row_span(v));
    b.score[v] = b.structural[v] + b.feature[v];
    b.kept[v] = b.score[v] / 2.0 >= tau_t;
  }
  return b;
}

VideoGraph assemble(const NodeIndex& index, const std::vector<Tensor>& frame_adjacency,
                    const std::vector<TemporalBridge>& bridges, const Tensor& features) {
  const std::size_t n = index.per_frame();
  if (frame_adjacency.size() != index.frames) throw InputError("assemble: one adjacency per frame required");
  if (bridges.size() + 1 != index.frames && !(index.frames == 0 && bridges.empty())) {
    throw InputError("assemble: expected frames-1 temporal bridges");
  }
  if (features.rows() != index.nodes()) throw DimensionError("assemble: feature rows != node count");
  VideoGraph g;
  g.index = index;
  g.features = features;
  g.spatial = Tensor::zeros(index.nodes(), index.nodes());
  g.temporal = Tensor::zeros(index.nodes(), index.nodes());
  for (std::size_t t = 0; t < index.frames; ++t) {
    const Tensor& a = frame_adjacency[t];
    if (a.rows() != n || a.cols() != n) throw DimensionError("assemble: frame adjacency shape");
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t v = 0; v < n; ++v) g.spatial(t * n + u, t * n + v) = a(u, v);
  }
  for (std::size_t t = 0; t + 1 < index.frames; ++t) {
    const TemporalBridge& b = bridges[t];
    for (std::size_t v = 0; v < n; ++v) {
      if (!b.kept[v]) continue;
      g.temporal(t * n + v, (t + 1) * n + v) = b.score[v];
      g.temporal((t + 1) * n + v, t * n + v) = b.score[v];
    }
  }
  return g;
}

Tensor frame_rows(const Tensor& x, const NodeIndex& index, std::size_t t) {
  const std::size_t n = index.per_frame();
  Tensor out = Tensor::zeros(n, x.cols());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) = x(t * n + i, j);
  return out;
}

VideoGraph build_video_graph(const NodeIndex& index, const Tensor& embeddings, const GraphOptions& options) {
  if (embeddings.rows() != index.nodes()) throw DimensionError("build_video_graph: embedding rows != node count");
  const std::size_t frames = index.frames;
  std::vector<Tensor> raw(frames), adjacency(frames);
  const long long nf = static_cast<long long>(frames);
#pragma omp parallel for schedule(static) if (frames > 1 && index.per_frame() * embeddings.cols() > 4096)
  for (long long t = 0; t < nf; ++t) {
    raw[t] = frame_rows(embeddings, index, static_cast<std::size_t>(t));
    adjacency[t] = intra_frame_adjacency(row_normalize(raw[t], options.eps), options.tau_s);
  }
  std::vector<TemporalBridge> bridges(frames > 0 ? frames - 1 : 0);
  for (std::size_t t = 0; t + 1 < frames; ++t)
    bridges[t] = temporal_bridge(adjacency[t], adjacency[t + 1], raw[t], raw[t + 1], options.tau_t);
  return assemble(index, adjacency, bridges, embeddings);
}

void write_edge_list(std::ostream& os, const VideoGraph& g, const Tensor* negative_spatial,
                     const Tensor* negative_temporal) {
  const std::size_t m = g.nodes();
  auto emit = [&](const Tensor& a, const char* kind, bool include_diag, bool negative_only) {
    for (std::size_t u = 0; u < m; ++u)
      for (std::size_t v = include_diag ? u : u + 1; v < m; ++v) {
        const double w = a(u, v);
        if (w == 0.0 || (negative_only && w > 0.0)) continue;
        os << u << ' ' << v << ' ' << w << ' ' << kind << '\n';
      }
  };
  emit(g.spatial, "spatial", true, false);
  emit(g.temporal, "temporal", false, false);
  if (negative_spatial) emit(*negative_spatial, "neg_spatial", false, true);
  if (negative_temporal) emit(*negative_temporal, "neg_temporal", false, true);
}

}  // namespace sstgnn
