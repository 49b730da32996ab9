#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "sstgnn/tensor.hpp"
#include "sstgnn/video.hpp"

namespace sstgnn {

struct NodeCoord {
  std::size_t t = 0, i = 0, j = 0;
  bool operator==(const NodeCoord&) const = default;
};

/// Bijection between (frame, row, col) patch coordinates and flat node ids,
/// frame-major then row-major.
struct NodeIndex {
  std::size_t frames = 0;
  std::size_t grid_h = 0;
  std::size_t grid_w = 0;

  std::size_t per_frame() const noexcept { return grid_h * grid_w; }
  std::size_t nodes() const noexcept { return frames * per_frame(); }
  std::size_t flat(std::size_t t, std::size_t i, std::size_t j) const noexcept {
    return t * per_frame() + i * grid_w + j;
  }
  NodeCoord coord(std::size_t k) const noexcept {
    const std::size_t n = per_frame();
    return {k / n, (k % n) / grid_w, k % grid_w};
  }
};

struct PatchTensor {
  NodeIndex index;
  std::size_t patch = 0;
  std::size_t channels = 0;
  std::size_t crop_y = 0;  // top-left offset of the centre crop
  std::size_t crop_x = 0;
  Tensor vectors;          // nodes x (patch*patch*channels), row-major within a patch, channel last

  std::size_t dim() const noexcept { return patch * patch * channels; }
};

// Non-overlapping patch x patch tiles of the centre crop to multiples of
// `patch`. Throws InputError when patch is 0 or exceeds min(H, W).
PatchTensor patchify(const FrameSequence& clip, std::size_t patch);
// Inverse of patchify: the centre-cropped clip.
FrameSequence unpatchify(const PatchTensor& patches);

// Each row divided by (its L2 norm + eps).
Tensor row_normalize(const Tensor& x, double eps = 1e-4);

// Cosine similarity of normalized rows; off-diagonal entries below tau_s are
// zeroed, the diagonal keeps its self-similarity.
Tensor intra_frame_adjacency(const Tensor& xnorm, double tau_s);

/// Per-coordinate bridge between two consecutive frames.
struct TemporalBridge {
  std::vector<double> structural;  // cosine of adjacency rows
  std::vector<double> feature;     // cosine of embedding rows
  std::vector<double> score;       // structural + feature
  std::vector<bool> kept;          // score / 2 >= tau_t
};

TemporalBridge temporal_bridge(const Tensor& adj_t, const Tensor& adj_next, const Tensor& x_t, const Tensor& x_next,
                               double tau_t);

/// The unified spatio-temporal graph. `spatial` is block diagonal over
/// frames; `temporal` holds only the kept positive bridge weights (symmetric).
struct VideoGraph {
  NodeIndex index;
  Tensor spatial;
  Tensor temporal;
  Tensor features;

  std::size_t nodes() const noexcept { return index.nodes(); }
};

VideoGraph assemble(const NodeIndex& index, const std::vector<Tensor>& frame_adjacency,
                    const std::vector<TemporalBridge>& bridges, const Tensor& features);

struct GraphOptions {
  double tau_s = 0.6;
  double tau_t = 0.6;
  double eps = 1e-4;
};

// Full construction from stacked node embeddings (nodes x d). Frames are
// processed in parallel.
VideoGraph build_video_graph(const NodeIndex& index, const Tensor& embeddings, const GraphOptions& options = {});

// Rows of one frame from a frame-major node matrix.
Tensor frame_rows(const Tensor& x, const NodeIndex& index, std::size_t t);

// `u v w kind` per line, each undirected edge once (u <= v).
void write_edge_list(std::ostream& os, const VideoGraph& graph, const Tensor* negative_spatial = nullptr,
                     const Tensor* negative_temporal = nullptr);

}  // namespace sstgnn
