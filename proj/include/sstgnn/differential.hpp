#pragma once

#include <cstddef>

#include "sstgnn/autodiff.hpp"
#include "sstgnn/graph.hpp"
#include "sstgnn/tensor.hpp"

// Spatial and temporal differentials expressed as negative edges.
namespace sstgnn {

// Pixel-level NPR: within each tile x tile block, subtract the block's
// top-left value. Dimensions that are not multiples of `tile` are
// centre-cropped first. Throws InputError for tile == 0.
Tensor npr_reference(const Tensor& grid, std::size_t tile);

/// Negative spatial sub-adjacency over the whole node set. For each
/// tile x tile block of patch coordinates (per frame) with anchor at the
/// block's top-left node, entries are assigned in this order:
///   block := 0, anchor row := -1, anchor column := -1, diagonal := 1.
/// So non-anchor rows read [-1 at anchor, 1 on self], and the anchor row is
/// [1 on self, -1 elsewhere in the block]. Partial trailing blocks are skipped.
Tensor build_spatial_negative(const NodeIndex& index, std::size_t tile);

// npr_reference applied inside every patch vector (layout dy, dx, channel),
// with tiles aligned to the patch origin. Pixels in a partial trailing tile
// become 0. Anchors become 0, matching the reference rather than the
// graph form.
Tensor npr_patch_vectors(const PatchTensor& patches, std::size_t tile);

// X' = A_ns * X.
Tensor sgc_aggregate(const Tensor& x, const Tensor& negative_spatial);

struct NprEquivalence {
  bool exact = false;                // every non-anchor deviation is exactly 0
  double max_non_anchor_deviation = 0.0;
  // Anchors: the graph form yields x_anchor - sum(other block members) where
  // NPR yields 0. `anchor_convention_deviation` measures the former
  // identity, `anchor_vs_npr` the gap to NPR's 0.
  double anchor_convention_deviation = 0.0;
  double anchor_vs_npr = 0.0;
  std::size_t non_anchor_nodes = 0;
  std::size_t anchor_nodes = 0;
};

// Builds a one-frame, one-pixel-per-node graph over `image`, aggregates the
// raw intensities through the negative sub-adjacency and compares with
// npr_reference.
NprEquivalence npr_equivalence_check(const Tensor& image, std::size_t tile);

// Row-shift operator: row of node (t,i,j) selects node (t+1,i,j); the last
// frame selects itself.
Tensor next_frame_selector(const NodeIndex& index);

// X'(t) = affine([X(t) | X(t+1)]) with the last frame concatenated with itself.
ad::Var temporal_concat(ad::Var x, const NodeIndex& index, const ad::Affine& mlp);

// Copy of `temporal` with -1 at every consecutive same-coordinate pair
// (both directions), overwriting any positive weight there.
Tensor add_temporal_negative(const Tensor& temporal, const NodeIndex& index);

}  // namespace sstgnn
