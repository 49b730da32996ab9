#pragma once

#include "sstgnn/autodiff.hpp"
#include "sstgnn/graph.hpp"
#include "sstgnn/tensor.hpp"

namespace sstgnn {

/// Attention support plus a sign per supported edge. Attention is computed
/// over the support; each message is then multiplied by its edge sign.
struct SignedAdjacency {
  BoolMatrix support;
  Tensor sign;  // -1, 0 or +1; nonzero exactly on the support

  std::size_t nodes() const noexcept { return support.rows; }

  // Support = nonzero entries of `a`, sign = sign of the entry. Diagonal
  // entries that are zero become +1 self-loops when add_self_loops is set.
  static SignedAdjacency from_matrix(const Tensor& a, bool add_self_loops = true);
};

struct GatLayer {
  ad::Var weight;     // d_in x d_out, h = x * weight
  ad::Var attention;  // 2*d_out x 1, split as [source; neighbour]
};

struct GatTrace {
  Tensor attention;  // row-stochastic over the support
  bool isolated_rows = false;
};

// h_i = W x_i; e_ij = LeakyReLU(a^T [h_i || h_j]); alpha = softmax of e over
// the support of row i; h'_i = LeakyReLU(sum_j alpha_ij s_ij h_j).
ad::Var gat_forward(ad::Var x, const SignedAdjacency& adj, const GatLayer& layer, GatTrace* trace = nullptr);

// A union positive temporal edges, all signs +1, self-loops added.
SignedAdjacency consistency_adjacency(const VideoGraph& graph);

// Union of the negative spatial sub-adjacency and the negative entries of the
// augmented temporal adjacency; either may be null to leave it out.
// Self-loops are +1 (the sub-adjacency diagonal already is).
SignedAdjacency inconsistency_adjacency(std::size_t nodes, const Tensor* negative_spatial,
                                        const Tensor* temporal_with_negative);

ad::Var consistency_pass(ad::Var x, const VideoGraph& graph, const GatLayer& layer, GatTrace* trace = nullptr);
ad::Var inconsistency_pass(ad::Var x, std::size_t nodes, const Tensor* negative_spatial,
                           const Tensor* temporal_with_negative, const GatLayer& layer, GatTrace* trace = nullptr);

// Per-node fusion: affine([H_c | H_ic]).
ad::Var fuse_nodes(ad::Var h_c, ad::Var h_ic, const ad::Affine& fusion);
// Clip-level spatial vector: mean over nodes of fuse_nodes.
ad::Var spatial_fuse(ad::Var h_c, ad::Var h_ic, const ad::Affine& fusion);

}  // namespace sstgnn
