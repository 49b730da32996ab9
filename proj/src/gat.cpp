#include "sstgnn/gat.hpp"

#include "sstgnn/errors.hpp"

namespace sstgnn {

SignedAdjacency SignedAdjacency::from_matrix(const Tensor& a, bool add_self_loops) {
  if (a.rows() != a.cols()) throw DimensionError("SignedAdjacency: matrix must be square");
  const std::size_t n = a.rows();
  SignedAdjacency s{BoolMatrix(n, n), Tensor::zeros(n, n)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double w = a(i, j);
      if (w == 0.0) continue;
      s.support.set(i, j);
      s.sign(i, j) = w > 0.0 ? 1.0 : -1.0;
    }
  if (add_self_loops)
    for (std::size_t i = 0; i < n; ++i)
      if (!s.support(i, i)) {
        s.support.set(i, i);
        s.sign(i, i) = 1.0;
      }
  return s;
}

ad::Var gat_forward(ad::Var x, const SignedAdjacency& adj, const GatLayer& layer, GatTrace* trace) {
  const std::size_t m = x.value().rows();
  if (adj.nodes() != m) throw DimensionError("gat_forward: adjacency size != node count");
  if (layer.weight.value().rows() != x.value().cols()) throw DimensionError("gat_forward: W input dimension");
  const std::size_t d = layer.weight.value().cols();
  if (layer.attention.value().rows() != 2 * d || layer.attention.value().cols() != 1) {
    throw DimensionError("gat_forward: attention vector must be 2d x 1");
  }

  ad::Var h = ad::matmul(x, layer.weight);
  ad::Var src = ad::matmul(h, ad::slice_rows(layer.attention, 0, d));
  ad::Var dst = ad::matmul(h, ad::slice_rows(layer.attention, d, 2 * d));
  ad::Var scores = ad::leaky_relu(ad::outer_sum(src, dst));
  const bool isolated_before = x.tape().isolated_rows();
  ad::Var alpha = ad::masked_softmax(scores, adj.support);
  if (trace) {
    trace->attention = alpha.value();
    trace->isolated_rows = !isolated_before && x.tape().isolated_rows();
  }
  ad::Var messages = ad::matmul(ad::mul_const(alpha, adj.sign), h);
  return ad::leaky_relu(messages);
}

SignedAdjacency consistency_adjacency(const VideoGraph& graph) {
  Tensor a = graph.spatial;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (graph.temporal[k] > 0.0) a[k] += graph.temporal[k];
  return SignedAdjacency::from_matrix(a, true);
}

SignedAdjacency inconsistency_adjacency(std::size_t nodes, const Tensor* negative_spatial,
                                        const Tensor* temporal_with_negative) {
  Tensor a = Tensor::zeros(nodes, nodes);
  if (negative_spatial) {
    if (negative_spatial->rows() != nodes) throw DimensionError("inconsistency_adjacency: A_ns size");
    a = *negative_spatial;
  }
  if (temporal_with_negative) {
    if (temporal_with_negative->rows() != nodes) throw DimensionError("inconsistency_adjacency: temporal size");
    for (std::size_t k = 0; k < a.size(); ++k)
      if ((*temporal_with_negative)[k] < 0.0) a[k] = (*temporal_with_negative)[k];
  }
  return SignedAdjacency::from_matrix(a, true);
}

ad::Var consistency_pass(ad::Var x, const VideoGraph& graph, const GatLayer& layer, GatTrace* trace) {
  return gat_forward(x, consistency_adjacency(graph), layer, trace);
}

ad::Var inconsistency_pass(ad::Var x, std::size_t nodes, const Tensor* negative_spatial,
                           const Tensor* temporal_with_negative, const GatLayer& layer, GatTrace* trace) {
  return gat_forward(x, inconsistency_adjacency(nodes, negative_spatial, temporal_with_negative), layer, trace);
}

ad::Var fuse_nodes(ad::Var h_c, ad::Var h_ic, const ad::Affine& fusion) {
  if (h_c.value().rows() != h_ic.value().rows()) throw DimensionError("spatial_fuse: row counts differ");
  return ad::affine(ad::concat_cols(h_c, h_ic), fusion);
}

ad::Var spatial_fuse(ad::Var h_c, ad::Var h_ic, const ad::Affine& fusion) {
  return ad::mean_rows(fuse_nodes(h_c, h_ic, fusion));
}

}  // namespace sstgnn
