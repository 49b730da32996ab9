#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "sstgnn/autodiff.hpp"
#include "sstgnn/eigen.hpp"
#include "sstgnn/graph.hpp"
#include "sstgnn/optim.hpp"
#include "sstgnn/rng.hpp"
#include "sstgnn/tensor.hpp"

// Learnable graph-spectral filtering.
namespace sstgnn {

enum class LaplacianScope { spatial_only, spatial_plus_positive_temporal };

std::string_view to_string(LaplacianScope s);
LaplacianScope parse_laplacian_scope(std::string_view s);

// Symmetrized I - D^-1/2 A D^-1/2. Zero-degree nodes get a unit diagonal and
// no off-diagonal entries. Throws InputError on any negative weight.
Tensor normalized_laplacian(const Tensor& adjacency);
Tensor laplacian(const VideoGraph& graph, LaplacianScope scope);

/// Graph Fourier basis: ascending eigenvalues and orthonormal eigenvector
/// columns. Immutable once built and treated as a constant by autodiff.
struct SpectralBasis {
  std::vector<double> eigenvalues;
  Tensor eigenvectors;

  std::size_t size() const noexcept { return eigenvalues.size(); }
  Tensor eigenvalue_column() const { return Tensor::column(eigenvalues); }
};

SpectralBasis eigendecompose(const Tensor& laplacian);

// ---- filters -----------------------------------------------------------

enum class FilterPreset { low_pass, high_pass, band_pass, band_reject, comb, all_pass };

std::string_view to_string(FilterPreset p);
FilterPreset parse_filter_preset(std::string_view s);

// Indicator gains on the [0, 2] eigenvalue axis: low = [0, low_edge],
// band = (low_edge, high_edge), high = [high_edge, 2], reject = 1 - band,
// comb = low + band + high.
struct PresetFilter {
  FilterPreset kind = FilterPreset::all_pass;
  double low_edge = 0.7;
  double high_edge = 1.3;
};

std::vector<double> filter_gains(std::span<const double> eigenvalues, const PresetFilter& filter);

/// Scalar-to-scalar MLP evaluated independently on every eigenvalue.
/// Hidden layers use LeakyReLU; the output layer is linear.
struct FilterMlp {
  std::vector<ad::Affine> layers;
};

// Registers `<prefix>.w{k}` / `<prefix>.b{k}` for 1 -> hidden -> ... -> 1.
void add_filter_mlp_params(ParamSet& params, std::string_view prefix, std::size_t hidden, std::size_t hidden_layers,
                           const rng::Stream& init);
FilterMlp bind_filter_mlp(const BoundParams& bound, std::string_view prefix, std::size_t hidden_layers);

// M x 1 gains for an M x 1 eigenvalue column.
ad::Var filter_gains(ad::Var eigenvalues, const FilterMlp& mlp);

// U diag(gains) U^T X.
ad::Var apply_filter(ad::Var x, const SpectralBasis& basis, ad::Var gains);
Tensor apply_filter(const Tensor& x, const SpectralBasis& basis, std::span<const double> gains);

// Graph Fourier transform U^T X.
Tensor project(const Tensor& x, const SpectralBasis& basis);

// Mean over nodes.
ad::Var pool_spectral(ad::Var x_spectral);
Tensor pool_spectral(const Tensor& x_spectral);

// Per-column x^T L x.
std::vector<double> dirichlet_energy(const Tensor& laplacian, const Tensor& x);

// ---- image demo --------------------------------------------------------

// 8-bit binary PGM (P5). Pixels are scaled to / from [0, 1].
Tensor read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const Tensor& image);

struct ImageGraphOptions {
  double tau_s = 0.6;
  double eps = 1e-4;
  std::size_t max_nodes = 4096;
};

// One node per pixel. Each pixel is embedded as its 3x3 neighbourhood
// (edge-replicated); edges join 8-connected neighbours weighted by the
// cosine of the normalized embeddings and pruned below tau_s, plus the
// self-similarity diagonal.
Tensor image_graph(const Tensor& image, const ImageGraphOptions& options = {});

struct FilteredImage {
  Tensor image;
  std::vector<double> eigenvalues;
  std::vector<double> gains;
  double energy_before = 0.0;
  double energy_after = 0.0;
};

// Filters the raw intensities on the image graph. Throws InputError when
// the pixel count exceeds options.max_nodes.
FilteredImage filter_image(const Tensor& image, const PresetFilter& filter, const ImageGraphOptions& options = {});

}  // namespace sstgnn
