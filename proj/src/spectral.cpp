#include "sstgnn/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "sstgnn/errors.hpp"
#include "sstgnn/kernels.hpp"

namespace sstgnn {

std::string_view to_string(LaplacianScope s) {
  return s == LaplacianScope::spatial_only ? "spatial_only" : "spatial_plus_positive_temporal";
}

LaplacianScope parse_laplacian_scope(std::string_view s) {
  if (s == "spatial_only") return LaplacianScope::spatial_only;
  if (s == "spatial_plus_positive_temporal") return LaplacianScope::spatial_plus_positive_temporal;
  throw InputError("unknown laplacian scope '" + std::string(s) + "'");
}

Tensor normalized_laplacian(const Tensor& a) {
  if (a.rows() != a.cols()) throw DimensionError("laplacian: adjacency must be square");
  const std::size_t n = a.rows();
  std::vector<double> inv_sqrt(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double deg = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (a(i, j) < 0.0) {
        throw InputError("laplacian: negative weight " + std::to_string(a(i, j)) + " at (" + std::to_string(i) + "," +
                         std::to_string(j) + ")");
      }
      deg += a(i, j);
    }
    inv_sqrt[i] = deg > 0.0 ? 1.0 / std::sqrt(deg) : 0.0;
  }
  Tensor l = Tensor::zeros(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) l(i, j) = (i == j ? 1.0 : 0.0) - inv_sqrt[i] * a(i, j) * inv_sqrt[j];
  // Isolated nodes: unit diagonal by convention.
  for (std::size_t i = 0; i < n; ++i)
    if (inv_sqrt[i] == 0.0) l(i, i) = 1.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = 0.5 * (l(i, j) + l(j, i));
      l(i, j) = s;
      l(j, i) = s;
    }
  return l;
}

Tensor laplacian(const VideoGraph& graph, LaplacianScope scope) {
  if (scope == LaplacianScope::spatial_only) return normalized_laplacian(graph.spatial);
  Tensor a = graph.spatial;
  for (std::size_t k = 0; k < a.size(); ++k) a[k] += std::max(graph.temporal[k], 0.0);
  return normalized_laplacian(a);
}

SpectralBasis eigendecompose(const Tensor& l) {
  SymmetricEigen e = eigh(l);
  return {std::move(e.values), std::move(e.vectors)};
}

// ---- filters -----------------------------------------------------------

std::string_view to_string(FilterPreset p) {
  switch (p) {
    case FilterPreset::low_pass: return "low_pass";
    case FilterPreset::high_pass: return "high_pass";
    case FilterPreset::band_pass: return "band_pass";
    case FilterPreset::band_reject: return "band_reject";
    case FilterPreset::comb: return "comb";
    case FilterPreset::all_pass: return "all_pass";
  }
  return "?";
}

FilterPreset parse_filter_preset(std::string_view s) {
  for (FilterPreset p : {FilterPreset::low_pass, FilterPreset::high_pass, FilterPreset::band_pass,
                         FilterPreset::band_reject, FilterPreset::comb, FilterPreset::all_pass})
    if (to_string(p) == s) return p;
  throw InputError("unknown filter preset '" + std::string(s) + "'");
}

std::vector<double> filter_gains(std::span<const double> eigenvalues, const PresetFilter& f) {
  std::vector<double> g(eigenvalues.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double lam = eigenvalues[k];
    const double low = lam <= f.low_edge ? 1.0 : 0.0;
    const double band = (lam > f.low_edge && lam < f.high_edge) ? 1.0 : 0.0;
    const double high = lam >= f.high_edge ? 1.0 : 0.0;
    switch (f.kind) {
      case FilterPreset::low_pass: g[k] = low; break;
      case FilterPreset::high_pass: g[k] = high; break;
      case FilterPreset::band_pass: g[k] = band; break;
      case FilterPreset::band_reject: g[k] = 1.0 - band; break;
      case FilterPreset::comb: g[k] = low + band + high; break;
      case FilterPreset::all_pass: g[k] = 1.0; break;
    }
  }
  return g;
}

void add_filter_mlp_params(ParamSet& params, std::string_view prefix, std::size_t hidden, std::size_t hidden_layers,
                           const rng::Stream& init) {
  const std::string p(prefix);
  std::size_t in = 1;
  for (std::size_t k = 0; k <= hidden_layers; ++k) {
    const std::size_t out = k == hidden_layers ? 1 : hidden;
    const std::string id = std::to_string(k + 1);
    params.add(p + ".w" + id, xavier_uniform(in, out, init.child("w" + id)));
    // Output bias 0.5 so an untrained filter passes signal. Hidden biases are
    // small and random: at zero every unit would sit on its kink at lambda = 0.
    Tensor bias = Tensor::filled(1, out, 0.5);
    if (k != hidden_layers) {
      const rng::Stream b = init.child("b" + id);
      for (std::size_t j = 0; j < out; ++j) bias[j] = b.uniform(j, -0.1, 0.1);
    }
    params.add(p + ".b" + id, std::move(bias));
    in = out;
  }
}

FilterMlp bind_filter_mlp(const BoundParams& bound, std::string_view prefix, std::size_t hidden_layers) {
  FilterMlp mlp;
  const std::string p(prefix);
  for (std::size_t k = 0; k <= hidden_layers; ++k) {
    const std::string id = std::to_string(k + 1);
    mlp.layers.push_back({bound[p + ".w" + id], bound[p + ".b" + id]});
  }
  return mlp;
}

ad::Var filter_gains(ad::Var eigenvalues, const FilterMlp& mlp) {
  if (eigenvalues.value().cols() != 1) throw DimensionError("filter_gains: eigenvalues must be a column");
  ad::Var h = eigenvalues;
  for (std::size_t k = 0; k < mlp.layers.size(); ++k) {
    h = ad::affine(h, mlp.layers[k]);
    if (k + 1 < mlp.layers.size()) h = ad::leaky_relu(h);
  }
  return h;
}

ad::Var apply_filter(ad::Var x, const SpectralBasis& basis, ad::Var gains) {
  ad::Tape& tape = x.tape();
  const Tensor& u = basis.eigenvectors;
  if (x.value().rows() != u.rows()) throw DimensionError("apply_filter: signal rows != basis size");
  ad::Var coeffs = ad::matmul(tape.constant(u.transposed()), x);
  return ad::matmul(tape.constant(u), ad::diag_scale(gains, coeffs));
}

Tensor project(const Tensor& x, const SpectralBasis& basis) { return kernels::matmul_tn(basis.eigenvectors, x); }

Tensor apply_filter(const Tensor& x, const SpectralBasis& basis, std::span<const double> gains) {
  if (gains.size() != basis.size()) throw DimensionError("apply_filter: gain count != basis size");
  Tensor coeffs = project(x, basis);
  for (std::size_t i = 0; i < coeffs.rows(); ++i)
    for (std::size_t j = 0; j < coeffs.cols(); ++j) coeffs(i, j) *= gains[i];
  return kernels::matmul(basis.eigenvectors, coeffs);
}

ad::Var pool_spectral(ad::Var x) { return ad::mean_rows(x); }

Tensor pool_spectral(const Tensor& x) {
  if (x.rows() == 0) throw DimensionError("pool_spectral: no nodes");
  Tensor z = Tensor::zeros(1, x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) z(0, j) += x(i, j);
  for (double& v : z.data()) v /= static_cast<double>(x.rows());
  return z;
}

std::vector<double> dirichlet_energy(const Tensor& l, const Tensor& x) {
  const Tensor lx = kernels::matmul(l, x);
  std::vector<double> e(x.cols(), 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) e[j] += x(i, j) * lx(i, j);
  return e;
}

// ---- image demo --------------------------------------------------------

namespace {

std::string next_token(std::istream& is) {
  std::string tok;
  char c;
  while (is.get(c)) {
    if (c == '#') {
      std::string rest;
      std::getline(is, rest);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(c);
  }
  return tok;
}

}  // namespace

Tensor read_pgm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot read " + path.string());
  if (next_token(is) != "P5") throw FormatError(path.string() + ": not a binary PGM (P5)");
  std::size_t w = 0, h = 0, maxval = 0;
  try {
    w = std::stoul(next_token(is));
    h = std::stoul(next_token(is));
    maxval = std::stoul(next_token(is));
  } catch (const std::exception&) {
    throw FormatError(path.string() + ": malformed PGM header");
  }
  if (maxval == 0 || maxval > 255) throw FormatError(path.string() + ": only 8-bit PGM is supported");
  Tensor img = Tensor::zeros(h, w);
  for (std::size_t k = 0; k < img.size(); ++k) {
    const int c = is.get();
    if (c == EOF) throw FormatError(path.string() + ": truncated pixel data");
    img[k] = static_cast<double>(c) / static_cast<double>(maxval);
  }
  return img;
}

void write_pgm(const std::filesystem::path& path, const Tensor& image) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot write " + path.string());
  os << "P5\n" << image.cols() << ' ' << image.rows() << "\n255\n";
  for (double v : image.data()) {
    const double c = std::clamp(v, 0.0, 1.0);
    os.put(static_cast<char>(static_cast<unsigned char>(std::lround(c * 255.0))));
  }
}

Tensor image_graph(const Tensor& image, const ImageGraphOptions& options) {
  const std::size_t h = image.rows(), w = image.cols();
  const NodeIndex index{1, h, w};
  Tensor emb = Tensor::zeros(h * w, 9);
  auto px = [&](long y, long x) {
    y = std::clamp(y, 0L, static_cast<long>(h) - 1);
    x = std::clamp(x, 0L, static_cast<long>(w) - 1);
    return image(static_cast<std::size_t>(y), static_cast<std::size_t>(x));
  };
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      std::size_t c = 0;
      for (long dy = -1; dy <= 1; ++dy)
        for (long dx = -1; dx <= 1; ++dx)
          emb(index.flat(0, y, x), c++) = px(static_cast<long>(y) + dy, static_cast<long>(x) + dx);
    }
  const Tensor xn = row_normalize(emb, options.eps);
  const std::size_t m = h * w;
  Tensor a = Tensor::zeros(m, m);
  auto sim = [&](std::size_t u, std::size_t v) {
    double s = 0.0;
    for (std::size_t k = 0; k < xn.cols(); ++k) s += xn(u, k) * xn(v, k);
    return s;
  };
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t u = index.flat(0, y, x);
      a(u, u) = sim(u, u);
      for (long dy = 0; dy <= 1; ++dy)
        for (long dx = -1; dx <= 1; ++dx) {
          if (dy == 0 && dx <= 0) continue;  // each undirected pair once
          const long ny = static_cast<long>(y) + dy, nx = static_cast<long>(x) + dx;
          if (ny >= static_cast<long>(h) || nx < 0 || nx >= static_cast<long>(w)) continue;
          const std::size_t v = index.flat(0, static_cast<std::size_t>(ny), static_cast<std::size_t>(nx));
          const double s = sim(u, v);
          if (s >= options.tau_s) {
            a(u, v) = s;
            a(v, u) = s;
          }
        }
    }
  return a;
}

FilteredImage filter_image(const Tensor& image, const PresetFilter& filter, const ImageGraphOptions& options) {
  const std::size_t m = image.rows() * image.cols();
  if (m == 0) throw InputError("filter_image: empty image");
  if (m > options.max_nodes) {
    throw InputError("filter_image: " + std::to_string(m) + " pixels exceed the dense eigensolve cap of " +
                     std::to_string(options.max_nodes));
  }
  const Tensor l = normalized_laplacian(image_graph(image, options));
  const SpectralBasis basis = eigendecompose(l);
  Tensor signal = Tensor::zeros(m, 1);
  for (std::size_t k = 0; k < m; ++k) signal(k, 0) = image[k];

  FilteredImage out;
  out.eigenvalues = basis.eigenvalues;
  out.gains = filter_gains(basis.eigenvalues, filter);
  const Tensor filtered = apply_filter(signal, basis, out.gains);
  out.energy_before = dirichlet_energy(l, signal)[0];
  out.energy_after = dirichlet_energy(l, filtered)[0];
  out.image = Tensor::zeros(image.rows(), image.cols());
  for (std::size_t k = 0; k < m; ++k) out.image[k] = filtered(k, 0);
  return out;
}

}  // namespace sstgnn
