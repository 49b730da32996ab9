#include "sstgnn/detector.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <numeric>
#include <sstream>

#include "sstgnn/differential.hpp"
#include "sstgnn/errors.hpp"
#include "sstgnn/gat.hpp"
#include "sstgnn/rng.hpp"

namespace sstgnn {

// ---- configuration -----------------------------------------------------

void validate(const TrainConfig& c) {
  auto fail = [](const std::string& m) { throw ConfigError("config: " + m); };
  if (c.patch_size == 0) fail("patch_size must be positive");
  if (c.tile == 0) fail("tile must be positive");
  if (c.dim == 0) fail("dim must be positive");
  if (c.batch == 0) fail("batch must be positive");
  if (c.epochs == 0) fail("epochs must be positive");
  if (c.filter_hidden == 0) fail("filter_hidden must be positive");
  if (!(c.tau_s >= 0.0 && c.tau_s <= 1.0)) fail("tau_s must lie in [0,1]");
  if (!(c.tau_t >= 0.0 && c.tau_t <= 1.0)) fail("tau_t must lie in [0,1]");
  if (!(c.eps > 0.0)) fail("eps must be positive");
  if (!(c.lr >= 0.0) || !std::isfinite(c.lr)) fail("lr must be a finite nonnegative number");
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

const char* fmt_bool(bool b) { return b ? "true" : "false"; }

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config: " + key + " expects a boolean, got '" + v + "'");
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("config: " + key + " expects a number, got '" + v + "'");
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string to_text(const TrainConfig& c) {
  std::ostringstream os;
  os << "patch_size=" << c.patch_size << '\n'
     << "tau_s=" << fmt_double(c.tau_s) << '\n'
     << "tau_t=" << fmt_double(c.tau_t) << '\n'
     << "eps=" << fmt_double(c.eps) << '\n'
     << "tile=" << c.tile << '\n'
     << "dim=" << c.dim << '\n'
     << "filter_hidden=" << c.filter_hidden << '\n'
     << "filter_layers=" << c.filter_layers << '\n'
     << "lr=" << fmt_double(c.lr) << '\n'
     << "batch=" << c.batch << '\n'
     << "epochs=" << c.epochs << '\n'
     << "seed=" << c.seed << '\n'
     << "laplacian_scope=" << to_string(c.scope) << '\n'
     << "use_spectral=" << fmt_bool(c.use_spectral) << '\n'
     << "use_spatial_negative=" << fmt_bool(c.use_spatial_negative) << '\n'
     << "use_temporal_negative=" << fmt_bool(c.use_temporal_negative) << '\n'
     << "use_temporal_concat=" << fmt_bool(c.use_temporal_concat) << '\n'
     << "untie_gat=" << fmt_bool(c.untie_gat) << '\n'
     << "npr_input=" << fmt_bool(c.npr_input) << '\n'
     << "node_logits=" << fmt_bool(c.node_logits) << '\n'
     << "zero_head_init=" << fmt_bool(c.zero_head_init) << '\n';
  return os.str();
}

bool apply_setting(TrainConfig& c, const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (key == "patch_size") c.patch_size = parse_number<std::size_t>(key, v);
  else if (key == "tau_s") c.tau_s = parse_number<double>(key, v);
  else if (key == "tau_t") c.tau_t = parse_number<double>(key, v);
  else if (key == "tau") c.tau_s = c.tau_t = parse_number<double>(key, v);
  else if (key == "eps") c.eps = parse_number<double>(key, v);
  else if (key == "tile" || key == "l0") c.tile = parse_number<std::size_t>(key, v);
  else if (key == "dim") c.dim = parse_number<std::size_t>(key, v);
  else if (key == "filter_hidden") c.filter_hidden = parse_number<std::size_t>(key, v);
  else if (key == "filter_layers") c.filter_layers = parse_number<std::size_t>(key, v);
  else if (key == "lr") c.lr = parse_number<double>(key, v);
  else if (key == "batch") c.batch = parse_number<std::size_t>(key, v);
  else if (key == "epochs") c.epochs = parse_number<std::size_t>(key, v);
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, v);
  else if (key == "laplacian_scope") c.scope = parse_laplacian_scope(v);
  else if (key == "use_spectral") c.use_spectral = parse_bool(key, v);
  else if (key == "use_spatial_negative") c.use_spatial_negative = parse_bool(key, v);
  else if (key == "use_temporal_negative") c.use_temporal_negative = parse_bool(key, v);
  else if (key == "use_temporal_concat") c.use_temporal_concat = parse_bool(key, v);
  else if (key == "untie_gat") c.untie_gat = parse_bool(key, v);
  else if (key == "npr_input") c.npr_input = parse_bool(key, v);
  else if (key == "node_logits") c.node_logits = parse_bool(key, v);
  else if (key == "zero_head_init") c.zero_head_init = parse_bool(key, v);
  else return false;
  return true;
}

TrainConfig parse_train_config(const std::string& text) {
  TrainConfig c;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config: expected key=value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    if (!apply_setting(c, key, line.substr(eq + 1))) throw ConfigError("config: unknown key '" + key + "'");
  }
  validate(c);
  return c;
}

TrainConfig parity_preset() {
  TrainConfig c;
  c.dim = 256;
  c.filter_hidden = 32;
  return c;
}

// ---- parameters --------------------------------------------------------

ParamSet init_params(const TrainConfig& c, std::size_t channels) {
  validate(c);
  const rng::Stream root(c.seed, "init");
  const std::size_t in = c.patch_size * c.patch_size * channels;
  const std::size_t d = c.dim;
  ParamSet p;
  p.add("encoder.weight", xavier_uniform(in, d, root.child("encoder.weight")));
  p.add("encoder.bias", Tensor::zeros(1, d));
  p.add("temporal.weight", xavier_uniform(2 * d, d, root.child("temporal.weight")));
  p.add("temporal.bias", Tensor::zeros(1, d));
  add_filter_mlp_params(p, "filter", c.filter_hidden, c.filter_layers, root.child("filter"));
  p.add("gat.weight", xavier_uniform(d, d, root.child("gat.weight")));
  p.add("gat.attention", xavier_uniform(2 * d, 1, root.child("gat.attention")));
  if (c.untie_gat) {
    p.add("gat_ic.weight", xavier_uniform(d, d, root.child("gat_ic.weight")));
    p.add("gat_ic.attention", xavier_uniform(2 * d, 1, root.child("gat_ic.attention")));
  }
  p.add("fusion.weight", xavier_uniform(2 * d, d, root.child("fusion.weight")));
  p.add("fusion.bias", Tensor::zeros(1, d));
  p.add("head.weight", c.zero_head_init ? Tensor::zeros(2 * d, 2) : xavier_uniform(2 * d, 2, root.child("head.weight")));
  p.add("head.bias", Tensor::zeros(1, 2));
  return p;
}

std::size_t count_parameters(const TrainConfig& c, std::size_t channels) {
  return init_params(c, channels).scalar_count();
}

// ---- forward -----------------------------------------------------------

ClipGraph build_clip_graph(const NodeIndex& index, const Tensor& embeddings, const TrainConfig& c) {
  ClipGraph g;
  g.graph = build_video_graph(index, embeddings, {c.tau_s, c.tau_t, c.eps});
  if (c.use_spectral) g.basis = eigendecompose(laplacian(g.graph, c.scope));
  g.negative_spatial = build_spatial_negative(index, c.tile);
  g.temporal_with_negative = add_temporal_negative(g.graph.temporal, index);
  return g;
}

ad::Var encode_patches(ad::Var patches, const ad::Affine& encoder) {
  return ad::leaky_relu(ad::affine(patches, encoder));
}

namespace {

std::size_t support_size(const SignedAdjacency& a) {
  return static_cast<std::size_t>(std::count(a.support.bits.begin(), a.support.bits.end(), 1));
}

}  // namespace

ForwardResult forward(ad::Tape& tape, const BoundParams& params, const PatchTensor& patches, const TrainConfig& c,
                      const ClipGraph* cached, ClipGraph* built) {
  const NodeIndex& index = patches.index;
  const std::size_t m = index.nodes();
  ForwardResult r;
  r.trace.nodes = m;

  ad::Var input = tape.constant(c.npr_input ? npr_patch_vectors(patches, c.tile) : patches.vectors);
  r.embeddings = encode_patches(input, {params["encoder.weight"], params["encoder.bias"]});
  const std::size_t d = r.embeddings.value().cols();

  ClipGraph local;
  const ClipGraph* g = cached;
  if (!g) {
    local = build_clip_graph(index, r.embeddings.value(), c);
    g = &local;
  }

  if (c.use_spectral) {
    if (g->basis.size() != m) throw DimensionError("forward: cached graph has no spectral basis");
    const FilterMlp mlp = bind_filter_mlp(params, "filter", c.filter_layers);
    ad::Var gains = filter_gains(tape.constant(g->basis.eigenvalue_column()), mlp);
    r.z_spectral = pool_spectral(apply_filter(r.embeddings, g->basis, gains));
    r.trace.spectral_branch = true;
  } else {
    r.z_spectral = tape.constant(Tensor::zeros(1, d));
  }

  ad::Var x = r.embeddings;
  if (c.use_temporal_concat) {
    x = temporal_concat(x, index, {params["temporal.weight"], params["temporal.bias"]});
    r.trace.temporal_concat = true;
  }

  const GatLayer gat_c{params["gat.weight"], params["gat.attention"]};
  const GatLayer gat_ic = c.untie_gat ? GatLayer{params["gat_ic.weight"], params["gat_ic.attention"]} : gat_c;
  const SignedAdjacency cons = consistency_adjacency(g->graph);
  const SignedAdjacency incons =
      inconsistency_adjacency(m, c.use_spatial_negative ? &g->negative_spatial : nullptr,
                              c.use_temporal_negative ? &g->temporal_with_negative : nullptr);
  r.trace.spatial_negative = c.use_spatial_negative;
  r.trace.temporal_negative = c.use_temporal_negative;
  r.trace.consistency_edges = support_size(cons);
  r.trace.inconsistency_edges = support_size(incons);

  ad::Var h_c = gat_forward(x, cons, gat_c);
  ad::Var h_ic = gat_forward(x, incons, gat_ic);
  ad::Var fused = fuse_nodes(h_c, h_ic, {params["fusion.weight"], params["fusion.bias"]});
  r.z_spatial = ad::mean_rows(fused);

  const ad::Affine head{params["head.weight"], params["head.bias"]};
  if (c.node_logits) {
    ad::Var spectral_rows = ad::matmul(tape.constant(Tensor::filled(m, 1, 1.0)), r.z_spectral);
    r.node_logits = ad::affine(ad::concat_cols(fused, spectral_rows), head);
    r.logits = ad::mean_rows(r.node_logits);
    r.trace.node_logits = true;
  } else {
    r.logits = ad::affine(ad::concat_cols(r.z_spatial, r.z_spectral), head);
  }
  r.trace.isolated_rows = tape.isolated_rows();
  if (built && !cached) *built = std::move(local);
  return r;
}

Tensor forward_logits(const FrameSequence& clip, const ParamSet& params, const TrainConfig& config) {
  const PatchTensor patches = patchify(clip, config.patch_size);
  ad::Tape tape;
  const BoundParams bound = bind(tape, params, false);
  return forward(tape, bound, patches, config).logits.value();
}

namespace {

double fake_probability(const Tensor& logits) { return ops::softmax_rows(logits)(0, 1); }

}  // namespace

double predict(const FrameSequence& clip, const ParamSet& params, const TrainConfig& config) {
  return fake_probability(forward_logits(clip, params, config));
}

std::vector<double> predict_batch(const std::vector<const FrameSequence*>& clips, const ParamSet& params,
                                  const TrainConfig& config) {
  std::vector<double> scores(clips.size());
  std::vector<std::exception_ptr> errors(clips.size());
  const long long n = static_cast<long long>(clips.size());
#pragma omp parallel for schedule(dynamic)
  for (long long k = 0; k < n; ++k) {
    try {
      scores[k] = predict(*clips[k], params, config);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return scores;
}

Tensor clip_embedding(const FrameSequence& clip, const ParamSet& params, const TrainConfig& config) {
  const PatchTensor patches = patchify(clip, config.patch_size);
  ad::Tape tape;
  const BoundParams bound = bind(tape, params, false);
  const ForwardResult r = forward(tape, bound, patches, config);
  return ad::concat_cols(r.z_spatial, r.z_spectral).value();
}

// ---- gradient verification --------------------------------------------

FrameSequence toy_clip(std::uint64_t seed) {
  const rng::Stream s(seed, "toy_clip");
  FrameSequence clip(2, 4, 4, 1);
  for (std::size_t k = 0; k < clip.pixels.size(); ++k) clip.pixels[k] = static_cast<float>(s.uniform(k));
  return clip;
}

TrainConfig toy_config() {
  TrainConfig c;
  c.patch_size = 2;
  c.dim = 8;
  c.tile = 2;
  c.zero_head_init = false;
  return c;
}

GradCheckReport end_to_end_gradcheck(const FrameSequence& clip, int label, const ParamSet& params,
                                     const TrainConfig& config, double h) {
  const PatchTensor patches = patchify(clip, config.patch_size);
  ClipGraph frozen;
  {
    ad::Tape tape;
    const BoundParams bound = bind(tape, params, false);
    forward(tape, bound, patches, config, nullptr, &frozen);
  }
  const int labels[1] = {label};
  const ScalarFunction loss = [&](ad::Tape& tape, const BoundParams& bound) {
    return ad::cross_entropy(forward(tape, bound, patches, config, &frozen).logits, labels);
  };
  return finite_diff_check(loss, params, h);
}

// ---- training ----------------------------------------------------------

namespace {

struct ClipPass {
  ParamSet grads;
  double loss = 0.0;
  bool correct = false;
};

ClipPass run_clip(const ParamSet& params, const PatchTensor& patches, int label, const TrainConfig& c,
                  bool with_grad) {
  ad::Tape tape;
  const BoundParams bound = bind(tape, params, with_grad);
  const ForwardResult r = forward(tape, bound, patches, c);
  const int labels[1] = {label};
  ad::Var loss = ad::cross_entropy(r.logits, labels);
  ClipPass out;
  out.loss = loss.value()[0];
  const Tensor& lg = r.logits.value();
  out.correct = (fake_probability(lg) >= 0.5 ? 1 : 0) == label;
  if (with_grad) {
    tape.backward(loss);
    out.grads = collect_gradients(bound);
  }
  return out;
}

std::vector<std::size_t> shuffled(std::size_t n, const rng::Stream& s) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[s.below(i, i)]);
  return order;
}

template <class Fn>
void parallel_for_each(std::size_t n, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic)
  for (long long k = 0; k < count; ++k) {
    try {
      fn(static_cast<std::size_t>(k));
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

HistoryRow evaluate_split(const ParamSet& params, const std::vector<PatchTensor>& patches,
                          const std::vector<int>& labels, const TrainConfig& c, std::size_t epoch,
                          const std::string& split) {
  std::vector<ClipPass> passes(patches.size());
  parallel_for_each(patches.size(), [&](std::size_t k) { passes[k] = run_clip(params, patches[k], labels[k], c, false); });
  HistoryRow row{epoch, split, 0.0, 0.0};
  for (const auto& p : passes) {
    row.loss += p.loss;
    row.accuracy += p.correct ? 1.0 : 0.0;
  }
  row.loss /= static_cast<double>(passes.size());
  row.accuracy /= static_cast<double>(passes.size());
  return row;
}

}  // namespace

TrainResult train(const std::vector<TrainSample>& samples, const TrainConfig& c,
                  const std::vector<TrainSample>* validation, const EpochCallback& on_epoch) {
  validate(c);
  if (samples.empty()) throw ConfigError("train: empty corpus");
  bool has0 = false, has1 = false;
  for (const auto& s : samples) {
    if (s.label != 0 && s.label != 1) throw ConfigError("train: label must be 0 or 1");
    has0 = has0 || s.label == 0;
    has1 = has1 || s.label == 1;
  }
  if (!has0 || !has1) throw ConfigError("train: corpus must contain both real and fake clips");

  const std::size_t channels = samples.front().clip->channels;
  auto prepare = [&](const std::vector<TrainSample>& set, std::vector<PatchTensor>& patches, std::vector<int>& labels) {
    patches.resize(set.size());
    labels.resize(set.size());
    parallel_for_each(set.size(), [&](std::size_t k) {
      if (set[k].clip->channels != channels) throw ConfigError("train: clips disagree on channel count");
      if (set[k].clip->frames < 2) throw InputError("train: clips need at least 2 frames");
      patches[k] = patchify(*set[k].clip, c.patch_size);
      labels[k] = set[k].label;
    });
  };
  std::vector<PatchTensor> patches, val_patches;
  std::vector<int> labels, val_labels;
  prepare(samples, patches, labels);
  if (validation) prepare(*validation, val_patches, val_labels);

  TrainResult result;
  result.params = init_params(c, channels);
  AdamState state(result.params, AdamOptions{c.lr, 0.9, 0.999, 1e-8});
  result.initial_loss = evaluate_split(result.params, patches, labels, c, 0, "train").loss;

  const rng::Stream shuffle(c.seed, "shuffle");
  const std::size_t n = samples.size();
  for (std::size_t epoch = 1; epoch <= c.epochs; ++epoch) {
    const std::vector<std::size_t> order = shuffled(n, shuffle.child(epoch));
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < n; start += c.batch) {
      const std::size_t b = std::min(c.batch, n - start);
      std::vector<ClipPass> passes(b);
      parallel_for_each(b, [&](std::size_t k) {
        const std::size_t i = order[start + k];
        passes[k] = run_clip(result.params, patches[i], labels[i], c, true);
      });
      ParamSet total = passes[0].grads;
      for (std::size_t k = 0; k < b; ++k) {
        if (!std::isfinite(passes[k].loss)) {
          throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) + ", sample " +
                             std::to_string(order[start + k]));
        }
        if (k) total.accumulate(passes[k].grads);
        loss_sum += passes[k].loss;
        correct += passes[k].correct ? 1 : 0;
      }
      total.scale(1.0 / static_cast<double>(b));
      adam_step(result.params, total, state);
    }
    HistoryRow row{epoch, "train", loss_sum / static_cast<double>(n), static_cast<double>(correct) / static_cast<double>(n)};
    result.history.push_back(row);
    if (on_epoch) on_epoch(row);
    if (validation && !validation->empty()) {
      result.history.push_back(evaluate_split(result.params, val_patches, val_labels, c, epoch, "val"));
      if (on_epoch) on_epoch(result.history.back());
    }
  }
  return result;
}

TrainResult train(const std::vector<LabeledClip>& corpus, const TrainConfig& config) {
  std::vector<TrainSample> samples;
  samples.reserve(corpus.size());
  for (const auto& c : corpus) samples.push_back({&c.clip, c.label});
  return train(samples, config);
}

TrainResult train_from_manifest(const std::filesystem::path& manifest, const TrainConfig& config) {
  const auto entries = read_manifest(manifest);
  std::vector<LabeledClip> corpus(entries.size());
  for (std::size_t k = 0; k < entries.size(); ++k) {
    corpus[k].clip = load_clip(entries[k].path);
    corpus[k].label = entries[k].label;
    corpus[k].family = entries[k].family;
    corpus[k].seed = entries[k].seed;
  }
  return train(corpus, config);
}

void write_history_csv(const std::filesystem::path& path, const std::vector<HistoryRow>& history) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot write " + path.string());
  os << "epoch,split,loss,acc\n";
  for (const auto& r : history) os << r.epoch << ',' << r.split << ',' << fmt_double(r.loss) << ',' << fmt_double(r.accuracy) << '\n';
}

// ---- checkpoints -------------------------------------------------------

namespace {

constexpr char kCheckpointMagic[8] = {'S', 'S', 'T', 'G', '0', '0', '0', '1'};

template <class U>
void put_le(std::ostream& os, U v) {
  unsigned char b[sizeof(U)];
  for (std::size_t k = 0; k < sizeof(U); ++k) b[k] = static_cast<unsigned char>(v >> (8 * k));
  os.write(reinterpret_cast<const char*>(b), sizeof(U));
}

class Reader {
 public:
  Reader(std::vector<unsigned char> bytes, std::string name) : bytes_(std::move(bytes)), name_(std::move(name)) {}

  template <class U>
  U get() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t k = 0; k < sizeof(U); ++k) v |= static_cast<U>(static_cast<U>(bytes_[pos_ + k]) << (8 * k));
    pos_ += sizeof(U);
    return v;
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(&bytes_[pos_]), n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw FormatError(name_ + ": truncated checkpoint");
  }
  std::vector<unsigned char> bytes_;
  std::string name_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ParamSet& params, const TrainConfig& config,
                     const std::string& extra_config) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot write " + path.string());
  const std::string text = to_text(config) + extra_config;
  os.write(kCheckpointMagic, sizeof kCheckpointMagic);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(text.size()));
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(params.size()));
  for (const auto& e : params.entries()) {
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(e.name.size()));
    os.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(e.value.rank()));
    for (std::size_t dim : e.value.shape()) put_le<std::uint64_t>(os, dim);
    for (double v : e.value.data()) put_le<std::uint64_t>(os, std::bit_cast<std::uint64_t>(v));
  }
  if (!os) throw InputError("write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot read " + path.string());
  Reader r(std::vector<unsigned char>((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>()),
           path.string());
  if (r.str(8) != std::string(kCheckpointMagic, 8)) throw FormatError(path.string() + ": not an SSTG0001 checkpoint");
  Checkpoint ck;
  ck.config_text = r.str(r.get<std::uint32_t>());
  std::istringstream lines(ck.config_text);
  std::string line;
  while (std::getline(lines, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) apply_setting(ck.config, line.substr(0, eq), line.substr(eq + 1));
  }
  const std::uint32_t count = r.get<std::uint32_t>();
  for (std::uint32_t k = 0; k < count; ++k) {
    std::string name = r.str(r.get<std::uint32_t>());
    const std::uint32_t rank = r.get<std::uint32_t>();
    std::vector<std::size_t> shape(rank);
    std::size_t n = 1;
    for (auto& dim : shape) {
      dim = static_cast<std::size_t>(r.get<std::uint64_t>());
      n *= dim;
    }
    std::vector<double> data(n);
    for (double& v : data) v = std::bit_cast<double>(r.get<std::uint64_t>());
    ck.params.add(std::move(name), Tensor(std::move(shape), std::move(data)));
  }
  if (!r.done()) throw FormatError(path.string() + ": trailing bytes after parameter blocks");
  return ck;
}

}  // namespace sstgnn
