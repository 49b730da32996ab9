#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sstgnn/autodiff.hpp"
#include "sstgnn/graph.hpp"
#include "sstgnn/optim.hpp"
#include "sstgnn/spectral.hpp"
#include "sstgnn/video.hpp"

namespace sstgnn {

/// Model and optimisation settings. Defaults are the desk-scale setup:
/// 32x32 patches, a shared 0.6 threshold, 2x2 differential tiles, d = 64,
/// Adam at 1e-4 with batches of 16 for 30 epochs.
struct TrainConfig {
  std::size_t patch_size = 32;
  double tau_s = 0.6;
  double tau_t = 0.6;
  double eps = 1e-4;
  std::size_t tile = 2;
  std::size_t dim = 64;
  std::size_t filter_hidden = 16;
  std::size_t filter_layers = 2;
  double lr = 1e-4;
  std::size_t batch = 16;
  std::size_t epochs = 30;
  std::uint64_t seed = 7;
  LaplacianScope scope = LaplacianScope::spatial_plus_positive_temporal;

  // Ablation switches.
  bool use_spectral = true;
  bool use_spatial_negative = true;
  bool use_temporal_negative = true;
  bool use_temporal_concat = true;
  bool untie_gat = false;
  // Encoder sees within-tile differences (tile = `tile`) instead of raw pixels.
  bool npr_input = true;
  // Per-node logits averaged over nodes instead of a head on pooled features.
  bool node_logits = false;
  // Zero classifier head: every clip starts at logits (0, 0), loss ln 2.
  bool zero_head_init = true;
};

// Throws ConfigError for out-of-range values.
void validate(const TrainConfig& config);

// Canonical `key=value` lines, one per field, in a fixed order.
std::string to_text(const TrainConfig& config);
// Sets one field from text; returns false for an unknown key.
bool apply_setting(TrainConfig& config, const std::string& key, const std::string& value);
TrainConfig parse_train_config(const std::string& text);

// Larger embedding width for parameter-budget parity experiments.
TrainConfig parity_preset();

// ---- parameters --------------------------------------------------------

ParamSet init_params(const TrainConfig& config, std::size_t channels);
std::size_t count_parameters(const TrainConfig& config, std::size_t channels);

// ---- forward -----------------------------------------------------------

/// Topology and spectral basis derived from one set of embeddings. Held
/// constant through backward; a cached copy lets finite-difference checks
/// evaluate the same graph at perturbed parameters.
struct ClipGraph {
  VideoGraph graph;
  SpectralBasis basis;
  Tensor negative_spatial;
  Tensor temporal_with_negative;
};

ClipGraph build_clip_graph(const NodeIndex& index, const Tensor& embeddings, const TrainConfig& config);

/// Which computation paths ran; used to verify ablation switches.
struct ForwardTrace {
  bool spectral_branch = false;
  bool spatial_negative = false;
  bool temporal_negative = false;
  bool temporal_concat = false;
  bool node_logits = false;
  std::size_t nodes = 0;
  std::size_t consistency_edges = 0;
  std::size_t inconsistency_edges = 0;
  bool isolated_rows = false;
};

struct ForwardResult {
  ad::Var logits;      // 1 x 2
  ad::Var embeddings;  // nodes x d, encoder output
  ad::Var z_spatial;   // 1 x d
  ad::Var z_spectral;  // 1 x d
  ad::Var node_logits; // nodes x 2, only in node_logits mode
  ForwardTrace trace;
};

// Per-patch encoder: LeakyReLU(patches * W + b), shared over patches and frames.
ad::Var encode_patches(ad::Var patches, const ad::Affine& encoder);

// The whole pipeline on one clip's patches. When `cached` is given its
// topology and basis are reused; otherwise they are built from the current
// embeddings and, if `built` is non-null, stored there.
ForwardResult forward(ad::Tape& tape, const BoundParams& params, const PatchTensor& patches,
                      const TrainConfig& config, const ClipGraph* cached = nullptr, ClipGraph* built = nullptr);

Tensor forward_logits(const FrameSequence& clip, const ParamSet& params, const TrainConfig& config);

// Softmax probability of the fake class.
double predict(const FrameSequence& clip, const ParamSet& params, const TrainConfig& config);
std::vector<double> predict_batch(const std::vector<const FrameSequence*>& clips, const ParamSet& params,
                                  const TrainConfig& config);

// Clip-level feature [Z_spatial, Z_spectral] (1 x 2d).
Tensor clip_embedding(const FrameSequence& clip, const ParamSet& params, const TrainConfig& config);

// ---- gradient verification --------------------------------------------

// 2 frames of 4x4 uniform noise, one channel.
FrameSequence toy_clip(std::uint64_t seed);
// l = 2, d = 8, random (non-zero) head so every parameter receives gradient.
TrainConfig toy_config();

// Central differences of the clip's cross-entropy against reverse mode, with
// topology and eigenbasis frozen at the unperturbed parameters.
GradCheckReport end_to_end_gradcheck(const FrameSequence& clip, int label, const ParamSet& params,
                                     const TrainConfig& config, double h = 1e-6);

// ---- training ----------------------------------------------------------

struct HistoryRow {
  std::size_t epoch = 0;
  std::string split;
  double loss = 0.0;
  double accuracy = 0.0;
};

struct TrainResult {
  ParamSet params;
  std::vector<HistoryRow> history;
  double initial_loss = 0.0;  // mean training loss before the first update
};

struct TrainSample {
  const FrameSequence* clip = nullptr;
  int label = 0;
};

using EpochCallback = std::function<void(const HistoryRow&)>;

// Mini-batch Adam on mean cross-entropy. Per-clip forward/backward passes in
// a batch run in parallel; gradients are summed in sample order, so results
// do not depend on the thread count.
TrainResult train(const std::vector<TrainSample>& samples, const TrainConfig& config,
                  const std::vector<TrainSample>* validation = nullptr, const EpochCallback& on_epoch = {});
TrainResult train(const std::vector<LabeledClip>& corpus, const TrainConfig& config);
TrainResult train_from_manifest(const std::filesystem::path& manifest, const TrainConfig& config);

void write_history_csv(const std::filesystem::path& path, const std::vector<HistoryRow>& history);

// ---- checkpoints -------------------------------------------------------
//
// "SSTG0001", u32 config length + config text, u32 entry count, then per
// entry: u32 name length, name, u32 rank, u64 dims, float64 data. All LE.

void save_checkpoint(const std::filesystem::path& path, const ParamSet& params, const TrainConfig& config,
                     const std::string& extra_config = {});

struct Checkpoint {
  ParamSet params;
  TrainConfig config;
  std::string config_text;
};
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace sstgnn
