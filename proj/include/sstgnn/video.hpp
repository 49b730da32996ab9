#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sstgnn/tensor.hpp"

namespace sstgnn {

/// T frames of H x W x C pixels in [0, 1], stored frame-major, row-major,
/// channel-last as float32 so the on-disk container round-trips exactly.
struct FrameSequence {
  std::size_t frames = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::vector<float> pixels;

  FrameSequence() = default;
  FrameSequence(std::size_t t, std::size_t h, std::size_t w, std::size_t c)
      : frames(t), height(h), width(w), channels(c), pixels(t * h * w * c, 0.0f) {}

  std::size_t index(std::size_t t, std::size_t y, std::size_t x, std::size_t c) const noexcept {
    return ((t * height + y) * width + x) * channels + c;
  }
  float& at(std::size_t t, std::size_t y, std::size_t x, std::size_t c = 0) noexcept { return pixels[index(t, y, x, c)]; }
  float at(std::size_t t, std::size_t y, std::size_t x, std::size_t c = 0) const noexcept {
    return pixels[index(t, y, x, c)];
  }

  // One channel of one frame as an H x W matrix.
  Tensor frame(std::size_t t, std::size_t c = 0) const;
  // Mean absolute difference between frames t and t+1.
  double frame_mad(std::size_t t) const;

  bool operator==(const FrameSequence&) const = default;
};

// Throws InputError unless the shape is non-empty, storage matches it and
// every pixel lies in [0, 1].
void validate(const FrameSequence& clip);

enum class Family { real, upsample_artifact, temporal_jitter, spectral_noise };

inline constexpr Family kAllFamilies[] = {Family::real, Family::upsample_artifact, Family::temporal_jitter,
                                          Family::spectral_noise};
inline constexpr Family kFakeFamilies[] = {Family::upsample_artifact, Family::temporal_jitter,
                                           Family::spectral_noise};

std::string_view to_string(Family f);
Family parse_family(std::string_view s);
inline int label_of(Family f) { return f == Family::real ? 0 : 1; }

struct SynthSpec {
  Family family = Family::real;
  std::uint64_t seed = 0;
  std::size_t frames = 8;
  std::size_t height = 64;
  std::size_t width = 64;
  std::size_t channels = 1;
  double motion = 1.0;    // translation speed, pixels per frame
  double strength = 0.5;  // artifact strength, must be > 0 for fake families
};

struct LabeledClip {
  FrameSequence clip;
  int label = 0;
  Family family = Family::real;
  std::uint64_t seed = 0;
};

/// Deterministic synthetic clip. Every family shares the same underlying
/// content for a given seed: a band-limited texture (a few low-frequency
/// sinusoids) translating at constant velocity plus per-pixel sensor noise.
///   upsample_artifact  content and noise rendered at half resolution, then
///                      nearest-neighbour upsampled, so every 2x2 block is flat
///   temporal_jitter    neighbour swaps/duplications and abrupt brightness steps
///   spectral_noise     a fixed (-1)^(x+y) checker pattern added on top
LabeledClip generate(const SynthSpec& spec);

// ---- clip container ----------------------------------------------------
//
// "VGFRAME1" magic, u32 LE frames/height/width/channels, then the pixels as
// float32 LE. Labeled archives append a single label byte.

inline constexpr std::size_t kClipHeaderBytes = 8 + 4 * 4;

void save_clip(const std::filesystem::path& path, const FrameSequence& clip,
               std::optional<int> label = std::nullopt);

struct LoadedClip {
  FrameSequence clip;
  std::optional<int> label;
};
LoadedClip load_labeled_clip(const std::filesystem::path& path);
FrameSequence load_clip(const std::filesystem::path& path);

// ---- corpus manifest (CSV: path,label,family,seed) ----------------------

struct ManifestEntry {
  std::string path;
  int label = 0;
  Family family = Family::real;
  std::uint64_t seed = 0;
};

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);
// Relative clip paths are resolved against the manifest's directory.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

// Generates `count` clips per family with seeds first_seed, first_seed+1, ...
// into `dir` and writes dir/manifest.csv. Returns the entries written.
std::vector<ManifestEntry> synthesize_corpus(const std::filesystem::path& dir, const std::vector<Family>& families,
                                             std::size_t count, std::uint64_t first_seed, const SynthSpec& shape);

}  // namespace sstgnn
