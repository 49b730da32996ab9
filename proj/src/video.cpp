#include "sstgnn/video.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

#include "sstgnn/errors.hpp"
#include "sstgnn/rng.hpp"

namespace sstgnn {

Tensor FrameSequence::frame(std::size_t t, std::size_t c) const {
  Tensor f = Tensor::zeros(height, width);
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x) f(y, x) = at(t, y, x, c);
  return f;
}

double FrameSequence::frame_mad(std::size_t t) const {
  const std::size_t per = height * width * channels;
  double s = 0.0;
  for (std::size_t k = 0; k < per; ++k)
    s += std::abs(static_cast<double>(pixels[t * per + k]) - static_cast<double>(pixels[(t + 1) * per + k]));
  return s / static_cast<double>(per);
}

void validate(const FrameSequence& clip) {
  if (clip.frames == 0 || clip.height == 0 || clip.width == 0 || clip.channels == 0) {
    throw InputError("frame sequence has an empty dimension");
  }
  if (clip.pixels.size() != clip.frames * clip.height * clip.width * clip.channels) {
    throw InputError("frame sequence storage does not match its shape");
  }
  for (float v : clip.pixels)
    if (!(v >= 0.0f && v <= 1.0f)) throw InputError("pixel value outside [0,1]");
}

std::string_view to_string(Family f) {
  switch (f) {
    case Family::real: return "real";
    case Family::upsample_artifact: return "upsample_artifact";
    case Family::temporal_jitter: return "temporal_jitter";
    case Family::spectral_noise: return "spectral_noise";
  }
  return "?";
}

Family parse_family(std::string_view s) {
  for (Family f : kAllFamilies)
    if (to_string(f) == s) return f;
  throw InputError("unknown family '" + std::string(s) + "'");
}

// ---- synthesis ---------------------------------------------------------

namespace {

constexpr double kNoiseSigma = 0.03;

struct Wave {
  double fx, fy, amplitude, phase;
};

/// Band-limited texture translating at a constant velocity.
class Content {
 public:
  Content(const rng::Stream& s, const SynthSpec& spec) {
    const rng::Stream waves = s.child("waves");
    for (std::size_t k = 0; k < waves_.size(); ++k) {
      const rng::Stream w = waves.child(k);
      long kx = 0, ky = 0;
      for (std::uint64_t c = 0; kx == 0 && ky == 0; c += 2) {
        kx = static_cast<long>(w.below(c, 7)) - 3;
        ky = static_cast<long>(w.below(c + 1, 7)) - 3;
      }
      waves_[k] = {static_cast<double>(kx) / static_cast<double>(spec.width),
                   static_cast<double>(ky) / static_cast<double>(spec.height), w.uniform(100, 0.05, 0.1),
                   w.uniform(101, 0.0, 2.0 * std::numbers::pi)};
    }
    const double heading = s.uniform(1, 0.0, 2.0 * std::numbers::pi);
    vx_ = spec.motion * std::cos(heading);
    vy_ = spec.motion * std::sin(heading);
  }

  double operator()(double x, double y, double t, std::size_t c) const {
    double v = 0.5;
    for (const Wave& w : waves_) {
      const double arg = 2.0 * std::numbers::pi * (w.fx * (x - vx_ * t) + w.fy * (y - vy_ * t));
      v += w.amplitude * std::sin(arg + w.phase + 0.3 * static_cast<double>(c));
    }
    return v;
  }

 private:
  std::array<Wave, 4> waves_{};
  double vx_ = 0.0, vy_ = 0.0;
};

float clamp01(double v) { return static_cast<float>(std::clamp(v, 0.0, 1.0)); }

FrameSequence render_real(const SynthSpec& spec, const Content& content, const rng::Stream& noise) {
  FrameSequence clip(spec.frames, spec.height, spec.width, spec.channels);
  for (std::size_t t = 0; t < spec.frames; ++t)
    for (std::size_t y = 0; y < spec.height; ++y)
      for (std::size_t x = 0; x < spec.width; ++x)
        for (std::size_t c = 0; c < spec.channels; ++c) {
          const double base = content(static_cast<double>(x), static_cast<double>(y), static_cast<double>(t), c);
          clip.at(t, y, x, c) = clamp01(base + kNoiseSigma * noise.normal(clip.index(t, y, x, c)));
        }
  return clip;
}

FrameSequence render_upsampled(const SynthSpec& spec, const Content& content, const rng::Stream& noise) {
  FrameSequence clip(spec.frames, spec.height, spec.width, spec.channels);
  const std::size_t hh = spec.height / 2, hw = spec.width / 2;
  for (std::size_t t = 0; t < spec.frames; ++t)
    for (std::size_t y = 0; y < hh; ++y)
      for (std::size_t x = 0; x < hw; ++x)
        for (std::size_t c = 0; c < spec.channels; ++c) {
          // Sample at the centre of the 2x2 block this half-resolution pixel covers.
          const double base =
              content(2.0 * static_cast<double>(x) + 0.5, 2.0 * static_cast<double>(y) + 0.5, static_cast<double>(t), c);
          const std::size_t counter = ((t * hh + y) * hw + x) * spec.channels + c;
          const float v = clamp01(base + kNoiseSigma * noise.normal(counter));
          for (std::size_t dy = 0; dy < 2; ++dy)
            for (std::size_t dx = 0; dx < 2; ++dx) clip.at(t, 2 * y + dy, 2 * x + dx, c) = v;
        }
  return clip;
}

void apply_jitter(FrameSequence& clip, const SynthSpec& spec, const rng::Stream& s) {
  const std::size_t per = clip.height * clip.width * clip.channels;
  auto frame_ptr = [&](std::size_t t) { return clip.pixels.begin() + static_cast<std::ptrdiff_t>(t * per); };

  // Duplications and swaps of neighbouring frames. Distant swaps would
  // disturb several frame steps at once and hide the jumps below.
  const std::size_t events =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(spec.strength * static_cast<double>(spec.frames) / 4.0)));
  const rng::Stream ev = s.child("events");
  for (std::size_t e = 0; e < events; ++e) {
    const std::size_t t = 1 + ev.below(2 * e, spec.frames - 1);
    if (ev.uniform(2 * e + 1) < 0.5) {
      std::copy(frame_ptr(t - 1), frame_ptr(t), frame_ptr(t));
    } else {
      std::swap_ranges(frame_ptr(t - 1), frame_ptr(t), frame_ptr(t));
    }
  }

  // Brightness steps: from frame t on, every pixel shifts by +-jump. One is
  // guaranteed; each other step position fires with probability 0.1.
  const rng::Stream br = s.child("brightness");
  const double jump = 0.25 + 0.2 * spec.strength;
  const std::size_t forced = 1 + br.below(0, spec.frames - 1);
  for (std::size_t t = 1; t < spec.frames; ++t) {
    if (t != forced && br.uniform(10 + t) >= 0.1) continue;
    double mean = 0.0;
    for (auto it = frame_ptr(t); it != frame_ptr(spec.frames); ++it) mean += *it;
    mean /= static_cast<double>(per * (spec.frames - t));
    // Push away from the nearer bound so the step survives clamping.
    const double delta = mean > 0.5 ? -jump : jump;
    for (auto it = frame_ptr(t); it != frame_ptr(spec.frames); ++it) *it = clamp01(*it + delta);
  }
}

void apply_checker(FrameSequence& clip, const SynthSpec& spec) {
  const double amp = 0.1 * spec.strength;
  for (std::size_t t = 0; t < clip.frames; ++t)
    for (std::size_t y = 0; y < clip.height; ++y)
      for (std::size_t x = 0; x < clip.width; ++x)
        for (std::size_t c = 0; c < clip.channels; ++c) {
          const double sign = ((x + y) % 2 == 0) ? 1.0 : -1.0;
          clip.at(t, y, x, c) = clamp01(clip.at(t, y, x, c) + sign * amp);
        }
}

}  // namespace

LabeledClip generate(const SynthSpec& spec) {
  if (spec.frames < 2) throw InputError("synth: need at least 2 frames");
  if (spec.height == 0 || spec.width == 0 || spec.channels == 0) throw InputError("synth: empty frame shape");
  if (spec.family != Family::real && !(spec.strength > 0.0)) {
    throw InputError("synth: artifact strength must be positive for fake families");
  }
  if (spec.family == Family::upsample_artifact && (spec.height % 2 || spec.width % 2)) {
    throw InputError("synth: upsample_artifact needs even frame dimensions");
  }

  const rng::Stream root(spec.seed, "clip");
  const Content content(root.child("content"), spec);
  const rng::Stream noise = root.child("noise");

  LabeledClip out;
  out.family = spec.family;
  out.label = label_of(spec.family);
  out.seed = spec.seed;
  switch (spec.family) {
    case Family::real:
      out.clip = render_real(spec, content, noise);
      break;
    case Family::upsample_artifact:
      out.clip = render_upsampled(spec, content, noise.child("half"));
      break;
    case Family::temporal_jitter:
      out.clip = render_real(spec, content, noise);
      apply_jitter(out.clip, spec, root.child("jitter"));
      break;
    case Family::spectral_noise:
      out.clip = render_real(spec, content, noise);
      apply_checker(out.clip, spec);
      break;
  }
  return out;
}

// ---- container ---------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'V', 'G', 'F', 'R', 'A', 'M', 'E', '1'};

void put_u32(std::ostream& os, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

void save_clip(const std::filesystem::path& path, const FrameSequence& clip, std::optional<int> label) {
  validate(clip);
  if (label && *label != 0 && *label != 1) throw InputError("save_clip: label must be 0 or 1");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot write " + path.string());
  os.write(kMagic, sizeof kMagic);
  put_u32(os, static_cast<std::uint32_t>(clip.frames));
  put_u32(os, static_cast<std::uint32_t>(clip.height));
  put_u32(os, static_cast<std::uint32_t>(clip.width));
  put_u32(os, static_cast<std::uint32_t>(clip.channels));
  for (float v : clip.pixels) put_u32(os, std::bit_cast<std::uint32_t>(v));
  if (label) os.put(static_cast<char>(*label));
  if (!os) throw InputError("write failed for " + path.string());
}

LoadedClip load_labeled_clip(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot read " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (bytes.size() < kClipHeaderBytes) throw FormatError(path.string() + ": truncated header");
  if (std::memcmp(bytes.data(), kMagic, 7) != 0) throw FormatError(path.string() + ": bad magic");
  if (bytes[7] != static_cast<unsigned char>(kMagic[7])) {
    throw FormatError(path.string() + ": unsupported container version");
  }
  LoadedClip out;
  FrameSequence& c = out.clip;
  c.frames = get_u32(&bytes[8]);
  c.height = get_u32(&bytes[12]);
  c.width = get_u32(&bytes[16]);
  c.channels = get_u32(&bytes[20]);
  const std::size_t n = c.frames * c.height * c.width * c.channels;
  const std::size_t payload = kClipHeaderBytes + 4 * n;
  if (bytes.size() == payload + 1) {
    out.label = bytes.back();
    if (*out.label > 1) throw FormatError(path.string() + ": label byte not 0/1");
  } else if (bytes.size() != payload) {
    throw FormatError(path.string() + ": expected " + std::to_string(payload) + " bytes, found " +
                      std::to_string(bytes.size()));
  }
  c.pixels.resize(n);
  for (std::size_t k = 0; k < n; ++k) c.pixels[k] = std::bit_cast<float>(get_u32(&bytes[kClipHeaderBytes + 4 * k]));
  return out;
}

FrameSequence load_clip(const std::filesystem::path& path) { return load_labeled_clip(path).clip; }

// ---- manifest ----------------------------------------------------------

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot write " + path.string());
  os << "path,label,family,seed\n";
  for (const auto& e : entries) os << e.path << ',' << e.label << ',' << to_string(e.family) << ',' << e.seed << '\n';
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot read manifest " + path.string());
  std::string line;
  if (!std::getline(is, line) || line.rfind("path,label,family,seed", 0) != 0) {
    throw FormatError(path.string() + ": missing manifest header");
  }
  std::vector<ManifestEntry> out;
  const auto base = path.parent_path();
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string p, label, fam, seed;
    if (!std::getline(ss, p, ',') || !std::getline(ss, label, ',') || !std::getline(ss, fam, ',') ||
        !std::getline(ss, seed)) {
      throw FormatError(path.string() + ": malformed row '" + line + "'");
    }
    ManifestEntry e;
    std::filesystem::path clip_path(p);
    e.path = clip_path.is_absolute() ? p : (base / clip_path).string();
    try {
      e.label = std::stoi(label);
      e.seed = std::stoull(seed);
    } catch (const std::exception&) {
      throw FormatError(path.string() + ": bad number in row '" + line + "'");
    }
    e.family = parse_family(fam);
    if (e.label != label_of(e.family)) throw FormatError(path.string() + ": label/family mismatch in '" + line + "'");
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<ManifestEntry> synthesize_corpus(const std::filesystem::path& dir, const std::vector<Family>& families,
                                             std::size_t count, std::uint64_t first_seed, const SynthSpec& shape) {
  std::filesystem::create_directories(dir);
  std::vector<ManifestEntry> entries;
  for (Family f : families) {
    for (std::size_t k = 0; k < count; ++k) {
      SynthSpec spec = shape;
      spec.family = f;
      spec.seed = first_seed + k;
      const LabeledClip clip = generate(spec);
      const std::string name = std::string(to_string(f)) + "_" + std::to_string(spec.seed) + ".vgf";
      save_clip(dir / name, clip.clip, clip.label);
      entries.push_back({name, clip.label, f, spec.seed});
    }
  }
  write_manifest(dir / "manifest.csv", entries);
  return entries;
}

}  // namespace sstgnn
