#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sstgnn/detector.hpp"
#include "sstgnn/video.hpp"

namespace sstgnn {

// ---- metrics -----------------------------------------------------------

// Mann-Whitney U / (#pos * #neg) via average ranks; tied pairs count 1/2.
// Throws MetricError unless both classes are present.
double auc(std::span<const double> scores, std::span<const int> labels);

// Fraction of items with (score >= threshold) == label.
double accuracy(std::span<const double> scores, std::span<const int> labels, double threshold = 0.5);

// ---- protocols ---------------------------------------------------------

enum class Protocol { in_domain, one_to_many, many_to_many };
std::string_view to_string(Protocol p);
Protocol parse_protocol(std::string_view s);

struct SeedRange {
  std::uint64_t first = 0;
  std::size_t count = 0;

  std::uint64_t end() const noexcept { return first + count; }
  bool contains(std::uint64_t s) const noexcept { return s >= first && s < end(); }
  bool overlaps(const SeedRange& o) const noexcept { return first < o.end() && o.first < end(); }
};

// Throws SplitError when the ranges intersect.
void require_disjoint(const SeedRange& train, const SeedRange& test);

/// Everything that determines an experiment: model/optimiser settings plus
/// corpus shape and the train/test seed ranges.
struct EvalOptions {
  TrainConfig train;
  SeedRange train_seeds{1000, 64};
  SeedRange test_seeds{900000, 32};
  std::size_t frames = 8;
  std::size_t height = 64;
  std::size_t width = 64;
  std::size_t channels = 1;
  double motion = 1.0;
  double strength = 0.5;

  SynthSpec clip_shape() const;
};

// Train keys are forwarded to the TrainConfig. Returns false for unknown keys.
bool apply_setting(EvalOptions& options, const std::string& key, const std::string& value);
// key=value lines over `base`; '#' starts a comment. Unknown keys throw ConfigError.
EvalOptions parse_eval_options(const std::string& text, EvalOptions base = {});
// Canonical text of the effective configuration.
std::string to_text(const EvalOptions& options);
// 64-bit FNV-1a of the canonical text, as 16 lowercase hex digits.
std::string config_hash(std::string_view canonical_text);
std::string config_hash(const EvalOptions& options);

/// Fake families a model is trained on, always alongside real clips.
struct TrainSet {
  std::vector<Family> fakes;
  std::string name() const;  // families joined with '+'
};
TrainSet parse_train_set(std::string_view name);

// in_domain: each fake family alone. one_to_many: the same sets. many_to_many:
// every pair of fake families.
std::vector<TrainSet> train_sets(Protocol p);
// in_domain: the trained family; otherwise the fake families not trained on.
std::vector<Family> test_families(Protocol p, const TrainSet& set);

// `seeds.count` real clips plus `seeds.count` fake clips, the k-th fake taken
// from fakes[k % fakes.size()]. Real and fake clips at one seed share content.
std::vector<LabeledClip> make_split(const std::vector<Family>& fakes, const SeedRange& seeds,
                                    const EvalOptions& options);

struct MetricRow {
  std::string protocol;
  std::string train_set;
  std::string test_family;
  std::size_t n = 0;
  double accuracy = 0.0;
  double auc = 0.0;
  std::uint64_t seed = 0;
  std::string config_hash;
};

struct MetricReport {
  std::vector<MetricRow> rows;
  double mean_accuracy() const;
  double mean_auc() const;
};

// Header: protocol,train_set,test_family,n,accuracy,auc,seed,config_hash
void write_report_csv(std::ostream& os, const MetricReport& report);
std::string report_csv(const MetricReport& report);

// Rows for one trained model: one per test family of (p, set).
MetricReport evaluate_model(const ParamSet& params, Protocol p, const TrainSet& set, const EvalOptions& options);

using ProgressFn = std::function<void(const std::string& train_set, const HistoryRow&)>;

// Trains one model per train set and evaluates it on the protocol's test
// families. Row count = |train sets| x |test families per set|.
MetricReport run_protocol(Protocol p, const EvalOptions& options, const ProgressFn& progress = {});

// family,label,seed,e0,...,e{2d-1}: pooled [Z_spatial, Z_spectral] per clip.
void write_embeddings_csv(std::ostream& os, const std::vector<LabeledClip>& clips, const ParamSet& params,
                          const TrainConfig& config);

}  // namespace sstgnn
