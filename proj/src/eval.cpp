#include "sstgnn/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <sstream>

#include "sstgnn/errors.hpp"

namespace sstgnn {

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DimensionError("auc: scores and labels differ in length");
  std::size_t pos = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw InputError("auc: labels must be 0 or 1");
    pos += static_cast<std::size_t>(y);
  }
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw MetricError("auc: undefined unless both classes are present");
  for (double s : scores)
    if (std::isnan(s)) throw InputError("auc: NaN score");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Average 1-based rank over each run of equal scores.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k)
      if (labels[order[k]] == 1) rank_sum += avg;
    i = j + 1;
  }
  const double p = static_cast<double>(pos), q = static_cast<double>(neg);
  const double u = rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * q);
}

double accuracy(std::span<const double> scores, std::span<const int> labels, double threshold) {
  if (scores.size() != labels.size()) throw DimensionError("accuracy: scores and labels differ in length");
  if (scores.empty()) throw InputError("accuracy: empty input");
  std::size_t hit = 0;
  for (std::size_t k = 0; k < scores.size(); ++k) hit += ((scores[k] >= threshold ? 1 : 0) == labels[k]) ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(scores.size());
}

std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::in_domain: return "in_domain";
    case Protocol::one_to_many: return "one_to_many";
    case Protocol::many_to_many: return "many_to_many";
  }
  return "?";
}

Protocol parse_protocol(std::string_view s) {
  if (s == "in_domain") return Protocol::in_domain;
  if (s == "one_to_many") return Protocol::one_to_many;
  if (s == "many_to_many") return Protocol::many_to_many;
  throw ConfigError("unknown protocol '" + std::string(s) + "'");
}

void require_disjoint(const SeedRange& train, const SeedRange& test) {
  if (train.overlaps(test)) {
    throw SplitError("train seeds [" + std::to_string(train.first) + ", " + std::to_string(train.end()) +
                     ") overlap test seeds [" + std::to_string(test.first) + ", " + std::to_string(test.end()) + ")");
  }
}

SynthSpec EvalOptions::clip_shape() const {
  SynthSpec s;
  s.frames = frames;
  s.height = height;
  s.width = width;
  s.channels = channels;
  s.motion = motion;
  s.strength = strength;
  return s;
}

namespace {

template <class T>
T number(const std::string& key, const std::string& raw) {
  const auto b = raw.find_first_not_of(" \t\r");
  const auto e = raw.find_last_not_of(" \t\r");
  const std::string v = b == std::string::npos ? std::string() : raw.substr(b, e - b + 1);
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError("config: " + key + " expects a number, got '" + v + "'");
  return out;
}

std::string fmt(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string trimmed(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

}  // namespace

bool apply_setting(EvalOptions& o, const std::string& key, const std::string& value) {
  if (apply_setting(o.train, key, value)) return true;
  if (key == "train_first_seed") o.train_seeds.first = number<std::uint64_t>(key, value);
  else if (key == "train_count") o.train_seeds.count = number<std::size_t>(key, value);
  else if (key == "test_first_seed") o.test_seeds.first = number<std::uint64_t>(key, value);
  else if (key == "test_count") o.test_seeds.count = number<std::size_t>(key, value);
  else if (key == "frames") o.frames = number<std::size_t>(key, value);
  else if (key == "height") o.height = number<std::size_t>(key, value);
  else if (key == "width") o.width = number<std::size_t>(key, value);
  else if (key == "channels") o.channels = number<std::size_t>(key, value);
  else if (key == "motion") o.motion = number<double>(key, value);
  else if (key == "strength") o.strength = number<double>(key, value);
  else return false;
  return true;
}

EvalOptions parse_eval_options(const std::string& text, EvalOptions base) {
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trimmed(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trimmed(line.substr(0, eq));
    if (!apply_setting(base, key, line.substr(eq + 1))) {
      throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  validate(base.train);
  return base;
}

std::string to_text(const EvalOptions& o) {
  std::ostringstream os;
  os << to_text(o.train) << "train_first_seed=" << o.train_seeds.first << '\n'
     << "train_count=" << o.train_seeds.count << '\n'
     << "test_first_seed=" << o.test_seeds.first << '\n'
     << "test_count=" << o.test_seeds.count << '\n'
     << "frames=" << o.frames << '\n'
     << "height=" << o.height << '\n'
     << "width=" << o.width << '\n'
     << "channels=" << o.channels << '\n'
     << "motion=" << fmt(o.motion) << '\n'
     << "strength=" << fmt(o.strength) << '\n';
  return os.str();
}

std::string config_hash(std::string_view text) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng::hash_name(text)));
  return buf;
}

std::string config_hash(const EvalOptions& options) { return config_hash(to_text(options)); }

std::string TrainSet::name() const {
  std::string s;
  for (Family f : fakes) {
    if (!s.empty()) s += '+';
    s += to_string(f);
  }
  return s;
}

TrainSet parse_train_set(std::string_view name) {
  TrainSet set;
  while (!name.empty()) {
    const auto plus = name.find('+');
    const Family f = parse_family(name.substr(0, plus));
    if (f == Family::real) throw ConfigError("train set lists fake families only");
    set.fakes.push_back(f);
    if (plus == std::string_view::npos) break;
    name.remove_prefix(plus + 1);
  }
  if (set.fakes.empty()) throw ConfigError("empty train set");
  return set;
}

std::vector<TrainSet> train_sets(Protocol p) {
  std::vector<TrainSet> out;
  if (p == Protocol::many_to_many) {
    for (std::size_t a = 0; a < std::size(kFakeFamilies); ++a)
      for (std::size_t b = a + 1; b < std::size(kFakeFamilies); ++b) out.push_back({{kFakeFamilies[a], kFakeFamilies[b]}});
  } else {
    for (Family f : kFakeFamilies) out.push_back({{f}});
  }
  return out;
}

std::vector<Family> test_families(Protocol p, const TrainSet& set) {
  if (p == Protocol::in_domain) return set.fakes;
  std::vector<Family> out;
  for (Family f : kFakeFamilies)
    if (std::find(set.fakes.begin(), set.fakes.end(), f) == set.fakes.end()) out.push_back(f);
  return out;
}

std::vector<LabeledClip> make_split(const std::vector<Family>& fakes, const SeedRange& seeds, const EvalOptions& o) {
  if (fakes.empty()) throw ConfigError("make_split: no fake families");
  const std::size_t n = seeds.count;
  std::vector<LabeledClip> clips(2 * n);
  std::vector<std::exception_ptr> errors(2 * n);
  const SynthSpec shape = o.clip_shape();
  const long long total = static_cast<long long>(2 * n);
#pragma omp parallel for schedule(dynamic)
  for (long long k = 0; k < total; ++k) {
    try {
      const std::size_t i = static_cast<std::size_t>(k) % n;
      SynthSpec spec = shape;
      spec.seed = seeds.first + i;
      spec.family = static_cast<std::size_t>(k) < n ? Family::real : fakes[i % fakes.size()];
      clips[k] = generate(spec);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return clips;
}

double MetricReport::mean_accuracy() const {
  if (rows.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : rows) s += r.accuracy;
  return s / static_cast<double>(rows.size());
}

double MetricReport::mean_auc() const {
  if (rows.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : rows) s += r.auc;
  return s / static_cast<double>(rows.size());
}

void write_report_csv(std::ostream& os, const MetricReport& report) {
  os << "protocol,train_set,test_family,n,accuracy,auc,seed,config_hash\n";
  for (const auto& r : report.rows) {
    os << r.protocol << ',' << r.train_set << ',' << r.test_family << ',' << r.n << ',' << fmt(r.accuracy) << ','
       << fmt(r.auc) << ',' << r.seed << ',' << r.config_hash << '\n';
  }
}

std::string report_csv(const MetricReport& report) {
  std::ostringstream os;
  write_report_csv(os, report);
  return os.str();
}

MetricReport evaluate_model(const ParamSet& params, Protocol p, const TrainSet& set, const EvalOptions& o) {
  require_disjoint(o.train_seeds, o.test_seeds);
  const std::string hash = config_hash(o);
  MetricReport report;
  for (Family f : test_families(p, set)) {
    const std::vector<LabeledClip> clips = make_split({f}, o.test_seeds, o);
    std::vector<const FrameSequence*> ptrs;
    std::vector<int> labels;
    for (const auto& c : clips) {
      ptrs.push_back(&c.clip);
      labels.push_back(c.label);
    }
    const std::vector<double> scores = predict_batch(ptrs, params, o.train);
    report.rows.push_back({std::string(to_string(p)), set.name(), std::string(to_string(f)), clips.size(),
                           accuracy(scores, labels), auc(scores, labels), o.train.seed, hash});
  }
  return report;
}

MetricReport run_protocol(Protocol p, const EvalOptions& o, const ProgressFn& progress) {
  require_disjoint(o.train_seeds, o.test_seeds);
  MetricReport report;
  for (const TrainSet& set : train_sets(p)) {
    const std::vector<LabeledClip> corpus = make_split(set.fakes, o.train_seeds, o);
    std::vector<TrainSample> samples;
    for (const auto& c : corpus) samples.push_back({&c.clip, c.label});
    EpochCallback cb;
    if (progress) cb = [&](const HistoryRow& row) { progress(set.name(), row); };
    const TrainResult trained = train(samples, o.train, nullptr, cb);
    MetricReport part = evaluate_model(trained.params, p, set, o);
    report.rows.insert(report.rows.end(), part.rows.begin(), part.rows.end());
  }
  return report;
}

void write_embeddings_csv(std::ostream& os, const std::vector<LabeledClip>& clips, const ParamSet& params,
                          const TrainConfig& config) {
  std::vector<Tensor> rows(clips.size());
  std::vector<std::exception_ptr> errors(clips.size());
  const long long n = static_cast<long long>(clips.size());
#pragma omp parallel for schedule(dynamic)
  for (long long k = 0; k < n; ++k) {
    try {
      rows[k] = clip_embedding(clips[k].clip, params, config);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  os << "family,label,seed";
  const std::size_t width = rows.empty() ? 0 : rows.front().size();
  for (std::size_t j = 0; j < width; ++j) os << ",e" << j;
  os << '\n';
  for (std::size_t k = 0; k < clips.size(); ++k) {
    os << to_string(clips[k].family) << ',' << clips[k].label << ',' << clips[k].seed;
    for (double v : rows[k].data()) os << ',' << fmt(v);
    os << '\n';
  }
}

}  // namespace sstgnn
