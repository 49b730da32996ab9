// sstgnn: corpus synthesis, training, evaluation and numerical checks.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sstgnn/detector.hpp"
#include "sstgnn/differential.hpp"
#include "sstgnn/errors.hpp"
#include "sstgnn/eval.hpp"
#include "sstgnn/kernels.hpp"
#include "sstgnn/rng.hpp"
#include "sstgnn/spectral.hpp"
#include "sstgnn/video.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace sstgnn;

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;

// "0.0e0", "1.3e-16": one decimal, bare exponent.
std::string short_sci(double v) {
  if (v == 0.0) return "0.0e0";
  int e = static_cast<int>(std::floor(std::log10(std::fabs(v))));
  double m = v / std::pow(10.0, e);
  if (std::fabs(m) >= 9.95) {
    m /= 10.0;
    ++e;
  }
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.1fe%d", m, e);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw InputError("cannot read " + p.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw InputError("cannot write " + p.string());
  os << text;
}

void write_run_record(const fs::path& dir, const std::string& command, const json& body) {
  json rec;
  rec["command"] = command;
  for (auto it = body.begin(); it != body.end(); ++it) rec[it.key()] = it.value();
  rec["threads"] = kernels::num_threads();
  write_text(dir / "run.json", rec.dump(2) + "\n");
}

json config_json(const std::string& text) {
  json obj = json::object();
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) obj[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return obj;
}

// File settings over defaults, then --set overrides over the file.
EvalOptions effective_options(const std::string& config_file, const std::vector<std::string>& overrides) {
  EvalOptions o;
  if (!config_file.empty()) o = parse_eval_options(slurp(config_file), o);
  std::string extra;
  for (const auto& kv : overrides) extra += kv + "\n";
  return parse_eval_options(extra, o);
}

std::vector<Family> parse_family_list(const std::string& list) {
  std::vector<Family> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_family(item));
  if (out.empty()) throw ConfigError("empty family list");
  return out;
}

// ---- subcommands -------------------------------------------------------

struct SynthArgs {
  std::string families = "real,upsample_artifact,temporal_jitter,spectral_noise";
  std::size_t count = 8;
  std::uint64_t seed = 1000;
  std::string out;
  std::size_t frames = 8, height = 64, width = 64, channels = 1;
  double motion = 1.0, strength = 0.5;
};

int run_synth(const SynthArgs& a) {
  SynthSpec shape;
  shape.frames = a.frames;
  shape.height = a.height;
  shape.width = a.width;
  shape.channels = a.channels;
  shape.motion = a.motion;
  shape.strength = a.strength;
  fs::create_directories(a.out);
  const auto entries = synthesize_corpus(a.out, parse_family_list(a.families), a.count, a.seed, shape);
  json body;
  body["families"] = a.families;
  body["count"] = a.count;
  body["first_seed"] = a.seed;
  body["shape"] = {{"frames", a.frames}, {"height", a.height}, {"width", a.width}, {"channels", a.channels}};
  body["motion"] = a.motion;
  body["strength"] = a.strength;
  body["clips"] = entries.size();
  body["outputs"] = {"manifest.csv"};
  write_run_record(a.out, "synth", body);
  std::cout << "wrote " << entries.size() << " clips to " << a.out << "\n";
  return kOk;
}

struct TrainArgs {
  std::string manifest, config, out;
  std::vector<std::string> overrides;
};

int run_train(const TrainArgs& a) {
  EvalOptions o = effective_options(a.config, a.overrides);
  const auto entries = read_manifest(a.manifest);
  if (entries.empty()) throw ConfigError("manifest lists no clips");

  std::vector<LabeledClip> corpus(entries.size());
  std::uint64_t lo = entries.front().seed, hi = lo;
  TrainSet set;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    corpus[k].clip = load_clip(entries[k].path);
    corpus[k].label = entries[k].label;
    corpus[k].family = entries[k].family;
    corpus[k].seed = entries[k].seed;
    lo = std::min(lo, entries[k].seed);
    hi = std::max(hi, entries[k].seed);
    if (entries[k].family != Family::real &&
        std::find(set.fakes.begin(), set.fakes.end(), entries[k].family) == set.fakes.end()) {
      set.fakes.push_back(entries[k].family);
    }
  }
  std::sort(set.fakes.begin(), set.fakes.end());
  const FrameSequence& first = corpus.front().clip;
  o.frames = first.frames;
  o.height = first.height;
  o.width = first.width;
  o.channels = first.channels;
  o.train_seeds = {lo, static_cast<std::size_t>(hi - lo + 1)};
  require_disjoint(o.train_seeds, o.test_seeds);

  const std::string text = to_text(o);
  const std::string hash = config_hash(text);
  std::cerr << "config " << hash << "\n" << text;

  std::vector<TrainSample> samples;
  for (const auto& c : corpus) samples.push_back({&c.clip, c.label});
  const TrainResult result = train(samples, o.train, nullptr, [](const HistoryRow& r) {
    std::fprintf(stderr, "epoch %3zu %s loss %.6f acc %.4f\n", r.epoch, r.split.c_str(), r.loss, r.accuracy);
  });

  fs::create_directories(a.out);
  const std::string extra = "train_first_seed=" + std::to_string(o.train_seeds.first) + "\n" +
                            "train_count=" + std::to_string(o.train_seeds.count) + "\n" +
                            "test_first_seed=" + std::to_string(o.test_seeds.first) + "\n" +
                            "test_count=" + std::to_string(o.test_seeds.count) + "\n" +
                            "frames=" + std::to_string(o.frames) + "\n" + "height=" + std::to_string(o.height) + "\n" +
                            "width=" + std::to_string(o.width) + "\n" + "channels=" + std::to_string(o.channels) + "\n" +
                            "motion=" + config_json(text)["motion"].get<std::string>() + "\n" +
                            "strength=" + config_json(text)["strength"].get<std::string>() + "\n" +
                            "train_set=" + set.name() + "\n";
  save_checkpoint(fs::path(a.out) / "checkpoint.bin", result.params, o.train, extra);
  write_history_csv(fs::path(a.out) / "history.csv", result.history);
  const MetricReport report = evaluate_model(result.params, Protocol::in_domain, set, o);
  write_text(fs::path(a.out) / "report.csv", report_csv(report));

  json body;
  body["manifest"] = a.manifest;
  body["config_hash"] = hash;
  body["config"] = config_json(text);
  body["train_set"] = set.name();
  body["initial_loss"] = result.initial_loss;
  body["final_loss"] = result.history.empty() ? result.initial_loss : result.history.back().loss;
  body["outputs"] = {"checkpoint.bin", "history.csv", "report.csv"};
  write_run_record(a.out, "train", body);
  std::cout << report_csv(report);
  return kOk;
}

struct EvalArgs {
  std::string checkpoint, protocol = "in_domain", config, out, embeddings;
  std::vector<std::string> overrides;
};

int run_eval(const EvalArgs& a) {
  const Protocol p = parse_protocol(a.protocol);
  MetricReport report;
  std::string text;
  json body;
  body["protocol"] = a.protocol;
  if (!a.checkpoint.empty()) {
    const Checkpoint ck = load_checkpoint(a.checkpoint);
    // Every line but train_set is an EvalOptions key.
    std::string settings, set_name;
    std::istringstream is(ck.config_text);
    std::string line;
    while (std::getline(is, line)) {
      if (line.rfind("train_set=", 0) == 0) set_name = line.substr(10);
      else settings += line + "\n";
    }
    if (set_name.empty()) throw FormatError(a.checkpoint + ": checkpoint records no train_set");
    EvalOptions o = parse_eval_options(settings);
    std::string extra;
    for (const auto& kv : a.overrides) extra += kv + "\n";
    o = parse_eval_options(extra, o);
    text = to_text(o);
    const TrainSet set = parse_train_set(set_name);
    report = evaluate_model(ck.params, p, set, o);
    body["checkpoint"] = a.checkpoint;
    body["train_set"] = set_name;
    if (!a.embeddings.empty()) {
      if (const fs::path parent = fs::path(a.embeddings).parent_path(); !parent.empty()) fs::create_directories(parent);
      std::ofstream os(a.embeddings);
      if (!os) throw InputError("cannot write " + a.embeddings);
      std::vector<Family> fams = test_families(p, set);
      write_embeddings_csv(os, make_split(fams, o.test_seeds, o), ck.params, o.train);
    }
  } else {
    const EvalOptions o = effective_options(a.config, a.overrides);
    text = to_text(o);
    report = run_protocol(p, o, [](const std::string& set, const HistoryRow& r) {
      std::fprintf(stderr, "[%s] epoch %3zu loss %.6f acc %.4f\n", set.c_str(), r.epoch, r.loss, r.accuracy);
    });
  }
  fs::create_directories(a.out);
  write_text(fs::path(a.out) / "report.csv", report_csv(report));
  body["config_hash"] = config_hash(text);
  body["config"] = config_json(text);
  body["mean_accuracy"] = report.mean_accuracy();
  body["mean_auc"] = report.mean_auc();
  body["outputs"] = {"report.csv"};
  write_run_record(a.out, "eval", body);
  std::cout << report_csv(report);
  return kOk;
}

struct FilterArgs {
  std::string in, preset = "low_pass", out, gains_csv;
  double low = 0.7, high = 1.3, tau = 0.6;
  std::size_t max_nodes = 4096;
};

int run_filter(const FilterArgs& a) {
  const Tensor image = read_pgm(a.in);
  PresetFilter filter;
  filter.kind = parse_filter_preset(a.preset);
  filter.low_edge = a.low;
  filter.high_edge = a.high;
  ImageGraphOptions opts;
  opts.tau_s = a.tau;
  opts.max_nodes = a.max_nodes;
  const FilteredImage r = filter_image(image, filter, opts);
  write_pgm(a.out, r.image);
  if (!a.gains_csv.empty()) {
    std::ofstream os(a.gains_csv);
    if (!os) throw InputError("cannot write " + a.gains_csv);
    os << "k,eigenvalue,gain\n";
    for (std::size_t k = 0; k < r.eigenvalues.size(); ++k) os << k << ',' << r.eigenvalues[k] << ',' << r.gains[k] << '\n';
  }
  std::cout << "nodes " << r.eigenvalues.size() << "  dirichlet energy " << r.energy_before << " -> " << r.energy_after
            << "  max |out - in| " << max_abs_diff(r.image, image) << "\n";
  return kOk;
}

struct NprArgs {
  std::size_t size = 8, l0 = 2, trials = 1;
  std::uint64_t seed = 1;
};

int run_npr(const NprArgs& a) {
  if (a.size == 0 || a.l0 == 0) throw InputError("--size and --l0 must be positive");
  const rng::Stream root(a.seed, "npr_check");
  double worst = 0.0, anchor = 0.0;
  bool exact = true;
  for (std::size_t t = 0; t < a.trials; ++t) {
    const rng::Stream s = root.child(t);
    Tensor img = Tensor::zeros(a.size, a.size);
    for (std::size_t k = 0; k < img.size(); ++k) img[k] = s.uniform(k);
    const NprEquivalence r = npr_equivalence_check(img, a.l0);
    worst = std::max(worst, r.max_non_anchor_deviation);
    anchor = std::max(anchor, r.anchor_convention_deviation);
    exact = exact && r.exact;
  }
  std::cout << "max non-anchor deviation " << short_sci(worst) << "\n";
  std::cerr << "trials " << a.trials << ", anchor identity deviation " << short_sci(anchor) << "\n";
  return exact ? kOk : kCheckFailed;
}

struct GradArgs {
  std::string scale = "toy";
  std::uint64_t seed = 3;
  double tol = 1e-4, h = 1e-4;
};

int run_gradcheck(const GradArgs& a) {
  if (a.scale != "toy") throw ConfigError("--scale supports only 'toy'");
  TrainConfig c = toy_config();
  c.seed = a.seed;
  const ParamSet params = init_params(c, 1);
  const GradCheckReport r = end_to_end_gradcheck(toy_clip(a.seed), 1, params, c, a.h);
  for (const auto& [name, err] : r.per_param) std::printf("%-20s %.3e\n", name.c_str(), err);
  std::printf("max relative error %.3e over %zu coordinates (worst %s[%zu]: analytic %.9g numeric %.9g)\n",
              r.max_rel_error, r.coordinates, r.worst_param.c_str(), r.worst_index, r.worst_analytic, r.worst_numeric);
  return r.max_rel_error <= a.tol ? kOk : kCheckFailed;
}

int thread_count(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("SSTGNN_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial/spectral/temporal graph detector for synthetic video forgeries"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: SSTGNN_THREADS, else all cores)");

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Write a labelled synthetic corpus and manifest.csv");
  s->add_option("--families", synth.families, "Comma-separated families")->capture_default_str();
  s->add_option("--count", synth.count, "Clips per family")->capture_default_str();
  s->add_option("--seed", synth.seed, "First seed")->capture_default_str();
  s->add_option("--out", synth.out, "Output directory")->required();
  s->add_option("--frames", synth.frames)->capture_default_str();
  s->add_option("--height", synth.height)->capture_default_str();
  s->add_option("--width", synth.width)->capture_default_str();
  s->add_option("--channels", synth.channels)->capture_default_str();
  s->add_option("--motion", synth.motion)->capture_default_str();
  s->add_option("--strength", synth.strength)->capture_default_str();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train on a manifest; writes checkpoint, history and in-domain report");
  t->add_option("--manifest", tr.manifest, "Corpus manifest.csv")->required()->check(CLI::ExistingFile);
  t->add_option("--config", tr.config, "key=value config file")->check(CLI::ExistingFile);
  t->add_option("--out", tr.out, "Output directory")->required();
  t->add_option("--set", tr.overrides, "key=value override (repeatable)");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate a checkpoint, or train and evaluate a full protocol");
  e->add_option("--checkpoint", ev.checkpoint, "Trained checkpoint")->check(CLI::ExistingFile);
  e->add_option("--protocol", ev.protocol, "in_domain | one_to_many | many_to_many")->capture_default_str();
  e->add_option("--config", ev.config, "key=value config file (full protocol runs)")->check(CLI::ExistingFile);
  e->add_option("--out", ev.out, "Output directory")->required();
  e->add_option("--set", ev.overrides, "key=value override (repeatable)");
  e->add_option("--embeddings", ev.embeddings, "Also dump test-set clip embeddings to this CSV");

  FilterArgs fa;
  auto* f = app.add_subcommand("filter-image", "Graph-spectral filtering of a PGM image");
  f->add_option("--in", fa.in, "Input 8-bit PGM")->required()->check(CLI::ExistingFile);
  f->add_option("--preset", fa.preset, "low_pass | band_pass | high_pass | band_reject | comb | all_pass")
      ->capture_default_str();
  f->add_option("--out", fa.out, "Output PGM")->required();
  f->add_option("--gains-csv", fa.gains_csv, "Write eigenvalue,gain pairs");
  f->add_option("--low", fa.low, "Low band edge")->capture_default_str();
  f->add_option("--high", fa.high, "High band edge")->capture_default_str();
  f->add_option("--tau", fa.tau, "Edge pruning threshold")->capture_default_str();
  f->add_option("--max-nodes", fa.max_nodes, "Refuse larger images")->capture_default_str();

  NprArgs na;
  auto* n = app.add_subcommand("npr-check", "Negative sub-adjacency aggregation vs. tile-anchor differences");
  n->add_option("--size", na.size, "Grid side")->capture_default_str();
  n->add_option("--l0", na.l0, "Tile side")->capture_default_str();
  n->add_option("--trials", na.trials, "Random grids")->capture_default_str();
  n->add_option("--seed", na.seed)->capture_default_str();

  GradArgs ga;
  auto* g = app.add_subcommand("gradcheck", "End-to-end finite-difference gradient check");
  g->add_option("--scale", ga.scale, "Problem size (toy)")->capture_default_str();
  g->add_option("--seed", ga.seed)->capture_default_str();
  g->add_option("--tol", ga.tol)->capture_default_str();
  g->add_option("--step", ga.h, "Difference step")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? kOk : kUsage;
  }

  if (const int nt = thread_count(threads); nt > 0) kernels::set_num_threads(nt);

  try {
    if (*s) return run_synth(synth);
    if (*t) return run_train(tr);
    if (*e) return run_eval(ev);
    if (*f) return run_filter(fa);
    if (*n) return run_npr(na);
    if (*g) return run_gradcheck(ga);
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kUsage;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kCheckFailed;
  }
  return kUsage;
}
