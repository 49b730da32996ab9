#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "sstgnn/spectral.hpp"
#include "sstgnn/tensor.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

// stdout only; stderr goes to /dev/null.
Run run(const std::string& args) {
  const std::string cmd = std::string(SSTGNN_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path workdir() {
  const fs::path d = fs::temp_directory_path() / "sstgnn_cli_tests";
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("npr-check reports an exact match") {
  const Run r = run("npr-check --size 8 --l0 2 --trials 100 --seed 0");
  CHECK(r.code == 0);
  CHECK(r.out == "max non-anchor deviation 0.0e0\n");
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run("").code == 2);
  CHECK(run("npr-check --bogus").code == 2);
  CHECK(run("eval --protocol nonsense --out " + (workdir() / "x").string()).code == 2);
}

TEST_CASE("gradcheck passes on the toy problem") {
  const Run r = run("gradcheck --scale toy --seed 3 --tol 1e-4");
  CHECK(r.code == 0);
  CHECK(r.out.find("max relative error") != std::string::npos);
  CHECK(run("gradcheck --scale big").code == 2);
}

TEST_CASE("filter-image all_pass returns the input") {
  const fs::path in = workdir() / "in.pgm", out = workdir() / "out.pgm", gains = workdir() / "gains.csv";
  sstgnn::Tensor img = sstgnn::Tensor::zeros(12, 10);
  for (std::size_t k = 0; k < img.size(); ++k) img[k] = static_cast<double>((k * 53) % 256) / 255.0;
  sstgnn::write_pgm(in, img);
  const Run r = run("filter-image --in " + in.string() + " --preset all_pass --out " + out.string() + " --gains-csv " +
                    gains.string());
  REQUIRE(r.code == 0);
  CHECK(sstgnn::max_abs_diff(sstgnn::read_pgm(out), img) < 1e-12);
  CHECK(fs::exists(gains));
  CHECK(run("filter-image --in " + in.string() + " --out " + out.string() + " --max-nodes 10").code != 0);
}

TEST_CASE("synth, train and eval produce the documented files") {
  const fs::path dir = workdir() / "pipeline";
  fs::remove_all(dir);
  const std::string corpus = (dir / "corpus").string(), model = (dir / "model").string(),
                    evals = (dir / "eval").string();
  REQUIRE(run("synth --families real,upsample_artifact --count 3 --seed 10 --frames 2 --height 16 --width 16 --out " +
              corpus)
              .code == 0);
  CHECK(fs::exists(fs::path(corpus) / "manifest.csv"));

  const Run t = run("--threads 1 train --manifest " + corpus + "/manifest.csv --out " + model +
                    " --set patch_size=8 --set dim=8 --set epochs=2 --set batch=2 --set test_count=2");
  REQUIRE(t.code == 0);
  for (const char* f : {"checkpoint.bin", "history.csv", "report.csv", "run.json"})
    CHECK(fs::exists(fs::path(model) / f));
  CHECK(t.out.rfind("protocol,train_set,test_family,n,accuracy,auc,seed,config_hash", 0) == 0);
  const auto record = nlohmann::json::parse(slurp(fs::path(model) / "run.json"));
  CHECK(record.contains("config_hash"));
  CHECK(record["train_set"] == "upsample_artifact");

  const Run e = run("eval --checkpoint " + model + "/checkpoint.bin --protocol one_to_many --out " + evals +
                    " --embeddings " + evals + "/emb.csv");
  REQUIRE(e.code == 0);
  std::istringstream rows(slurp(fs::path(evals) / "report.csv"));
  std::string line;
  std::size_t n = 0;
  while (std::getline(rows, line))
    if (!line.empty()) ++n;
  CHECK(n == 1 + 2);  // header + two held-out families
  CHECK(fs::exists(fs::path(evals) / "emb.csv"));

  // Same inputs, same bytes.
  const std::string model2 = (dir / "model2").string();
  REQUIRE(run("--threads 1 train --manifest " + corpus + "/manifest.csv --out " + model2 +
              " --set patch_size=8 --set dim=8 --set epochs=2 --set batch=2 --set test_count=2")
              .code == 0);
  CHECK(slurp(fs::path(model) / "checkpoint.bin") == slurp(fs::path(model2) / "checkpoint.bin"));
  CHECK(slurp(fs::path(model) / "report.csv") == slurp(fs::path(model2) / "report.csv"));
}

TEST_CASE("missing manifest is an error") {
  CHECK(run("train --manifest /nonexistent/manifest.csv --out " + (workdir() / "m").string()).code != 0);
}
