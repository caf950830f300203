// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ornet/io.hpp"

using namespace ornet;
namespace fs = std::filesystem;

namespace {

std::string cli() {
  const char* env = std::getenv("ORNET_CLI");
  return env ? env : ORNET_CLI_PATH;
}

int run(const std::string& args) {
  const int rc = std::system((cli() + " " + args + " > /dev/null 2>&1").c_str());
  return WEXITSTATUS(rc);
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("ornet_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int csv_data_rows(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  int rows = -1;  // skip header
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  return rows;
}

void write_config(const fs::path& p, const std::string& extra) {
  std::ofstream cfg(p);
  cfg << R"({
  "version": 1,
  "seed": 3,
  "grid": {"T": 2.0, "time_steps": 1024},
  "basis": {"kind": "pwc-graded", "n": 32, "segments": 8, "ratio": 8},
  "prior": {"amplitude": 0.1, "support": [1.0, 3.5]},
  "datagen": {"samples": 4})" << extra
      << "\n}";
}

}  // namespace

TEST_CASE("missing data operator fails cleanly with exit code 2") {
  TempDir tmp;
  write_config(tmp.path / "cfg.json",
               R"(, "bc": {"lambda": "/nonexistent/lambda.opmat"})");
  CHECK(run("--config " + (tmp.path / "cfg.json").string() + " --out " +
            (tmp.path / "r").string() + " reconstruct") == 2);
}

TEST_CASE("unknown config keys are rejected") {
  TempDir tmp;
  write_config(tmp.path / "cfg.json", R"(, "surprise": 1)");
  CHECK(run("--config " + (tmp.path / "cfg.json").string() + " datagen") == 2);
}

TEST_CASE("train history rows equal iterations run and resume is seamless") {
  TempDir tmp;
  write_config(tmp.path / "cfg.json",
               R"(, "train": {"dataset": ")" + (tmp.path / "data").string() +
                   R"(", "alpha": 0.01, "iters": 12, "depth": 1, "step": 0.001})");
  REQUIRE(run("--config " + (tmp.path / "cfg.json").string() + " --out " +
              (tmp.path / "data").string() + " datagen") == 0);
  REQUIRE(run("--config " + (tmp.path / "cfg.json").string() + " --out " +
              (tmp.path / "t12").string() + " train") == 0);
  CHECK(csv_data_rows(tmp.path / "t12" / "history.csv") == 12);

  // 6 + 6 resumed iterations reproduce the uninterrupted history
  write_config(tmp.path / "cfg6.json",
               R"(, "train": {"dataset": ")" + (tmp.path / "data").string() +
                   R"(", "alpha": 0.01, "iters": 6, "depth": 1, "step": 0.001})");
  REQUIRE(run("--config " + (tmp.path / "cfg6.json").string() + " --out " +
              (tmp.path / "t6").string() + " train") == 0);
  write_config(tmp.path / "cfg6r.json",
               R"(, "train": {"dataset": ")" + (tmp.path / "data").string() +
                   R"(", "alpha": 0.01, "iters": 6, "depth": 1, "step": 0.001,
                       "resume": ")" + (tmp.path / "t6" / "checkpoint.json").string() + R"("})");
  REQUIRE(run("--config " + (tmp.path / "cfg6r.json").string() + " --out " +
              (tmp.path / "t6r").string() + " train") == 0);

  auto last_loss = [](const fs::path& p) {
    std::ifstream in(p);
    std::string line, last;
    while (std::getline(in, line))
      if (!line.empty()) last = line;
    return std::stod(last.substr(last.rfind(',') + 1));
  };
  const double full = last_loss(tmp.path / "t12" / "history.csv");
  const double resumed = last_loss(tmp.path / "t6r" / "history.csv");
  CHECK(std::abs(full - resumed) <= 1e-12 * std::max(1.0, std::abs(full)));
}

TEST_CASE("compare-net column appears in the reconstruction report") {
  TempDir tmp;
  write_config(tmp.path / "cfg.json",
               R"(, "bc": {"alpha": 0.001, "iters": 60, "k_nodes": 8, "step_factor": 1.8,
                     "lambda": ")" + (tmp.path / "data" / "lambda_0.opmat").string() +
                   R"(", "profile": ")" + (tmp.path / "data" / "profile_0.json").string() +
                   R"("},
       "train": {"dataset": ")" + (tmp.path / "data").string() +
                   R"(", "alpha": 0.01, "iters": 5, "depth": 1})");
  REQUIRE(run("--config " + (tmp.path / "cfg.json").string() + " --out " +
              (tmp.path / "data").string() + " datagen") == 0);
  REQUIRE(run("--config " + (tmp.path / "cfg.json").string() + " --out " +
              (tmp.path / "t").string() + " train") == 0);
  REQUIRE(run("--config " + (tmp.path / "cfg.json").string() + " --out " +
              (tmp.path / "rec").string() + " --compare-net " +
              (tmp.path / "t" / "checkpoint.json").string() + " reconstruct") == 0);
  std::ifstream in(tmp.path / "rec" / "report.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header.find("net_v") != std::string::npos);
  CHECK(csv_data_rows(tmp.path / "rec" / "report.csv") == 8);
}
