#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "conelab/cli.hpp"
#include "conelab/config.hpp"
#include "conelab/io.hpp"

using namespace conelab;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "conelab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("conelab_test_" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::istringstream in(io::read_file(p));
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST(Io, FormatDouble) {
  EXPECT_EQ(io::format_double(1.0), "1.0");
  EXPECT_EQ(io::format_double(0.25), "0.25");
  EXPECT_EQ(io::format_double(0.1), "0.1");
  EXPECT_EQ(std::stod(io::format_double(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_EQ(io::fnv1a_hex(""), "cbf29ce484222325");
}

TEST(Config, ParsesFullDocument) {
  const auto cfg = config_from_json(nlohmann::json::parse(R"({
    "experiment": "cz", "beta": 0.6, "k": 1, "p": 8, "r_max": 2,
    "epsilons": {"start": 0.05, "stop": 0.001, "count": 5, "spacing": "geometric"},
    "tolerances": {"ode": 1e-9, "quadrature": 1e-11}, "control": false, "threads": 2})"));
  EXPECT_EQ(cfg.experiment, ExperimentKind::cz);
  EXPECT_EQ(cfg.sweep.kind, SweepKind::cz);
  EXPECT_EQ(cfg.sweep.beta, 0.6);
  EXPECT_EQ(cfg.sweep.p, 8.0);
  EXPECT_EQ(cfg.sweep.epsilons.count, 5u);
  EXPECT_EQ(cfg.sweep.ode_tol, 1e-9);
  EXPECT_EQ(cfg.sweep.threads, 2u);
  EXPECT_NO_THROW(validate(cfg));
  const auto again = config_from_json(to_json(cfg));
  EXPECT_EQ(to_json(again), to_json(cfg));
}

TEST(Config, StrictErrorsNameTheKey) {
  auto param_of = [](const char* doc) {
    try {
      config_from_json(nlohmann::json::parse(doc));
    } catch (const config_error& e) {
      return e.parameter();
    }
    return std::string("<none>");
  };
  EXPECT_EQ(param_of(R"({"beta": 0.5})"), "experiment");
  EXPECT_EQ(param_of(R"({"experiment": "holder", "betta": 0.5})"), "betta");
  EXPECT_EQ(param_of(R"({"experiment": "holder", "epsilons": {"start": 0.1, "steps": 3}})"), "epsilons.steps");
  EXPECT_EQ(param_of(R"({"experiment": "holder", "beta": "big"})"), "beta");
  EXPECT_EQ(param_of(R"({"experiment": "nonsense"})"), "experiment");
  EXPECT_EQ(param_of(R"({"experiment": "holder", "epsilons": {"spacing": "linear"}})"), "epsilons.spacing");
  EXPECT_EQ(param_of(R"([1, 2])"), "<document>");
}

TEST(Config, DecayValidation) {
  auto cfg = config_from_json(nlohmann::json::parse(
      R"({"experiment": "decay", "decay": {"base": "sphere", "sphere_m": 2, "n": 3, "sharp_only": true}})"));
  EXPECT_THROW(validate(cfg), config_error);
  cfg.decay.sharp_only = false;
  EXPECT_NO_THROW(validate(cfg));
  cfg.decay.n = 5.0;  // S^2 as base of a 5-cone: lambda_1 = 2 < 4
  EXPECT_THROW(validate(cfg), config_error);

  auto it = config_from_json(nlohmann::json::parse(R"({"experiment": "iterate", "iterate": {"p": 2, "n": 2}})"));
  EXPECT_THROW(validate(it), config_error);
}

TEST(Cli, AlphaPrintsExponent) {
  const auto r = run({"alpha", "--n", "3", "--lambda", "2"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "1.0\n");
  EXPECT_EQ(run({"alpha", "--n", "1", "--lambda", "2"}).code, 1);
  EXPECT_EQ(run({"alpha", "--n", "3"}).code, 1);
  EXPECT_EQ(run({"no-such-command"}).code, 1);
}

TEST(Cli, SpectrumAndEnergy) {
  const auto s = run({"spectrum", "--base", "circle", "--beta", "0.5", "--count", "3"});
  ASSERT_EQ(s.code, 0) << s.err;
  const auto doc = nlohmann::json::parse(s.out);
  EXPECT_EQ(doc["obata"]["margin"].get<double>(), 3.0);
  EXPECT_TRUE(doc["sharp"].get<bool>());
  EXPECT_EQ(run({"spectrum", "--beta", "1.2"}).code, 1);

  const auto e = run({"energy", "--beta", "0.5", "--term", "1:1", "--radius", "1"});
  ASSERT_EQ(e.code, 0) << e.err;
  const auto ed = nlohmann::json::parse(e.out);
  EXPECT_NEAR(ed["ball_energy"].get<double>(), 2.0, 1e-14);
  EXPECT_NEAR(ed["contraction"]["ratio"].get<double>(), 0.25, 1e-14);
  EXPECT_EQ(run({"energy", "--beta", "0.5", "--term", "x"}).code, 1);
  EXPECT_EQ(run({"energy", "--beta", "0.5", "--term", "1:0"}).code, 1);
}

TEST(Cli, DecayRatioIsRSquared) {
  TempDir dir;
  const auto r = run({"decay", "--beta", "0.5", "--mode", "1", "--out", dir.path().string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_csv(dir.path() / "decay.csv");
  ASSERT_GT(rows.size(), 2u);
  EXPECT_EQ(rows[0][0], "R");
  EXPECT_EQ(rows[0][3], "ratio");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double R = std::stod(rows[i][0]);
    EXPECT_NEAR(std::stod(rows[i][3]), R * R, 1e-13 * R * R);
  }
  const auto summary = nlohmann::json::parse(io::read_file(dir.path() / "decay_summary.json"));
  EXPECT_TRUE(summary["pass"].get<bool>());
  EXPECT_TRUE(fs::exists(dir.path() / "decay_manifest.json"));
}

TEST(Cli, SweepBelowThresholdIsValidationFailure) {
  TempDir dir;
  const auto cfg = dir.path() / "cz.json";
  io::atomic_write(cfg, R"({"experiment": "cz", "beta": 0.6666666666666666, "p": 3})");
  const auto r = run({"sweep", "--config", cfg.string(), "--out", dir.path().string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("2/(2-alpha)"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir.path() / "cz.csv"));
}

TEST(Cli, MissingConfigAndMalformedJson) {
  TempDir dir;
  EXPECT_EQ(run({"sweep"}).code, 1);
  const auto bad = dir.path() / "bad.json";
  io::atomic_write(bad, "{ not json");
  EXPECT_EQ(run({"sweep", "--config", bad.string()}).code, 1);
  EXPECT_NE(run({"sweep", "--config", (dir.path() / "absent.json").string()}).code, 0);
}

TEST(Cli, ManifestRerunIsByteIdentical) {
  TempDir a, b;
  const auto cfg = a.path() / "holder.json";
  io::atomic_write(cfg, R"({"experiment": "holder", "gamma": 0.75, "epsilons": {"start": 0.1, "stop": 0.001, "count": 4}})");
  ASSERT_EQ(run({"sweep", "--config", cfg.string(), "--out", a.path().string()}).code, 0);
  const auto rerun = run({"sweep", "--manifest", (a.path() / "holder_manifest.json").string(), "--out", b.path().string()});
  ASSERT_EQ(rerun.code, 0) << rerun.err;
  EXPECT_EQ(io::read_file(a.path() / "holder.csv"), io::read_file(b.path() / "holder.csv"));
  const auto m1 = nlohmann::json::parse(io::read_file(a.path() / "holder_manifest.json"));
  const auto m2 = nlohmann::json::parse(io::read_file(b.path() / "holder_manifest.json"));
  EXPECT_EQ(m1["config_hash"], m2["config_hash"]);
  EXPECT_EQ(m1["version"], "1.0.0");
}

TEST(Cli, IterateAndSolveMode) {
  TempDir dir;
  const auto it = run({"iterate", "--c", "0", "--delta0", "0.5", "--kmax", "10", "--out", dir.path().string()});
  ASSERT_EQ(it.code, 0) << it.err;
  const auto rows = read_csv(dir.path() / "iterate.csv");
  EXPECT_EQ(std::stod(rows[4][2]), 0.125);
  EXPECT_EQ(run({"iterate", "--p", "2", "--n", "2", "--out", dir.path().string()}).code, 1);

  const auto sm = run({"solve-mode", "--beta", "0.5", "--k", "1", "--out", dir.path().string()});
  ASSERT_EQ(sm.code, 0) << sm.err;
  const auto mode = read_csv(dir.path() / "mode.csv");
  EXPECT_EQ(mode[0][0], "r");
  const double r = std::stod(mode.back()[0]);
  EXPECT_NEAR(std::stod(mode.back()[1]), r * r, 1e-10);
}
