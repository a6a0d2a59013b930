#include "aies/asymptotics.hpp"
#include "aies/ensemble_io.hpp"
#include "aies/experiment.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace aies;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int status;
  std::string out;
};

CliRun run(const std::string& args) {
  const std::string cmd = std::string(AIES_CLI_PATH) + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return {-1, {}};
  std::string out;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, p)) out.append(buf, n);
  const int rc = pclose(p);
  return {WIFEXITED(rc) ? WEXITSTATUS(rc) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("aies_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  nlohmann::json sample(const std::string& config, const std::string& out) const {
    const CliRun r = run("sample --config " + write(out + ".json", config).string() + " --out " + (dir_ / out).string());
    EXPECT_EQ(r.status, 0) << r.out;
    return nlohmann::json::parse(slurp(dir_ / out / "summary.json"));
  }

  fs::path dir_;
};

const std::string kSmallConfig =
    R"({"target": "gaussian", "d": 4, "kappa": 10, "sampler": "side", "burn_in": 200, "iterations": 3000, "thin": 1})";

}  // namespace

TEST_F(CliTest, SampleIsByteIdenticalAcrossRuns) {
  sample(kSmallConfig, "a");
  sample(kSmallConfig, "b");
  EXPECT_EQ(slurp(dir_ / "a" / "summary.json"), slurp(dir_ / "b" / "summary.json"));
  EXPECT_EQ(slurp(dir_ / "a" / "series.csv"), slurp(dir_ / "b" / "series.csv"));
  EXPECT_EQ(slurp(dir_ / "a" / "acf.csv"), slurp(dir_ / "b" / "acf.csv"));
}

TEST_F(CliTest, SummarySchema) {
  const nlohmann::json j = sample(kSmallConfig, "s");
  EXPECT_EQ(j.at("schema"), 1);
  for (const char* key : {"acceptance_rate", "tau", "window", "esjd", "func_evals_per_iter", "grad_evals_per_iter",
                          "thin", "seed", "N", "tau_unconverged"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_FALSE(j.contains("wall_time"));
  EXPECT_EQ(j.at("N"), 8);
  EXPECT_EQ(j.at("series_length"), 3000);
  const nlohmann::json timing = nlohmann::json::parse(slurp(dir_ / "s" / "timing.json"));
  EXPECT_GT(timing.at("wall_time").get<double>(), 0.0);

  const std::string acf = slurp(dir_ / "s" / "acf.csv");
  EXPECT_EQ(acf.rfind("lag,rho\n0,1\n", 0), 0u);
}

TEST_F(CliTest, EvaluationCountsAreMeasured) {
  const std::string base = R"({"target": "gaussian", "d": 4, "kappa": 10, "burn_in": 10, "iterations": 200, "thin": 1, )";
  struct Expect {
    std::string sampler;
    double grads;
  };
  for (const Expect& e : {Expect{R"("sampler": "side"})", 0}, Expect{R"("sampler": "stretch"})", 0},
                          Expect{R"("sampler": "walk"})", 0}, Expect{R"("sampler": "hwalk", "T": 1, "n": 2})", 3},
                          Expect{R"("sampler": "hside", "T": 1, "n": 2})", 3},
                          Expect{R"("sampler": "hmc", "T": 1, "n": 10})", 11}}) {
    const nlohmann::json j = sample(base + e.sampler, "run");
    EXPECT_EQ(j.at("grad_evals_per_iter").get<double>(), e.grads) << e.sampler;
    EXPECT_EQ(j.at("func_evals_per_iter").get<double>(), 1.0) << e.sampler;
  }
}

TEST_F(CliTest, InvalidConfigsExitNonzero) {
  for (const std::string& bad :
       {std::string(R"({"target": "gaussian", "sampler": "side"})"),            // no d
        std::string(R"({"d": 4, "sampler": "side", "bogus": 1})"),              // unknown key
        std::string(R"({"d": 4, "sampler": "teleport"})"),                      // unknown sampler
        std::string(R"({"d": 4, "sampler": "side", "N": 7})"),                  // odd walker count
        std::string(R"({"d": 4, "sampler": "side", "iterations": 5, "thin": 10})"),
        std::string(R"({"d": 4, "sampler": "hwalk", "T": -1})"),
        std::string(R"({"d": 4, "sampler": "side", "noise": "cauchy"})"),
        std::string(R"({"d": 4, "target": "ring", "l": 0})"),
        std::string("{ not json")}) {
    const CliRun r = run("sample --config " + write("bad.json", bad).string() + " --out " + (dir_ / "o").string());
    EXPECT_NE(r.status, 0) << bad;
    EXPECT_NE(r.out.find("error"), std::string::npos) << bad;
  }
  EXPECT_NE(run("sample --config " + (dir_ / "missing.json").string()).status, 0);
  EXPECT_NE(run("sample --config " + write("ok.json", kSmallConfig).string() + " --preset huge").status, 0);
}

TEST_F(CliTest, SavedEnsembleRoundTrips) {
  const std::string cfg =
      R"({"target": "gaussian", "d": 3, "sampler": "stretch", "burn_in": 0, "iterations": 50, "thin": 1, "seed": 5, "save_ensemble": true})";
  sample(cfg, "e");
  std::ifstream in(dir_ / "e" / "ensemble.bin", std::ios::binary);
  EnsembleHeader h;
  const Ensemble e = read_ensemble(in, &h);
  EXPECT_EQ(h.n, 6u);
  EXPECT_EQ(h.d, 3u);
  EXPECT_EQ(h.seed, 5u);
  EXPECT_EQ(h.iteration, 50u);
  EXPECT_EQ(e.size(), 6u);
  EXPECT_TRUE(e.positions().allFinite());
}

TEST_F(CliTest, SweepRejectsEmptyAndUnsortedDims) {
  const fs::path cfg = write("c.json", kSmallConfig);
  EXPECT_NE(run("sweep --config " + cfg.string() + " --dims ''").status, 0);
  EXPECT_NE(run("sweep --config " + cfg.string() + " --dims 8,4").status, 0);
  const ExperimentConfig base = parse_config(nlohmann::json::parse(kSmallConfig));
  EXPECT_THROW(run_scaling_sweep(base, {}), ConfigError);
  EXPECT_THROW(run_scaling_sweep(base, {4, 4}), ConfigError);
}

TEST_F(CliTest, SweepRowsIndependentOfJobs) {
  const fs::path cfg = write("c.json", kSmallConfig);
  const CliRun one = run("sweep --config " + cfg.string() + " --dims 2,4,6 --jobs 1");
  const CliRun two = run("sweep --config " + cfg.string() + " --dims 2,4,6 --jobs 3");
  ASSERT_EQ(one.status, 0) << one.out;
  EXPECT_EQ(one.out, two.out);
  std::istringstream lines(one.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "d,sampler,tau,acceptance,window,tau_unconverged,error");
  int rows = 0;
  while (std::getline(lines, line)) {
    EXPECT_EQ(line.find(std::to_string(2 * (rows + 1)) + ",side,"), 0u) << line;
    ++rows;
  }
  EXPECT_EQ(rows, 3);
}

TEST_F(CliTest, SweepCsvKeepsErrorsInOneField) {
  std::ostringstream os;
  SweepRow r;
  r.d = 4;
  r.sampler = "side";
  r.error = "bad, very bad\nindeed";
  write_sweep_csv(os, {r});
  const std::string text = os.str();
  const std::string row = text.substr(text.find('\n') + 1);
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), 6);
  EXPECT_EQ(std::count(row.begin(), row.end(), '\n'), 1);
}

TEST_F(CliTest, LimitsGridCsv) {
  const CliRun r = run("limits --family side --grid 1:2:3 --n-mc 10000");
  ASSERT_EQ(r.status, 0) << r.out;
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "param,acceptance,acc_stderr,esjd,esjd_stderr");
  std::vector<double> params;
  while (std::getline(lines, line)) params.push_back(std::stod(line.substr(0, line.find(','))));
  EXPECT_EQ(params, (std::vector<double>{1.0, 1.5, 2.0}));

  // Same seed, same numbers as the library.
  const LimitPair lib = side_limit(1.5, LimitNoise::gaussian, 10000, kDefaultSeed);
  const std::size_t at = r.out.find("\n1.5,");
  ASSERT_NE(at, std::string::npos);
  EXPECT_NEAR(std::stod(r.out.substr(at + 5)), lib.acceptance.value, 1e-15);
}

TEST_F(CliTest, LimitsOptimizeAndFamilies) {
  const CliRun opt = run("limits --family stretch --grid 0.5:4:2 --optimize --n-mc 100000");
  ASSERT_EQ(opt.status, 0) << opt.out;
  std::istringstream lines(opt.out);
  std::string header, row, extra;
  std::getline(lines, header);
  std::getline(lines, row);
  EXPECT_FALSE(std::getline(lines, extra));
  EXPECT_NEAR(std::stod(row), 2.151, 0.1);

  EXPECT_EQ(run("limits --family hwalk --grid 0.5:1:2 --rho 0.25 --T 1").status, 0);
  EXPECT_EQ(run("limits --family hside --grid 0.5:1.5:3 --steps 3 --n-mc 10000").status, 0);
  EXPECT_NE(run("limits --family hside --grid 1:2.5:2 --n-mc 10000").status, 0);
  EXPECT_NE(run("limits --family warp --grid 1:2:2").status, 0);
  EXPECT_NE(run("limits --family side --grid 1:2").status, 0);
  EXPECT_NE(run("limits --family side --grid 1:2:2 --n-mc 10").status, 0);
}

TEST_F(CliTest, ActMatchesLibrary) {
  Stream s = RngPlan{3}.stream(0, 0, DrawRole::noise);
  std::vector<double> x(20000);
  double v = 0;
  std::ostringstream csv;
  csv.precision(17);
  csv << "iteration,value\n";
  for (std::size_t t = 0; t < x.size(); ++t) {
    v = 0.8 * v + s.normal();
    x[t] = v;
    csv << t + 1 << ',' << v << '\n';
  }
  const CliRun r = run("act --series " + write("s.csv", csv.str()).string() + " --c 5 --thin 10");
  ASSERT_EQ(r.status, 0) << r.out;
  const nlohmann::json j = nlohmann::json::parse(r.out);
  const ActEstimate lib = estimate_act(x, 5.0);
  EXPECT_NEAR(j.at("tau").get<double>(), lib.tau, 1e-12 * lib.tau);
  EXPECT_EQ(j.at("window").get<std::size_t>(), lib.window);
  EXPECT_EQ(j.at("thin"), 10);

  EXPECT_NE(run("act --series " + write("flat.csv", "v\n1\n1\n1\n1\n1\n").string()).status, 0);
  EXPECT_NE(run("act --series " + (dir_ / "nope.csv").string()).status, 0);
}

TEST(Config, PresetsOverrideCounts) {
  ExperimentConfig c = parse_config(nlohmann::json::parse(R"({"d": 8, "burn_in": 5, "iterations": 50})"));
  apply_preset(c, "desk");
  EXPECT_EQ(c.burn_in, 20'000u);
  EXPECT_EQ(c.iterations, 100'000u);
  apply_preset(c, "paper");
  EXPECT_EQ(c.burn_in, 200'000u);
  EXPECT_EQ(c.iterations, 1'000'000u);
  EXPECT_THROW(apply_preset(c, "tiny"), ConfigError);
}

TEST(Config, DefaultsAndSeedOverride) {
  const ExperimentConfig c = parse_config(nlohmann::json::parse(R"({"d": 8})"));
  EXPECT_EQ(c.sampler.kind, "side");
  EXPECT_EQ(c.resolved_walkers(), 16u);
  EXPECT_EQ(c.thin, 10u);
  EXPECT_EQ(c.burn_in, 200'000u);
  EXPECT_EQ(c.iterations, 1'000'000u);

  ::setenv(kSeedEnvVar, "99", 1);
  EXPECT_EQ(parse_config(nlohmann::json::parse(R"({"d": 8})")).seed, 99u);
  EXPECT_EQ(parse_config(nlohmann::json::parse(R"({"d": 8, "seed": 7})")).seed, 7u);
  ::unsetenv(kSeedEnvVar);
  EXPECT_EQ(parse_config(nlohmann::json::parse(R"({"d": 8})")).seed, kDefaultSeed);
}
