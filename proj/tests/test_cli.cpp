#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome run(const std::string& args) {
  const std::string cmd = std::string(ATLAB_CLI_PATH) + " " + args + " 2>&1";
  Outcome r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  while (fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string config(const std::string& name) { return std::string(ATLAB_CONFIG_DIR) + "/" + name; }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("atlab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const nlohmann::json& j) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << j.dump(2);
    return p.string();
  }
  std::string write_text(const std::string& name, const std::string& text) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string out() const { return dir_.string(); }

  static nlohmann::json quick() {
    std::ifstream in(config("quick_sweep.json"));
    return nlohmann::json::parse(in);
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, SolvePrintsReport) {
  const Outcome r = run("solve --config " + config("quick_sweep.json") + " --eps 0.05");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("c0_eps"), std::string::npos);
  EXPECT_NE(r.out.find("jump"), std::string::npos);
}

TEST_F(Cli, SweepWritesRequestedFormats) {
  const Outcome r = run("sweep --config " + config("quick_sweep.json") + " --out " + out() + " --format csv --format json");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(fs::exists(dir_ / "quick.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "quick.json"));
  EXPECT_FALSE(fs::exists(dir_ / "quick_mass.svg"));
  std::ifstream in(dir_ / "quick.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header,
            "eps,eta,n,c0_eps,c_eps,x_eps,v_min,alpha_est,equi_defect,mass_total,mass_outside,branch,contact_fraction,"
            "iters,residual,energy_total");
}

TEST_F(Cli, SweepIsByteIdenticalAcrossRunsAndParallelism) {
  ASSERT_EQ(run("sweep --config " + config("quick_sweep.json") + " --out " + out() + "/a --format csv").code, 0);
  ASSERT_EQ(run("sweep --config " + config("quick_sweep.json") + " --out " + out() + "/b --format csv --parallel 3").code, 0);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  };
  EXPECT_EQ(slurp(dir_ / "a" / "quick.csv"), slurp(dir_ / "b" / "quick.csv"));
}

TEST_F(Cli, CheckPassesAndFails) {
  nlohmann::json pass = quick();
  pass["a1"] = 0.6;
  pass["init"] = {{"kind", "from_time0"}};
  pass["eps_list"] = {0.1, 0.05, 0.025, 0.0125, 0.00625};
  pass["eta_rule"] = {{"kind", "eps_pow"}, {"p", 3}};
  pass["n_cells"] = 4096;
  pass["check"] = {{"expected_branch", "affine"}};
  const Outcome ok = run("check --config " + write("pass.json", pass));
  EXPECT_EQ(ok.code, 0) << ok.out;
  EXPECT_NE(ok.out.find("\nPASS\n"), std::string::npos) << ok.out;

  nlohmann::json fail = quick();
  fail["check"] = {{"expected_branch", "affine"}};
  const Outcome bad = run("check --config " + write("fail.json", fail));
  EXPECT_EQ(bad.code, 1) << bad.out;
  EXPECT_NE(bad.out.find("FAIL"), std::string::npos);
}

TEST_F(Cli, SolverFailureExitsTwo) {
  nlohmann::json j = quick();
  j["solver"]["max_iters"] = 1;
  const Outcome r = run("solve --config " + write("slow.json", j));
  EXPECT_EQ(r.code, 2) << r.out;
}

TEST_F(Cli, ConfigErrorsExitThree) {
  EXPECT_EQ(run("sweep --config " + (dir_ / "missing.json").string()).code, 3);
  EXPECT_EQ(run("sweep --config " + write_text("broken.json", "{ not json")).code, 3);
  nlohmann::json v2 = quick();
  v2["schema_version"] = 2;
  EXPECT_EQ(run("sweep --config " + write("v2.json", v2)).code, 3);
  nlohmann::json eps = quick();
  eps["eps_list"] = {0.05, 0.1};
  EXPECT_EQ(run("check --config " + write("eps.json", eps)).code, 3);
  EXPECT_EQ(run("sweep --config " + config("quick_sweep.json") + " --format pdf").code, 3);
  EXPECT_EQ(run("sweep").code, 3);
  EXPECT_EQ(run("").code, 3);
  EXPECT_EQ(run("frobnicate --config x").code, 3);
  EXPECT_EQ(run("evolve --config " + config("quick_sweep.json")).code, 3);
}

TEST_F(Cli, HelpExitsZero) {
  const Outcome r = run("--help");
  EXPECT_EQ(r.code, 0);
  for (const char* sub : {"solve", "sweep", "recovery", "evolve", "check"}) {
    EXPECT_NE(r.out.find(sub), std::string::npos) << sub;
  }
}

TEST_F(Cli, EvolveReportsMonotoneChain) {
  nlohmann::json j = {{"schema_version", 1}, {"eps", 0.05},         {"n_cells", 1024},
                      {"schedule", {0.5, 1.5, 2.5}}, {"init0", {{"kind", "uniform_one"}}}};
  const Outcome r = run("evolve --config " + write("evolve.json", j));
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos) << r.out;
  EXPECT_EQ(r.out.find(" no"), std::string::npos) << r.out;
}

TEST_F(Cli, RecoveryWritesTable) {
  nlohmann::json j = {{"schema_version", 1},
                      {"name", "rec"},
                      {"target", {{"kind", "affine"}, {"a", 0.6}}},
                      {"eps_list", {0.05, 0.025}},
                      {"n_cells", 2048}};
  const Outcome r = run("recovery --config " + write("rec.json", j) + " --out " + out());
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("compliance         PASS"), std::string::npos) << r.out;
  std::ifstream in(dir_ / "rec.csv");
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 3);
  EXPECT_EQ(run("recovery --config " + write("rec2.json", j) + " --out " + out() + " --format json").code, 3);
  j["target"]["kind"] = "sawtooth";
  EXPECT_EQ(run("recovery --config " + write("rec3.json", j)).code, 3);
}
