// Runs the command-line tool as a subprocess.

#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kCli = CMEKIT_CLI;
const std::string kModels = CMEKIT_MODELS_DIR;

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("cmekit_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Outcome run(const std::string& args, const std::string& env = "") {
    const fs::path out = dir_ / "stdout", err = dir_ / "stderr";
    const std::string cmd = "cd '" + dir_.string() + "' && " + env + " '" + kCli + "' " + args + " >'" +
                            out.string() + "' 2>'" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    Outcome r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  std::string model(const std::string& name) const { return "'" + kModels + "/" + name + "'"; }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name, std::ios::binary) << text;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, ValidateReportsOnStdout) {
  const auto r = run("validate " + model("model1.cme"));
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("\"valid\": true"), std::string::npos);
}

TEST_F(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("validate missing.cme").code, 1);
  EXPECT_EQ(run("simulate " + model("model1.cme") + " --bogus").code, 1);
  EXPECT_EQ(run("fsp " + model("model1.cme") + " --stationary --t 3").code, 1);
  const auto r = run("simulate " + model("model1.cme") + " --record 0:1");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("start:stop:step"), std::string::npos) << r.err;
}

TEST_F(Cli, ModelErrorsExitTwo) {
  write("bad.cme", "species X\nreaction r: 0 -> Y @ mass_action(1)\n");
  const auto r = run("validate bad.cme");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("2:"), std::string::npos) << r.err;
  EXPECT_EQ(run("moments " + model("dimer.cme") + " --t-end 1").code, 2);
}

TEST_F(Cli, CapacityExitsThree) {
  const auto r = run("fsp " + model("model1.cme") + " --t 50 --state-cap 20");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("best eps"), std::string::npos) << r.err;
  EXPECT_EQ(run("fsp " + model("model1.cme") + " --t 50", "CMEKIT_STATE_CAP=20").code, 3);
}

TEST_F(Cli, HelpListsDefaults) {
  const auto sim = run("simulate --help");
  EXPECT_EQ(sim.code, 0);
  EXPECT_NE(sim.out.find("[20240601]"), std::string::npos);
  EXPECT_NE(sim.out.find("[0.03]"), std::string::npos);
  const auto fsp = run("fsp --help");
  EXPECT_NE(fsp.out.find("[1e-06]"), std::string::npos);
  const auto inf = run("infer --help");
  EXPECT_NE(inf.out.find("[0.05]"), std::string::npos);
  EXPECT_NE(inf.out.find("[2000]"), std::string::npos);
  for (const char* sub : {"validate", "moments", "lna"}) EXPECT_EQ(run(std::string(sub) + " --help").code, 0);
}

TEST_F(Cli, SnapshotFileLayout) {
  const auto r = run("simulate " + model("model1.cme") +
                     " --method direct --t-end 200 --n 1000 --seed 7 --record 0:200:10 --out snap.csv");
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream f(dir_ / "snap.csv");
  std::string line;
  std::getline(f, line);
  EXPECT_EQ(line, "trajectory,time,R,P");
  std::size_t rows = 0;
  std::set<std::string> times, trajectories;
  while (std::getline(f, line)) {
    ++rows;
    const auto a = line.find(','), b = line.find(',', a + 1);
    trajectories.insert(line.substr(0, a));
    times.insert(line.substr(a + 1, b - a - 1));
  }
  EXPECT_EQ(rows, 21000u);
  EXPECT_EQ(times.size(), 21u);
  EXPECT_EQ(trajectories.size(), 1000u);
  EXPECT_NE(r.out.find("\"record_times\": 21"), std::string::npos);
}

TEST_F(Cli, FspWritesCertificateAlongside) {
  const auto r = run("fsp " + model("model1.cme") + " --t 10 --out p.csv");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir_ / "p.csv"));
  const std::string cert = slurp(dir_ / "p.csv.json");
  EXPECT_NE(cert.find("\"eps_achieved\""), std::string::npos);
}

TEST_F(Cli, TwoGeneStationaryDistribution) {
  const auto r = run("fsp " + model("twogene.cme") + " --stationary --eps 1e-6 --out dist.csv");
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(dir_ / "dist.csv");
  EXPECT_EQ(csv.rfind("X1,X2,probability\n", 0), 0u);
}

TEST_F(Cli, InferFromDataFile) {
  write("bd.csv", "time,X\nss,9\nss,11\nss,10\nss,12\nss,8\nss,10\n");
  const auto r = run("infer moment " + model("birth_death.cme") + " --data bd.csv --params tau_R=0.2:5");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("\"tau_R\""), std::string::npos);
  EXPECT_EQ(run("infer abc " + model("birth_death.cme") + " --params tau_R=0.2:5").code, 1);
}

TEST_F(Cli, SameSeedSameBytes) {
  const std::string base = "simulate " + model("model2.cme") + " --method tau --t-end 10 --n 200 --record 0:10:1";
  const auto a = run(base + " --workers 1");
  const auto b = run(base + " --workers 4");
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  const auto c = run(base + " --workers 1 --seed 8");
  EXPECT_NE(a.out, c.out);
}
