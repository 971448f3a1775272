// Exercises the shared library through its C header only.

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

#include "cmekit/cmekit.h"

namespace {

const std::string kModels = CMEKIT_MODELS_DIR;

const char* kBirthDeath =
    "species X\n"
    "param k = 1\n"
    "param g = 0.1\n"
    "reaction b: 0 -> X @ mass_action(k)\n"
    "reaction d: X -> 0 @ mass_action(g)\n"
    "init X = 0\n";

struct Model {
  cmekit_model* p = nullptr;
  ~Model() { cmekit_model_free(p); }
};

struct Result {
  cmekit_result* p = nullptr;
  ~Result() { cmekit_result_free(p); }
  std::string data() const { return std::string(cmekit_result_data(p), cmekit_result_data_size(p)); }
};

}  // namespace

TEST(CApi, VersionAndStatusNames) {
  EXPECT_STRNE(cmekit_version(), "");
  EXPECT_STREQ(cmekit_status_name(CMEKIT_OK), "ok");
  EXPECT_STREQ(cmekit_status_name(CMEKIT_CAPACITY), "capacity exceeded");
  EXPECT_STREQ(cmekit_status_name(static_cast<cmekit_status>(99)), "unknown status");
}

TEST(CApi, ParseAndInspect) {
  Model m;
  ASSERT_EQ(cmekit_model_parse(kBirthDeath, &m.p), CMEKIT_OK);
  EXPECT_EQ(cmekit_model_species_count(m.p), 1u);
  EXPECT_EQ(cmekit_model_reaction_count(m.p), 2u);
  EXPECT_STREQ(cmekit_model_species_name(m.p, 0), "X");
  EXPECT_EQ(cmekit_model_species_name(m.p, 1), nullptr);
  EXPECT_STREQ(cmekit_last_error(), "");
}

TEST(CApi, ParseJsonText) {
  Model a;
  ASSERT_EQ(cmekit_model_parse(kBirthDeath, &a.p), CMEKIT_OK);
  cmekit_validate_options vo;
  cmekit_validate_options_default(&vo);
  vo.emit = "json";
  Result r;
  ASSERT_EQ(cmekit_validate(a.p, &vo, &r.p), CMEKIT_OK);
  Model b;
  ASSERT_EQ(cmekit_model_parse(r.data().c_str(), &b.p), CMEKIT_OK);
  EXPECT_EQ(cmekit_model_reaction_count(b.p), 2u);
}

TEST(CApi, ErrorStatuses) {
  Model m;
  EXPECT_EQ(cmekit_model_parse("species X\nreaction r: 0 -> @@\n", &m.p), CMEKIT_PARSE);
  EXPECT_EQ(m.p, nullptr);
  EXPECT_STRNE(cmekit_last_error(), "");
  EXPECT_EQ(cmekit_model_load((kModels + "/missing.cme").c_str(), &m.p), CMEKIT_IO);
  EXPECT_EQ(cmekit_model_parse(nullptr, &m.p), CMEKIT_INVALID_ARGUMENT);
  // Pure birth on a box has no single stationary class.
  ASSERT_EQ(cmekit_model_parse("species X\nparam k = 1\nreaction b: 0 -> X @ mass_action(k)\n", &m.p), CMEKIT_OK);
  cmekit_fsp_options fo;
  cmekit_fsp_options_default(&fo);
  fo.stationary = 1;
  fo.box = "5";
  cmekit_result* r = nullptr;
  EXPECT_EQ(cmekit_fsp(m.p, &fo, &r), CMEKIT_MODEL);
  EXPECT_EQ(r, nullptr);
}

TEST(CApi, NullArgumentsRejected) {
  Model m;
  ASSERT_EQ(cmekit_model_parse(kBirthDeath, &m.p), CMEKIT_OK);
  cmekit_result* r = nullptr;
  EXPECT_EQ(cmekit_fsp(m.p, nullptr, &r), CMEKIT_INVALID_ARGUMENT);
  cmekit_fsp_options fo;
  cmekit_fsp_options_default(&fo);
  EXPECT_EQ(cmekit_fsp(nullptr, &fo, &r), CMEKIT_INVALID_ARGUMENT);
  EXPECT_EQ(cmekit_fsp(m.p, &fo, nullptr), CMEKIT_INVALID_ARGUMENT);
  cmekit_result_free(nullptr);
  cmekit_model_free(nullptr);
  EXPECT_EQ(cmekit_result_warning(nullptr, 0), nullptr);
}

TEST(CApi, Defaults) {
  cmekit_simulate_options so;
  cmekit_simulate_options_default(&so);
  EXPECT_STREQ(so.method, "direct");
  EXPECT_TRUE(std::isnan(so.t_end));
  EXPECT_EQ(so.n, 1u);
  EXPECT_EQ(so.seed, 20240601u);
  EXPECT_EQ(so.workers, 1u);
  EXPECT_DOUBLE_EQ(so.epsilon, 0.03);
  cmekit_fsp_options fo;
  cmekit_fsp_options_default(&fo);
  EXPECT_DOUBLE_EQ(fo.eps, 1e-6);
  EXPECT_TRUE(std::isnan(fo.t));
  EXPECT_EQ(fo.state_cap, 0u);
  cmekit_moments_options mo;
  cmekit_moments_options_default(&mo);
  EXPECT_EQ(mo.order, 2);
  EXPECT_STREQ(mo.closure, "none");
  cmekit_infer_options io;
  cmekit_infer_options_default(&io);
  EXPECT_DOUBLE_EQ(io.epsilon, 0.05);
  EXPECT_EQ(io.particles, 1000u);
  EXPECT_EQ(io.cells, 2000u);
  EXPECT_TRUE(std::isnan(io.horizon));
  EXPECT_STREQ(io.objective, "nll");
}

TEST(CApi, FspStationaryPoisson) {
  Model m;
  ASSERT_EQ(cmekit_model_parse(kBirthDeath, &m.p), CMEKIT_OK);
  cmekit_fsp_options fo;
  cmekit_fsp_options_default(&fo);
  fo.stationary = 1;
  fo.box = "60";
  Result r;
  ASSERT_EQ(cmekit_fsp(m.p, &fo, &r.p), CMEKIT_OK) << cmekit_last_error();
  const std::string csv = r.data();
  EXPECT_EQ(csv.rfind("X,probability\n0,", 0), 0u);
  EXPECT_NE(std::string(cmekit_result_report(r.p)).find("\"stationary\""), std::string::npos);
}

TEST(CApi, CapacityStatus) {
  Model m;
  ASSERT_EQ(cmekit_model_load((kModels + "/model1.cme").c_str(), &m.p), CMEKIT_OK);
  cmekit_fsp_options fo;
  cmekit_fsp_options_default(&fo);
  fo.t = 50.0;
  fo.state_cap = 20;
  Result r;
  EXPECT_EQ(cmekit_fsp(m.p, &fo, &r.p), CMEKIT_CAPACITY);
  EXPECT_EQ(r.p, nullptr);
  EXPECT_NE(std::string(cmekit_last_error()).find("achieved"), std::string::npos) << cmekit_last_error();
}

TEST(CApi, UnsupportedClosure) {
  Model m;
  ASSERT_EQ(cmekit_model_load((kModels + "/dimer.cme").c_str(), &m.p), CMEKIT_OK);
  cmekit_moments_options mo;
  cmekit_moments_options_default(&mo);
  mo.t_end = 1.0;
  Result r;
  EXPECT_EQ(cmekit_moments(m.p, &mo, &r.p), CMEKIT_UNSUPPORTED);
}

TEST(CApi, SimulateDeterministicAcrossWorkers) {
  Model m;
  ASSERT_EQ(cmekit_model_load((kModels + "/model1.cme").c_str(), &m.p), CMEKIT_OK);
  cmekit_simulate_options so;
  cmekit_simulate_options_default(&so);
  so.n = 50;
  so.record = "0:20:5";
  Result a, b;
  ASSERT_EQ(cmekit_simulate(m.p, &so, &a.p), CMEKIT_OK);
  so.workers = 4;
  ASSERT_EQ(cmekit_simulate(m.p, &so, &b.p), CMEKIT_OK);
  EXPECT_EQ(a.data(), b.data());
}

TEST(CApi, LastErrorIsPerThread) {
  Model m;
  EXPECT_EQ(cmekit_model_parse("@@", &m.p), CMEKIT_PARSE);
  std::string other = "unset";
  std::thread([&] { other = cmekit_last_error(); }).join();
  EXPECT_EQ(other, "");
  EXPECT_STRNE(cmekit_last_error(), "");
}

TEST(CApi, WarningsExposed) {
  Model m;
  ASSERT_EQ(cmekit_model_load((kModels + "/model1.cme").c_str(), &m.p), CMEKIT_OK);
  cmekit_infer_options io;
  cmekit_infer_options_default(&io);
  io.method = "moment";
  io.params = "tau_R=0.2:5,tau_P=0.2:5";
  io.targets = "R=10:10";
  io.weights = "R=1:0";
  Result r;
  ASSERT_EQ(cmekit_infer(m.p, &io, &r.p), CMEKIT_OK) << cmekit_last_error();
  ASSERT_GE(cmekit_result_warning_count(r.p), 1u);
  EXPECT_STRNE(cmekit_result_warning(r.p, 0), "");
  EXPECT_EQ(cmekit_result_warning(r.p, cmekit_result_warning_count(r.p)), nullptr);
}
