#include <gtest/gtest.h>

#include <cmath>

#include <json.hpp>

#include "cmekit/app.hpp"
#include "cmekit/csv.hpp"
#include "cmekit/error.hpp"
#include "cmekit/infer.hpp"
#include "cmekit/netparse.hpp"

using namespace cmekit;

namespace {

ModelDocument load(const std::string& name) { return load_model(std::string(CMEKIT_MODELS_DIR) + "/" + name); }

std::size_t line_count(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST(Csv, SkipsCommentsAndBlankLinesAndTrims) {
  const auto t = parse_csv("# header comment\n a , b \n\n1, 2\n# mid\n3,4\n");
  ASSERT_EQ(t.header, (std::vector<std::string>{"a", "b"}));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[1][0], "3");
  EXPECT_EQ(t.column("b"), 1u);
  EXPECT_THROW(t.column("c"), InvalidArgument);
}

TEST(Csv, RaggedRowRejected) { EXPECT_THROW(parse_csv("a,b\n1,2,3\n"), InvalidArgument); }

TEST(Csv, WriterRoundTrip) {
  CsvWriter w({"x", "y"});
  w.row(std::vector<double>{1.0, 0.25});
  w.row(std::vector<std::string>{"inf", "2"});
  EXPECT_EQ(w.text(), "x,y\n1,0.25\ninf,2\n");
  EXPECT_THROW(w.row(std::vector<double>{1.0}), InvalidArgument);
}

TEST(Dataset, GroupsTimedRowsAscending) {
  const auto m = load("model1.cme");
  const auto d = read_dataset("time,P,R\n2,5,1\n1,3,0\n2,6,2\n", m.network);
  EXPECT_FALSE(d.steady_state);
  ASSERT_EQ(d.times, (std::vector<double>{1.0, 2.0}));
  ASSERT_EQ(d.species, (std::vector<std::size_t>{1, 0}));
  EXPECT_EQ(d.observations[0].size(), 1u);
  EXPECT_EQ(d.observations[1].size(), 2u);
  EXPECT_EQ(d.column(1, 0), (std::vector<Count>{5, 6}));
  EXPECT_EQ(d.column(1, 1), (std::vector<Count>{1, 2}));
}

TEST(Dataset, SteadyStateAndTrajectoryColumn) {
  const auto m = load("model1.cme");
  const auto d = read_dataset("trajectory,time,R\n0,ss,4\n1,ss,7\n", m.network);
  EXPECT_TRUE(d.steady_state);
  EXPECT_EQ(d.cells(), 2u);
  EXPECT_EQ(d.column(0, 0), (std::vector<Count>{4, 7}));
}

TEST(Dataset, Rejections) {
  const auto m = load("model1.cme");
  EXPECT_THROW(read_dataset("time,R\nss,1\n2,3\n", m.network), InvalidArgument);
  EXPECT_THROW(read_dataset("time,Q\n1,1\n", m.network), InvalidArgument);
  EXPECT_THROW(read_dataset("time,R\n1,-1\n", m.network), InvalidArgument);
  EXPECT_THROW(read_dataset("time,R\n1,2.5\n", m.network), InvalidArgument);
  EXPECT_THROW(read_dataset("R\n1\n", m.network), InvalidArgument);
}

TEST(Dataset, ReadColumn) {
  EXPECT_EQ(read_column("a,b\n1,2.5\n3,4\n", "b"), (std::vector<double>{2.5, 4.0}));
  EXPECT_THROW(read_column("a\nx\n", "a"), InvalidArgument);
}

TEST(TimeGrid, InclusiveEndpoints) {
  const auto g = parse_time_grid("0:200:10");
  ASSERT_EQ(g.size(), 21u);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_EQ(g.back(), 200.0);
  const auto h = parse_time_grid("0:1:0.1");
  ASSERT_EQ(h.size(), 11u);
  EXPECT_EQ(h.back(), 1.0);
  EXPECT_EQ(parse_time_grid("0:1:0.3").size(), 4u);
  EXPECT_EQ(parse_time_grid("5:5:1"), (std::vector<double>{5.0}));
}

TEST(TimeGrid, Rejections) {
  EXPECT_THROW(parse_time_grid("0:1"), InvalidArgument);
  EXPECT_THROW(parse_time_grid("1:0:1"), InvalidArgument);
  EXPECT_THROW(parse_time_grid("0:1:0"), InvalidArgument);
  EXPECT_THROW(parse_time_grid("0:x:1"), InvalidArgument);
  EXPECT_THROW(parse_number_list("1,,2"), InvalidArgument);
}

TEST(App, ValidateEmitsReport) {
  const auto out = run_validate(load("model1.cme"), {});
  const auto j = nlohmann::json::parse(out.report);
  EXPECT_TRUE(j["valid"].get<bool>());
  EXPECT_EQ(j["reactions"].get<int>(), 4);
  EXPECT_TRUE(out.data.empty());
  const auto dsl = run_validate(load("model1.cme"), {"dsl"});
  const auto again = parse_model(dsl.data);
  EXPECT_EQ(serialize_model(again, ModelFormat::dsl), dsl.data);
  EXPECT_THROW(run_validate(load("model1.cme"), {"xml"}), InvalidArgument);
}

TEST(App, SnapshotLayout) {
  SimulateOptions o;
  o.t_end = 200.0;
  o.n = 5;
  o.seed = 7;
  o.record = "0:200:10";
  const auto out = run_simulate(load("model1.cme"), o);
  const auto t = parse_csv(out.data);
  EXPECT_EQ(t.header, (std::vector<std::string>{"trajectory", "time", "R", "P"}));
  ASSERT_EQ(t.rows.size(), 5u * 21u);
  EXPECT_EQ(t.rows[0][0], "0");
  EXPECT_EQ(t.rows[0][1], "0");
  EXPECT_EQ(t.rows[20][1], "200");
  EXPECT_EQ(t.rows[21][0], "1");
}

TEST(App, EnsembleIndependentOfWorkers) {
  SimulateOptions o;
  o.t_end = 20.0;
  o.n = 40;
  o.record = "0:20:5";
  const auto m = load("model2.cme");
  for (const char* method : {"direct", "nrm", "tau", "rleap", "cle"}) {
    o.method = method;
    o.workers = 1;
    const auto a = run_simulate(m, o).data;
    o.workers = 3;
    EXPECT_EQ(a, run_simulate(m, o).data) << method;
  }
}

TEST(App, EventModeAndOde) {
  const auto m = load("birth_death.cme");
  SimulateOptions o;
  o.t_end = 5.0;
  const auto ev = run_simulate(m, o);
  const auto j = nlohmann::json::parse(ev.report);
  EXPECT_EQ(line_count(ev.data), j["events"].get<std::size_t>() + 3);  // header, t=0, events, t_end
  o.method = "ode";
  o.t_end.reset();
  o.record = "0:10:1";
  const auto t = parse_csv(run_simulate(m, o).data);
  ASSERT_EQ(t.rows.size(), 11u);
  EXPECT_NEAR(std::stod(t.rows[10][1]), 10.0 * (1.0 - std::exp(-1.0)), 1e-5);
}

TEST(App, SimulateRejections) {
  const auto m = load("birth_death.cme");
  SimulateOptions o;
  EXPECT_THROW(run_simulate(m, o), InvalidArgument);
  o.t_end = 1.0;
  o.method = "euler";
  EXPECT_THROW(run_simulate(m, o), InvalidArgument);
  o.method = "ode";
  o.n = 2;
  EXPECT_THROW(run_simulate(m, o), InvalidArgument);
  o.method = "wssa";
  o.n = 10;
  EXPECT_THROW(run_simulate(m, o), InvalidArgument);
}

TEST(App, FspMarginalAndCertificate) {
  FspAppOptions o;
  o.stationary = true;
  o.box = "60";
  const auto out = run_fsp(load("birth_death.cme"), o);
  const auto t = parse_csv(out.data);
  ASSERT_EQ(t.rows.size(), 61u);
  double p10 = std::stod(t.rows[10][1]);
  EXPECT_NEAR(p10, std::exp(-10.0) * std::pow(10.0, 10) / 3628800.0, 1e-9);

  FspAppOptions tr;
  tr.t = 10.0;
  tr.marginal = "P";
  const auto mo = run_fsp(load("model1.cme"), tr);
  const auto j = nlohmann::json::parse(mo.report);
  EXPECT_LE(j["certificate"]["eps_achieved"].get<double>(), 1e-6);
  EXPECT_EQ(parse_csv(mo.data).header, (std::vector<std::string>{"P", "probability"}));
}

TEST(App, MomentsStationaryRowAndSummary) {
  MomentsAppOptions o;
  o.stationary = true;
  const auto out = run_moments(load("model1.cme"), o);
  const auto t = parse_csv(out.data);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0][0], "inf");
  const auto j = nlohmann::json::parse(out.report);
  EXPECT_NEAR(j["summary"]["P"]["mean"].get<double>(), 400.0, 1e-6);
  EXPECT_NEAR(j["summary"]["P"]["fano"].get<double>(), 1.0 + 2.0 / 0.15, 1e-6);
}

TEST(App, MomentsNeedClosureForDimer) {
  MomentsAppOptions o;
  o.t_end = 1.0;
  EXPECT_THROW(run_moments(load("dimer.cme"), o), UnsupportedError);
  o.closure = "normal";
  EXPECT_NO_THROW(run_moments(load("dimer.cme"), o));
}

TEST(App, LnaStationaryHeader) {
  LnaAppOptions o;
  o.stationary = true;
  const auto t = parse_csv(run_lna(load("model1.cme"), o).data);
  EXPECT_EQ(t.header, (std::vector<std::string>{"time", "R", "P", "cov_R_R", "cov_R_P", "cov_P_P"}));
  EXPECT_NEAR(std::stod(t.rows[0][5]), 400.0 * (1.0 + 2.0 / 0.15), 1e-4);
}

TEST(App, InferMomentFromTargets) {
  InferAppOptions o;
  o.method = "moment";
  o.params = "tau_R=0.2:5,tau_P=0.2:5";
  o.targets = "R=10:10,P=400:5733.333333333333";
  const auto out = run_infer(load("model1.cme"), o);
  const auto j = nlohmann::json::parse(out.data);
  EXPECT_NEAR(j["estimate"]["tau_R"].get<double>(), 1.0, 1e-4);
  EXPECT_NEAR(j["estimate"]["tau_P"].get<double>(), 2.0, 1e-4);
}

TEST(App, InferGamma) {
  InferAppOptions o;
  o.method = "gamma";
  o.species = "P";
  o.data = "P\n38\n42\n38\n42\n38\n42\n38\n42\n38\n42\n";
  const auto j = nlohmann::json::parse(run_infer(load("model1.cme"), o).data);
  EXPECT_NEAR(j["a"].get<double>() * j["b"].get<double>(), 40.0, 1e-9);
}

TEST(App, InferRejections) {
  const auto m = load("model1.cme");
  InferAppOptions o;
  o.method = "abc";
  EXPECT_THROW(run_infer(m, o), InvalidArgument);
  o.params = "tau_R=0.2:5";
  o.method = "nuts";
  EXPECT_THROW(run_infer(m, o), InvalidArgument);
  o.method = "fsp-mle";
  o.objective = "l2";
  EXPECT_THROW(run_infer(m, o), InvalidArgument);
}
