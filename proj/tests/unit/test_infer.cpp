#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cmekit/error.hpp"
#include "cmekit/infer.hpp"
#include "cmekit/moments.hpp"
#include "cmekit/netparse.hpp"
#include "stat_helpers.hpp"

using namespace cmekit;
namespace ts = testing_stats;

namespace {

ModelDocument model(const std::string& name) { return load_model(std::string(CMEKIT_MODELS_DIR) + "/" + name); }

Dataset poisson_steady_state(double mean, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::poisson_distribution<Count> pois(mean);
  Dataset d;
  d.species = {0};
  d.steady_state = true;
  d.times = {0.0};
  d.observations.resize(1);
  for (std::size_t i = 0; i < n; ++i) d.observations[0].push_back({pois(gen)});
  return d;
}

ParameterSpec tau_box() { return parse_parameter_spec("tau_R=0.2:5"); }

}  // namespace

TEST(ParameterSpec, ParseAndCheck) {
  const auto spec = parse_parameter_spec("tau_R=0.2:5, lam_R=0.05:0.5");
  ASSERT_EQ(spec.size(), 2u);
  EXPECT_EQ(spec.names[1], "lam_R");
  EXPECT_DOUBLE_EQ(spec.low[0], 0.2);
  EXPECT_DOUBLE_EQ(spec.high[1], 0.5);
  const auto net = model("birth_death.cme").network;
  EXPECT_NO_THROW(spec.check(net));
  const double theta[] = {2.0, 0.3};
  const auto applied = spec.apply(net, theta);
  EXPECT_EQ(applied.parameter("tau_R"), 2.0);
  EXPECT_EQ(applied.parameter("lam_R"), 0.3);
}

TEST(ParameterSpec, Rejects) {
  const auto net = model("birth_death.cme").network;
  EXPECT_THROW(parse_parameter_spec("tau_R=1"), InvalidArgument);
  EXPECT_THROW(parse_parameter_spec("tau_R=a:b"), InvalidArgument);
  EXPECT_THROW(parse_parameter_spec("nope=0.1:1").check(net), InvalidArgument);
  EXPECT_THROW(parse_parameter_spec("tau_R=2:1").check(net), InvalidArgument);
  EXPECT_THROW(parse_parameter_spec("tau_R=0:1").check(net), InvalidArgument);
  EXPECT_THROW(parse_parameter_spec("tau_R=1:2,tau_R=1:3").check(net), InvalidArgument);
}

TEST(Kolmogorov, IdenticalSamplesGiveZero) {
  const Count a[] = {1, 2, 2, 5, 7};
  EXPECT_EQ(kolmogorov_distance(std::span<const Count>(a), std::span<const Count>(a)), 0.0);
}

TEST(Kolmogorov, DisjointPointMassesGiveOne) {
  const Count a[] = {0, 0, 0};
  const Count b[] = {5};
  EXPECT_EQ(kolmogorov_distance(std::span<const Count>(a), std::span<const Count>(b)), 1.0);
}

TEST(Kolmogorov, AgainstBruteForceCdf) {
  const Count a[] = {0, 1};
  const auto emp = empirical_pmf(a);
  std::vector<double> pois;
  for (int k = 0; k <= 60; ++k) pois.push_back(ts::poisson_pmf(10.0, k));
  double fa = 0.0, fb = 0.0, sup = 0.0;
  for (std::size_t k = 0; k < pois.size(); ++k) {
    fa += k < emp.size() ? emp[k] : 0.0;
    fb += pois[k];
    sup = std::max(sup, std::abs(fa - fb));
  }
  EXPECT_NEAR(kolmogorov_distance(emp, pois), sup, 1e-12);
  EXPECT_GT(sup, 0.99);
}

TEST(Kolmogorov, EmptyRejected) {
  const std::vector<double> empty;
  const double one[] = {1.0};
  EXPECT_THROW(kolmogorov_distance(empty, one), InvalidArgument);
}

TEST(EmpiricalPmf, Counts) {
  const Count a[] = {0, 2, 2, 3};
  EXPECT_EQ(empirical_pmf(a), (Pmf{0.25, 0.0, 0.5, 0.25}));
}

TEST(GammaBurst, MethodOfMomentsIdentity) {
  // Ten samples with mean 40 and unbiased variance 800.
  std::vector<double> s(10, 40.0);
  const double h = std::sqrt(800.0 * 9.0 / 10.0);
  for (std::size_t i = 0; i < 10; ++i) s[i] += (i % 2 == 0 ? h : -h);
  const auto g = fit_gamma_burst(s);
  EXPECT_NEAR(g.a, 2.0, 1e-12);
  EXPECT_NEAR(g.b, 20.0, 1e-12);
}

TEST(GammaBurst, ConstantSamplesRejected) {
  const std::vector<double> s(20, 3.0);
  EXPECT_THROW(fit_gamma_burst(s), NumericError);
}

TEST(GammaBurst, RecoversSyntheticGamma) {
  std::mt19937_64 gen(8);
  std::gamma_distribution<double> gamma(2.0, 20.0);
  std::vector<double> s(10000);
  for (auto& x : s) x = gamma(gen);
  const auto g = fit_gamma_burst(s);
  EXPECT_NEAR(g.a, 2.0, 0.2);
  EXPECT_NEAR(g.b, 20.0, 2.0);
}

TEST(FitFspMle, RecoversBirthRate) {
  const auto doc = model("birth_death.cme");
  const auto data = poisson_steady_state(10.0, 500, 21);
  const auto fit = fit_fsp_mle(doc, tau_box(), data);
  ASSERT_EQ(fit.estimate.size(), 1u);
  EXPECT_NEAR(fit.estimate[0], 1.0, 0.1);
  // DKW band at 1%: sqrt(ln(2/0.01) / 2n).
  EXPECT_LT(fit.mismatch, std::sqrt(std::log(200.0) / 1000.0));
  for (std::size_t i = 1; i < fit.trace.size(); ++i)
    EXPECT_LE(fit.trace[i].objective, fit.trace[i - 1].objective);
}

TEST(FitFspMle, L1ObjectiveAlsoRecovers) {
  const auto doc = model("birth_death.cme");
  const auto data = poisson_steady_state(10.0, 500, 22);
  FitConfig cfg;
  cfg.objective = FspObjective::l1;
  const auto fit = fit_fsp_mle(doc, tau_box(), data, cfg);
  EXPECT_NEAR(fit.estimate[0], 1.0, 0.1);
}

TEST(FitFspMle, SingleObservationAtMode) {
  const auto doc = model("birth_death.cme");
  Dataset d;
  d.species = {0};
  d.steady_state = true;
  d.times = {0.0};
  d.observations = {{{10}}};
  const auto fit = fit_fsp_mle(doc, tau_box(), d);
  EXPECT_TRUE(std::isfinite(fit.objective));
  EXPECT_GE(fit.estimate[0], 0.2);
  EXPECT_LE(fit.estimate[0], 5.0);
}

TEST(FitFspMle, TransientSnapshots) {
  // Pure birth from 0: X(t) ~ Poisson(tau t) at every snapshot.
  const auto doc = parse_model("species X\nparam tau = 1\nreaction b: 0 -> X @ mass_action(tau)\ninit X = 0\n");
  std::mt19937_64 gen(4);
  Dataset d;
  d.species = {0};
  d.times = {1.0, 3.0};
  for (double t : d.times) {
    std::poisson_distribution<Count> pois(2.0 * t);
    std::vector<SystemState> obs;
    for (int i = 0; i < 400; ++i) obs.push_back({pois(gen)});
    d.observations.push_back(obs);
  }
  const auto fit = fit_fsp_mle(doc, parse_parameter_spec("tau=0.5:5"), d);
  EXPECT_NEAR(fit.estimate[0], 2.0, 0.2);
}

TEST(Abc, VacuousThresholdReturnsPrior) {
  const auto doc = model("birth_death.cme");
  const auto data = poisson_steady_state(10.0, 200, 3);
  AbcConfig cfg;
  cfg.epsilon = 1.0;
  cfg.particles = 40;
  cfg.cells = 30;
  const auto r = abc_rejection(doc, tau_box(), data, cfg);
  EXPECT_EQ(r.acceptance_rate, 1.0);
  EXPECT_EQ(r.posterior().size(), 40u);
  EXPECT_EQ(r.posterior(), r.particles);
  for (const auto& p : r.particles) {
    EXPECT_GE(p[0], 0.2);
    EXPECT_LE(p[0], 5.0);
  }
}

TEST(Abc, DeterministicAcrossRunsAndWorkers) {
  const auto doc = model("birth_death.cme");
  const auto data = poisson_steady_state(10.0, 300, 5);
  AbcConfig cfg;
  cfg.epsilon = 0.1;
  cfg.particles = 30;
  cfg.cells = 200;
  cfg.seed = 99;
  const auto a = abc_rejection(doc, tau_box(), data, cfg);
  cfg.workers = 3;
  const auto b = abc_rejection(doc, tau_box(), data, cfg);
  EXPECT_EQ(a.particles, b.particles);
  EXPECT_EQ(a.distances, b.distances);
  EXPECT_EQ(a.accepted, b.accepted);
}

TEST(Abc, RecoversBirthRate) {
  const auto doc = model("birth_death.cme");
  const auto data = poisson_steady_state(10.0, 2000, 6);
  AbcConfig cfg;
  cfg.epsilon = 0.05;
  cfg.particles = 300;
  cfg.cells = 2000;
  cfg.seed = 17;
  const auto r = abc_rejection(doc, parse_parameter_spec("tau_R=0.5:2"), data, cfg);
  const auto post = r.posterior();
  ASSERT_GE(post.size(), 5u);
  double mean = 0.0;
  for (const auto& p : post) mean += p[0];
  mean /= static_cast<double>(post.size());
  EXPECT_NEAR(mean, 1.0, 0.2);
}

TEST(Abc, RequiresSteadyStateData) {
  const auto doc = model("birth_death.cme");
  auto data = poisson_steady_state(10.0, 10, 1);
  data.steady_state = false;
  EXPECT_THROW(abc_rejection(doc, tau_box(), data, AbcConfig{}), InvalidArgument);
}

TEST(Abc, DefaultHorizon) {
  EXPECT_DOUBLE_EQ(default_relaxation_horizon(model("model1.cme").network), 10.0 / 0.05);
  EXPECT_THROW(default_relaxation_horizon(parse_model("species X\nparam k = 1\nreaction b: 0 -> X @ mass_action(k)\n").network),
               InvalidArgument);
}

TEST(MomentMatch, InvertsExactModel1Moments) {
  const auto net = model("model1.cme").network;
  const auto e = model1_equilibrium(1, 0.1, 2, 0.05);
  const std::vector<MomentTarget> targets{{0, e.mean_r, e.var_r}, {1, e.mean_p, e.var_p}};
  const auto fit = moment_match(net, parse_parameter_spec("tau_R=0.1:10,tau_P=0.1:10"), targets);
  EXPECT_NEAR(fit.estimate[0], 1.0, 1e-4);
  EXPECT_NEAR(fit.estimate[1], 2.0, 2e-4);
  EXPECT_FALSE(fit.underdetermined);
}

TEST(MomentMatch, SingleMeanIsUnderdetermined) {
  const auto net = model("model1.cme").network;
  const std::vector<MomentTarget> targets{{0, 10.0, 10.0, 1.0, 0.0}};
  const auto fit = moment_match(net, parse_parameter_spec("tau_R=0.1:10,tau_P=0.1:10"), targets);
  EXPECT_TRUE(fit.underdetermined);
  EXPECT_FALSE(fit.warnings.empty());
  EXPECT_NEAR(fit.estimate[0], 1.0, 1e-4);
}

TEST(MomentMatch, MeansOnlyStillIdentifiable) {
  const auto net = model("model1.cme").network;
  const std::vector<MomentTarget> targets{{0, 10.0, 0.0, 1.0, 0.0}, {1, 400.0, 0.0, 1.0, 0.0}};
  const auto fit = moment_match(net, parse_parameter_spec("tau_R=0.1:10,tau_P=0.1:10"), targets);
  EXPECT_FALSE(fit.underdetermined);
  EXPECT_NEAR(fit.estimate[1], 2.0, 2e-4);
}

TEST(MomentMatch, SuperPoissonMrnaCannotBeFit) {
  const auto net = model("model1.cme").network;
  const std::vector<MomentTarget> targets{{0, 10.0, 30.0}};
  const auto fit = moment_match(net, parse_parameter_spec("tau_R=0.1:10"), targets);
  ASSERT_EQ(fit.residuals.size(), 2u);
  const auto sys = moment_odes(parse_parameter_spec("tau_R=0.1:10").apply(net, fit.estimate), 2);
  const auto m = summarize_moments(sys, stationary_moments(sys));
  EXPECT_NEAR(m.variance[0] / m.mean[0], 1.0, 1e-9);
  EXPECT_GT(fit.mismatch, 0.3);
}
