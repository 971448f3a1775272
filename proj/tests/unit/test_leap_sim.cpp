#include <gtest/gtest.h>

#include <cmath>

#include "cmekit/exact_sim.hpp"
#include "cmekit/leap_sim.hpp"
#include "cmekit/moments.hpp"
#include "cmekit/netparse.hpp"
#include "stat_helpers.hpp"

using namespace cmekit;
namespace ts = testing_stats;

namespace {

ModelDocument model(const std::string& name) { return load_model(std::string(CMEKIT_MODELS_DIR) + "/" + name); }

std::vector<double> terminal_tau(const ModelDocument& doc, double t_end, double eps, std::size_t n,
                                 std::uint64_t seed, std::size_t species) {
  LeapConfig cfg;
  cfg.epsilon = eps;
  const double t[] = {t_end};
  const auto m = run_ensemble(n, 1, doc.network.species_count(), seed, 2, [&](std::size_t, RngStream& rng) {
    return sample_path(simulate_tau_leap(doc.network, doc.initial_state, t_end, cfg, rng), t);
  });
  return m.column(0, species);
}

}  // namespace

TEST(SelectTau, CapBinds) {
  const auto doc = model("birth_death.cme");
  EXPECT_DOUBLE_EQ(select_tau(doc.network, SystemState{10}, 0.99, 0.5), 0.5);
}

TEST(SelectTau, BoundFormulaByHand) {
  const auto doc = model("birth_death.cme");
  // X = 10: a = (1, 1); mu = 1 - 1 = 0, sigma2 = 1 + 1 = 2; bound max(0.3, 1)^2 / 2 = 0.5.
  EXPECT_DOUBLE_EQ(select_tau(doc.network, SystemState{10}, 0.03, 100.0), 0.5);
  // X = 40: a = (1, 4); mu = -3, sigma2 = 5; g = max(1.2, 1) = 1.2 -> min(1.2/3, 1.44/5) = 0.288.
  EXPECT_NEAR(select_tau(doc.network, SystemState{40}, 0.03, 100.0), 0.288, 1e-15);
}

TEST(SelectTau, ZeroPropensityReturnsHorizon) {
  const auto doc = parse_model("species X\nparam l = 1\nreaction d: X -> 0 @ mass_action(l)\n");
  EXPECT_EQ(select_tau(doc.network, SystemState{0}, 0.03, 7.0), 7.0);
}

TEST(StepTauLeap, OneLeapMean) {
  const auto doc = model("model1.cme");
  const SystemState x{10, 50};
  const double tau = 0.2;
  // Drift: R: 1 - 0.1*10 = 0; P: 2*10 - 0.05*50 = 17.5.
  RngStream rng(12, 0);
  std::vector<double> r, p;
  for (int i = 0; i < 100000; ++i) {
    const auto y = step_tau_leap(doc.network, x, tau, rng, false);
    r.push_back(static_cast<double>(y[0]));
    p.push_back(static_cast<double>(y[1]));
  }
  EXPECT_NEAR(ts::mean(r), 10.0, 3.0 * ts::se_mean(r));
  EXPECT_NEAR(ts::mean(p), 50.0 + tau * 17.5, 3.0 * ts::se_mean(p));
}

TEST(StepTauLeap, FrozenPropensityCountsArePoisson) {
  const auto doc = parse_model("species A B\nparam k = 3\nreaction r1: 0 -> A @ mass_action(k)\n"
                               "reaction r2: 0 -> B @ 1.5\n");
  RngStream rng(2, 0);
  std::vector<long long> a, b;
  for (int i = 0; i < 20000; ++i) {
    const auto y = step_tau_leap(doc.network, SystemState{0, 0}, 2.0, rng, false);
    a.push_back(y[0]);
    b.push_back(y[1]);
  }
  EXPECT_GT(ts::chi_square_pvalue(a, [](long long k) { return ts::poisson_pmf(6.0, k); }, 30), 1e-3);
  EXPECT_GT(ts::chi_square_pvalue(b, [](long long k) { return ts::poisson_pmf(3.0, k); }, 30), 1e-3);
}

TEST(StepTauLeap, ZeroPropensitiesLeaveStateUnchanged) {
  const auto doc = parse_model("species X\nparam l = 1\nreaction d: X -> 0 @ mass_action(l)\n");
  RngStream rng(1, 0);
  EXPECT_EQ(step_tau_leap(doc.network, SystemState{0}, 10.0, rng, false), (SystemState{0}));
}

TEST(StepTauLeap, NeverNegative) {
  const auto doc = parse_model("species X\nparam l = 1\nreaction d: X -> 0 @ mass_action(l)\n");
  RngStream rng(1, 0);
  for (int i = 0; i < 2000; ++i) {
    for (bool mid : {false, true}) {
      const auto y = step_tau_leap(doc.network, SystemState{1}, 50.0, rng, mid);
      EXPECT_GE(y[0], 0);
    }
  }
}

TEST(SimulateTauLeap, ZeroHorizonAndEndTime) {
  const auto doc = model("model2.cme");
  RngStream rng(1, 0);
  const auto tr0 = simulate_tau_leap(doc.network, doc.initial_state, 0.0, {}, rng);
  EXPECT_EQ(tr0.states.back(), doc.initial_state);
  const auto tr = simulate_tau_leap(doc.network, doc.initial_state, 13.0, {}, rng);
  EXPECT_EQ(tr.times.back(), 13.0);
  for (const auto& s : tr.states) {
    for (Count c : s) EXPECT_GE(c, 0);
  }
}

TEST(SimulateTauLeap, BirthDeathMeanWithinTwoPercent) {
  const auto x = terminal_tau(model("birth_death.cme"), 200.0, 0.03, 10000, 5, 0);
  EXPECT_LT(std::abs(ts::mean(x) - 10.0) / 10.0, 0.02);
}

TEST(SimulateTauLeap, SmallerEpsilonIsCloserToExact) {
  const auto doc = model("birth_death.cme");
  const double t[] = {5.0};
  const std::size_t n = 20000;
  const auto exact = simulate_ensemble(doc.network, doc.initial_state, t, n, ExactMethod::direct, 77, 2).column(0, 0);
  auto tv = [&](const std::vector<double>& x) {
    std::vector<double> pa(80, 0.0), pb(80, 0.0);
    for (double v : x) pa[std::min<std::size_t>(79, static_cast<std::size_t>(v))] += 1.0 / n;
    for (double v : exact) pb[std::min<std::size_t>(79, static_cast<std::size_t>(v))] += 1.0 / n;
    double d = 0.0;
    for (std::size_t i = 0; i < pa.size(); ++i) d += std::abs(pa[i] - pb[i]);
    return 0.5 * d;
  };
  // A coarse leap from X=0 with large epsilon overshoots early relaxation.
  const double fine = tv(terminal_tau(doc, 5.0, 0.001, n, 78, 0));
  const double coarse = tv(terminal_tau(doc, 5.0, 0.1, n, 78, 0));
  EXPECT_LT(fine, coarse);
}

TEST(SimulateTauLeap, MeanErrorShrinksWithEpsilonOnModel1) {
  const auto doc = model("model1.cme");
  const auto sys = moment_odes(doc.network, 1);
  const double grid[] = {0.0, 50.0};
  const auto exact = integrate_moments(sys, point_moments(sys, doc.initial_state), grid).back();
  double prev = std::numeric_limits<double>::infinity();
  for (double eps : {0.3, 0.1, 0.03}) {
    const auto p = terminal_tau(doc, 50.0, eps, 10000, 404, 1);
    const double err = std::abs(ts::mean(p) - exact[1]);
    EXPECT_LT(err, prev + 3.0 * ts::se_mean(p)) << "eps " << eps;
    prev = err;
  }
}

TEST(RLeap, FiringsSumToR) {
  // Counts far from zero: no halving can occur.
  const auto m1 = model("model1.cme");
  RngStream rng(3, 0);
  for (int i = 0; i < 1000; ++i) {
    const auto st = step_r_leap(m1.network, SystemState{200, 1000}, 10, rng);
    ASSERT_TRUE(st.has_value());
    std::uint64_t total = 0;
    for (auto f : st->firings) total += f;
    EXPECT_EQ(total, 10u);
  }
}

TEST(RLeap, HalvingKeepsCountsNonnegative) {
  // The single promoter copy can switch off only once, so R is halved when
  // the draw asks for more.
  const auto doc = model("model2.cme");
  RngStream rng(3, 0);
  SystemState x{0, 1, 20, 100};
  for (int i = 0; i < 1000; ++i) {
    const auto st = step_r_leap(doc.network, x, 10, rng);
    ASSERT_TRUE(st.has_value());
    std::uint64_t total = 0;
    for (auto f : st->firings) total += f;
    EXPECT_TRUE(total == 10u || total == 5u || total == 2u || total == 1u) << total;
    x = st->state;
    for (Count c : x) ASSERT_GE(c, 0);
  }
}

TEST(RLeap, ElapsedIsGammaMean) {
  const auto doc = parse_model("species A B\nreaction r1: 0 -> A @ 0.5\nreaction r2: 0 -> B @ 1.5\n");
  RngStream rng(6, 0);
  std::vector<double> el;
  for (int i = 0; i < 100000; ++i) el.push_back(step_r_leap(doc.network, SystemState{0, 0}, 10, rng)->elapsed);
  EXPECT_NEAR(ts::mean(el), 5.0, 3.0 * ts::se_mean(el));
}

TEST(RLeap, ROneMatchesDirectStep) {
  const auto doc = model("model1.cme");
  const SystemState x{4, 30};
  RngStream r1(10, 0), r2(11, 0);
  std::vector<double> a, b;
  for (int i = 0; i < 20000; ++i) {
    a.push_back(step_r_leap(doc.network, x, 1, r1)->elapsed);
    b.push_back(step_direct(doc.network, x, r2)->wait);
  }
  EXPECT_LT(ts::ks_two_sample(a, b), ts::ks_critical(a.size(), b.size(), 0.001));
}

TEST(RLeap, ExhaustedWhenNoPropensity) {
  const auto doc = parse_model("species X\nparam l = 1\nreaction d: X -> 0 @ mass_action(l)\n");
  RngStream rng(1, 0);
  EXPECT_FALSE(step_r_leap(doc.network, SystemState{0}, 5, rng).has_value());
}

TEST(RLeap, SimulateEndsAtHorizon) {
  const auto doc = model("birth_death.cme");
  const double t[] = {100.0};
  LeapConfig cfg;
  const auto m = run_ensemble(4000, 1, 1, 8, 2, [&](std::size_t, RngStream& rng) {
    const auto tr = simulate_r_leap(doc.network, doc.initial_state, 100.0, cfg, rng);
    EXPECT_EQ(tr.times.back(), 100.0);
    return sample_path(tr, t);
  });
  const auto x = m.column(0, 0);
  EXPECT_NEAR(ts::mean(x), 10.0, 4.0 * ts::se_mean(x));
}
