#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "cmekit/error.hpp"
#include "cmekit/fsp.hpp"
#include "cmekit/moments.hpp"
#include "cmekit/netparse.hpp"
#include "stat_helpers.hpp"

using namespace cmekit;
namespace ts = testing_stats;

namespace {

ModelDocument model(const std::string& name) { return load_model(std::string(CMEKIT_MODELS_DIR) + "/" + name); }

double tv_against(const std::vector<double>& pmf, const std::function<double(std::size_t)>& oracle,
                  std::size_t support) {
  double tv = 0.0;
  for (std::size_t i = 0; i < std::max(pmf.size(), support); ++i)
    tv += std::abs((i < pmf.size() ? pmf[i] : 0.0) - oracle(i));
  return 0.5 * tv;
}

Eigen::MatrixXd dense(const SparseGenerator& g) { return Eigen::MatrixXd(g.Q); }

// Checks 0 <= P'(J) - P*(J) <= eps_achieved with P' computed on a box twice as
// wide in every unconserved direction.
void check_certificate(const ModelDocument& doc, double t, double eps) {
  const ProjectionSpace init({doc.initial_state});
  const double one[] = {1.0};
  const auto sol = solve_transient(doc.network, init, one, t, eps);
  ASSERT_GE(1.0 - sol.certificate.mass, 0.0);
  EXPECT_NEAR(sol.certificate.eps_achieved, 1.0 - sol.certificate.mass, 1e-15);
  EXPECT_LE(sol.certificate.eps_achieved, eps);

  SystemState hi(doc.network.species_count(), 0);
  for (const auto& s : sol.space.states())
    for (std::size_t i = 0; i < s.size(); ++i) hi[i] = std::max(hi[i], s[i]);
  for (auto& h : hi) h = 2 * h + 1;
  const auto big = reachable_space(doc.network, doc.initial_state, hi);
  ASSERT_GE(big.size(), 3 * sol.space.size());
  std::vector<double> v(big.size(), 0.0);
  v[*big.find(doc.initial_state)] = 1.0;
  const auto pbig = expm_action(build_generator(doc.network, big), v, t);

  double worst_low = 0.0, worst_high = 0.0;
  for (std::size_t i = 0; i < sol.space.size(); ++i) {
    const auto j = big.find(sol.space[i]);
    ASSERT_TRUE(j.has_value());
    const double d = pbig[*j] - sol.p[i];
    worst_low = std::min(worst_low, d);
    worst_high = std::max(worst_high, d);
  }
  EXPECT_GE(worst_low, -1e-13);
  EXPECT_LE(worst_high, sol.certificate.eps_achieved + 1e-13);
}

// Strict local maxima over the 8-neighbourhood of a 2-D box pmf.
std::vector<SystemState> local_modes(const ProjectionSpace& space, const std::vector<double>& p) {
  std::vector<SystemState> modes;
  for (std::size_t i = 0; i < space.size(); ++i) {
    bool is_max = true;
    for (int dx = -1; dx <= 1 && is_max; ++dx)
      for (int dy = -1; dy <= 1 && is_max; ++dy) {
        if (dx == 0 && dy == 0) continue;
        const SystemState n{space[i][0] + dx, space[i][1] + dy};
        if (const auto j = space.find(n); j && p[*j] >= p[i]) is_max = false;
      }
    if (is_max) modes.push_back(space[i]);
  }
  return modes;
}

}  // namespace

TEST(ProjectionSpace, AddAndFind) {
  ProjectionSpace s;
  EXPECT_EQ(s.add({1, 2}), 0u);
  EXPECT_EQ(s.add({0, 0}), 1u);
  EXPECT_EQ(s.add({1, 2}), 0u);
  EXPECT_EQ(s.size(), 2u);
  EXPECT_EQ(*s.find({0, 0}), 1u);
  EXPECT_FALSE(s.find({5, 5}).has_value());
  const auto b = ProjectionSpace::box({0, 0}, {1, 2});
  ASSERT_EQ(b.size(), 6u);
  EXPECT_EQ(b[1], (SystemState{0, 1}));
}

TEST(BuildGenerator, BirthDeathByHand) {
  const auto doc = model("birth_death.cme");
  const auto g = build_generator(doc.network, ProjectionSpace::box({0}, {2}));
  Eigen::MatrixXd expect(3, 3);
  expect << -1.0, 0.1, 0.0,  //
      1.0, -1.1, 0.2,        //
      0.0, 1.0, -1.2;
  EXPECT_LT((dense(g) - expect).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(g.exit, (std::vector<double>{0.0, 0.0, 1.0}));
}

TEST(BuildGenerator, ColumnSumsPlusExitVanish) {
  const auto doc = model("model2.cme");
  const auto space = reachable_space(doc.network, doc.initial_state, {1, 1, 12, 25});
  const auto g = build_generator(doc.network, space);
  const Eigen::MatrixXd q = dense(g);
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    for (Eigen::Index i = 0; i < q.rows(); ++i)
      if (i != j) EXPECT_GE(q(i, j), 0.0);
    EXPECT_NEAR(q.col(j).sum() + g.exit[j], 0.0, 1e-12);
  }
}

TEST(BuildGenerator, ReflectingHasZeroColumnSums) {
  const auto doc = model("model1.cme");
  GeneratorOptions opt;
  opt.reflecting = true;
  const auto g = build_generator(doc.network, ProjectionSpace::box({0, 0}, {5, 9}), opt);
  EXPECT_LT(dense(g).colwise().sum().cwiseAbs().maxCoeff(), 1e-12);
}

TEST(BuildGenerator, EmptyNetwork) {
  const auto doc = parse_model("species A\n");
  const auto g = build_generator(doc.network, ProjectionSpace::box({0}, {3}));
  EXPECT_EQ(g.Q.nonZeros(), 0);
}

TEST(ExpmAction, TimeZeroIsIdentity) {
  const auto doc = model("birth_death.cme");
  const auto g = build_generator(doc.network, ProjectionSpace::box({0}, {4}));
  const std::vector<double> v{0.1, 0.2, 0.3, 0.15, 0.25};
  EXPECT_EQ(expm_action(g, v, 0.0), v);
}

TEST(ExpmAction, TwoStateToggle) {
  SparseGenerator g;
  g.Q.resize(2, 2);
  g.Q.insert(0, 0) = -1;
  g.Q.insert(1, 0) = 1;
  g.Q.insert(0, 1) = 1;
  g.Q.insert(1, 1) = -1;
  g.exit = {0, 0};
  const std::vector<double> v{1.0, 0.0};
  const auto r = expm_action(g, v, 1.0);
  EXPECT_NEAR(r[0], 0.5 * (1 + std::exp(-2.0)), 1e-10);
  EXPECT_NEAR(r[1], 0.5 * (1 - std::exp(-2.0)), 1e-10);
}

TEST(ExpmAction, MatchesDenseExponential) {
  const auto doc = model("model1.cme");
  const auto g = build_generator(doc.network, ProjectionSpace::box({0, 0}, {4, 6}));
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(g.size());
  double total = 0.0;
  for (auto& x : v) total += (x = u(gen));
  for (auto& x : v) x /= total;
  for (double t : {0.3, 2.0, 25.0}) {
    const Eigen::MatrixXd e = (dense(g) * t).exp();
    const Eigen::VectorXd ref = e * Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
    const auto r = expm_action(g, v, t);
    double sum = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      EXPECT_NEAR(r[i], ref[i], 1e-12) << "t=" << t;
      EXPECT_GE(r[i], 0.0);
      sum += r[i];
    }
    EXPECT_LE(sum, 1.0 + 1e-12);
  }
}

TEST(ExpandSpace, PropensityGated) {
  const auto doc = model("model1.cme");
  const auto s = expand_space(ProjectionSpace(std::vector<SystemState>{{0, 0}}), doc.network, 1);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[1], (SystemState{1, 0}));
}

TEST(ExpandSpace, BfsOrder) {
  const auto doc = model("birth_death.cme");
  const auto s = expand_space(ProjectionSpace(std::vector<SystemState>{{5}}), doc.network, 2);
  EXPECT_EQ(s.states(), (std::vector<SystemState>{{5}, {4}, {6}, {3}, {7}}));
}

TEST(ExpandSpace, ZeroLayersRejected) {
  const auto doc = model("birth_death.cme");
  EXPECT_THROW(expand_space(ProjectionSpace(std::vector<SystemState>{{5}}), doc.network, 0), InvalidArgument);
}

TEST(SolveTransient, PureBirthPoisson) {
  const auto doc = parse_model("species X\nparam tau = 1\nreaction b: 0 -> X @ mass_action(tau)\ninit X = 0\n");
  const double one[] = {1.0};
  const auto sol = solve_transient(doc.network, ProjectionSpace(std::vector<SystemState>{{0}}), one, 3.0, 1e-8);
  const auto pmf = marginal(sol.space, sol.p, 0);
  const double tv = tv_against(pmf, [](std::size_t k) { return ts::poisson_pmf(3.0, k); }, 60);
  EXPECT_LT(tv, 1e-7);
  EXPECT_LE(sol.certificate.eps_achieved, 1e-8);
}

TEST(SolveTransient, TimeZeroReturnsInit) {
  const auto doc = model("model1.cme");
  const ProjectionSpace init({{3, 4}, {5, 6}});
  const std::vector<double> p{0.25, 0.75};
  const auto sol = solve_transient(doc.network, init, p, 0.0, 1e-6);
  EXPECT_EQ(sol.certificate.eps_achieved, 0.0);
  ASSERT_GE(sol.p.size(), 2u);
  EXPECT_EQ(sol.p[*sol.space.find({3, 4})], 0.25);
  EXPECT_EQ(sol.p[*sol.space.find({5, 6})], 0.75);
}

TEST(SolveTransient, HistoryIsMonotone) {
  const auto doc = model("model2.cme");
  const double one[] = {1.0};
  const auto sol = solve_transient(doc.network, ProjectionSpace({doc.initial_state}), one, 5.0, 1e-6);
  ASSERT_FALSE(sol.certificate.history.empty());
  for (std::size_t i = 1; i < sol.certificate.history.size(); ++i)
    EXPECT_LE(sol.certificate.history[i], sol.certificate.history[i - 1]);
  EXPECT_EQ(sol.certificate.history.size(), sol.certificate.rounds);
  EXPECT_EQ(sol.certificate.states, sol.space.size());
}

TEST(SolveTransient, CertificateSoundModel1) { check_certificate(model("model1.cme"), 5.0, 1e-4); }

TEST(SolveTransient, CertificateSoundModel2) { check_certificate(model("model2.cme"), 3.0, 1e-4); }

TEST(SolveTransient, MeanAgreesWithMoments) {
  const auto doc = model("model1.cme");
  const double one[] = {1.0};
  const double t = 10.0;
  const auto sol = solve_transient(doc.network, ProjectionSpace(std::vector<SystemState>{{0, 0}}), one, t, 1e-6);
  const auto sys = moment_odes(doc.network, 2);
  const std::vector<double> grid{0.0, t};
  const auto mu = summarize_moments(sys, integrate_moments(sys, point_moments(sys, {0, 0}), grid)[1]);
  for (std::size_t sp = 0; sp < 2; ++sp) {
    const auto s = summary_stats_pmf(marginal(sol.space, sol.p, sp));
    EXPECT_LE(s.mean, mu.mean[sp] * (1 + 1e-9));
    EXPECT_NEAR(s.mean, mu.mean[sp], 1e-4 * mu.mean[sp]);
  }
}

TEST(SolveTransient, CapacityErrorCarriesBestEpsilon) {
  const auto doc = model("model1.cme");
  const double one[] = {1.0};
  FspOptions opt;
  opt.state_cap = 200;
  try {
    solve_transient(doc.network, ProjectionSpace(std::vector<SystemState>{{0, 0}}), one, 50.0, 1e-6, opt);
    FAIL() << "expected CapacityError";
  } catch (const CapacityError& e) {
    EXPECT_GT(e.best_epsilon(), 1e-6);
    EXPECT_LE(e.best_epsilon(), 1.0);
  }
}

TEST(StateCap, FromEnvironment) {
  ::unsetenv("CMEKIT_STATE_CAP");
  EXPECT_EQ(state_cap_from_env(123), 123u);
  ::setenv("CMEKIT_STATE_CAP", "4567", 1);
  EXPECT_EQ(state_cap_from_env(123), 4567u);
  ::unsetenv("CMEKIT_STATE_CAP");
}

TEST(SolveStationary, BirthDeathPoisson) {
  const auto doc = model("birth_death.cme");
  const auto space = ProjectionSpace::box({0}, {60});
  const auto st = solve_stationary(doc.network, space, 1e-10);
  const double tv = tv_against(st.p, [](std::size_t k) { return ts::poisson_pmf(10.0, k); }, 200);
  EXPECT_LT(tv, 1e-6);
  EXPECT_LT(st.residual, 1e-10);
}

TEST(SolveStationary, InvariantUnderEvolution) {
  const auto doc = model("model1.cme");
  const auto space = ProjectionSpace::box({0, 0}, {12, 30});
  const double tol = 1e-10;
  const auto st = solve_stationary(doc.network, space, tol);
  GeneratorOptions opt;
  opt.reflecting = true;
  const auto g = build_generator(doc.network, space, opt);
  const double lu = dense(g).diagonal().cwiseAbs().maxCoeff();
  const auto q = expm_action(g, st.p, 10.0 / lu);
  double tv = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) tv += 0.5 * std::abs(q[i] - st.p[i]);
  EXPECT_LT(tv, 10 * tol);
}

TEST(SolveStationary, ReducibleTruncationRejected) {
  const auto doc = parse_model("species X\nparam l = 1\nreaction d: X -> 0 @ mass_action(l)\n");
  EXPECT_THROW(solve_stationary(doc.network, ProjectionSpace::box({0}, {5})), ModelError);
}

TEST(SolveStationary, AutoBoxGrowsUntilBoundaryMassSmall) {
  const auto doc = model("birth_death.cme");
  const auto a = solve_stationary_auto(doc.network, {0}, 1e-8, 10);
  EXPECT_LT(a.solution.boundary_mass, 1e-8);
  EXPECT_GT(a.box[0], 10);
}

TEST(SolveStationary, TwoGeneThreeModes) {
  const auto doc = model("twogene.cme");
  const auto space = ProjectionSpace::box({0, 0}, {40, 40});
  const auto st = solve_stationary(doc.network, space);
  const auto modes = local_modes(space, st.p);
  ASSERT_EQ(modes.size(), 3u);
  bool origin = false;
  for (const auto& m : modes) origin = origin || (m[0] <= 1 && m[1] <= 1);
  EXPECT_TRUE(origin);
}

TEST(SolveStationary, TwoGeneLargeVolumeModeNearStablePoint) {
  const auto doc = model("twogene.cme");
  const auto net = doc.network.with_volume(8.0);
  const auto space = ProjectionSpace::box({0, 0}, {40, 40});
  const auto st = solve_stationary(net, space);
  const auto modes = local_modes(space, st.p);
  const double star = 8.0 * 1.3861785;  // fixed point of the macroscopic equation, scaled to counts
  bool near = false;
  for (const auto& m : modes) {
    EXPECT_FALSE(m[0] <= 1 && m[1] <= 1) << "origin mode still present";
    near = near || (std::abs(m[0] - star) <= 3.0 && std::abs(m[1] - star) <= 3.0);
  }
  EXPECT_TRUE(near);
}

TEST(HittingProbability, ZeroWhenAlreadyImpossible) {
  const auto doc = parse_model("species X\nparam l = 1\nreaction d: X -> 0 @ mass_action(l)\ninit X = 3\n");
  const auto pred = parse_predicate(doc.network, "X>=5");
  const auto h = hitting_probability(doc.network, {3}, pred, 10.0, 1e-8);
  EXPECT_EQ(h.probability, 0.0);
}

TEST(HittingProbability, PureBirthThreshold) {
  // P(N(t) >= 3) for a unit Poisson process at t = 2.
  const auto doc = parse_model("species X\nparam tau = 1\nreaction b: 0 -> X @ mass_action(tau)\n");
  const auto pred = parse_predicate(doc.network, "X>=3");
  const auto h = hitting_probability(doc.network, {0}, pred, 2.0, 1e-10);
  const double expect = 1.0 - std::exp(-2.0) * (1.0 + 2.0 + 2.0);
  EXPECT_NEAR(h.probability, expect, 1e-9);
  EXPECT_GE(h.upper, h.probability);
}

TEST(Marginal, SumsOverOtherSpecies) {
  const ProjectionSpace s({{0, 1}, {1, 0}, {1, 2}});
  const std::vector<double> p{0.2, 0.3, 0.5};
  EXPECT_EQ(marginal(s, p, 0), (std::vector<double>{0.2, 0.8}));
  const auto m1 = marginal(s, p, 1);
  ASSERT_EQ(m1.size(), 3u);
  EXPECT_DOUBLE_EQ(m1[0], 0.3);
  EXPECT_DOUBLE_EQ(m1[2], 0.5);
}
