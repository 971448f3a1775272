#include "cmekit/leap_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "cmekit/error.hpp"

namespace cmekit {

namespace {

Count poisson(RngStream& rng, double mean) {
  if (!(mean > 0.0)) return 0;
  std::poisson_distribution<Count> d(mean);
  return d(rng);
}

void check_state(const ReactionNetwork& net, const SystemState& s) {
  if (s.size() != net.species_count()) throw InvalidArgument("state length does not match species count");
  for (Count c : s) {
    if (c < 0) throw InvalidArgument("state has a negative count");
  }
}

SystemState exact_for(const ReactionNetwork& net, const SystemState& state, double duration,
                      RngStream& rng) {
  const double t[] = {duration};
  return snapshot_exact(net, state, t, ExactMethod::direct, rng).front();
}

}  // namespace

double select_tau(const ReactionNetwork& net, std::span<const Count> state, double epsilon,
                  double horizon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidArgument("epsilon must lie in (0, 1)");
  const std::size_t S = net.species_count(), K = net.reaction_count();
  std::vector<double> a(K);
  const double total = evaluate_propensities(net, state, a);
  if (total <= 0.0) return horizon;
  double tau = horizon;
  for (std::size_t i = 0; i < S; ++i) {
    double mu = 0.0, var = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double xi = net.reaction(k).net_change[i];
      mu += xi * a[k];
      var += xi * xi * a[k];
    }
    const double g = std::max(epsilon * static_cast<double>(state[i]), 1.0);
    if (mu != 0.0) tau = std::min(tau, g / std::abs(mu));
    if (var > 0.0) tau = std::min(tau, g * g / var);
  }
  return tau;
}

SystemState step_tau_leap(const ReactionNetwork& net, const SystemState& state, double tau,
                          RngStream& rng, bool midpoint, int max_halvings) {
  if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");
  check_state(net, state);
  const std::size_t S = net.species_count(), K = net.reaction_count();
  std::vector<double> a(K);
  std::vector<Count> m(K);
  SystemState out(S);
  double covered = 0.0;
  SystemState current = state;
  double step = tau;
  int halvings = 0;
  // Each accepted sub-leap advances `covered`; a rejected draw halves the
  // sub-leap length. Once the halving budget is spent the rest is exact.
  while (covered < tau) {
    step = std::min(step, tau - covered);
    evaluate_propensities(net, current, a);
    if (midpoint) {
      std::vector<double> x(S);
      for (std::size_t i = 0; i < S; ++i) {
        double drift = 0.0;
        for (std::size_t k = 0; k < K; ++k) drift += net.reaction(k).net_change[i] * a[k];
        x[i] = std::max(0.0, static_cast<double>(current[i]) + 0.5 * step * drift);
      }
      for (std::size_t k = 0; k < K; ++k) {
        const double v = propensity_at(net, x, k);
        if (!std::isfinite(v)) {
          throw EvaluationError("reaction '" + net.reaction(k).name +
                                "': propensity undefined at the midpoint state");
        }
        a[k] = std::max(v, 0.0);
      }
    }
    for (std::size_t k = 0; k < K; ++k) m[k] = poisson(rng, step * a[k]);
    bool negative = false;
    for (std::size_t i = 0; i < S && !negative; ++i) {
      Count v = current[i];
      for (std::size_t k = 0; k < K; ++k) v += net.reaction(k).net_change[i] * m[k];
      out[i] = v;
      negative = v < 0;
    }
    if (!negative) {
      current = out;
      covered += step;
      continue;
    }
    if (++halvings > max_halvings) {
      return exact_for(net, current, tau - covered, rng);
    }
    step *= 0.5;
  }
  return current;
}

Trajectory simulate_tau_leap(const ReactionNetwork& net, const SystemState& init, double t_end,
                             const LeapConfig& cfg, RngStream& rng) {
  if (!(t_end >= 0.0)) throw InvalidArgument("t_end must be nonnegative");
  if (!(cfg.tau_floor > 0.0)) throw InvalidArgument("tau floor must be positive");
  check_state(net, init);
  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(init);
  SystemState state = init;
  double t = 0.0;
  std::uint64_t steps = 0;
  while (t < t_end) {
    const double remaining = t_end - t;
    double tau = select_tau(net, state, cfg.epsilon, remaining);
    tau = std::min(std::max(tau, cfg.tau_floor), remaining);
    state = step_tau_leap(net, state, tau, rng, cfg.midpoint, cfg.max_halvings);
    t = tau == remaining ? t_end : t + tau;
    traj.times.push_back(t);
    traj.states.push_back(state);
    if (++steps > cfg.max_steps) throw RunawayError("leap count cap exceeded");
  }
  traj.event_count = steps;
  return traj;
}

std::optional<RLeapStep> step_r_leap(const ReactionNetwork& net, const SystemState& state,
                                     std::uint64_t r, RngStream& rng) {
  if (r < 1) throw InvalidArgument("R must be at least 1");
  check_state(net, state);
  const std::size_t S = net.species_count(), K = net.reaction_count();
  std::vector<double> a(K);
  const double total = evaluate_propensities(net, state, a);
  if (total <= 0.0) return std::nullopt;
  std::size_t last = 0;
  for (std::size_t k = 0; k < K; ++k) {
    if (a[k] > 0.0) last = k;
  }
  RLeapStep out;
  out.firings.assign(K, 0);
  out.state.resize(S);
  for (;;) {
    std::uint64_t left = r;
    double mass_left = total;
    for (std::size_t k = 0; k < K; ++k) {
      std::uint64_t mk = 0;
      if (a[k] > 0.0 && left > 0) {
        if (k == last) {
          mk = left;
        } else {
          const double p = std::min(1.0, a[k] / mass_left);
          std::binomial_distribution<std::uint64_t> d(left, p);
          mk = d(rng);
        }
      }
      out.firings[k] = mk;
      left -= mk;
      mass_left -= a[k];
    }
    bool negative = false;
    for (std::size_t i = 0; i < S && !negative; ++i) {
      Count v = state[i];
      for (std::size_t k = 0; k < K; ++k) {
        v += net.reaction(k).net_change[i] * static_cast<Count>(out.firings[k]);
      }
      out.state[i] = v;
      negative = v < 0;
    }
    if (!negative) break;
    if (r == 1) {
      // A single firing that goes negative is a model defect, not a leap
      // artefact; report it the same way the exact simulators do.
      std::size_t k = 0;
      while (out.firings[k] == 0) ++k;
      apply_reaction(state, net.reaction(k));
    }
    r = std::max<std::uint64_t>(1, r / 2);
  }
  std::gamma_distribution<double> g(static_cast<double>(r), 1.0 / total);
  out.elapsed = g(rng);
  return out;
}

Trajectory simulate_r_leap(const ReactionNetwork& net, const SystemState& init, double t_end,
                           const LeapConfig& cfg, RngStream& rng) {
  if (!(t_end >= 0.0)) throw InvalidArgument("t_end must be nonnegative");
  check_state(net, init);
  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(init);
  SystemState state = init;
  double t = 0.0;
  std::uint64_t steps = 0;
  while (t < t_end) {
    auto step = step_r_leap(net, state, cfg.r, rng);
    if (!step) break;
    if (t + step->elapsed > t_end) {
      const Trajectory tail = simulate_exact(net, state, t_end - t, ExactMethod::direct, rng);
      for (std::size_t i = 1; i < tail.times.size(); ++i) {
        const double ti = i + 1 == tail.times.size() ? t_end : t + tail.times[i];
        if (ti <= traj.times.back()) continue;
        traj.times.push_back(ti);
        traj.states.push_back(tail.states[i]);
      }
      state = tail.states.back();
      t = t_end;
      break;
    }
    t += step->elapsed;
    state = std::move(step->state);
    traj.times.push_back(t);
    traj.states.push_back(state);
    if (++steps > cfg.max_steps) throw RunawayError("leap count cap exceeded");
  }
  if (traj.times.back() < t_end) {
    traj.times.push_back(t_end);
    traj.states.push_back(state);
  }
  traj.event_count = steps;
  return traj;
}

std::vector<double> sample_path(const Trajectory& traj, std::span<const double> record_times) {
  std::vector<double> row;
  const std::size_t S = traj.states.empty() ? 0 : traj.states.front().size();
  row.reserve(record_times.size() * S);
  for (double r : record_times) {
    auto it = std::upper_bound(traj.times.begin(), traj.times.end(), r);
    const std::size_t idx = it == traj.times.begin() ? 0 : static_cast<std::size_t>(it - traj.times.begin()) - 1;
    const auto& s = traj.states[idx];
    row.insert(row.end(), s.begin(), s.end());
  }
  return row;
}

}  // namespace cmekit
