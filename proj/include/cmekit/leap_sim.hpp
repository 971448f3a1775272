#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cmekit/exact_sim.hpp"
#include "cmekit/model.hpp"
#include "cmekit/rng.hpp"

namespace cmekit {

struct LeapConfig {
  double epsilon = 0.03;   // relative-change bound, in (0, 1)
  bool midpoint = false;
  double tau_floor = 1e-12;
  std::uint64_t r = 10;    // firings per leap (R-leaping)
  int max_halvings = 20;
  std::uint64_t max_steps = 100'000'000;
};

/// τ = min_i { max(εX_i, 1)/|μ_i|, max(εX_i, 1)²/σ_i² } over species with
/// nonzero drift or variance, where μ_i = Σ_k ξ_ki a_k and σ_i² = Σ_k ξ_ki² a_k.
/// Capped at `horizon`; returns `horizon` when every propensity is zero.
double select_tau(const ReactionNetwork& network, std::span<const Count> state, double epsilon,
                  double horizon);

/// One leap of length tau. Draws M_k ~ Poisson(τ·a_k) with a_k taken at X or
/// at the midpoint X + (τ/2)Σξa. A draw producing a negative count is rejected
/// and τ halved; after max_halvings rejections the leap's full duration is
/// covered by exact direct-method steps instead. The returned state is always
/// the state after time tau.
SystemState step_tau_leap(const ReactionNetwork& network, const SystemState& state, double tau,
                          RngStream& rng, bool midpoint, int max_halvings = 20);

Trajectory simulate_tau_leap(const ReactionNetwork& network, const SystemState& init, double t_end,
                             const LeapConfig& config, RngStream& rng);

struct RLeapStep {
  SystemState state;
  double elapsed = 0.0;
  std::vector<std::uint64_t> firings;  // per reaction, sums to the R actually used
};

/// Allocates R firings multinomially with probabilities a_k/Σa (propensities
/// frozen at entry) and draws the elapsed time from Gamma(R, Σa). On a
/// negative count R is halved and the leap redrawn. std::nullopt when Σa = 0.
std::optional<RLeapStep> step_r_leap(const ReactionNetwork& network, const SystemState& state,
                                     std::uint64_t r, RngStream& rng);

/// R-leaping to t_end. A leap that would overshoot t_end is discarded and the
/// remainder is simulated with the direct method.
Trajectory simulate_r_leap(const ReactionNetwork& network, const SystemState& init, double t_end,
                           const LeapConfig& config, RngStream& rng);

/// Snapshot helpers for ensembles: states at each record time, read from the
/// piecewise-constant path.
std::vector<double> sample_path(const Trajectory& traj, std::span<const double> record_times);

}  // namespace cmekit
