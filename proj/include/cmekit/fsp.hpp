#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Sparse>

#include "cmekit/model.hpp"

namespace cmekit {

struct StateHash {
  std::size_t operator()(const SystemState& s) const noexcept;
};

/// Ordered set of states with O(1) lookup.
class ProjectionSpace {
 public:
  ProjectionSpace() = default;
  explicit ProjectionSpace(std::vector<SystemState> states);

  /// Appends `s` if absent; returns its ordinal either way.
  std::size_t add(const SystemState& s);
  std::optional<std::size_t> find(const SystemState& s) const;
  bool contains(const SystemState& s) const { return index_.count(s) != 0; }

  std::size_t size() const noexcept { return states_.size(); }
  bool empty() const noexcept { return states_.empty(); }
  const SystemState& operator[](std::size_t i) const { return states_[i]; }
  const std::vector<SystemState>& states() const noexcept { return states_; }

  /// Every state of the box lo ≤ X ≤ hi, last species varying fastest.
  static ProjectionSpace box(const SystemState& lo, const SystemState& hi);

 private:
  std::vector<SystemState> states_;
  std::unordered_map<SystemState, std::size_t, StateHash> index_;
};

/// Column-oriented truncated generator: Q(i, j) is the rate from state j to
/// state i, the diagonal holds minus the total outflow of j, and exit[j] is
/// the part of that outflow leaving the space.
struct SparseGenerator {
  Eigen::SparseMatrix<double> Q;
  std::vector<double> exit;
  std::size_t size() const { return static_cast<std::size_t>(Q.rows()); }
};

struct GeneratorOptions {
  /// Fold flow that would leave the space back onto the diagonal.
  bool reflecting = false;
  /// States satisfying this predicate get no outflow at all.
  std::function<bool(std::span<const Count>)> absorbing;
};

SparseGenerator build_generator(const ReactionNetwork& network, const ProjectionSpace& space,
                                const GeneratorOptions& options = {});

/// e^{Qt}v by uniformization. The Poisson series is truncated once its tail
/// falls below 1e-14; long horizons are split so that λΔt stays moderate.
std::vector<double> expm_action(const SparseGenerator& generator, std::span<const double> v,
                                double t);

struct FspCertificate {
  double mass = 1.0;            // 1ᵀP*
  double eps_requested = 0.0;
  double eps_achieved = 0.0;    // 1 − 1ᵀP*
  std::size_t rounds = 0;       // expansion rounds at the final time
  std::size_t states = 0;
  std::vector<double> history;  // eps_achieved after each round
};

struct FspOptions {
  std::size_t state_cap = 1'000'000;
  std::size_t initial_layers = 2;
  std::size_t max_rounds = 64;
  /// States whose outflow is suppressed (rare-event hitting problems).
  std::function<bool(std::span<const Count>)> absorbing;
};

struct FspSolution {
  ProjectionSpace space;
  std::vector<double> p;
  FspCertificate certificate;
};

/// Transient FSP: grows the space along the leaking reactions until the
/// retained mass at time t is at least 1 − eps. Growth is driven over doubling
/// horizons t/2^k, ..., t/2, t, each starting from the previous space. Throws CapacityError (with the
/// best eps reached) when the state cap would be exceeded.
FspSolution solve_transient(const ReactionNetwork& network, const ProjectionSpace& init_space,
                            std::span<const double> init_p, double t, double eps,
                            const FspOptions& options = {});

/// Adds every nonnegative state reachable by at most `layers` firings with
/// positive propensity. New states are appended layer by layer, each layer in
/// lexicographic order.
ProjectionSpace expand_space(const ProjectionSpace& space, const ReactionNetwork& network,
                             std::size_t layers, std::size_t state_cap = 1'000'000);

struct StationarySolution {
  std::vector<double> p;
  double residual = 0.0;       // ‖Qp‖∞ with the reflecting generator
  double boundary_mass = 0.0;  // probability on states with flow leaving the space
};

/// Stationary distribution on a fixed space with reflecting truncation.
/// Throws ModelError listing unreachable states when the truncated chain is
/// not irreducible.
StationarySolution solve_stationary(const ReactionNetwork& network, const ProjectionSpace& space,
                                    double tol = 1e-10);

/// States reachable from `init` by positive-propensity firings without any
/// count exceeding `hi`. Conservation laws are respected automatically.
ProjectionSpace reachable_space(const ReactionNetwork& network, const SystemState& init,
                                const SystemState& hi, std::size_t state_cap = 1'000'000);

struct AutoStationary {
  ProjectionSpace space;
  StationarySolution solution;
  SystemState box;  // upper bounds of the final box
};

/// Stationary solve on reachable_space(init, box), doubling the box (starting
/// from `start`, every entry at least the initial count) until the
/// probability on boundary states drops below eps.
AutoStationary solve_stationary_auto(const ReactionNetwork& network, const SystemState& init,
                                     double eps, Count start = 20,
                                     std::size_t state_cap = 1'000'000, double tol = 1e-10);

struct HittingProbability {
  double probability = 0.0;  // lower bound
  double upper = 0.0;        // probability + eps_achieved
  FspCertificate certificate;
};

/// P(predicate holds at some time ≤ t) from X(0) = init, computed with the
/// predicate states made absorbing.
HittingProbability hitting_probability(const ReactionNetwork& network, const SystemState& init,
                                       const StatePredicate& predicate, double t, double eps,
                                       const FspOptions& options = {});

/// Marginal pmf of one species, indexed by count.
std::vector<double> marginal(const ProjectionSpace& space, std::span<const double> p,
                             std::size_t species);

/// State cap from CMEKIT_STATE_CAP when set, else `fallback`.
std::size_t state_cap_from_env(std::size_t fallback = 1'000'000);

}  // namespace cmekit
