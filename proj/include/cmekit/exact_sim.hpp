#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "cmekit/model.hpp"
#include "cmekit/rng.hpp"

namespace cmekit {

/// Time-stamped states. For event-resolved runs the first entry is (0, init),
/// every event adds one entry, and a final entry at t_end closes the path.
struct Trajectory {
  std::vector<double> times;
  std::vector<SystemState> states;
  std::uint64_t event_count = 0;
};

enum class ExactMethod { direct, next_reaction };

struct ExactOptions {
  std::uint64_t max_events = 100'000'000;
  /// Next-reaction only: recompute every propensity after each event and
  /// throw NumericError if any incrementally maintained value differs.
  bool verify_propensities = false;
};

struct DirectStep {
  double wait = 0.0;
  std::size_t reaction = 0;
};

/// One step of the direct method from a frozen state. std::nullopt when every
/// propensity is zero (absorbing state).
std::optional<DirectStep> step_direct(const ReactionNetwork& network, std::span<const Count> state,
                                      RngStream& rng);

Trajectory simulate_exact(const ReactionNetwork& network, const SystemState& init, double t_end,
                          ExactMethod method, RngStream& rng, const ExactOptions& options = {});

/// States at each record time (record_times nondecreasing, all ≥ 0). The run
/// stops at the last record time.
std::vector<SystemState> snapshot_exact(const ReactionNetwork& network, const SystemState& init,
                                        std::span<const double> record_times, ExactMethod method,
                                        RngStream& rng, const ExactOptions& options = {});

/// n × |record_times| × species, row-major by (trajectory, time).
struct SnapshotMatrix {
  std::size_t trajectories = 0;
  std::size_t times = 0;
  std::size_t species = 0;
  std::vector<double> values;

  double at(std::size_t traj, std::size_t time, std::size_t sp) const {
    return values[(traj * times + time) * species + sp];
  }
  /// All values of one species at one time index, in trajectory order.
  std::vector<double> column(std::size_t time, std::size_t sp) const;
};

/// Trajectory i draws from RngStream(base_seed, i). Output is identical for
/// every worker count.
SnapshotMatrix simulate_ensemble(const ReactionNetwork& network, const SystemState& init,
                                 std::span<const double> record_times, std::size_t n,
                                 ExactMethod method, std::uint64_t base_seed, unsigned workers = 1,
                                 const ExactOptions& options = {});

/// Generic ensemble driver: row(i, rng) returns |record_times| × species values
/// for trajectory i.
SnapshotMatrix run_ensemble(
    std::size_t n, std::size_t times, std::size_t species, std::uint64_t base_seed,
    unsigned workers,
    const std::function<std::vector<double>(std::size_t, RngStream&)>& row);

struct RareEventSpec {
  StatePredicate predicate;
  double horizon = 0.0;
  std::vector<double> bias;  // γ_k, one per reaction
};

struct RareEventEstimate {
  double probability = 0.0;
  double standard_error = 0.0;
  /// Sample variance of the per-trajectory weighted indicators.
  double sample_variance = 0.0;
  std::size_t hits = 0;
};

/// Weighted SSA: selection probabilities γ_k·a_k / Σγa, waiting times from the
/// unbiased total rate, and likelihood-ratio weights so that the estimator is
/// unbiased for P(predicate reached before horizon). Trajectory i uses
/// RngStream(base_seed, i).
RareEventEstimate estimate_rare_event_wssa(const ReactionNetwork& network, const SystemState& init,
                                           const RareEventSpec& spec, std::size_t n,
                                           std::uint64_t base_seed, unsigned workers = 1,
                                           const ExactOptions& options = {});

/// Reactions whose propensity reads a species changed by reaction k, for each
/// k (sorted, includes k itself).
std::vector<std::vector<std::size_t>> dependency_graph(const ReactionNetwork& network);

/// Fills a snapshot row from a stream of (time, state) observations. Call
/// observe() with the initial state first and after every change; finish()
/// copies the final state into any remaining record times.
class SnapshotRecorder {
 public:
  SnapshotRecorder(std::span<const double> record_times, std::size_t species);

  template <class State>
  void observe(double t, const State& state) {
    while (next_ < times_.size() && times_[next_] < t) {
      fill(next_++, last_);
    }
    last_.assign(state.begin(), state.end());
  }
  void finish();
  std::vector<double>& row() { return row_; }

 private:
  void fill(std::size_t idx, const std::vector<double>& s);
  std::span<const double> times_;
  std::size_t species_;
  std::size_t next_ = 0;
  std::vector<double> last_;
  std::vector<double> row_;
};

}  // namespace cmekit
