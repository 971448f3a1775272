#include "cmekit/exact_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cmekit/ensemble.hpp"
#include "cmekit/error.hpp"

namespace cmekit {

namespace {

double exponential(RngStream& rng, double rate) { return -std::log(rng.uniform_pos()) / rate; }

std::size_t select(std::span<const double> weights, double total, RngStream& rng) {
  const double target = rng.uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] <= 0.0) continue;
    acc += weights[k];
    last_positive = k;
    if (target < acc) return k;
  }
  return last_positive;  // rounding at the top end
}

void apply_in_place(SystemState& state, const Reaction& r) {
  for (std::size_t i = 0; i < state.size(); ++i) {
    const Count next = state[i] + r.net_change[i];
    if (next < 0) {
      // Delegate to the checked routine for a uniform error message.
      state = apply_reaction(state, r);
      return;
    }
  }
  for (std::size_t i = 0; i < state.size(); ++i) state[i] += r.net_change[i];
}

void check_cap(std::uint64_t events, const ExactOptions& opt) {
  if (events > opt.max_events) {
    throw RunawayError("event cap of " + std::to_string(opt.max_events) +
                       " exceeded; the model may be explosive");
  }
}

/// Indexed binary min-heap over reaction firing times.
class IndexedHeap {
 public:
  explicit IndexedHeap(std::span<const double> keys) : key_(keys.begin(), keys.end()) {
    heap_.resize(key_.size());
    pos_.resize(key_.size());
    for (std::size_t i = 0; i < key_.size(); ++i) heap_[i] = pos_[i] = i;
    for (std::size_t i = heap_.size() / 2; i-- > 0;) sift_down(i);
  }

  std::size_t top() const { return heap_.front(); }
  double top_key() const { return key_[heap_.front()]; }
  double key(std::size_t item) const { return key_[item]; }

  void update(std::size_t item, double k) {
    const double old = key_[item];
    key_[item] = k;
    if (k < old) {
      sift_up(pos_[item]);
    } else {
      sift_down(pos_[item]);
    }
  }

 private:
  bool less(std::size_t a, std::size_t b) const {
    const double ka = key_[heap_[a]], kb = key_[heap_[b]];
    return ka < kb || (ka == kb && heap_[a] < heap_[b]);
  }
  void swap_nodes(std::size_t a, std::size_t b) {
    std::swap(heap_[a], heap_[b]);
    pos_[heap_[a]] = a;
    pos_[heap_[b]] = b;
  }
  void sift_up(std::size_t i) {
    while (i > 0) {
      const std::size_t parent = (i - 1) / 2;
      if (!less(i, parent)) break;
      swap_nodes(i, parent);
      i = parent;
    }
  }
  void sift_down(std::size_t i) {
    for (;;) {
      const std::size_t l = 2 * i + 1, r = l + 1;
      std::size_t m = i;
      if (l < heap_.size() && less(l, m)) m = l;
      if (r < heap_.size() && less(r, m)) m = r;
      if (m == i) return;
      swap_nodes(i, m);
      i = m;
    }
  }

  std::vector<double> key_;
  std::vector<std::size_t> heap_;
  std::vector<std::size_t> pos_;
};

/// Drives one exact run to t_end; observe(t, state) is called for the initial
/// state and after every event.
template <class Observer>
void run_direct(const ReactionNetwork& net, SystemState& state, double t_end, RngStream& rng,
                const ExactOptions& opt, std::uint64_t& events, Observer&& observe) {
  const auto deps = dependency_graph(net);
  std::vector<double> a(net.reaction_count());
  double t = 0.0;
  evaluate_propensities(net, state, a);
  for (;;) {
    double total = 0.0;
    for (double v : a) total += v;
    if (total <= 0.0) return;
    t += exponential(rng, total);
    if (t > t_end) return;
    const std::size_t k = select(a, total, rng);
    apply_in_place(state, net.reaction(k));
    check_cap(++events, opt);
    for (std::size_t j : deps[k]) a[j] = evaluate_propensity(net, state, j);
    observe(t, state);
  }
}

template <class Observer>
void run_next_reaction(const ReactionNetwork& net, SystemState& state, double t_end,
                       RngStream& rng, const ExactOptions& opt, std::uint64_t& events,
                       Observer&& observe) {
  const std::size_t K = net.reaction_count();
  if (K == 0) return;
  const auto deps = dependency_graph(net);
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> a(K), fire(K);
  evaluate_propensities(net, state, a);
  for (std::size_t k = 0; k < K; ++k) fire[k] = a[k] > 0.0 ? exponential(rng, a[k]) : inf;
  IndexedHeap heap(fire);
  std::vector<double> check(K);
  for (;;) {
    const std::size_t mu = heap.top();
    const double t = heap.top_key();
    if (!(t <= t_end)) return;
    apply_in_place(state, net.reaction(mu));
    check_cap(++events, opt);
    for (std::size_t j : deps[mu]) {
      const double old_a = a[j];
      const double new_a = evaluate_propensity(net, state, j);
      a[j] = new_a;
      double next;
      if (new_a <= 0.0) {
        next = inf;
      } else if (j == mu || old_a <= 0.0) {
        next = t + exponential(rng, new_a);
      } else {
        next = t + (old_a / new_a) * (heap.key(j) - t);
      }
      heap.update(j, next);
    }
    if (opt.verify_propensities) {
      evaluate_propensities(net, state, check);
      for (std::size_t k = 0; k < K; ++k) {
        if (check[k] != a[k]) {
          throw NumericError("next-reaction bookkeeping mismatch for reaction '" +
                             net.reaction(k).name + "'");
        }
      }
    }
    observe(t, state);
  }
}

template <class Observer>
void run_exact(const ReactionNetwork& net, SystemState& state, double t_end, ExactMethod method,
               RngStream& rng, const ExactOptions& opt, std::uint64_t& events, Observer&& obs) {
  if (method == ExactMethod::direct) {
    run_direct(net, state, t_end, rng, opt, events, obs);
  } else {
    run_next_reaction(net, state, t_end, rng, opt, events, obs);
  }
}

void check_init(const ReactionNetwork& net, const SystemState& init) {
  if (init.size() != net.species_count()) {
    throw InvalidArgument("initial state has " + std::to_string(init.size()) +
                          " entries; the network has " + std::to_string(net.species_count()) +
                          " species");
  }
  for (Count c : init) {
    if (c < 0) throw InvalidArgument("initial state has a negative count");
  }
}

}  // namespace

std::vector<std::vector<std::size_t>> dependency_graph(const ReactionNetwork& net) {
  const std::size_t K = net.reaction_count();
  std::vector<std::vector<std::size_t>> deps(K);
  for (std::size_t k = 0; k < K; ++k) {
    const auto& xi = net.reaction(k).net_change;
    for (std::size_t j = 0; j < K; ++j) {
      bool touches = j == k;
      for (std::size_t i : net.species_read(j)) touches = touches || xi[i] != 0;
      if (touches) deps[k].push_back(j);
    }
  }
  return deps;
}

std::optional<DirectStep> step_direct(const ReactionNetwork& net, std::span<const Count> state,
                                      RngStream& rng) {
  std::vector<double> a(net.reaction_count());
  const double total = evaluate_propensities(net, state, a);
  if (total <= 0.0) return std::nullopt;
  DirectStep s;
  s.wait = exponential(rng, total);
  s.reaction = select(a, total, rng);
  return s;
}

Trajectory simulate_exact(const ReactionNetwork& net, const SystemState& init, double t_end,
                          ExactMethod method, RngStream& rng, const ExactOptions& opt) {
  if (!(t_end >= 0.0)) throw InvalidArgument("t_end must be nonnegative");
  check_init(net, init);
  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(init);
  if (t_end == 0.0) return traj;
  SystemState state = init;
  run_exact(net, state, t_end, method, rng, opt, traj.event_count,
            [&](double t, const SystemState& s) {
              traj.times.push_back(t);
              traj.states.push_back(s);
            });
  if (traj.times.back() < t_end) {
    traj.times.push_back(t_end);
    traj.states.push_back(state);
  }
  return traj;
}

SnapshotRecorder::SnapshotRecorder(std::span<const double> record_times, std::size_t species)
    : times_(record_times), species_(species) {
  row_.reserve(record_times.size() * species);
}

void SnapshotRecorder::fill(std::size_t, const std::vector<double>& s) {
  row_.insert(row_.end(), s.begin(), s.end());
}

void SnapshotRecorder::finish() {
  while (next_ < times_.size()) fill(next_++, last_);
}

std::vector<SystemState> snapshot_exact(const ReactionNetwork& net, const SystemState& init,
                                        std::span<const double> record_times, ExactMethod method,
                                        RngStream& rng, const ExactOptions& opt) {
  check_init(net, init);
  for (std::size_t i = 0; i < record_times.size(); ++i) {
    if (!(record_times[i] >= 0.0) || (i > 0 && record_times[i] < record_times[i - 1])) {
      throw InvalidArgument("record times must be nonnegative and nondecreasing");
    }
  }
  std::vector<SystemState> out;
  out.reserve(record_times.size());
  if (record_times.empty()) return out;
  SystemState state = init;
  SystemState last = init;
  std::size_t next = 0;
  std::uint64_t events = 0;
  run_exact(net, state, record_times.back(), method, rng, opt, events,
            [&](double t, const SystemState& s) {
              while (next < record_times.size() && record_times[next] < t) {
                out.push_back(last);
                ++next;
              }
              last = s;
            });
  while (out.size() < record_times.size()) out.push_back(state);
  return out;
}

std::vector<double> SnapshotMatrix::column(std::size_t time, std::size_t sp) const {
  std::vector<double> col(trajectories);
  for (std::size_t i = 0; i < trajectories; ++i) col[i] = at(i, time, sp);
  return col;
}

SnapshotMatrix run_ensemble(
    std::size_t n, std::size_t times, std::size_t species, std::uint64_t base_seed,
    unsigned workers,
    const std::function<std::vector<double>(std::size_t, RngStream&)>& row) {
  if (n < 1) throw InvalidArgument("ensemble size must be at least 1");
  SnapshotMatrix m;
  m.trajectories = n;
  m.times = times;
  m.species = species;
  m.values.assign(n * times * species, 0.0);
  parallel_for_index(n, workers, [&](std::size_t i) {
    RngStream rng(base_seed, i);
    const std::vector<double> r = row(i, rng);
    std::copy(r.begin(), r.end(), m.values.begin() + static_cast<std::ptrdiff_t>(i * times * species));
  });
  return m;
}

SnapshotMatrix simulate_ensemble(const ReactionNetwork& net, const SystemState& init,
                                 std::span<const double> record_times, std::size_t n,
                                 ExactMethod method, std::uint64_t base_seed, unsigned workers,
                                 const ExactOptions& opt) {
  const std::size_t S = net.species_count();
  return run_ensemble(n, record_times.size(), S, base_seed, workers,
                      [&](std::size_t, RngStream& rng) {
                        const auto snaps = snapshot_exact(net, init, record_times, method, rng, opt);
                        std::vector<double> r;
                        r.reserve(snaps.size() * S);
                        for (const auto& s : snaps) r.insert(r.end(), s.begin(), s.end());
                        return r;
                      });
}

RareEventEstimate estimate_rare_event_wssa(const ReactionNetwork& net, const SystemState& init,
                                           const RareEventSpec& spec, std::size_t n,
                                           std::uint64_t base_seed, unsigned workers,
                                           const ExactOptions& opt) {
  check_init(net, init);
  if (n < 1) throw InvalidArgument("sample count must be at least 1");
  const std::size_t K = net.reaction_count();
  std::vector<double> gamma = spec.bias;
  if (gamma.empty()) gamma.assign(K, 1.0);
  if (gamma.size() != K) throw InvalidArgument("one bias constant per reaction is required");
  for (double g : gamma) {
    if (!(g > 0.0)) throw InvalidArgument("bias constants must be positive");
  }
  std::vector<double> contrib(n, 0.0);
  std::vector<char> hit(n, 0);
  parallel_for_index(n, workers, [&](std::size_t idx) {
    if (spec.predicate(init)) {
      contrib[idx] = 1.0;
      hit[idx] = 1;
      return;
    }
    RngStream rng(base_seed, idx);
    SystemState state = init;
    std::vector<double> a(K), b(K);
    double t = 0.0, weight = 1.0;
    std::uint64_t events = 0;
    for (;;) {
      const double a0 = evaluate_propensities(net, state, a);
      if (a0 <= 0.0) return;
      t += exponential(rng, a0);
      if (t > spec.horizon) return;
      double b0 = 0.0;
      for (std::size_t k = 0; k < K; ++k) b0 += (b[k] = gamma[k] * a[k]);
      const std::size_t k = select(b, b0, rng);
      weight *= (a[k] / a0) / (b[k] / b0);
      apply_in_place(state, net.reaction(k));
      check_cap(++events, opt);
      if (spec.predicate(state)) {
        contrib[idx] = weight;
        hit[idx] = 1;
        return;
      }
    }
  });
  RareEventEstimate est;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += contrib[i];
    est.hits += hit[i];
  }
  est.probability = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double c : contrib) ss += (c - est.probability) * (c - est.probability);
  est.sample_variance = n > 1 ? ss / static_cast<double>(n - 1) : 0.0;
  est.standard_error = std::sqrt(est.sample_variance / static_cast<double>(n));
  return est;
}

}  // namespace cmekit
