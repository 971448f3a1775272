#include "cmekit/fsp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <string>

#include <boost/container_hash/hash.hpp>
#include <Eigen/SparseLU>

#include "cmekit/error.hpp"

namespace cmekit {

std::size_t StateHash::operator()(const SystemState& s) const noexcept {
  return boost::hash_range(s.begin(), s.end());
}

ProjectionSpace::ProjectionSpace(std::vector<SystemState> states) {
  states_.reserve(states.size());
  for (auto& s : states) add(s);
}

std::size_t ProjectionSpace::add(const SystemState& s) {
  auto [it, inserted] = index_.emplace(s, states_.size());
  if (inserted) states_.push_back(s);
  return it->second;
}

std::optional<std::size_t> ProjectionSpace::find(const SystemState& s) const {
  auto it = index_.find(s);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

ProjectionSpace ProjectionSpace::box(const SystemState& lo, const SystemState& hi) {
  if (lo.size() != hi.size()) throw InvalidArgument("box bounds differ in length");
  std::size_t total = 1;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (lo[i] < 0 || hi[i] < lo[i]) throw InvalidArgument("box bounds must satisfy 0 <= lo <= hi");
    total *= static_cast<std::size_t>(hi[i] - lo[i] + 1);
  }
  std::vector<SystemState> states;
  states.reserve(total);
  SystemState s = lo;
  for (std::size_t n = 0; n < total; ++n) {
    states.push_back(s);
    for (std::size_t i = s.size(); i-- > 0;) {
      if (s[i] < hi[i]) {
        ++s[i];
        break;
      }
      s[i] = lo[i];
    }
  }
  return ProjectionSpace(std::move(states));
}

namespace {

bool shift(const SystemState& from, const Reaction& r, SystemState& to) {
  to.resize(from.size());
  bool ok = true;
  for (std::size_t i = 0; i < from.size(); ++i) {
    to[i] = from[i] + r.net_change[i];
    ok = ok && to[i] >= 0;
  }
  return ok;
}

}  // namespace

SparseGenerator build_generator(const ReactionNetwork& net, const ProjectionSpace& space,
                                const GeneratorOptions& opt) {
  const std::size_t n = space.size(), K = net.reaction_count();
  SparseGenerator g;
  g.exit.assign(n, 0.0);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(n * (K + 1));
  SystemState target;
  for (std::size_t j = 0; j < n; ++j) {
    const SystemState& s = space[j];
    if (opt.absorbing && opt.absorbing(s)) continue;
    double out = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double a = evaluate_propensity(net, s, k);
      if (a <= 0.0) continue;
      const bool valid = shift(s, net.reaction(k), target);
      std::optional<std::size_t> i;
      if (valid) i = space.find(target);
      if (i) {
        if (*i == j) continue;  // ξ = 0 reactions do not move probability
        trip.emplace_back(static_cast<int>(*i), static_cast<int>(j), a);
        out += a;
      } else if (!opt.reflecting) {
        out += a;
        g.exit[j] += a;
      }
    }
    if (out > 0.0) trip.emplace_back(static_cast<int>(j), static_cast<int>(j), -out);
  }
  g.Q.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  g.Q.setFromTriplets(trip.begin(), trip.end());
  g.Q.makeCompressed();
  return g;
}

namespace {

struct Uniformized {
  std::vector<double> result;
  std::vector<double> integral;  // ∫_0^t e^{Qs}v ds
};

constexpr double kTail = 1e-14;
constexpr double kMaxSubstep = 30.0;

Uniformized uniformize(const SparseGenerator& g, std::span<const double> v, double t,
                       bool want_integral) {
  const std::size_t n = g.size();
  if (v.size() != n) throw InvalidArgument("vector length does not match the generator");
  if (!(t >= 0.0)) throw InvalidArgument("time must be nonnegative");
  Uniformized u;
  u.result.assign(v.begin(), v.end());
  double lambda = 0.0;
  for (int k = 0; k < g.Q.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(g.Q, k); it; ++it) {
      if (it.row() == it.col()) lambda = std::max(lambda, -it.value());
    }
  }
  if (want_integral) u.integral.assign(n, 0.0);
  if (t == 0.0 || n == 0) return u;
  if (lambda == 0.0) {
    if (want_integral) {
      for (std::size_t i = 0; i < n; ++i) u.integral[i] = v[i] * t;
    }
    return u;
  }
  // P = I + Q/λ is entrywise nonnegative, so every partial sum is too.
  Eigen::SparseMatrix<double> P = g.Q / lambda;
  {
    Eigen::SparseMatrix<double> I(P.rows(), P.cols());
    I.setIdentity();
    P += I;
    P.prune(0.0);
    for (int k = 0; k < P.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(P, k); it; ++it) {
        if (it.value() < 0.0) it.valueRef() = 0.0;
      }
    }
  }
  const auto substeps = static_cast<std::size_t>(std::ceil(lambda * t / kMaxSubstep));
  const double dt = t / static_cast<double>(substeps);
  const double L = lambda * dt;
  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(n));
  Eigen::VectorXd integ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  Eigen::VectorXd term(x.size()), out(x.size()), next(x.size());
  for (std::size_t s = 0; s < substeps; ++s) {
    term = x;
    double w = std::exp(-L);
    double tail = 1.0 - w;
    out = w * term;
    if (want_integral) integ += (tail / lambda) * term;
    for (std::size_t m = 1; tail > kTail && m < 100000; ++m) {
      next.noalias() = P * term;
      term.swap(next);
      w *= L / static_cast<double>(m);
      tail -= w;
      out += w * term;
      if (want_integral && tail > 0.0) integ += (tail / lambda) * term;
    }
    x = out;
  }
  u.result.assign(x.data(), x.data() + x.size());
  if (want_integral) u.integral.assign(integ.data(), integ.data() + integ.size());
  return u;
}

double sum(std::span<const double> p) {
  double s = 0.0;
  for (double v : p) s += v;
  return s;
}

struct Leak {
  double flux;
  std::size_t state;
  std::size_t reaction;
};

}  // namespace

std::vector<double> expm_action(const SparseGenerator& g, std::span<const double> v, double t) {
  return uniformize(g, v, t, false).result;
}

ProjectionSpace expand_space(const ProjectionSpace& space, const ReactionNetwork& net,
                             std::size_t layers, std::size_t state_cap) {
  if (layers < 1) throw InvalidArgument("expansion needs at least one layer");
  ProjectionSpace out = space;
  std::vector<SystemState> frontier = space.states();
  SystemState target;
  for (std::size_t layer = 0; layer < layers && !frontier.empty(); ++layer) {
    std::vector<SystemState> fresh;
    for (const auto& s : frontier) {
      for (std::size_t k = 0; k < net.reaction_count(); ++k) {
        if (evaluate_propensity(net, s, k) <= 0.0) continue;
        if (!shift(s, net.reaction(k), target) || out.contains(target)) continue;
        fresh.push_back(target);
      }
    }
    std::sort(fresh.begin(), fresh.end());
    fresh.erase(std::unique(fresh.begin(), fresh.end()), fresh.end());
    if (out.size() + fresh.size() > state_cap) {
      throw CapacityError("state space would exceed the cap of " + std::to_string(state_cap) + " states",
                          1.0);
    }
    for (const auto& s : fresh) out.add(s);
    frontier = std::move(fresh);
  }
  return out;
}

FspSolution solve_transient(const ReactionNetwork& net, const ProjectionSpace& init_space,
                            std::span<const double> init_p, double t, double eps,
                            const FspOptions& opt) {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("eps must lie in (0, 1)");
  if (!(t >= 0.0)) throw InvalidArgument("time must be nonnegative");
  if (init_space.empty() || init_p.size() != init_space.size()) {
    throw InvalidArgument("initial distribution does not match its space");
  }
  for (double v : init_p) {
    if (!(v >= 0.0)) throw InvalidArgument("initial distribution has a negative entry");
  }
  if (std::abs(sum(init_p) - 1.0) > 1e-9) throw InvalidArgument("initial distribution must sum to 1");

  FspSolution sol;
  sol.space = init_space;
  sol.certificate.eps_requested = eps;
  if (t == 0.0) {
    sol.p.assign(init_p.begin(), init_p.end());
    sol.certificate.mass = sum(sol.p);
    sol.certificate.eps_achieved = std::max(0.0, 1.0 - sol.certificate.mass);
    sol.certificate.states = sol.space.size();
    return sol;
  }

  GeneratorOptions gopt;
  gopt.absorbing = opt.absorbing;
  SystemState target;

  // Stages [t_{i-1}, t_i] with t_i doubling up to t. Each stage evolves the
  // previous truncated solution, so the losses of all stages add up and the
  // bound 0 <= P - P* <= 1 - 1ᵀP* still holds. Stage i may spend eps·t_i/t.
  double a0 = 0.0;
  std::vector<double> scratch(net.reaction_count());
  for (const auto& s : init_space.states()) {
    a0 = std::max(a0, evaluate_propensities(net, s, scratch));
  }
  const int stages = static_cast<int>(std::min(12.0, std::ceil(std::log2(1.0 + a0 * t))));

  std::vector<double> start(init_p.begin(), init_p.end());
  double t_prev = 0.0;
  // Error at time t if growth stopped now; reported with capacity failures.
  auto eps_at_end = [&] {
    start.resize(sol.space.size(), 0.0);
    const auto u = uniformize(build_generator(net, sol.space, gopt), start, t - t_prev, false);
    return std::max(0.0, 1.0 - sum(u.result));
  };
  for (int h = stages; h >= 0; --h) {
    const double t_now = h == 0 ? t : std::ldexp(t, -h);
    const double budget = eps * t_now / t;
    const bool final_stage = h == 0;
    const double carried = std::max(0.0, 1.0 - sum(start));
    std::vector<std::size_t> layers(net.reaction_count(), std::max<std::size_t>(1, opt.initial_layers));
    double best = 1.0;
    bool reached = false;
    for (std::size_t round = 1; round <= opt.max_rounds; ++round) {
      const SparseGenerator g = build_generator(net, sol.space, gopt);
      start.resize(sol.space.size(), 0.0);
      Uniformized u = uniformize(g, start, t_now - t_prev, true);
      const double mass = sum(u.result);
      const double achieved = std::max(0.0, 1.0 - mass);
      best = std::min(best, achieved);
      if (final_stage) {
        sol.certificate.mass = mass;
        sol.certificate.eps_achieved = achieved;
        sol.certificate.rounds = round;
        sol.certificate.states = sol.space.size();
        sol.certificate.history.push_back(achieved);
      }
      if (achieved <= budget) {
        sol.p = std::move(u.result);
        reached = true;
        break;
      }

      // Rank every (state, reaction) pair that carries probability out of the
      // space by its integrated outflow, and grow from the smallest set of
      // them that accounts for all but half of what this stage may still lose.
      std::vector<Leak> leaks;
      double lost = 0.0;
      for (std::size_t j = 0; j < sol.space.size(); ++j) {
        if (g.exit[j] <= 0.0) continue;
        const SystemState& s = sol.space[j];
        for (std::size_t k = 0; k < net.reaction_count(); ++k) {
          const double a = evaluate_propensity(net, s, k);
          if (a <= 0.0) continue;
          // mass lost to invalid states cannot be recovered
          if (!shift(s, net.reaction(k), target) || sol.space.contains(target)) continue;
          const double flux = a * u.integral[j];
          lost += flux;
          leaks.push_back({flux, j, k});
        }
      }
      if (leaks.empty()) {
        throw NumericError("probability leaks to states with negative counts; eps " +
                           std::to_string(eps) + " cannot be reached");
      }
      std::sort(leaks.begin(), leaks.end(), [](const Leak& x, const Leak& y) {
        if (x.flux != y.flux) return x.flux > y.flux;
        if (x.state != y.state) return x.state < y.state;
        return x.reaction < y.reaction;
      });
      const double allow = 0.5 * (budget - carried);
      std::vector<std::pair<SystemState, std::size_t>> seeds;
      std::vector<double> flux_out(net.reaction_count(), 0.0);
      double captured = 0.0;
      for (const Leak& l : leaks) {
        if (lost - captured <= allow && !seeds.empty()) break;
        captured += l.flux;
        flux_out[l.reaction] += l.flux;
        shift(sol.space[l.state], net.reaction(l.reaction), target);
        seeds.emplace_back(target, l.reaction);
      }
      std::sort(seeds.begin(), seeds.end());
      seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());

      // Each seed starts a ray along its own reaction. A reaction carrying at
      // least a tenth of the captured outflow gets rays of layers[k] firings,
      // and layers[k] doubles; the others get the seed only. Rays never exceed
      // the current extent of the space in the directions they grow.
      SystemState hi(net.species_count(), 0);
      for (const auto& s : sol.space.states()) {
        for (std::size_t i = 0; i < s.size(); ++i) hi[i] = std::max(hi[i], s[i]);
      }
      std::vector<std::size_t> ray(net.reaction_count(), 1);
      for (std::size_t k = 0; k < net.reaction_count(); ++k) {
        if (flux_out[k] < 0.1 * captured) continue;
        Count extent = 0;
        const auto& xi = net.reaction(k).net_change;
        for (std::size_t i = 0; i < xi.size(); ++i) {
          if (xi[i] > 0) extent = std::max(extent, (hi[i] + xi[i]) / xi[i]);
        }
        ray[k] = extent > 0 ? std::min(layers[k], static_cast<std::size_t>(extent)) : layers[k];
        layers[k] *= 2;
      }

      std::vector<SystemState> fresh;
      for (const auto& [seed, k] : seeds) {
        SystemState s = seed;
        for (std::size_t step = 0; step < ray[k]; ++step) {
          if (step > 0) {
            if (opt.absorbing && opt.absorbing(s)) break;
            if (evaluate_propensity(net, s, k) <= 0.0 || !shift(s, net.reaction(k), target)) break;
            s = target;
          }
          if (!sol.space.contains(s)) fresh.push_back(s);
        }
      }
      std::sort(fresh.begin(), fresh.end());
      fresh.erase(std::unique(fresh.begin(), fresh.end()), fresh.end());
      if (sol.space.size() + fresh.size() > opt.state_cap) {
        throw CapacityError("FSP state space would exceed the cap of " +
                                std::to_string(opt.state_cap) + " states",
                            final_stage ? best : eps_at_end());
      }
      for (const auto& s : fresh) sol.space.add(s);
    }
    if (!reached) {
      throw CapacityError("FSP did not reach eps within " + std::to_string(opt.max_rounds) +
                              " rounds",
                          final_stage ? best : eps_at_end());
    }
    start = sol.p;
    t_prev = t_now;
  }
  return sol;
}

namespace {

/// Strongly connected components (iterative Tarjan) of the graph j → i for
/// Q(i, j) > 0. Returns the component id of every node.
std::vector<std::size_t> strong_components(const Eigen::SparseMatrix<double>& Q,
                                           std::size_t& count) {
  const auto n = static_cast<std::size_t>(Q.cols());
  const std::size_t unset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, unset), low(n, 0), comp(n, unset), stack;
  std::vector<char> on_stack(n, 0);
  std::size_t counter = 0;
  count = 0;
  struct Frame {
    std::size_t node;
    Eigen::SparseMatrix<double>::InnerIterator it;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != unset) continue;
    std::vector<Frame> call;
    auto enter = [&](std::size_t v) {
      index[v] = low[v] = counter++;
      stack.push_back(v);
      on_stack[v] = 1;
      call.push_back({v, Eigen::SparseMatrix<double>::InnerIterator(Q, static_cast<Eigen::Index>(v))});
    };
    enter(root);
    while (!call.empty()) {
      Frame& f = call.back();
      const std::size_t v = f.node;
      bool descended = false;
      for (; f.it; ++f.it) {
        const auto w = static_cast<std::size_t>(f.it.row());
        if (w == v || f.it.value() <= 0.0) continue;
        if (index[w] == unset) {
          ++f.it;
          enter(w);
          descended = true;
          break;
        }
        if (on_stack[w]) low[v] = std::min(low[v], index[w]);
      }
      if (descended) continue;
      if (low[v] == index[v]) {
        for (;;) {
          const std::size_t w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = count;
          if (w == v) break;
        }
        ++count;
      }
      call.pop_back();
      if (!call.empty()) {
        const std::size_t parent = call.back().node;
        low[parent] = std::min(low[parent], low[v]);
      }
    }
  }
  return comp;
}

std::string state_text(const SystemState& s) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << ')';
  return os.str();
}

double residual_inf(const Eigen::SparseMatrix<double>& Q, const std::vector<double>& p) {
  const Eigen::VectorXd r =
      Q * Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size()));
  return r.size() ? r.lpNorm<Eigen::Infinity>() : 0.0;
}

bool pinned_solve(const Eigen::SparseMatrix<double>& Q, std::size_t pin, std::vector<double>& p) {
  const Eigen::Index n = Q.rows();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(Q.nonZeros() + n));
  for (int k = 0; k < Q.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(Q, k); it; ++it) {
      if (static_cast<std::size_t>(it.row()) != pin) trip.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (Eigen::Index j = 0; j < n; ++j) trip.emplace_back(static_cast<int>(pin), static_cast<int>(j), 1.0);
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) return false;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b[static_cast<Eigen::Index>(pin)] = 1.0;
  const Eigen::VectorXd x = lu.solve(b);
  if (lu.info() != Eigen::Success || !x.allFinite()) return false;
  p.assign(x.data(), x.data() + n);
  return true;
}

void clean(std::vector<double>& p) {
  double peak = 0.0;
  for (double v : p) peak = std::max(peak, v);
  for (double& v : p) {
    if (v < 0.0 && v > -1e-9 * std::max(peak, 1e-300)) v = 0.0;
  }
  const double s = sum(p);
  if (s > 0.0) {
    for (double& v : p) v /= s;
  }
}

}  // namespace

StationarySolution solve_stationary(const ReactionNetwork& net, const ProjectionSpace& space,
                                    double tol) {
  if (space.empty()) throw InvalidArgument("projection space is empty");
  if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
  GeneratorOptions refl;
  refl.reflecting = true;
  const SparseGenerator g = build_generator(net, space, refl);
  const std::size_t n = space.size();

  std::size_t ncomp = 0;
  const auto comp = strong_components(g.Q, ncomp);
  if (ncomp > 1) {
    std::vector<std::size_t> sizes(ncomp, 0);
    for (std::size_t c : comp) ++sizes[c];
    const std::size_t main =
        static_cast<std::size_t>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
    std::ostringstream os;
    os << "truncated chain is not irreducible: " << ncomp
       << " communicating classes; states outside the largest class include";
    std::size_t shown = 0;
    for (std::size_t i = 0; i < n && shown < 8; ++i) {
      if (comp[i] != main) {
        os << ' ' << state_text(space[i]);
        ++shown;
      }
    }
    throw ModelError(os.str());
  }

  StationarySolution sol;
  std::vector<double> p;
  bool ok = pinned_solve(g.Q, 0, p);
  if (ok) {
    const std::size_t peak =
        static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    if (peak != 0) ok = pinned_solve(g.Q, peak, p);
  }
  if (ok) {
    clean(p);
    ok = std::all_of(p.begin(), p.end(), [](double v) { return v >= 0.0; }) &&
         residual_inf(g.Q, p) < tol;
  }
  if (!ok) {
    // Power iteration on the uniformized chain.
    double lambda = 0.0;
    for (Eigen::Index j = 0; j < g.Q.cols(); ++j) lambda = std::max(lambda, -g.Q.coeff(j, j));
    if (lambda == 0.0) lambda = 1.0;
    Eigen::SparseMatrix<double> I(g.Q.rows(), g.Q.cols());
    I.setIdentity();
    const Eigen::SparseMatrix<double> P = I + g.Q / (1.01 * lambda);
    Eigen::VectorXd x = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n));
    for (int it = 0; it < 2'000'000; ++it) {
      x = P * x;
      x /= x.sum();
      if (it % 100 == 0 && (g.Q * x).lpNorm<Eigen::Infinity>() < tol) break;
    }
    p.assign(x.data(), x.data() + x.size());
    clean(p);
  }
  sol.residual = residual_inf(g.Q, p);
  if (!(sol.residual < tol)) {
    throw NumericError("stationary solve did not reach the residual tolerance (residual " +
                       std::to_string(sol.residual) + ")");
  }
  const SparseGenerator open = build_generator(net, space);
  for (std::size_t j = 0; j < n; ++j) {
    if (open.exit[j] > 0.0) sol.boundary_mass += p[j];
  }
  sol.p = std::move(p);
  return sol;
}

ProjectionSpace reachable_space(const ReactionNetwork& net, const SystemState& init,
                                const SystemState& hi, std::size_t state_cap) {
  if (init.size() != net.species_count() || hi.size() != init.size()) {
    throw InvalidArgument("state length does not match species count");
  }
  for (std::size_t i = 0; i < init.size(); ++i) {
    if (init[i] < 0 || init[i] > hi[i]) throw InvalidArgument("initial state lies outside the box");
  }
  ProjectionSpace space({init});
  SystemState target;
  for (std::size_t head = 0; head < space.size(); ++head) {
    const SystemState s = space[head];
    for (std::size_t k = 0; k < net.reaction_count(); ++k) {
      if (evaluate_propensity(net, s, k) <= 0.0) continue;
      if (!shift(s, net.reaction(k), target)) continue;
      bool inside = true;
      for (std::size_t i = 0; i < target.size(); ++i) inside = inside && target[i] <= hi[i];
      if (!inside || space.contains(target)) continue;
      if (space.size() >= state_cap) {
        throw CapacityError("state space would exceed the cap of " + std::to_string(state_cap) + " states",
                            1.0);
      }
      space.add(target);
    }
  }
  return space;
}

AutoStationary solve_stationary_auto(const ReactionNetwork& net, const SystemState& init,
                                     double eps, Count start, std::size_t state_cap, double tol) {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("eps must lie in (0, 1)");
  SystemState box(init.size());
  for (std::size_t i = 0; i < init.size(); ++i) box[i] = std::max(start, init[i]);
  double best = 1.0;
  for (;;) {
    AutoStationary out;
    try {
      out.space = reachable_space(net, init, box, state_cap);
    } catch (const CapacityError& e) {
      throw CapacityError(e.what(), best);
    }
    out.solution = solve_stationary(net, out.space, tol);
    out.box = box;
    best = std::min(best, out.solution.boundary_mass);
    if (out.solution.boundary_mass < eps) return out;
    // Only grow species that actually hit their bound.
    std::vector<char> grow(box.size(), 0);
    for (const auto& s : out.space.states()) {
      for (std::size_t i = 0; i < box.size(); ++i) grow[i] = grow[i] || s[i] == box[i];
    }
    bool any = false;
    for (std::size_t i = 0; i < box.size(); ++i) {
      if (grow[i]) {
        box[i] *= 2;
        any = true;
      }
    }
    if (!any) return out;
  }
}

HittingProbability hitting_probability(const ReactionNetwork& net, const SystemState& init,
                                       const StatePredicate& predicate, double t, double eps,
                                       const FspOptions& options) {
  FspOptions opt = options;
  opt.absorbing = [&predicate](std::span<const Count> s) { return predicate(s); };
  const ProjectionSpace space({init});
  const double one[] = {1.0};
  const FspSolution sol = solve_transient(net, space, one, t, eps, opt);
  HittingProbability out;
  for (std::size_t j = 0; j < sol.space.size(); ++j) {
    if (predicate(sol.space[j])) out.probability += sol.p[j];
  }
  out.certificate = sol.certificate;
  out.upper = out.probability + sol.certificate.eps_achieved;
  return out;
}

std::vector<double> marginal(const ProjectionSpace& space, std::span<const double> p,
                             std::size_t species) {
  std::vector<double> m;
  for (std::size_t j = 0; j < space.size(); ++j) {
    const auto x = static_cast<std::size_t>(space[j].at(species));
    if (x >= m.size()) m.resize(x + 1, 0.0);
    m[x] += p[j];
  }
  return m;
}

std::size_t state_cap_from_env(std::size_t fallback) {
  const char* v = std::getenv("CMEKIT_STATE_CAP");
  if (!v || !*v) return fallback;
  char* end = nullptr;
  const unsigned long long cap = std::strtoull(v, &end, 10);
  if (*end != '\0' || cap == 0) throw InvalidArgument("CMEKIT_STATE_CAP must be a positive integer");
  return static_cast<std::size_t>(cap);
}

}  // namespace cmekit
