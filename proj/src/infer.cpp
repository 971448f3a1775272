#include "cmekit/infer.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <Eigen/SVD>

#include "cmekit/ensemble.hpp"
#include "cmekit/error.hpp"
#include "cmekit/exact_sim.hpp"
#include "cmekit/fsp.hpp"
#include "cmekit/moments.hpp"
#include "cmekit/rng.hpp"

namespace cmekit {

std::size_t Dataset::cells() const {
  std::size_t n = 0;
  for (const auto& o : observations) n += o.size();
  return n;
}

std::vector<Count> Dataset::column(std::size_t t, std::size_t col) const {
  std::vector<Count> out;
  out.reserve(observations.at(t).size());
  for (const auto& row : observations[t]) out.push_back(row.at(col));
  return out;
}

void ParameterSpec::check(const ReactionNetwork& net) const {
  if (names.empty()) throw InvalidArgument("no free parameters given");
  if (low.size() != names.size() || high.size() != names.size()) {
    throw InvalidArgument("every free parameter needs a (low, high) box");
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (!net.parameter_index(names[i])) throw InvalidArgument("unknown parameter '" + names[i] + "'");
    if (!(low[i] > 0.0 && low[i] < high[i] && std::isfinite(high[i]))) {
      throw InvalidArgument("parameter '" + names[i] + "' needs bounds 0 < low < high");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (names[j] == names[i]) throw InvalidArgument("parameter '" + names[i] + "' listed twice");
    }
  }
}

ReactionNetwork ParameterSpec::apply(const ReactionNetwork& net, std::span<const double> theta) const {
  ReactionNetwork out = net;
  for (std::size_t i = 0; i < names.size(); ++i) out = out.with_parameter(names[i], theta[i]);
  return out;
}

ParameterSpec parse_parameter_spec(std::string_view text) {
  ParameterSpec spec;
  std::string s(text);
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char c) { return std::isspace(c); }),
               item.end());
    if (item.empty()) continue;
    const auto eq = item.find('=');
    const auto colon = item.find(':', eq == std::string::npos ? 0 : eq);
    if (eq == std::string::npos || colon == std::string::npos || eq == 0) {
      throw InvalidArgument("expected name=low:high, got '" + item + "'");
    }
    try {
      std::size_t used = 0;
      const std::string lo = item.substr(eq + 1, colon - eq - 1), hi = item.substr(colon + 1);
      const double l = std::stod(lo, &used);
      if (used != lo.size()) throw std::invalid_argument("lo");
      const double h = std::stod(hi, &used);
      if (used != hi.size()) throw std::invalid_argument("hi");
      spec.names.push_back(item.substr(0, eq));
      spec.low.push_back(l);
      spec.high.push_back(h);
    } catch (const std::logic_error&) {
      throw InvalidArgument("bad bounds in '" + item + "'");
    }
  }
  return spec;
}

Pmf empirical_pmf(std::span<const Count> samples) {
  if (samples.empty()) throw InvalidArgument("no samples");
  Pmf p;
  for (Count c : samples) {
    if (c < 0) throw InvalidArgument("negative count in samples");
    if (static_cast<std::size_t>(c) >= p.size()) p.resize(static_cast<std::size_t>(c) + 1, 0.0);
    p[static_cast<std::size_t>(c)] += 1.0;
  }
  for (double& v : p) v /= static_cast<double>(samples.size());
  return p;
}

double kolmogorov_distance(std::span<const double> a, std::span<const double> b) {
  double ma = 0.0, mb = 0.0;
  for (double v : a) ma += v;
  for (double v : b) mb += v;
  if (a.empty() || b.empty() || !(ma > 0.0) || !(mb > 0.0)) {
    throw InvalidArgument("Kolmogorov distance needs two nonempty distributions");
  }
  double fa = 0.0, fb = 0.0, d = 0.0;
  for (std::size_t k = 0; k < std::max(a.size(), b.size()); ++k) {
    if (k < a.size()) fa += a[k] / ma;
    if (k < b.size()) fb += b[k] / mb;
    d = std::max(d, std::abs(fa - fb));
  }
  return std::min(d, 1.0);
}

double kolmogorov_distance(std::span<const Count> a, std::span<const Count> b) {
  const Pmf pa = empirical_pmf(a), pb = empirical_pmf(b);
  return kolmogorov_distance(std::span<const double>(pa), std::span<const double>(pb));
}

namespace {

double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }

double halton(std::size_t index, unsigned base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47};

struct Objective {
  std::function<double(std::span<const double>)> f;
  const ParameterSpec* spec = nullptr;
  std::exception_ptr error;

  std::vector<double> to_theta(const gsl_vector* u) const {
    std::vector<double> th(spec->size());
    for (std::size_t i = 0; i < th.size(); ++i) {
      th[i] = spec->low[i] + (spec->high[i] - spec->low[i]) * logistic(gsl_vector_get(u, i));
    }
    return th;
  }
};

double gsl_trampoline(const gsl_vector* u, void* params) {
  auto* obj = static_cast<Objective*>(params);
  if (obj->error) return GSL_NAN;
  try {
    const double v = obj->f(obj->to_theta(u));
    return std::isfinite(v) ? v : GSL_POSINF;
  } catch (...) {
    obj->error = std::current_exception();
    return GSL_NAN;
  }
}

/// Nelder–Mead (GSL nmsimplex2) over logistic-transformed box coordinates,
/// restarted from Halton points. The trace of the winning restart is kept.
FitResult minimise(const ParameterSpec& spec, const FitConfig& cfg,
                   const std::function<double(std::span<const double>)>& f) {
  const std::size_t d = spec.size();
  if (d > std::size(kPrimes)) throw InvalidArgument("too many free parameters");
  gsl_set_error_handler_off();
  Objective obj{f, &spec, nullptr};
  gsl_multimin_function fn{&gsl_trampoline, d, &obj};
  FitResult best;
  best.names = spec.names;
  best.objective = std::numeric_limits<double>::infinity();
  const std::size_t restarts = std::max<std::size_t>(1, cfg.restarts);
  for (std::size_t r = 0; r < restarts; ++r) {
    gsl_vector* u = gsl_vector_alloc(d);
    gsl_vector* step = gsl_vector_alloc(d);
    for (std::size_t i = 0; i < d; ++i) {
      const double h = std::clamp(halton(r + 1, kPrimes[i]), 0.02, 0.98);
      gsl_vector_set(u, i, std::log(h / (1.0 - h)));
      gsl_vector_set(step, i, 1.0);
    }
    gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, d);
    gsl_multimin_fminimizer_set(s, &fn, u, step);
    std::vector<TracePoint> trace;
    // nmsimplex2 leaves fval unset until the first iteration
    const double f0 = gsl_trampoline(u, &obj);
    if (!obj.error) trace.push_back({obj.to_theta(u), f0});
    for (std::size_t it = 0; it < cfg.max_iterations && !obj.error; ++it) {
      const int status = gsl_multimin_fminimizer_iterate(s);
      if (obj.error || status != GSL_SUCCESS) break;
      trace.push_back({obj.to_theta(s->x), s->fval});
      if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), cfg.simplex_tol) == GSL_SUCCESS) break;
    }
    const double fval = s->fval;
    const std::vector<double> theta = obj.to_theta(s->x);
    gsl_multimin_fminimizer_free(s);
    gsl_vector_free(u);
    gsl_vector_free(step);
    if (obj.error) std::rethrow_exception(obj.error);
    if (fval < best.objective) {
      best.objective = fval;
      best.estimate = theta;
      best.trace = std::move(trace);
    }
  }
  if (!std::isfinite(best.objective)) throw NumericError("objective is not finite anywhere the optimiser looked");
  return best;
}

using JointDistribution = std::map<SystemState, double>;

std::vector<JointDistribution> model_joint(const ModelDocument& model, const Dataset& data,
                                           double eps, std::size_t cap) {
  const auto& net = model.network;
  auto project = [&](const ProjectionSpace& space, std::span<const double> p) {
    JointDistribution j;
    SystemState key(data.species.size());
    for (std::size_t s = 0; s < space.size(); ++s) {
      for (std::size_t c = 0; c < key.size(); ++c) key[c] = space[s][data.species[c]];
      j[key] += p[s];
    }
    return j;
  };
  std::vector<JointDistribution> out;
  if (data.steady_state) {
    Count start = 20;
    for (const auto& obs : data.observations) {
      for (const auto& row : obs) {
        for (Count c : row) start = std::max(start, 2 * c);
      }
    }
    const AutoStationary st = solve_stationary_auto(net, model.initial_state, eps, start, cap);
    out.push_back(project(st.space, st.solution.p));
    return out;
  }
  const ProjectionSpace init({model.initial_state});
  const double one[] = {1.0};
  FspOptions opt;
  opt.state_cap = cap;
  for (double t : data.times) {
    const FspSolution sol = solve_transient(net, init, one, t, eps, opt);
    out.push_back(project(sol.space, sol.p));
  }
  return out;
}

Pmf joint_marginal(const JointDistribution& j, std::size_t col) {
  Pmf p;
  for (const auto& [s, v] : j) {
    const auto x = static_cast<std::size_t>(s[col]);
    if (x >= p.size()) p.resize(x + 1, 0.0);
    p[x] += v;
  }
  if (p.empty()) p.push_back(0.0);
  return p;
}

void check_dataset(const ReactionNetwork& net, const Dataset& data) {
  if (data.species.empty()) throw InvalidArgument("dataset has no observed species");
  for (std::size_t s : data.species) {
    if (s >= net.species_count()) throw InvalidArgument("dataset species out of range");
  }
  if (data.observations.empty() || data.cells() == 0) throw InvalidArgument("dataset is empty");
  if (!data.steady_state && data.times.size() != data.observations.size()) {
    throw InvalidArgument("dataset times and observation groups differ in number");
  }
  for (const auto& obs : data.observations) {
    for (const auto& row : obs) {
      if (row.size() != data.species.size()) throw InvalidArgument("dataset row has the wrong width");
      for (Count c : row) {
        if (c < 0) throw InvalidArgument("dataset has a negative count");
      }
    }
  }
}

}  // namespace

std::vector<std::vector<Pmf>> model_marginals(const ModelDocument& model, const Dataset& data,
                                              double eps, std::size_t state_cap) {
  check_dataset(model.network, data);
  std::vector<std::vector<Pmf>> out;
  for (const auto& j : model_joint(model, data, eps, state_cap)) {
    std::vector<Pmf> per;
    for (std::size_t c = 0; c < data.species.size(); ++c) per.push_back(joint_marginal(j, c));
    out.push_back(std::move(per));
  }
  return out;
}

FitResult fit_fsp_mle(const ModelDocument& model, const ParameterSpec& spec, const Dataset& data,
                      const FitConfig& cfg) {
  spec.check(model.network);
  check_dataset(model.network, data);
  if (!(cfg.fsp_eps > 0.0 && cfg.fsp_eps <= 1e-6)) throw InvalidArgument("FSP tolerance must be in (0, 1e-6]");
  const std::size_t d = spec.size();

  auto evaluate = [&](std::span<const double> theta) {
    ModelDocument m = model;
    m.network = spec.apply(model.network, theta);
    return model_joint(m, data, cfg.fsp_eps, cfg.state_cap);
  };

  // Probe the box corners so that capacity trouble is reported as a bounds
  // problem rather than mid-optimisation.
  if (d <= 6) {
    std::vector<double> corner(d);
    for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
      for (std::size_t i = 0; i < d; ++i) corner[i] = (mask >> i) & 1 ? spec.high[i] : spec.low[i];
      try {
        evaluate(corner);
      } catch (const CapacityError& e) {
        std::ostringstream os;
        os << "bounds too wide: FSP exceeds its state cap at corner (";
        for (std::size_t i = 0; i < d; ++i) os << (i ? ", " : "") << spec.names[i] << "=" << corner[i];
        os << "): " << e.what();
        throw InvalidArgument(os.str());
      }
    }
  }

  // Empirical joint distributions of the data.
  std::vector<JointDistribution> empirical;
  for (const auto& obs : data.observations) {
    JointDistribution j;
    for (const auto& row : obs) j[row] += 1.0 / static_cast<double>(obs.size());
    empirical.push_back(std::move(j));
  }

  constexpr double kLogFloor = -690.0;  // log(1e-300)
  bool all_outside_seen = false;
  auto objective = [&](std::span<const double> theta) {
    const auto model_j = evaluate(theta);
    double total = 0.0;
    if (cfg.objective == FspObjective::negative_log_likelihood) {
      bool any_inside = false;
      for (std::size_t t = 0; t < data.observations.size(); ++t) {
        const std::size_t mt = data.steady_state ? 0 : t;
        for (const auto& row : data.observations[t]) {
          auto it = model_j[mt].find(row);
          const double p = it == model_j[mt].end() ? 0.0 : it->second;
          if (p > 0.0) {
            any_inside = true;
            total -= std::max(std::log(p), kLogFloor);
          } else {
            total -= kLogFloor;
          }
        }
      }
      if (!any_inside) all_outside_seen = true;
    } else {
      for (std::size_t t = 0; t < empirical.size(); ++t) {
        const auto& mj = model_j[data.steady_state ? 0 : t];
        for (const auto& [s, q] : empirical[t]) {
          auto it = mj.find(s);
          total += std::abs((it == mj.end() ? 0.0 : it->second) - q);
        }
        for (const auto& [s, p] : mj) {
          if (!empirical[t].count(s)) total += p;
        }
      }
    }
    return total;
  };

  {
    std::vector<double> mid(d);
    for (std::size_t i = 0; i < d; ++i) mid[i] = 0.5 * (spec.low[i] + spec.high[i]);
    objective(mid);
    for (std::size_t i = 0; i < d; ++i) mid[i] = spec.low[i];
    const bool mid_outside = all_outside_seen;
    all_outside_seen = false;
    objective(mid);
    for (std::size_t i = 0; i < d; ++i) mid[i] = spec.high[i];
    const bool low_outside = all_outside_seen;
    all_outside_seen = false;
    objective(mid);
    if (mid_outside && low_outside && all_outside_seen) {
      throw InvalidArgument("every observation lies outside the model's support at the probe points");
    }
  }

  FitResult res = minimise(spec, cfg, objective);
  const auto model_j = evaluate(res.estimate);
  res.mismatch = 0.0;
  for (std::size_t t = 0; t < data.observations.size(); ++t) {
    const auto& mj = model_j[data.steady_state ? 0 : t];
    for (std::size_t c = 0; c < data.species.size(); ++c) {
      const Pmf emp = empirical_pmf(data.column(t, c));
      const Pmf mod = joint_marginal(mj, c);
      res.mismatch = std::max(res.mismatch, kolmogorov_distance(std::span<const double>(emp),
                                                                std::span<const double>(mod)));
    }
  }
  return res;
}

std::vector<std::vector<double>> AbcResult::posterior() const {
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < particles.size(); ++i) {
    if (accepted[i]) out.push_back(particles[i]);
  }
  return out;
}

double default_relaxation_horizon(const ReactionNetwork& net) {
  double slowest = std::numeric_limits<double>::infinity();
  for (const auto& r : net.reactions()) {
    const bool no_products = std::all_of(r.products.begin(), r.products.end(), [](int c) { return c == 0; });
    if (!no_products || r.order() != 1 || !r.rate.is_mass_action()) continue;
    const auto& c = r.rate.coefficient();
    const double rate = c.kind() == ExprKind::constant ? c.value() : net.parameter_values()[c.index()];
    slowest = std::min(slowest, rate);
  }
  if (!std::isfinite(slowest) || !(slowest > 0.0)) {
    throw InvalidArgument("no first-order degradation reaction found; give the relaxation horizon explicitly");
  }
  return 10.0 / slowest;
}

AbcResult abc_rejection(const ModelDocument& model, const ParameterSpec& spec, const Dataset& data,
                        const AbcConfig& cfg) {
  const auto& net = model.network;
  spec.check(net);
  check_dataset(net, data);
  if (!data.steady_state) throw InvalidArgument("rejection ABC needs steady-state data");
  if (!(cfg.epsilon > 0.0 && cfg.epsilon <= 1.0)) throw InvalidArgument("ABC epsilon must lie in (0, 1]");
  if (cfg.particles < 1 || cfg.cells < 1) throw InvalidArgument("particle and cell counts must be positive");
  const double horizon = cfg.horizon ? *cfg.horizon : default_relaxation_horizon(net);
  if (!(horizon >= 0.0)) throw InvalidArgument("horizon must be nonnegative");

  std::vector<Pmf> observed;
  for (std::size_t c = 0; c < data.species.size(); ++c) {
    std::vector<Count> all;
    for (std::size_t t = 0; t < data.observations.size(); ++t) {
      const auto col = data.column(t, c);
      all.insert(all.end(), col.begin(), col.end());
    }
    observed.push_back(empirical_pmf(all));
  }

  const std::size_t d = spec.size();
  AbcResult res;
  res.names = spec.names;
  res.particles.assign(cfg.particles, std::vector<double>(d));
  res.distances.assign(cfg.particles, 0.0);
  res.accepted.assign(cfg.particles, 0);
  const double times[] = {horizon};
  parallel_for_index(cfg.particles, cfg.workers, [&](std::size_t i) {
    RngStream rng(cfg.seed, i);
    auto& theta = res.particles[i];
    for (std::size_t j = 0; j < d; ++j) theta[j] = spec.low[j] + (spec.high[j] - spec.low[j]) * rng.uniform();
    const ReactionNetwork sim = spec.apply(net, theta);
    std::vector<std::vector<Count>> cols(data.species.size(), std::vector<Count>(cfg.cells));
    for (std::size_t cell = 0; cell < cfg.cells; ++cell) {
      const SystemState s = snapshot_exact(sim, model.initial_state, times, ExactMethod::direct, rng).front();
      for (std::size_t c = 0; c < data.species.size(); ++c) cols[c][cell] = s[data.species[c]];
    }
    double dist = 0.0;
    for (std::size_t c = 0; c < data.species.size(); ++c) {
      const Pmf sim_pmf = empirical_pmf(cols[c]);
      dist = std::max(dist, kolmogorov_distance(std::span<const double>(sim_pmf),
                                                std::span<const double>(observed[c])));
    }
    res.distances[i] = dist;
    res.accepted[i] = dist <= cfg.epsilon;
  });
  std::size_t accepted = 0;
  res.min_distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cfg.particles; ++i) {
    accepted += res.accepted[i] ? 1 : 0;
    res.min_distance = std::min(res.min_distance, res.distances[i]);
  }
  res.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(cfg.particles);
  if (accepted == 0) {
    std::ostringstream os;
    os << "empty posterior: no particle accepted; smallest distance " << res.min_distance;
    res.warnings.push_back(os.str());
  }
  return res;
}

FitResult moment_match(const ReactionNetwork& net, const ParameterSpec& spec,
                       std::span<const MomentTarget> targets, const FitConfig& cfg) {
  spec.check(net);
  if (targets.empty()) throw InvalidArgument("no moment targets");
  for (const auto& t : targets) {
    if (t.species >= net.species_count()) throw InvalidArgument("moment target species out of range");
    if (!(t.mean_weight >= 0.0 && t.variance_weight >= 0.0)) throw InvalidArgument("weights must be nonnegative");
  }
  const std::size_t d = spec.size();

  auto residuals = [&](std::span<const double> theta) {
    const ReactionNetwork m = spec.apply(net, theta);
    MomentSystem sys = moment_odes(m, 2);
    if (!sys.higher.empty()) sys = close_normal(sys);
    const auto mu = stationary_moments(sys);
    const MomentSummary s = summarize_moments(sys, mu);
    std::vector<double> r;
    for (const auto& t : targets) {
      const double sm = t.mean != 0.0 ? std::abs(t.mean) : 1.0;
      const double sv = t.variance != 0.0 ? std::abs(t.variance) : 1.0;
      r.push_back(std::sqrt(t.mean_weight) * (s.mean[t.species] - t.mean) / sm);
      r.push_back(std::sqrt(t.variance_weight) * (s.variance[t.species] - t.variance) / sv);
    }
    return r;
  };
  auto objective = [&](std::span<const double> theta) {
    double total = 0.0;
    for (double v : residuals(theta)) total += v * v;
    return total;
  };

  FitResult res = minimise(spec, cfg, objective);
  res.mismatch = std::sqrt(res.objective);
  {
    const auto r = residuals(res.estimate);
    const ReactionNetwork m = spec.apply(net, res.estimate);
    MomentSystem sys = moment_odes(m, 2);
    if (!sys.higher.empty()) sys = close_normal(sys);
    const MomentSummary s = summarize_moments(sys, stationary_moments(sys));
    for (const auto& t : targets) {
      res.residuals.push_back(s.mean[t.species] - t.mean);
      res.residuals.push_back(s.variance[t.species] - t.variance);
    }
  }

  // Rank of the weighted residual Jacobian at the estimate.
  const std::vector<double> r0 = residuals(res.estimate);
  Eigen::MatrixXd J(r0.size(), d);
  for (std::size_t j = 0; j < d; ++j) {
    std::vector<double> up = res.estimate, dn = res.estimate;
    const double h = 1e-5 * std::max(std::abs(res.estimate[j]), 1e-8);
    up[j] += h;
    dn[j] -= h;
    const auto ru = residuals(up), rd = residuals(dn);
    for (std::size_t i = 0; i < r0.size(); ++i) J(i, j) = (ru[i] - rd[i]) / (2.0 * h) * res.estimate[j];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
  const auto& sv = svd.singularValues();
  const double top = sv.size() ? sv[0] : 0.0;
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > 1e-6 * top && sv[i] > 0.0) ++rank;
  }
  if (rank < d) {
    res.underdetermined = true;
    res.warnings.push_back("underdetermined: the weighted moment targets do not pin down every free parameter");
  }
  return res;
}

GammaBurst fit_gamma_burst(std::span<const double> samples) {
  if (samples.size() < 10) throw InvalidArgument("gamma burst fit needs at least 10 samples");
  const SummaryStats s = summary_stats(samples);
  if (!(s.variance > 0.0)) throw NumericError("samples have zero variance; gamma fit undefined");
  if (!(s.mean > 0.0)) throw InvalidArgument("gamma burst fit needs a positive mean");
  return {s.mean * s.mean / s.variance, s.variance / s.mean};
}

}  // namespace cmekit
