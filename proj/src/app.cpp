#include "cmekit/app.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "cmekit/continuum.hpp"
#include "cmekit/csv.hpp"
#include "cmekit/error.hpp"
#include "cmekit/exact_sim.hpp"
#include "cmekit/fsp.hpp"
#include "cmekit/infer.hpp"
#include "cmekit/leap_sim.hpp"
#include "cmekit/moments.hpp"
#include "cmekit/rng.hpp"

namespace cmekit {

using Json = nlohmann::ordered_json;

namespace {

double parse_real(std::string_view s, const char* what) {
  std::string str(s);
  str.erase(std::remove_if(str.begin(), str.end(), [](unsigned char c) { return std::isspace(c); }), str.end());
  try {
    std::size_t used = 0;
    const double v = std::stod(str, &used);
    if (used == str.size()) return v;
  } catch (const std::logic_error&) {
  }
  throw InvalidArgument(std::string("bad number '") + std::string(s) + "' in " + what);
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss{std::string(text)};
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::vector<std::string> species_names(const ReactionNetwork& net) {
  std::vector<std::string> out;
  for (const auto& s : net.species()) out.push_back(s.name);
  return out;
}

std::size_t species_by_name(const ReactionNetwork& net, std::string_view name) {
  const auto idx = net.species_index(name);
  if (!idx) throw InvalidArgument("unknown species '" + std::string(name) + "'");
  return *idx;
}

Json json_numbers(std::span<const double> v) {
  Json a = Json::array();
  for (double x : v) a.push_back(std::isfinite(x) ? Json(x) : Json(format_number(x)));
  return a;
}

Json certificate_json(const FspCertificate& c) {
  Json j;
  j["mass"] = c.mass;
  j["eps_requested"] = c.eps_requested;
  j["eps_achieved"] = c.eps_achieved;
  j["rounds"] = c.rounds;
  j["states"] = c.states;
  j["history"] = json_numbers(c.history);
  return j;
}

std::vector<double> default_grid(double t_end) {
  std::vector<double> g(101);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = t_end * static_cast<double>(i) / 100.0;
  g.back() = t_end;
  return g;
}

/// Record grid from the options: explicit grid, else 101 points up to t_end.
std::vector<double> resolve_grid(const std::string& record, const std::optional<double>& t_end) {
  if (!record.empty()) {
    auto g = parse_time_grid(record);
    if (t_end && g.back() > *t_end) throw InvalidArgument("record grid runs past --t-end");
    return g;
  }
  if (!t_end) throw InvalidArgument("give --t-end or --record");
  if (!(*t_end > 0.0)) throw InvalidArgument("--t-end must be positive");
  return default_grid(*t_end);
}

std::vector<double> sample_real_path(const RealTrajectory& traj, std::span<const double> times) {
  const std::size_t s = traj.states.empty() ? 0 : traj.states.front().size();
  std::vector<double> row;
  row.reserve(times.size() * s);
  std::size_t k = 0;
  for (double t : times) {
    while (k + 1 < traj.times.size() && traj.times[k + 1] <= t) ++k;
    row.insert(row.end(), traj.states[k].begin(), traj.states[k].end());
  }
  return row;
}

std::string trajectory_csv(const std::vector<std::string>& species, const std::vector<double>& times,
                           const std::vector<std::vector<double>>& states) {
  std::vector<std::string> header{"time"};
  header.insert(header.end(), species.begin(), species.end());
  CsvWriter w(header);
  for (std::size_t i = 0; i < times.size(); ++i) {
    std::vector<double> row{times[i]};
    row.insert(row.end(), states[i].begin(), states[i].end());
    w.row(row);
  }
  return w.text();
}

std::string snapshot_csv(const std::vector<std::string>& species, std::span<const double> times,
                         const SnapshotMatrix& m) {
  const bool many = m.trajectories > 1;
  std::vector<std::string> header;
  if (many) header.push_back("trajectory");
  header.push_back("time");
  header.insert(header.end(), species.begin(), species.end());
  CsvWriter w(header);
  std::vector<std::string> cells;
  for (std::size_t i = 0; i < m.trajectories; ++i) {
    for (std::size_t t = 0; t < m.times; ++t) {
      cells.clear();
      if (many) cells.push_back(std::to_string(i));
      cells.push_back(format_number(times[t]));
      for (std::size_t s = 0; s < m.species; ++s) cells.push_back(format_number(m.at(i, t, s)));
      w.row(cells);
    }
  }
  return w.text();
}

std::vector<double> initial_concentration(const ModelDocument& model) {
  std::vector<double> x(model.initial_state.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = static_cast<double>(model.initial_state[i]) / model.network.volume();
  }
  return x;
}

/// Mean path and covariance in counts: Ωx and ΩΣ.
std::vector<std::string> lna_header(const std::vector<std::string>& species) {
  std::vector<std::string> h{"time"};
  for (const auto& s : species) h.push_back(s);
  for (std::size_t i = 0; i < species.size(); ++i) {
    for (std::size_t j = i; j < species.size(); ++j) h.push_back("cov_" + species[i] + "_" + species[j]);
  }
  return h;
}

std::vector<double> lna_row(double t, double omega, std::span<const double> x, const Eigen::MatrixXd& cov) {
  std::vector<double> row{t};
  for (double v : x) row.push_back(omega * v);
  for (Eigen::Index i = 0; i < cov.rows(); ++i) {
    for (Eigen::Index j = i; j < cov.cols(); ++j) row.push_back(omega * cov(i, j));
  }
  return row;
}

Json fit_json(const FitResult& r) {
  Json j;
  Json est;
  for (std::size_t i = 0; i < r.names.size(); ++i) est[r.names[i]] = r.estimate[i];
  j["estimate"] = est;
  j["objective"] = r.objective;
  j["mismatch"] = r.mismatch;
  j["underdetermined"] = r.underdetermined;
  if (!r.residuals.empty()) j["residuals"] = json_numbers(r.residuals);
  Json trace = Json::array();
  for (const auto& p : r.trace) {
    Json tp;
    tp["theta"] = json_numbers(p.theta);
    tp["objective"] = p.objective;
    trace.push_back(tp);
  }
  j["trace"] = trace;
  j["warnings"] = r.warnings;
  return j;
}

/// "R=10:10[:1:1],P=..." -> targets with mean:variance[:mean_weight:variance_weight].
std::vector<MomentTarget> parse_targets(const ReactionNetwork& net, const std::string& text) {
  std::vector<MomentTarget> out;
  for (const auto& item : split(text, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw InvalidArgument("expected species=mean:variance, got '" + item + "'");
    std::string name = item.substr(0, eq);
    name.erase(std::remove_if(name.begin(), name.end(), [](unsigned char c) { return std::isspace(c); }), name.end());
    const auto parts = split(item.substr(eq + 1), ':');
    if (parts.size() != 2 && parts.size() != 4) throw InvalidArgument("expected mean:variance in '" + item + "'");
    MomentTarget t;
    t.species = species_by_name(net, name);
    t.mean = parse_real(parts[0], "moment target");
    t.variance = parse_real(parts[1], "moment target");
    if (parts.size() == 4) {
      t.mean_weight = parse_real(parts[2], "moment weight");
      t.variance_weight = parse_real(parts[3], "moment weight");
    }
    out.push_back(t);
  }
  return out;
}

}  // namespace

std::vector<double> parse_time_grid(std::string_view text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw InvalidArgument("time grid must look like start:stop:step");
  const double a = parse_real(parts[0], "time grid"), b = parse_real(parts[1], "time grid"),
               s = parse_real(parts[2], "time grid");
  if (!(a >= 0.0 && b >= a && s > 0.0 && std::isfinite(b))) {
    throw InvalidArgument("time grid needs 0 <= start <= stop and step > 0");
  }
  const double count = std::floor((b - a) / s + 1e-9);
  if (count > 1e7) throw InvalidArgument("time grid has too many points");
  std::vector<double> g;
  for (std::size_t i = 0; i <= static_cast<std::size_t>(count); ++i) g.push_back(a + s * static_cast<double>(i));
  if (std::abs(g.back() - b) <= 1e-9 * std::max(1.0, b)) g.back() = b;
  return g;
}

std::vector<double> parse_number_list(std::string_view text) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) out.push_back(parse_real(item, "number list"));
  return out;
}

AppOutput run_validate(const ModelDocument& model, const ValidateOptions& options) {
  const auto report = validate_network(model.network);
  AppOutput out;
  Json j;
  j["valid"] = report.ok();
  j["species"] = species_names(model.network);
  j["reactions"] = model.network.reaction_count();
  j["volume"] = model.network.volume();
  j["errors"] = report.errors;
  j["warnings"] = report.warnings;
  out.report = dump(j);
  out.warnings = report.warnings;
  if (options.emit == "dsl") {
    out.data = serialize_model(model, ModelFormat::dsl);
  } else if (options.emit == "json") {
    out.data = serialize_model(model, ModelFormat::json);
  } else if (!options.emit.empty()) {
    throw InvalidArgument("--emit takes dsl or json");
  }
  if (!report.ok()) throw ModelError(report.errors.front());
  return out;
}

AppOutput run_simulate(const ModelDocument& model, const SimulateOptions& o) {
  const auto& net = model.network;
  const auto names = species_names(net);
  const std::string& m = o.method;
  if (o.n < 1) throw InvalidArgument("--n must be at least 1");
  if (o.workers < 1) throw InvalidArgument("--workers must be at least 1");
  AppOutput out;
  Json report;
  report["method"] = m;
  report["seed"] = o.seed;
  report["n"] = o.n;

  if (m == "wssa") {
    if (!o.t_end || !(*o.t_end > 0.0)) throw InvalidArgument("wssa needs a positive --t-end");
    if (o.predicate.empty()) throw InvalidArgument("wssa needs --predicate");
    RareEventSpec spec;
    spec.predicate = parse_predicate(net, o.predicate);
    spec.horizon = *o.t_end;
    spec.bias = o.bias.empty() ? std::vector<double>(net.reaction_count(), 1.0) : parse_number_list(o.bias);
    ExactOptions eo;
    eo.max_events = o.max_events;
    const auto est = estimate_rare_event_wssa(net, model.initial_state, spec, o.n, o.seed, o.workers, eo);
    report["probability"] = est.probability;
    report["standard_error"] = est.standard_error;
    report["sample_variance"] = est.sample_variance;
    report["hits"] = est.hits;
    out.data = dump(report);
    out.report = out.data;
    return out;
  }

  if (m == "ode") {
    if (o.n != 1) throw InvalidArgument("the ODE method is deterministic; --n must be 1");
    const auto grid = resolve_grid(o.record, o.t_end);
    const auto path = integrate_ode(net, initial_concentration(model), grid);
    std::vector<std::vector<double>> counts;
    for (const auto& x : path) {
      std::vector<double> c(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) c[i] = net.volume() * x[i];
      counts.push_back(std::move(c));
    }
    out.data = trajectory_csv(names, grid, counts);
    report["rows"] = grid.size();
    out.report = dump(report);
    return out;
  }

  ExactOptions eo;
  eo.max_events = o.max_events;
  LeapConfig lc;
  lc.epsilon = o.epsilon;
  lc.midpoint = o.midpoint;
  lc.r = o.r;
  CleOptions co;
  co.stride = o.stride;
  if (m != "direct" && m != "nrm" && m != "tau" && m != "rleap" && m != "cle") {
    throw InvalidArgument("unknown method '" + m + "' (direct, nrm, tau, rleap, cle, ode, wssa)");
  }
  if (m == "tau" && !(o.epsilon > 0.0 && o.epsilon < 1.0)) throw InvalidArgument("--epsilon must be in (0, 1)");
  if (m == "cle" && !(o.dt > 0.0)) throw InvalidArgument("--dt must be positive");
  const ExactMethod em = m == "nrm" ? ExactMethod::next_reaction : ExactMethod::direct;
  std::vector<double> x0(model.initial_state.begin(), model.initial_state.end());

  if (o.record.empty() && o.n == 1) {
    // Event mode: one row per event (per leap, per recorded CLE step).
    if (!o.t_end || !(*o.t_end > 0.0)) throw InvalidArgument("give a positive --t-end");
    RngStream rng(o.seed, 0);
    std::vector<double> times;
    std::vector<std::vector<double>> states;
    if (m == "cle") {
      const auto tr = simulate_cle(net, x0, *o.t_end, o.dt, rng, co);
      times = tr.times;
      states = tr.states;
    } else {
      Trajectory tr;
      if (m == "tau") tr = simulate_tau_leap(net, model.initial_state, *o.t_end, lc, rng);
      else if (m == "rleap") tr = simulate_r_leap(net, model.initial_state, *o.t_end, lc, rng);
      else tr = simulate_exact(net, model.initial_state, *o.t_end, em, rng, eo);
      times = tr.times;
      for (const auto& s : tr.states) states.emplace_back(s.begin(), s.end());
      report["events"] = tr.event_count;
    }
    out.data = trajectory_csv(names, times, states);
    report["rows"] = times.size();
    out.report = dump(report);
    return out;
  }

  if (o.record.empty() && !(o.t_end && *o.t_end >= 0.0)) throw InvalidArgument("give --t-end or --record");
  const std::vector<double> grid =
      o.record.empty() ? std::vector<double>{*o.t_end} : resolve_grid(o.record, o.t_end);
  const double horizon = grid.back();
  SnapshotMatrix snap;
  if (m == "direct" || m == "nrm") {
    snap = simulate_ensemble(net, model.initial_state, grid, o.n, em, o.seed, o.workers, eo);
  } else {
    snap = run_ensemble(o.n, grid.size(), net.species_count(), o.seed, o.workers,
                        [&](std::size_t, RngStream& rng) {
                          if (m == "cle") return sample_real_path(simulate_cle(net, x0, horizon, o.dt, rng), grid);
                          const Trajectory tr = m == "tau"
                                                    ? simulate_tau_leap(net, model.initial_state, horizon, lc, rng)
                                                    : simulate_r_leap(net, model.initial_state, horizon, lc, rng);
                          return sample_path(tr, grid);
                        });
  }
  out.data = snapshot_csv(names, grid, snap);
  report["record_times"] = grid.size();
  out.report = dump(report);
  return out;
}

AppOutput run_fsp(const ModelDocument& model, const FspAppOptions& o) {
  const auto& net = model.network;
  if (!(o.eps > 0.0 && o.eps < 1.0)) throw InvalidArgument("--eps must be in (0, 1)");
  AppOutput out;
  Json report;
  ProjectionSpace space;
  std::vector<double> p;

  if (!o.hit.empty()) {
    if (!o.t || !(*o.t > 0.0)) throw InvalidArgument("--hit needs a positive --t");
    FspOptions fo;
    fo.state_cap = o.state_cap;
    const auto h = hitting_probability(net, model.initial_state, parse_predicate(net, o.hit), *o.t, o.eps, fo);
    report["mode"] = "hitting";
    report["probability"] = h.probability;
    report["upper"] = h.upper;
    report["certificate"] = certificate_json(h.certificate);
    out.data = dump(report);
    out.report = out.data;
    return out;
  }

  if (o.stationary) {
    report["mode"] = "stationary";
    if (!o.box.empty()) {
      const auto hi_d = parse_number_list(o.box);
      if (hi_d.size() != net.species_count()) throw InvalidArgument("--box needs one bound per species");
      SystemState hi;
      for (double v : hi_d) {
        if (!(v >= 0.0) || v != std::floor(v)) throw InvalidArgument("--box bounds must be nonnegative integers");
        hi.push_back(static_cast<Count>(v));
      }
      for (std::size_t i = 0; i < hi.size(); ++i) {
        if (model.initial_state[i] > hi[i]) throw InvalidArgument("initial state lies outside --box");
      }
      space = reachable_space(net, model.initial_state, hi, o.state_cap);
      const auto sol = solve_stationary(net, space);
      p = sol.p;
      report["box"] = hi;
      report["states"] = space.size();
      report["residual"] = sol.residual;
      report["boundary_mass"] = sol.boundary_mass;
    } else {
      const auto sol = solve_stationary_auto(net, model.initial_state, o.eps, 20, o.state_cap);
      space = sol.space;
      p = sol.solution.p;
      report["box"] = sol.box;
      report["states"] = space.size();
      report["residual"] = sol.solution.residual;
      report["boundary_mass"] = sol.solution.boundary_mass;
    }
  } else {
    if (!o.t || !(*o.t >= 0.0)) throw InvalidArgument("transient FSP needs --t (or --stationary)");
    FspOptions fo;
    fo.state_cap = o.state_cap;
    const double one[] = {1.0};
    const auto sol = solve_transient(net, ProjectionSpace({model.initial_state}), one, *o.t, o.eps, fo);
    space = sol.space;
    p = sol.p;
    report["mode"] = "transient";
    report["t"] = *o.t;
    report["certificate"] = certificate_json(sol.certificate);
  }

  if (!o.marginal.empty()) {
    const auto pm = marginal(space, p, species_by_name(net, o.marginal));
    CsvWriter w({o.marginal, "probability"});
    for (std::size_t k = 0; k < pm.size(); ++k) w.row(std::vector<double>{static_cast<double>(k), pm[k]});
    out.data = w.text();
  } else {
    std::vector<std::string> header = species_names(net);
    header.push_back("probability");
    CsvWriter w(header);
    std::vector<double> row(net.species_count() + 1);
    for (std::size_t s = 0; s < space.size(); ++s) {
      for (std::size_t i = 0; i < net.species_count(); ++i) row[i] = static_cast<double>(space[s][i]);
      row.back() = p[s];
      w.row(row);
    }
    out.data = w.text();
  }
  out.report = dump(report);
  return out;
}

AppOutput run_moments(const ModelDocument& model, const MomentsAppOptions& o) {
  const auto& net = model.network;
  if (o.closure != "none" && o.closure != "normal") throw InvalidArgument("--closure takes none or normal");
  MomentSystem sys = moment_odes(net, o.order);
  if (!sys.higher.empty()) {
    if (o.closure != "normal") {
      throw UnsupportedError("the moment equations are not closed at this order; use --closure normal");
    }
    sys = close_normal(sys);
  }
  std::vector<std::string> header{"time"};
  for (const auto& n : sys.names()) header.push_back(n);
  CsvWriter w(header);
  AppOutput out;
  Json report;
  report["order"] = sys.order;
  report["closure"] = sys.higher.empty() ? "exact" : o.closure;
  std::vector<double> last;
  if (o.stationary) {
    last = stationary_moments(sys);
    std::vector<std::string> row{"inf"};
    for (double v : last) row.push_back(format_number(v));
    w.row(row);
  } else {
    const auto grid = resolve_grid(o.record, o.t_end);
    const auto init = point_moments(sys, model.initial_state);
    const auto path = integrate_moments(sys, init, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      std::vector<double> row{grid[i]};
      row.insert(row.end(), path[i].begin(), path[i].end());
      w.row(row);
    }
    last = path.back();
  }
  if (sys.order >= 2) {
    const auto s = summarize_moments(sys, last);
    Json sp;
    for (std::size_t i = 0; i < net.species_count(); ++i) {
      Json e;
      e["mean"] = s.mean[i];
      e["variance"] = s.variance[i];
      e["fano"] = s.mean[i] != 0.0 ? Json(s.variance[i] / s.mean[i]) : Json("nan");
      sp[net.species()[i].name] = e;
    }
    report["summary"] = sp;
  }
  out.data = w.text();
  out.report = dump(report);
  return out;
}

AppOutput run_lna(const ModelDocument& model, const LnaAppOptions& o) {
  const auto& net = model.network;
  const double omega = net.volume();
  const auto names = species_names(net);
  CsvWriter w(lna_header(names));
  AppOutput out;
  Json report;
  if (o.stationary) {
    std::vector<double> guess = initial_concentration(model);
    if (!o.guess.empty()) {
      guess = parse_number_list(o.guess);
      if (guess.size() != net.species_count()) throw InvalidArgument("--guess needs one value per species");
      for (double& g : guess) g /= omega;
    }
    const auto st = solve_lna_stationary(net, guess);
    auto row = lna_row(0.0, omega, st.mean, st.covariance);
    std::vector<std::string> cells{"inf"};
    for (std::size_t i = 1; i < row.size(); ++i) cells.push_back(format_number(row[i]));
    w.row(cells);
    report["mode"] = "stationary";
  } else {
    const auto grid = resolve_grid(o.record, o.t_end);
    const auto st = solve_lna(net, initial_concentration(model), grid);
    for (std::size_t i = 0; i < grid.size(); ++i) w.row(lna_row(grid[i], omega, st.mean[i], st.covariance[i]));
    report["mode"] = "transient";
    report["rows"] = grid.size();
  }
  out.data = w.text();
  out.report = dump(report);
  return out;
}

AppOutput run_infer(const ModelDocument& model, const InferAppOptions& o) {
  const auto& net = model.network;
  AppOutput out;
  if (o.method == "gamma") {
    if (o.species.empty()) throw InvalidArgument("gamma fitting needs --species");
    const auto samples = read_column(o.data, o.species);
    const auto g = fit_gamma_burst(samples);
    Json j;
    j["a"] = g.a;
    j["b"] = g.b;
    j["samples"] = samples.size();
    out.data = dump(j);
    out.report = out.data;
    return out;
  }
  if (o.params.empty()) throw InvalidArgument("give the free parameters with --params name=low:high");
  const ParameterSpec spec = parse_parameter_spec(o.params);
  spec.check(net);
  FitConfig fc;
  fc.restarts = o.restarts;
  fc.fsp_eps = o.fsp_eps;
  fc.state_cap = o.state_cap;
  if (o.objective == "nll") fc.objective = FspObjective::negative_log_likelihood;
  else if (o.objective == "l1") fc.objective = FspObjective::l1;
  else throw InvalidArgument("--objective takes nll or l1");

  if (o.method == "abc") {
    AbcConfig ac;
    ac.epsilon = o.epsilon;
    ac.particles = o.particles;
    ac.cells = o.cells;
    ac.seed = o.seed;
    ac.horizon = o.horizon;
    ac.workers = o.workers;
    const auto res = abc_rejection(model, spec, read_dataset(o.data, net), ac);
    std::vector<std::string> header = spec.names;
    header.push_back("distance");
    CsvWriter w(header);
    for (std::size_t i = 0; i < res.particles.size(); ++i) {
      if (!res.accepted[i]) continue;
      std::vector<double> row = res.particles[i];
      row.push_back(res.distances[i]);
      w.row(row);
    }
    out.data = w.text();
    const auto post = res.posterior();
    Json j;
    j["accepted"] = post.size();
    j["acceptance_rate"] = res.acceptance_rate;
    j["min_distance"] = res.min_distance;
    Json mean;
    for (std::size_t k = 0; k < spec.size(); ++k) {
      double s = 0.0;
      for (const auto& p : post) s += p[k];
      mean[spec.names[k]] = post.empty() ? Json("nan") : Json(s / static_cast<double>(post.size()));
    }
    j["posterior_mean"] = mean;
    j["warnings"] = res.warnings;
    out.warnings = res.warnings;
    out.report = dump(j);
    return out;
  }
  FitResult res;
  if (o.method == "fsp-mle") {
    res = fit_fsp_mle(model, spec, read_dataset(o.data, net), fc);
  } else if (o.method == "moment") {
    std::vector<MomentTarget> targets;
    if (!o.targets.empty()) {
      targets = parse_targets(net, o.targets);
    } else {
      const Dataset d = read_dataset(o.data, net);
      if (!d.steady_state) throw InvalidArgument("moment matching from data needs steady-state rows");
      for (std::size_t c = 0; c < d.species.size(); ++c) {
        const auto col = d.column(0, c);
        const std::vector<double> v(col.begin(), col.end());
        const auto s = summary_stats(v);
        targets.push_back({d.species[c], s.mean, s.variance, 1.0, 1.0});
      }
    }
    if (!o.weights.empty()) {
      for (const auto& wt : parse_targets(net, o.weights)) {
        for (auto& t : targets) {
          if (t.species == wt.species) {
            t.mean_weight = wt.mean;
            t.variance_weight = wt.variance;
          }
        }
      }
    }
    res = moment_match(net, spec, targets, fc);
  } else {
    throw InvalidArgument("unknown inference method '" + o.method + "' (abc, fsp-mle, moment, gamma)");
  }
  out.warnings = res.warnings;
  out.data = dump(fit_json(res));
  Json j;
  j["objective"] = res.objective;
  j["mismatch"] = res.mismatch;
  out.report = dump(j);
  return out;
}

}  // namespace cmekit
