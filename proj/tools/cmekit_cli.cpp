// Command-line front end. Talks to the library only through the C API.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cmekit/cmekit.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitModel = 2;
constexpr int kExitNumeric = 3;

int exit_code(cmekit_status s) {
  switch (s) {
    case CMEKIT_OK: return kExitOk;
    case CMEKIT_INVALID_ARGUMENT:
    case CMEKIT_IO: return kExitUsage;
    case CMEKIT_PARSE:
    case CMEKIT_MODEL:
    case CMEKIT_UNSUPPORTED: return kExitModel;
    default: return kExitNumeric;
  }
}

int fail(cmekit_status s) {
  std::cerr << "cmekit: " << cmekit_status_name(s) << ": " << cmekit_last_error() << "\n";
  return exit_code(s);
}

bool write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  f.close();
  if (!f) {
    std::cerr << "cmekit: cannot write '" << path << "'\n";
    return false;
  }
  return true;
}

bool read_file(const std::string& path, std::string& text) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    std::cerr << "cmekit: cannot read '" << path << "'\n";
    return false;
  }
  std::stringstream ss;
  ss << f.rdbuf();
  text = ss.str();
  return true;
}

struct Common {
  std::string model;
  std::string out;
  std::string report;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("model", c.model, "Model file (DSL or JSON)")->required()->check(CLI::ExistingFile);
  sub->add_option("-o,--out", c.out, "Write the main output here instead of standard output");
  sub->add_option("--report", c.report, "Also write the JSON report to this file");
}

/// Data goes to --out (report then printed) or to standard output.
int emit(const Common& c, cmekit_result* r, bool certificate_alongside = false) {
  const std::string data(cmekit_result_data(r), cmekit_result_data_size(r));
  const std::string report = cmekit_result_report(r);
  for (std::size_t i = 0; i < cmekit_result_warning_count(r); ++i) {
    std::cerr << "warning: " << cmekit_result_warning(r, i) << "\n";
  }
  bool ok = true;
  if (!c.out.empty()) {
    ok = write_file(c.out, data);
    if (ok && certificate_alongside) ok = write_file(c.out + ".json", report);
    std::cout << report;
  } else if (!data.empty()) {
    std::cout << data;
  } else {
    std::cout << report;
  }
  if (ok && !c.report.empty()) ok = write_file(c.report, report);
  cmekit_result_free(r);
  return ok ? kExitOk : kExitUsage;
}

template <class Options, class Call>
int invoke(const Common& c, const Options& opt, Call call, bool certificate_alongside = false) {
  cmekit_model* model = nullptr;
  cmekit_status s = cmekit_model_load(c.model.c_str(), &model);
  if (s != CMEKIT_OK) return fail(s);
  cmekit_result* r = nullptr;
  s = call(model, &opt, &r);
  cmekit_model_free(model);
  if (s != CMEKIT_OK) return fail(s);
  return emit(c, r, certificate_alongside);
}

const char* cstr(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

double or_unset(const std::optional<double>& v) {
  return v ? *v : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cmekit: stochastic chemical kinetics from reaction-network files"};
  app.require_subcommand(1);
  app.set_version_flag("--version", cmekit_version());

  // validate
  Common vc;
  std::string emit_format;
  auto* validate = app.add_subcommand("validate", "Parse and check a model; optionally print it normalized");
  add_common(validate, vc);
  validate->add_option("--emit", emit_format, "Print the normalized model")->check(CLI::IsMember({"dsl", "json"}));

  // simulate
  Common sc;
  cmekit_simulate_options so;
  cmekit_simulate_options_default(&so);
  std::string method = so.method, record, predicate, bias;
  std::optional<double> t_end;
  bool midpoint = false;
  auto* simulate = app.add_subcommand("simulate", "Sample trajectories or ensembles");
  add_common(simulate, sc);
  simulate->add_option("--method", method, "Simulation method")
      ->check(CLI::IsMember({"direct", "nrm", "tau", "rleap", "cle", "ode", "wssa"}))
      ->capture_default_str();
  simulate->add_option("--t-end", t_end, "Final time (defaults to the last record time)");
  simulate->add_option("--n", so.n, "Number of trajectories")->capture_default_str();
  simulate->add_option("--seed", so.seed, "Base seed; trajectory i uses stream i")->capture_default_str();
  simulate->add_option("--record", record, "Inclusive record grid start:stop:step (default: every event)");
  simulate->add_option("--workers", so.workers, "Worker threads (output does not depend on this)")
      ->capture_default_str();
  simulate->add_option("--epsilon", so.epsilon, "tau-leap accuracy parameter")->capture_default_str();
  simulate->add_flag("--midpoint", midpoint, "tau-leap: midpoint propensities");
  simulate->add_option("--r", so.r, "R-leaping: firings per leap")->capture_default_str();
  simulate->add_option("--dt", so.dt, "CLE time step")->capture_default_str();
  simulate->add_option("--stride", so.stride, "CLE: record every stride-th step")->capture_default_str();
  simulate->add_option("--max-events", so.max_events, "Per-trajectory event cap")->capture_default_str();
  simulate->add_option("--predicate", predicate, "wssa: rare-event target such as \"X>=25\"");
  simulate->add_option("--bias", bias, "wssa: comma-separated bias factor per reaction (default all 1)");

  // fsp
  Common fc;
  cmekit_fsp_options fo;
  cmekit_fsp_options_default(&fo);
  bool stationary = false;
  std::optional<double> fsp_t;
  std::string box, hit, marginal_species;
  auto* fsp = app.add_subcommand("fsp", "Finite state projection: transient, stationary or hitting probability");
  add_common(fsp, fc);
  auto* fsp_stat = fsp->add_flag("--stationary", stationary, "Stationary distribution");
  auto* fsp_time = fsp->add_option("--t", fsp_t, "Time for the transient solve or the hitting horizon");
  fsp_stat->excludes(fsp_time);
  fsp->add_option("--eps", fo.eps, "Truncation error tolerance")->capture_default_str();
  fsp->add_option("--box", box, "Stationary: upper count bounds, comma-separated (default: grow automatically)");
  fsp->add_option("--hit", hit, "Probability of reaching this predicate by --t")->excludes(fsp_stat);
  fsp->add_option("--marginal", marginal_species, "Output only this species' marginal");
  fsp->add_option("--state-cap", fo.state_cap, "Largest projection size (0: CMEKIT_STATE_CAP or 1000000)")
      ->capture_default_str();

  // moments
  Common mc;
  cmekit_moments_options mo;
  cmekit_moments_options_default(&mo);
  std::string closure = mo.closure, m_record;
  bool m_stationary = false;
  std::optional<double> m_t_end;
  auto* moments = app.add_subcommand("moments", "Moment equations: paths or stationary values");
  add_common(moments, mc);
  moments->add_option("--order", mo.order, "Highest tracked moment order")->capture_default_str();
  moments->add_option("--closure", closure, "Closure for non-affine networks")
      ->check(CLI::IsMember({"none", "normal"}))
      ->capture_default_str();
  auto* m_stat = moments->add_flag("--stationary", m_stationary, "Stationary moments");
  moments->add_option("--t-end", m_t_end, "Final time")->excludes(m_stat);
  moments->add_option("--record", m_record, "Inclusive time grid start:stop:step")->excludes(m_stat);

  // lna
  Common lc;
  cmekit_lna_options lo;
  cmekit_lna_options_default(&lo);
  bool l_stationary = false;
  std::optional<double> l_t_end;
  std::string l_record, guess;
  auto* lna = app.add_subcommand("lna", "Linear noise approximation: mean and covariance in counts");
  add_common(lna, lc);
  auto* l_stat = lna->add_flag("--stationary", l_stationary, "Stationary mean and covariance");
  lna->add_option("--t-end", l_t_end, "Final time")->excludes(l_stat);
  lna->add_option("--record", l_record, "Inclusive time grid start:stop:step")->excludes(l_stat);
  lna->add_option("--guess", guess, "Stationary: starting counts for Newton, comma-separated");

  // infer
  Common ic;
  cmekit_infer_options io;
  cmekit_infer_options_default(&io);
  std::string i_method, data_path, params, objective = io.objective, targets, weights, species;
  std::optional<double> horizon;
  auto* infer = app.add_subcommand("infer", "Parameter inference from snapshot count data");
  infer->add_option("method", i_method, "abc, fsp-mle, moment or gamma")
      ->required()
      ->check(CLI::IsMember({"abc", "fsp-mle", "moment", "gamma"}));
  add_common(infer, ic);
  infer->add_option("--data", data_path, "Data CSV: time,<species...>, time \"ss\" for steady state")
      ->check(CLI::ExistingFile);
  infer->add_option("--params", params, "Free parameters and boxes, e.g. tau_R=0.2:5");
  infer->add_option("--seed", io.seed, "ABC base seed")->capture_default_str();
  infer->add_option("--workers", io.workers, "Worker threads")->capture_default_str();
  infer->add_option("--epsilon", io.epsilon, "ABC acceptance threshold (Kolmogorov distance)")
      ->capture_default_str();
  infer->add_option("--particles", io.particles, "ABC particles")->capture_default_str();
  infer->add_option("--cells", io.cells, "ABC simulated cells per particle")->capture_default_str();
  infer->add_option("--horizon", horizon, "ABC relaxation time (default 10 / slowest degradation rate)");
  infer->add_option("--objective", objective, "fsp-mle objective")
      ->check(CLI::IsMember({"nll", "l1"}))
      ->capture_default_str();
  infer->add_option("--restarts", io.restarts, "Nelder-Mead restarts")->capture_default_str();
  infer->add_option("--fsp-eps", io.fsp_eps, "FSP tolerance inside the likelihood")->capture_default_str();
  infer->add_option("--state-cap", io.state_cap, "FSP state cap (0: CMEKIT_STATE_CAP or 1000000)")
      ->capture_default_str();
  infer->add_option("--targets", targets, "moment: species=mean:variance[:wm:wv],... (default: from --data)");
  infer->add_option("--weights", weights, "moment: species=mean_weight:variance_weight,...");
  infer->add_option("--species", species, "gamma: data column to fit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (validate->parsed()) {
    cmekit_validate_options o;
    cmekit_validate_options_default(&o);
    o.emit = cstr(emit_format);
    return invoke(vc, o, cmekit_validate);
  }
  if (simulate->parsed()) {
    so.method = method.c_str();
    so.t_end = or_unset(t_end);
    so.record = cstr(record);
    so.midpoint = midpoint ? 1 : 0;
    so.predicate = cstr(predicate);
    so.bias = cstr(bias);
    return invoke(sc, so, cmekit_simulate);
  }
  if (fsp->parsed()) {
    fo.stationary = stationary ? 1 : 0;
    fo.t = or_unset(fsp_t);
    fo.box = cstr(box);
    fo.hit = cstr(hit);
    fo.marginal = cstr(marginal_species);
    return invoke(fc, fo, cmekit_fsp, true);
  }
  if (moments->parsed()) {
    mo.closure = closure.c_str();
    mo.stationary = m_stationary ? 1 : 0;
    mo.t_end = or_unset(m_t_end);
    mo.record = cstr(m_record);
    return invoke(mc, mo, cmekit_moments);
  }
  if (lna->parsed()) {
    lo.stationary = l_stationary ? 1 : 0;
    lo.t_end = or_unset(l_t_end);
    lo.record = cstr(l_record);
    lo.guess = cstr(guess);
    return invoke(lc, lo, cmekit_lna);
  }
  if (infer->parsed()) {
    std::string data;
    if (!data_path.empty() && !read_file(data_path, data)) return kExitUsage;
    if (data_path.empty() && i_method != "moment") {
      std::cerr << "cmekit: infer " << i_method << " needs --data\n";
      return kExitUsage;
    }
    io.method = i_method.c_str();
    io.data = cstr(data);
    io.params = cstr(params);
    io.horizon = or_unset(horizon);
    io.objective = objective.c_str();
    io.targets = cstr(targets);
    io.weights = cstr(weights);
    io.species = cstr(species);
    return invoke(ic, io, cmekit_infer);
  }
  return kExitUsage;
}
