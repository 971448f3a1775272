#include "cmekit/cmekit.h"

#include <cmath>
#include <limits>
#include <new>
#include <string>

#include "cmekit/app.hpp"
#include "cmekit/error.hpp"
#include "cmekit/expression.hpp"
#include "cmekit/fsp.hpp"
#include "cmekit/netparse.hpp"

struct cmekit_model {
  cmekit::ModelDocument doc;
};

struct cmekit_result {
  cmekit::AppOutput out;
};

namespace {

thread_local std::string g_last_error;

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

std::string str(const char* s) { return s ? std::string(s) : std::string(); }

std::optional<double> opt(double v) {
  if (std::isnan(v)) return std::nullopt;
  return v;
}

template <class Fn>
cmekit_status guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return CMEKIT_OK;
  } catch (const cmekit::ParseError& e) {
    g_last_error = e.what();
    return CMEKIT_PARSE;
  } catch (const cmekit::ModelError& e) {
    g_last_error = e.what();
    return CMEKIT_MODEL;
  } catch (const cmekit::InvalidArgument& e) {
    g_last_error = e.what();
    return CMEKIT_INVALID_ARGUMENT;
  } catch (const cmekit::CapacityError& e) {
    g_last_error = std::string(e.what()) + " (best eps achieved " + cmekit::format_number(e.best_epsilon()) + ")";
    return CMEKIT_CAPACITY;
  } catch (const cmekit::NumericError& e) {
    g_last_error = e.what();
    return CMEKIT_NUMERIC;
  } catch (const cmekit::NegativePopulationError& e) {
    g_last_error = e.what();
    return CMEKIT_NUMERIC;
  } catch (const cmekit::UnsupportedError& e) {
    g_last_error = e.what();
    return CMEKIT_UNSUPPORTED;
  } catch (const cmekit::IoError& e) {
    g_last_error = e.what();
    return CMEKIT_IO;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return CMEKIT_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CMEKIT_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return CMEKIT_INTERNAL;
  }
}

cmekit_status bad_argument(const char* what) {
  g_last_error = what;
  return CMEKIT_INVALID_ARGUMENT;
}

std::size_t cap_or_env(std::size_t cap) { return cap ? cap : cmekit::state_cap_from_env(); }

template <class Fn>
cmekit_status run(const cmekit_model* model, const void* options, cmekit_result** out, Fn&& fn) {
  if (!model || !options || !out) return bad_argument("null argument");
  *out = nullptr;
  return guarded([&] { *out = new cmekit_result{fn(model->doc)}; });
}

}  // namespace

extern "C" {

const char* cmekit_version(void) { return "0.1.0"; }

const char* cmekit_status_name(cmekit_status status) {
  switch (status) {
    case CMEKIT_OK: return "ok";
    case CMEKIT_INVALID_ARGUMENT: return "invalid argument";
    case CMEKIT_PARSE: return "parse error";
    case CMEKIT_MODEL: return "model error";
    case CMEKIT_NUMERIC: return "numeric error";
    case CMEKIT_CAPACITY: return "capacity exceeded";
    case CMEKIT_IO: return "i/o error";
    case CMEKIT_UNSUPPORTED: return "unsupported";
    case CMEKIT_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* cmekit_last_error(void) { return g_last_error.c_str(); }

cmekit_status cmekit_model_parse(const char* text, cmekit_model** out) {
  if (!text || !out) return bad_argument("null argument");
  *out = nullptr;
  return guarded([&] {
    const std::string_view t(text);
    const auto first = t.find_first_not_of(" \t\r\n");
    auto doc = first != std::string_view::npos && t[first] == '{' ? cmekit::parse_model_json(t)
                                                                  : cmekit::parse_model(t);
    *out = new cmekit_model{std::move(doc)};
  });
}

cmekit_status cmekit_model_load(const char* path, cmekit_model** out) {
  if (!path || !out) return bad_argument("null argument");
  *out = nullptr;
  return guarded([&] { *out = new cmekit_model{cmekit::load_model(path)}; });
}

void cmekit_model_free(cmekit_model* model) { delete model; }

size_t cmekit_model_species_count(const cmekit_model* model) {
  return model ? model->doc.network.species_count() : 0;
}

size_t cmekit_model_reaction_count(const cmekit_model* model) {
  return model ? model->doc.network.reaction_count() : 0;
}

const char* cmekit_model_species_name(const cmekit_model* model, size_t index) {
  if (!model || index >= model->doc.network.species_count()) return nullptr;
  return model->doc.network.species()[index].name.c_str();
}

const char* cmekit_result_data(const cmekit_result* r) { return r ? r->out.data.c_str() : ""; }
size_t cmekit_result_data_size(const cmekit_result* r) { return r ? r->out.data.size() : 0; }
const char* cmekit_result_report(const cmekit_result* r) { return r ? r->out.report.c_str() : ""; }
size_t cmekit_result_warning_count(const cmekit_result* r) { return r ? r->out.warnings.size() : 0; }
const char* cmekit_result_warning(const cmekit_result* r, size_t i) {
  return r && i < r->out.warnings.size() ? r->out.warnings[i].c_str() : nullptr;
}
void cmekit_result_free(cmekit_result* r) { delete r; }

void cmekit_validate_options_default(cmekit_validate_options* o) {
  if (o) *o = cmekit_validate_options{nullptr};
}

void cmekit_simulate_options_default(cmekit_simulate_options* o) {
  if (!o) return;
  const cmekit::SimulateOptions d;
  *o = cmekit_simulate_options{};
  o->method = "direct";
  o->t_end = kUnset;
  o->n = d.n;
  o->seed = d.seed;
  o->record = nullptr;
  o->workers = d.workers;
  o->epsilon = d.epsilon;
  o->midpoint = 0;
  o->r = d.r;
  o->dt = d.dt;
  o->stride = d.stride;
  o->max_events = d.max_events;
  o->predicate = nullptr;
  o->bias = nullptr;
}

void cmekit_fsp_options_default(cmekit_fsp_options* o) {
  if (!o) return;
  const cmekit::FspAppOptions d;
  *o = cmekit_fsp_options{0, kUnset, d.eps, nullptr, nullptr, nullptr, 0};
}

void cmekit_moments_options_default(cmekit_moments_options* o) {
  if (o) *o = cmekit_moments_options{2, "none", 0, kUnset, nullptr};
}

void cmekit_lna_options_default(cmekit_lna_options* o) {
  if (o) *o = cmekit_lna_options{0, kUnset, nullptr, nullptr};
}

void cmekit_infer_options_default(cmekit_infer_options* o) {
  if (!o) return;
  const cmekit::InferAppOptions d;
  *o = cmekit_infer_options{};
  o->method = nullptr;
  o->data = nullptr;
  o->params = nullptr;
  o->seed = d.seed;
  o->workers = d.workers;
  o->epsilon = d.epsilon;
  o->particles = d.particles;
  o->cells = d.cells;
  o->horizon = kUnset;
  o->objective = "nll";
  o->restarts = d.restarts;
  o->fsp_eps = d.fsp_eps;
  o->state_cap = 0;
  o->targets = nullptr;
  o->weights = nullptr;
  o->species = nullptr;
}

cmekit_status cmekit_validate(const cmekit_model* model, const cmekit_validate_options* o, cmekit_result** out) {
  return run(model, o, out, [&](const cmekit::ModelDocument& doc) {
    return cmekit::run_validate(doc, {str(o->emit)});
  });
}

cmekit_status cmekit_simulate(const cmekit_model* model, const cmekit_simulate_options* o, cmekit_result** out) {
  return run(model, o, out, [&](const cmekit::ModelDocument& doc) {
    cmekit::SimulateOptions s;
    s.method = o->method ? o->method : "direct";
    s.t_end = opt(o->t_end);
    s.n = o->n;
    s.seed = o->seed;
    s.record = str(o->record);
    s.workers = o->workers;
    s.epsilon = o->epsilon;
    s.midpoint = o->midpoint != 0;
    s.r = o->r;
    s.dt = o->dt;
    s.stride = o->stride;
    s.max_events = o->max_events;
    s.predicate = str(o->predicate);
    s.bias = str(o->bias);
    return cmekit::run_simulate(doc, s);
  });
}

cmekit_status cmekit_fsp(const cmekit_model* model, const cmekit_fsp_options* o, cmekit_result** out) {
  return run(model, o, out, [&](const cmekit::ModelDocument& doc) {
    cmekit::FspAppOptions f;
    f.stationary = o->stationary != 0;
    f.t = opt(o->t);
    f.eps = o->eps;
    f.box = str(o->box);
    f.hit = str(o->hit);
    f.marginal = str(o->marginal);
    f.state_cap = cap_or_env(o->state_cap);
    return cmekit::run_fsp(doc, f);
  });
}

cmekit_status cmekit_moments(const cmekit_model* model, const cmekit_moments_options* o, cmekit_result** out) {
  return run(model, o, out, [&](const cmekit::ModelDocument& doc) {
    cmekit::MomentsAppOptions m;
    m.order = o->order;
    m.closure = o->closure ? o->closure : "none";
    m.stationary = o->stationary != 0;
    m.t_end = opt(o->t_end);
    m.record = str(o->record);
    return cmekit::run_moments(doc, m);
  });
}

cmekit_status cmekit_lna(const cmekit_model* model, const cmekit_lna_options* o, cmekit_result** out) {
  return run(model, o, out, [&](const cmekit::ModelDocument& doc) {
    cmekit::LnaAppOptions l;
    l.stationary = o->stationary != 0;
    l.t_end = opt(o->t_end);
    l.record = str(o->record);
    l.guess = str(o->guess);
    return cmekit::run_lna(doc, l);
  });
}

cmekit_status cmekit_infer(const cmekit_model* model, const cmekit_infer_options* o, cmekit_result** out) {
  return run(model, o, out, [&](const cmekit::ModelDocument& doc) {
    cmekit::InferAppOptions i;
    i.method = str(o->method);
    i.data = str(o->data);
    i.params = str(o->params);
    i.seed = o->seed;
    i.workers = o->workers;
    i.epsilon = o->epsilon;
    i.particles = o->particles;
    i.cells = o->cells;
    i.horizon = opt(o->horizon);
    i.objective = o->objective ? o->objective : "nll";
    i.restarts = o->restarts;
    i.fsp_eps = o->fsp_eps;
    i.state_cap = cap_or_env(o->state_cap);
    i.targets = str(o->targets);
    i.weights = str(o->weights);
    i.species = str(o->species);
    return cmekit::run_infer(doc, i);
  });
}

}  // extern "C"
