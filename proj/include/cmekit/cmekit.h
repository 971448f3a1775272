#ifndef CMEKIT_CMEKIT_H
#define CMEKIT_CMEKIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(CMEKIT_BUILDING_LIBRARY)
#define CMEKIT_API __attribute__((visibility("default")))
#else
#define CMEKIT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cmekit_status {
  CMEKIT_OK = 0,
  CMEKIT_INVALID_ARGUMENT = 1,
  CMEKIT_PARSE = 2,
  CMEKIT_MODEL = 3,
  CMEKIT_NUMERIC = 4,
  CMEKIT_CAPACITY = 5,
  CMEKIT_IO = 6,
  CMEKIT_UNSUPPORTED = 7,
  CMEKIT_INTERNAL = 8
} cmekit_status;

/* Parsed, validated reaction network with its initial state. */
typedef struct cmekit_model cmekit_model;

/* Output of one operation: a data payload (CSV or JSON), a JSON report and
   zero or more warnings. Strings stay valid until the result is freed. */
typedef struct cmekit_result cmekit_result;

CMEKIT_API const char* cmekit_version(void);
CMEKIT_API const char* cmekit_status_name(cmekit_status status);

/* Message of the most recent failure on the calling thread ("" if none). */
CMEKIT_API const char* cmekit_last_error(void);

CMEKIT_API cmekit_status cmekit_model_parse(const char* text, cmekit_model** out);
CMEKIT_API cmekit_status cmekit_model_load(const char* path, cmekit_model** out);
CMEKIT_API void cmekit_model_free(cmekit_model* model);
CMEKIT_API size_t cmekit_model_species_count(const cmekit_model* model);
CMEKIT_API size_t cmekit_model_reaction_count(const cmekit_model* model);
/* Species name, or NULL when out of range. */
CMEKIT_API const char* cmekit_model_species_name(const cmekit_model* model, size_t index);

CMEKIT_API const char* cmekit_result_data(const cmekit_result* result);
CMEKIT_API size_t cmekit_result_data_size(const cmekit_result* result);
CMEKIT_API const char* cmekit_result_report(const cmekit_result* result);
CMEKIT_API size_t cmekit_result_warning_count(const cmekit_result* result);
CMEKIT_API const char* cmekit_result_warning(const cmekit_result* result, size_t index);
CMEKIT_API void cmekit_result_free(cmekit_result* result);

/* Unset optional reals are NaN; unset strings are NULL or "". */

typedef struct cmekit_validate_options {
  const char* emit; /* NULL, "dsl" or "json" */
} cmekit_validate_options;

typedef struct cmekit_simulate_options {
  const char* method; /* direct nrm tau rleap cle ode wssa */
  double t_end;
  size_t n;
  uint64_t seed;
  const char* record; /* "a:b:s", inclusive */
  unsigned workers;
  double epsilon;     /* tau-leap accuracy */
  int midpoint;
  uint64_t r;         /* firings per R-leap */
  double dt;          /* CLE step */
  size_t stride;      /* CLE recording stride */
  uint64_t max_events;
  const char* predicate; /* wssa target, e.g. "X>=25" */
  const char* bias;      /* wssa, one factor per reaction */
} cmekit_simulate_options;

typedef struct cmekit_fsp_options {
  int stationary;
  double t;
  double eps;
  const char* box;
  const char* hit;
  const char* marginal;
  size_t state_cap; /* 0: CMEKIT_STATE_CAP or the built-in default */
} cmekit_fsp_options;

typedef struct cmekit_moments_options {
  int order;
  const char* closure; /* "none" or "normal" */
  int stationary;
  double t_end;
  const char* record;
} cmekit_moments_options;

typedef struct cmekit_lna_options {
  int stationary;
  double t_end;
  const char* record;
  const char* guess;
} cmekit_lna_options;

typedef struct cmekit_infer_options {
  const char* method; /* abc fsp-mle moment gamma */
  const char* data;   /* CSV text */
  const char* params; /* "name=low:high,..." */
  uint64_t seed;
  unsigned workers;
  double epsilon;
  size_t particles;
  size_t cells;
  double horizon;
  const char* objective; /* "nll" or "l1" */
  size_t restarts;
  double fsp_eps;
  size_t state_cap;
  const char* targets;
  const char* weights;
  const char* species;
} cmekit_infer_options;

CMEKIT_API void cmekit_validate_options_default(cmekit_validate_options* options);
CMEKIT_API void cmekit_simulate_options_default(cmekit_simulate_options* options);
CMEKIT_API void cmekit_fsp_options_default(cmekit_fsp_options* options);
CMEKIT_API void cmekit_moments_options_default(cmekit_moments_options* options);
CMEKIT_API void cmekit_lna_options_default(cmekit_lna_options* options);
CMEKIT_API void cmekit_infer_options_default(cmekit_infer_options* options);

CMEKIT_API cmekit_status cmekit_validate(const cmekit_model* model, const cmekit_validate_options* options,
                                         cmekit_result** out);
CMEKIT_API cmekit_status cmekit_simulate(const cmekit_model* model, const cmekit_simulate_options* options,
                                         cmekit_result** out);
CMEKIT_API cmekit_status cmekit_fsp(const cmekit_model* model, const cmekit_fsp_options* options,
                                    cmekit_result** out);
CMEKIT_API cmekit_status cmekit_moments(const cmekit_model* model, const cmekit_moments_options* options,
                                        cmekit_result** out);
CMEKIT_API cmekit_status cmekit_lna(const cmekit_model* model, const cmekit_lna_options* options,
                                    cmekit_result** out);
CMEKIT_API cmekit_status cmekit_infer(const cmekit_model* model, const cmekit_infer_options* options,
                                      cmekit_result** out);

#ifdef __cplusplus
}
#endif

#endif
