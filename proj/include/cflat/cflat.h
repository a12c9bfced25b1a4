#ifndef CFLAT_CFLAT_H
#define CFLAT_CFLAT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define CFLAT_API __declspec(dllexport)
#else
#define CFLAT_API __attribute__((visibility("default")))
#endif

/* Every call returns a status; on failure cflat_last_error() describes it.
   Handles are opaque and owned by the caller unless noted. */
typedef enum cflat_status {
  CFLAT_OK = 0,
  CFLAT_ERR_ARGUMENT = 1,    /* bad parameter, out-of-range id */
  CFLAT_ERR_IO = 2,          /* file could not be read or written */
  CFLAT_ERR_FORMAT = 3,      /* malformed TDI, landmark or store file */
  CFLAT_ERR_VALIDATION = 4,  /* instance violates FIFO or other invariants */
  CFLAT_ERR_UNREACHABLE = 5,
  CFLAT_ERR_PREPROCESS = 6,  /* sampling could not meet the error target */
  CFLAT_ERR_SELECTION = 7,   /* landmark policy ran out of candidates */
  CFLAT_ERR_INTERNAL = 8
} cflat_status;

typedef struct cflat_instance cflat_instance;
typedef struct cflat_landmarks cflat_landmarks;
typedef struct cflat_store cflat_store;
typedef struct cflat_oracle cflat_oracle;
typedef struct cflat_result cflat_result;

/* Message of the last failed call on this thread. */
CFLAT_API const char* cflat_last_error(void);
CFLAT_API const char* cflat_status_name(cflat_status s);
/* Releases strings returned through char** out-parameters. */
CFLAT_API void cflat_string_free(char* s);

/* ---- instances ---- */

typedef struct cflat_generate_params {
  const char* kind; /* "grid" or "planar" */
  uint32_t rows, cols;
  uint32_t vertices; /* planar only */
  uint64_t seed;
  double period;
} cflat_generate_params;

CFLAT_API void cflat_generate_defaults(cflat_generate_params* p);
CFLAT_API cflat_status cflat_generate(const cflat_generate_params* p, cflat_instance** out);
/* Reads a TDI file. Files with shortcut lines load as contracted instances. */
CFLAT_API cflat_status cflat_instance_load(const char* path, cflat_instance** out);
CFLAT_API cflat_status cflat_instance_save(const cflat_instance* g, const char* path);
CFLAT_API void cflat_instance_free(cflat_instance* g);
CFLAT_API size_t cflat_instance_vertices(const cflat_instance* g);
CFLAT_API size_t cflat_instance_arcs(const cflat_instance* g);
CFLAT_API double cflat_instance_period(const cflat_instance* g);
CFLAT_API int cflat_instance_is_contracted(const cflat_instance* g);
/* Number of invariant violations; the first is reported by cflat_last_error(). */
CFLAT_API cflat_status cflat_instance_validate(const cflat_instance* g, size_t* violations);
CFLAT_API cflat_status cflat_contract(const cflat_instance* g, cflat_instance** out);

/* ---- landmarks ---- */

/* policy: R, SR, IR, SK, KC, BC or KB. `keep` (may be NULL) is kept in
   front and counted as already chosen. */
CFLAT_API cflat_status cflat_landmarks_select(const cflat_instance* g, const char* policy, size_t size,
                                              size_t exclusion, uint64_t seed, const cflat_landmarks* keep,
                                              cflat_landmarks** out);
CFLAT_API cflat_status cflat_landmarks_load(const char* path, cflat_landmarks** out);
CFLAT_API cflat_status cflat_landmarks_save(const cflat_landmarks* l, const char* path);
CFLAT_API void cflat_landmarks_free(cflat_landmarks* l);
CFLAT_API size_t cflat_landmarks_count(const cflat_landmarks* l);
CFLAT_API uint32_t cflat_landmarks_get(const cflat_landmarks* l, size_t i);

/* ---- preprocessing and stores ---- */

typedef struct cflat_preprocess_params {
  double epsilon;
  int literal_mae; /* 0 = geometric test */
  size_t threads;  /* 0 = all cores */
  double tau_start, tau_floor;
  uint64_t seed;
  int compress;
} cflat_preprocess_params;

CFLAT_API void cflat_preprocess_defaults(cflat_preprocess_params* p);
CFLAT_API cflat_status cflat_preprocess(const cflat_instance* g, const cflat_landmarks* l,
                                        const cflat_preprocess_params* p, const char* store_path);
/* The instance supplies the period and must be the one the store was built
   on. With g NULL the period defaults to one day (enough for statistics). */
CFLAT_API cflat_status cflat_store_open(const char* path, const cflat_instance* g, cflat_store** out);
CFLAT_API void cflat_store_free(cflat_store* s);
CFLAT_API size_t cflat_store_landmarks(const cflat_store* s);

typedef struct cflat_store_stats {
  uint32_t landmark;
  uint64_t stored_bytes, payload_bytes;
  size_t unreachable, unique, owned, shared, breakpoints;
  double share_ratio;
  int compressed;
} cflat_store_stats;

CFLAT_API cflat_status cflat_store_stat(const cflat_store* s, size_t i, cflat_store_stats* out);

/* ---- queries ---- */

typedef enum cflat_algorithm { CFLAT_CFCA = 0, CFLAT_TDD = 1, CFLAT_DIJ_FREEFLOW = 2 } cflat_algorithm;

/* `original` is required for contracted instances so paths can be unpacked;
   pass NULL otherwise. The oracle keeps its own references. */
CFLAT_API cflat_status cflat_oracle_new(const cflat_instance* g, const cflat_instance* original,
                                        const cflat_store* s, cflat_oracle** out);
CFLAT_API void cflat_oracle_free(cflat_oracle* o);

/* n_landmarks is ignored by the baselines. */
CFLAT_API cflat_status cflat_query(const cflat_oracle* o, cflat_algorithm algo, uint32_t from, uint32_t to,
                                   double departure, size_t n_landmarks, cflat_result** out);
CFLAT_API void cflat_result_free(cflat_result* r);
CFLAT_API double cflat_result_cost(const cflat_result* r);
CFLAT_API int cflat_result_exact(const cflat_result* r);
CFLAT_API int cflat_result_fallback(const cflat_result* r);
/* The path as arc ids of the queried instance, in travel order. */
CFLAT_API size_t cflat_result_path_length(const cflat_result* r);
CFLAT_API const uint32_t* cflat_result_path(const cflat_result* r);
CFLAT_API size_t cflat_result_settled(const cflat_result* r);

CFLAT_API double cflat_relative_error(double approx, double exact);

/* ---- live traffic ---- */

typedef struct cflat_disruption {
  uint32_t arc;
  double start, end; /* 0 <= start < end < T */
  double factor;     /* >= 1 */
  double ramp;       /* seconds, widened until FIFO holds */
  double congestion; /* upper free-flow bound factor for windows */
  size_t threads;
} cflat_disruption;

CFLAT_API void cflat_disruption_defaults(cflat_disruption* d);
/* Builds the disrupted instance and overlay and swaps them into the oracle.
   The oracle must have been built from the preprocessed instance and must
   not be contracted. Receives
   the affected landmark count and the number of changed destinations. */
CFLAT_API cflat_status cflat_update(cflat_oracle* o, const cflat_disruption* d, const cflat_preprocess_params* p,
                                    size_t* affected, size_t* changed);
/* Overlay window of the i-th affected landmark. */
CFLAT_API cflat_status cflat_update_window(const cflat_oracle* o, size_t i, uint32_t* landmark, double* t_s,
                                           double* t_e);
CFLAT_API void cflat_update_clear(cflat_oracle* o);

/* ---- benchmark ---- */

typedef struct cflat_bench_params {
  size_t queries;
  uint64_t seed;
  const size_t* ns;
  size_t ns_count;
  int freeflow_baseline; /* 0 = TDD */
  size_t threads;        /* > 1 omits wall times */
} cflat_bench_params;

/* Writes the per-query CSV to csv_path (NULL skips it) and returns the
   JSON aggregate and the error quantile table. */
CFLAT_API cflat_status cflat_bench(const cflat_oracle* o, const cflat_bench_params* p, const char* csv_path,
                                   char** json, char** table);

#ifdef __cplusplus
}
#endif

#endif
