/* C interface to the cmdp library. All handles are opaque; every function
 * that can fail returns a cmdp_status and leaves a message retrievable with
 * cmdp_last_error() on the calling thread. */
#ifndef CMDP_H
#define CMDP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CMDP_API __declspec(dllexport)
#else
#define CMDP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cmdp_status {
    CMDP_OK = 0,
    CMDP_E_ARGUMENT = 1, /* null pointer or invalid option value */
    CMDP_E_MODEL = 2,    /* invalid model, config or policy */
    CMDP_E_NUMERIC = 3,  /* instability, truncation cap, singular system, search space too large */
    CMDP_E_CHECK = 4,    /* a self-check failed */
    CMDP_E_INTERNAL = 5
} cmdp_status;

typedef struct cmdp_model cmdp_model;
typedef struct cmdp_policy cmdp_policy;
typedef struct cmdp_report cmdp_report;

typedef enum cmdp_engine { CMDP_ENGINE_ANALYTIC = 0, CMDP_ENGINE_GENERIC = 1 } cmdp_engine;

CMDP_API const char* cmdp_version(void);
CMDP_API const char* cmdp_last_error(void);
CMDP_API void cmdp_string_free(char* s);

CMDP_API cmdp_status cmdp_model_load_file(const char* path, cmdp_model** out);
CMDP_API cmdp_status cmdp_model_load_text(const char* text, cmdp_model** out);
/* which = 1 or 2: the deterministic line chains. */
CMDP_API cmdp_status cmdp_model_line_example(int which, cmdp_model** out);
CMDP_API cmdp_status cmdp_model_describe(const cmdp_model* model, char** out);
CMDP_API double cmdp_model_metric_r(const cmdp_model* model);
CMDP_API void cmdp_model_free(cmdp_model* model);

/* Parses and binds a policy literal such as "prefix=[(1|0)];tail=all-on". */
CMDP_API cmdp_status cmdp_policy_parse(const cmdp_model* model, const char* literal, cmdp_policy** out);
CMDP_API cmdp_status cmdp_policy_default(const cmdp_model* model, cmdp_policy** out);
CMDP_API cmdp_status cmdp_policy_format(const cmdp_policy* policy, char** out);
CMDP_API void cmdp_policy_free(cmdp_policy* policy);

/* r <= 0 uses the model's metric parameter. */
CMDP_API cmdp_status cmdp_distance(const cmdp_policy* a, const cmdp_policy* b, double r, double* out);
/* -1 when the policies differ at state 0, INT64_MAX when they never differ. */
CMDP_API cmdp_status cmdp_prefix_agreement(const cmdp_policy* a, const cmdp_policy* b, int64_t* out);

typedef struct cmdp_eval_options {
    double tol;
    cmdp_engine engine;
    long k_cap;
} cmdp_eval_options;

typedef struct cmdp_optimize_options {
    double tol;
    long length;
    const char* tail;  /* NULL: model default */
    uint64_t cap;
    int mode;          /* 0: model default, 1: minimise, 2: maximise */
    unsigned workers;  /* 0: available parallelism */
    cmdp_engine engine;
} cmdp_optimize_options;

typedef struct cmdp_continuity_options {
    double tol;
    const long* ks;
    size_t n_ks;
    size_t samples;
    uint64_t seed;
    long window;
    unsigned workers;
    double r;          /* <= 0: model default */
    cmdp_engine engine;
} cmdp_continuity_options;

typedef struct cmdp_examples_options {
    int which;          /* 1 or 2 */
    const char* policy; /* NULL: skip single-policy evaluation */
    long length;        /* supremum-gap prefix length */
    long stream_t;      /* history stream length, 0 to skip */
} cmdp_examples_options;

typedef struct cmdp_simulate_options {
    double horizon;
    double warmup;
    uint64_t seed;
    int batches;
    double tol;         /* for the analytic comparison value */
} cmdp_simulate_options;

CMDP_API void cmdp_eval_options_init(cmdp_eval_options* opts);
CMDP_API void cmdp_optimize_options_init(cmdp_optimize_options* opts);
CMDP_API void cmdp_continuity_options_init(cmdp_continuity_options* opts);
CMDP_API void cmdp_examples_options_init(cmdp_examples_options* opts);
CMDP_API void cmdp_simulate_options_init(cmdp_simulate_options* opts);

CMDP_API cmdp_status cmdp_eval(const cmdp_model* model, const cmdp_policy* policy, const cmdp_eval_options* opts,
                               cmdp_report** out);
CMDP_API cmdp_status cmdp_optimize(const cmdp_model* model, const cmdp_optimize_options* opts, cmdp_report** out);
/* against == NULL runs a neighbourhood scan around u; otherwise reports the
 * pair (u, against). */
CMDP_API cmdp_status cmdp_continuity(const cmdp_model* model, const cmdp_policy* u, const cmdp_policy* against,
                                     const cmdp_continuity_options* opts, cmdp_report** out);
CMDP_API cmdp_status cmdp_examples(const cmdp_examples_options* opts, cmdp_report** out);
CMDP_API cmdp_status cmdp_simulate(const cmdp_model* model, const cmdp_policy* policy,
                                   const cmdp_simulate_options* opts, cmdp_report** out);

CMDP_API const char* cmdp_report_summary(const cmdp_report* report);
CMDP_API const char* cmdp_report_csv(const cmdp_report* report);
CMDP_API size_t cmdp_report_field_count(const cmdp_report* report);
CMDP_API const char* cmdp_report_field_name(const cmdp_report* report, size_t index);
CMDP_API cmdp_status cmdp_report_get_number(const cmdp_report* report, const char* key, double* out);
/* 1 when every self-check recorded in the report holds. */
CMDP_API int cmdp_report_check_passed(const cmdp_report* report);
CMDP_API size_t cmdp_report_check_count(const cmdp_report* report);
CMDP_API const char* cmdp_report_check_name(const cmdp_report* report, size_t index);
CMDP_API int cmdp_report_check_value(const cmdp_report* report, size_t index);
CMDP_API void cmdp_report_free(cmdp_report* report);

#ifdef __cplusplus
}
#endif

#endif
