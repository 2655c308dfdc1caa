/*
 * C interface to the graphsurv library: survival-analysis-driven intensity
 * models for continuous-time temporal networks.
 *
 * Conventions:
 *  - Every fallible call returns a gs_status; GS_OK is 0. On failure the
 *    thread-local message from gs_last_error() describes the problem and all
 *    output parameters are left untouched.
 *  - Objects returned through gs_history** / gs_model** are owned by the
 *    caller and released with the matching *_free function.
 *  - Strings returned through char** are owned by the caller and released
 *    with gs_string_free.
 *  - options_json arguments take a JSON object (NULL means "{}"); unknown
 *    keys are rejected so that typos cannot silently change behavior.
 */
#ifndef GRAPHSURV_H
#define GRAPHSURV_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gs_status {
    GS_OK = 0,
    GS_ERROR = 1,            /* unclassified failure */
    GS_ERROR_INPUT = 2,      /* bad file, malformed options, invalid argument */
    GS_ERROR_TRAINING = 3,   /* divergence or non-finite loss */
    GS_ERROR_CHECKPOINT = 4, /* unreadable or inconsistent checkpoint */
    GS_ERROR_EVAL = 5        /* evaluation protocol violation */
} gs_status;

typedef struct gs_history gs_history; /* immutable event sequence */
typedef struct gs_model gs_model;     /* conditional-intensity model */

const char* gs_version(void);

/* Message describing this thread's most recent failure; never NULL. */
const char* gs_last_error(void);

void gs_string_free(char* s);

/*
 * Event histories.
 *
 * load options:   {"delimiter": ",", "src_column": 0, "dst_column": 1,
 *                  "time_column": 2, "has_header": false,
 *                  "dedup_simultaneous": false, "max_events": 20000,
 *                  "jitter_ties": 1e-9}
 *                 delimiter "" (default) splits on runs of whitespace or
 *                 commas. Duplicate and simultaneous-event policy acts on the
 *                 raw timestamps during parsing; afterwards times are
 *                 strictly increasing.
 * preprocess:     {"dedup_simultaneous": false, "max_events": 20000,
 *                  "jitter_ties": 1e-9, "rescale": 100.0}
 *                 on an already-loaded history; tie handling sees the stored
 *                 strict times, so this is mainly truncation and rescaling.
 * split options:  {"t_train": ..., "t_val": ..., "t_test": ...} with t_val /
 *                 t_test defaulting to the horizon, or {"f_train": 0.7,
 *                  "f_val": 0.85} for event-count fractions.
 */
gs_status gs_history_load_csv(const char* path, const char* options_json, gs_history** out);
gs_status gs_history_preprocess(const gs_history* h, const char* options_json, gs_history** out);
gs_status gs_history_split(const gs_history* h, const char* options_json, gs_history** train,
                           gs_history** val, gs_history** test);
/* Canonical "src,dst,time" file, shortest round-trip float formatting. */
gs_status gs_history_save(const gs_history* h, const char* path);
gs_status gs_history_summary_json(const gs_history* h, char** out_json);
size_t gs_history_event_count(const gs_history* h);
size_t gs_history_node_count(const gs_history* h);
double gs_history_begin(const gs_history* h);
double gs_history_horizon(const gs_history* h);
void gs_history_free(gs_history* h);

/*
 * Models.
 *
 * init options:   {"kind": "markov_pwc" | "poisson", "embedding_dim": 20,
 *                  "hazard_pieces": 10, "cuts": [..],
 *                  "decay": {"deg": 1.0, "vol": 1.0, "cn": 1.0},
 *                  "standardize_features": true,
 *                  "embedding_init_scale": 0.1, "seed": 0}
 * fit options:    {"learning_rate": 0.8, "weight_decay": 0.9,
 *                  "beta1": 0.9, "beta2": 0.999, "epsilon": 1e-8,
 *                  "epochs": 30, "batch_size": 1024, "seed": 0,
 *                  "checkpoint_every": 0, "checkpoint_prefix": "",
 *                  "contrastive": {"samples_per_slice": 5, "seed": 0},
 *                  "trace_csv": "loss.csv"}
 *                 omit "contrastive" to train with the exact integral term.
 * nll options:    {"contrastive": {"samples_per_slice": 5, "seed": 0}}
 */
gs_status gs_model_init(const gs_history* train, const char* options_json, gs_model** out);
gs_status gs_model_load(const char* path, gs_model** out);
gs_status gs_model_save(const gs_model* m, const char* path);
/* "poisson" or "markov_pwc". */
gs_status gs_model_kind(const gs_model* m, char** out_kind);
/* summary_json reports first/last loss rows of the trace. */
gs_status gs_model_fit(const gs_model* m, const gs_history* train, const char* options_json,
                       gs_model** fitted, char** summary_json);
gs_status gs_model_nll(const gs_model* m, const gs_history* h, const char* options_json,
                       double* l_pos, double* l_neg);
void gs_model_free(gs_model* m);

/*
 * Simulation (Ogata thinning).
 *
 * options: {"t0": 0.0, "horizon": 1.0, "max_events": 100000, "seed": 0}
 * warm_start may be NULL; otherwise its events (all at times <= t0) seed the
 * feature state. manifest_json receives {seed, window, counts, acceptance
 * rate, model hash}.
 */
gs_status gs_simulate(const gs_model* m, const char* options_json, const gs_history* warm_start,
                      gs_history** out, char** manifest_json);

/*
 * Evaluation.
 *
 * burstiness options: {"min_events": 3, "bins": 40, "rows_csv": "...",
 *                      "histogram_csv": "..."}; CSV outputs are written only
 *                      when a path is given. Returns the histogram as JSON.
 *
 * link-prediction options:
 *   {"scorers": ["poisson", "markov_pwc", "preferential_attachment",
 *                "random"],
 *    "n_neg": 1, "num_seeds": 10, "seed": 0, "roc_csv_prefix": "roc_",
 *    "jobs": 1}
 * `stream` is the full history scorers may roll through (strictly before
 * each scored time); `eval_slice` holds the events to predict. markov_model
 * backs the markov_pwc scorer; poisson_model backs the poisson scorer and
 * falls back to markov_model's base rates when NULL. With a prefix given,
 * one "<prefix><scorer>.csv" ROC curve per scorer is written from the first
 * seed. Returns per-scorer AUC mean/std as JSON.
 */
gs_status gs_burstiness_report(const gs_history* h, const char* options_json, char** report_json);
gs_status gs_eval_link_prediction(const gs_history* stream, const gs_history* eval_slice,
                                  const gs_model* markov_model, const gs_model* poisson_model,
                                  const char* options_json, char** report_json);

#ifdef __cplusplus
}
#endif

#endif /* GRAPHSURV_H */
