/* C interface to the honeyfilter library. Every function returns an
 * hf_status; on failure hf_last_error() describes the problem for the
 * calling thread. Strings returned through char** are heap-allocated and
 * must be released with hf_free_string. */
#ifndef HONEYFILTER_H
#define HONEYFILTER_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define HF_API __declspec(dllexport)
#else
#define HF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hf_status {
  HF_OK = 0,
  HF_ERR_INVALID_ARGUMENT = 1,
  HF_ERR_IO = 2,
  HF_ERR_PARSE = 3,
  HF_ERR_EMPTY_CORPUS = 4,
  HF_ERR_BUDGET_EXHAUSTED = 5,
  HF_ERR_VOCAB_EXHAUSTED = 6,
  HF_ERR_NON_FINITE = 7,
  HF_ERR_UNKNOWN_ACCOUNT = 8,
  HF_ERR_NETWORK = 9,
  HF_ERR_REFUSAL = 10,
  HF_ERR_HASH_MISMATCH = 11,
  HF_ERR_RUNTIME = 12,
  HF_ERR_INTERNAL = 99
} hf_status;

typedef enum hf_login_outcome {
  HF_LOGIN_SUCCESS = 0,
  HF_LOGIN_HONEYWORD_ALARM = 1,
  HF_LOGIN_FAIL = 2
} hf_login_outcome;

HF_API const char* hf_version(void);
HF_API const char* hf_status_name(hf_status status);
HF_API const char* hf_last_error(void);
HF_API void hf_free_string(char* s);

/* level: 0 debug, 1 info, 2 warning. NULL restores the stderr default. */
typedef void (*hf_log_fn)(int level, const char* message, void* user);
HF_API void hf_set_log_callback(hf_log_fn fn, void* user);

typedef struct hf_tweak_params {
  double p, q, f, g;
  double boost;
  int additive_boost; /* 0 multiplicative, 1 additive */
  uint64_t seed;
  size_t attempts_per_word;
} hf_tweak_params;

HF_API void hf_tweak_params_default(hf_tweak_params* out);

/* Subword embedding (password model). hyper_json may be NULL for defaults. */
typedef struct hf_embedding hf_embedding;
HF_API hf_status hf_embedding_train(const char* corpus_path, size_t min_len,
                                    const char* hyper_json, hf_embedding** out);
HF_API hf_status hf_embedding_load(const char* path, hf_embedding** out);
HF_API hf_status hf_embedding_save(const hf_embedding* model, const char* path);
/* JSON array of {"word", "score"}. */
HF_API hf_status hf_embedding_nearest(const hf_embedding* model, const char* word, size_t n,
                                      char** out_json);
HF_API void hf_embedding_free(hf_embedding* model);

/* Honeyword generators. NULL tweak params select the defaults. */
typedef struct hf_generator hf_generator;
HF_API hf_status hf_generator_tweak(const hf_tweak_params* params, hf_generator** out);
HF_API hf_status hf_generator_model(const hf_embedding* model, hf_generator** out);
HF_API hf_status hf_generator_hybrid(const hf_embedding* model, const hf_tweak_params* params,
                                     hf_generator** out);
HF_API hf_status hf_generator_import(const char* table_path, hf_generator** out);
/* Writes "password<TAB>h1<TAB>...<TAB>hcount". */
HF_API hf_status hf_generate(const hf_generator* gen, const char* password, size_t count,
                             uint64_t stream, char** out_row);
HF_API void hf_generator_free(hf_generator* gen);

/* Prompts a completion endpoint (endpoint_json: url, model, auth_env, ...)
 * and writes the honeyword row; appends it to cache_path when non-NULL. */
HF_API hf_status hf_llm_honeywords(const char* endpoint_json, const char* password,
                                   const char* cache_path, char** out_row);

/* Markov password generator. */
typedef struct hf_markov hf_markov;
HF_API hf_status hf_markov_train(const char* corpus_path, size_t min_len, size_t order,
                                 double alpha, hf_markov** out);
/* Newline-terminated passwords. */
HF_API hf_status hf_markov_sample(const hf_markov* model, size_t count, size_t min_len,
                                  size_t max_len, uint64_t seed, char** out_lines);
HF_API void hf_markov_free(hf_markov* model);

/* Trained CNN classifier. */
typedef struct hf_classifier hf_classifier;
HF_API hf_status hf_classifier_load(const char* path, hf_classifier** out);
HF_API hf_status hf_classifier_score(const hf_classifier* clf, const char* word,
                                     double* out_password_prob);
HF_API void hf_classifier_free(hf_classifier* clf);

/* Simulated service with a separate honey checker. config_json holds th1,
 * th2, hash ("plain" | "salted") and fail_counts; NULL for defaults. */
typedef struct hf_vault hf_vault;
HF_API hf_status hf_vault_load(const char* store_path, const char* checker_path,
                               const char* config_json, hf_vault** out);
HF_API hf_status hf_vault_check(hf_vault* vault, int64_t account_id, const char* submitted,
                                hf_login_outcome* out);
HF_API hf_status hf_vault_flags(const hf_vault* vault, int64_t account_id,
                                int* account_flagged, int* system_flagged);
HF_API void hf_vault_free(hf_vault* vault);

/* Pipeline stages: "ingest", "passgen", "train-embed", "gen", "train-clf",
 * "eval", "replay", "run". config_json is a full run config document;
 * options_json may override {"seed", "output_dir", "k", "attempts", "hgt",
 * "force"}. The stage result is returned as JSON. */
HF_API hf_status hf_run_stage(const char* stage, const char* config_json,
                              const char* options_json, char** out_json);

/* Canonical config JSON (with options applied) and its hash. */
HF_API hf_status hf_config_resolve(const char* config_json, const char* options_json,
                                   char** out_json, char** out_hash);

/* Combines report.json files from run directories. mode: "per-dataset" or
 * "pooled". */
HF_API hf_status hf_report(const char* const* dirs, size_t n_dirs, const char* mode, int force,
                           char** out_json);

/* Human-readable success grid for a report JSON document. */
HF_API hf_status hf_format_grid(const char* report_json, char** out_text);

#ifdef __cplusplus
}
#endif

#endif
