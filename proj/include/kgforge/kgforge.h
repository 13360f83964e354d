/* kgforge C API.
 *
 * Every function returns a kgf_status. On failure the message is available
 * from kgf_last_error() on the same thread until the next call. Strings
 * returned through char** out-parameters are owned by the caller and must be
 * released with kgf_string_free().
 */
#ifndef KGFORGE_H
#define KGFORGE_H

#include <stddef.h>
#include <stdint.h>

#if defined(KGF_BUILDING_LIBRARY)
#define KGF_API __attribute__((visibility("default")))
#else
#define KGF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum kgf_status {
  KGF_OK = 0,
  KGF_ERR_INVALID_ARGUMENT = 1,
  KGF_ERR_IO = 2,
  KGF_ERR_FORMAT = 3,
  KGF_ERR_DANGLING_REFERENCE = 4,
  KGF_ERR_CONFIG = 5,
  KGF_ERR_LLM = 6,
  KGF_ERR_REPLAY_MISS = 7,
  KGF_ERR_FINGERPRINT_MISMATCH = 8,
  KGF_ERR_TRAINING = 9,
  KGF_ERR_INTERNAL = 10
} kgf_status;

KGF_API const char* kgf_version(void);
KGF_API const char* kgf_status_name(kgf_status status);
KGF_API const char* kgf_last_error(void);
KGF_API void kgf_string_free(char* s);

/* ---- datasets ---------------------------------------------------------- */

typedef struct kgf_graph kgf_graph;

typedef struct kgf_stats {
  size_t n_entities;
  size_t n_relations;
  size_t n_train;
  size_t n_valid;
  size_t n_test;
} kgf_stats;

KGF_API kgf_status kgf_graph_load(const char* root, int lenient, kgf_graph** out);
KGF_API void kgf_graph_free(kgf_graph* graph);
KGF_API kgf_status kgf_graph_stats(const kgf_graph* graph, kgf_stats* out);
KGF_API kgf_status kgf_graph_warning_count(const kgf_graph* graph, size_t* out);
KGF_API kgf_status kgf_graph_warning(const kgf_graph* graph, size_t index, char** out);
KGF_API kgf_status kgf_graph_fingerprint(const kgf_graph* graph, char** out);
KGF_API kgf_status kgf_graph_write(const kgf_graph* graph, const char* root);

/* ---- prompts and keywords ---------------------------------------------- */

/* strategy: entity_expand, relation_global, relation_local, relation_reverse
 * or structure_keywords. Uses the built-in templates. */
KGF_API kgf_status kgf_render_prompt(const char* strategy, const char* value, char** out);

/* Keywords of an LLM answer, one per line. */
KGF_API kgf_status kgf_parse_keywords(const char* raw, char** out);

KGF_API kgf_status kgf_match_score(const char* const* head, size_t n_head,
                                   const char* const* tail, size_t n_tail, double* out);

/* ---- runs -------------------------------------------------------------- */

typedef struct kgf_run kgf_run;

/* Loads a run config and applies LLM_ENDPOINT / LLM_API_KEY / LLM_MODEL to
 * unset gateway fields. */
KGF_API kgf_status kgf_run_load(const char* config_path, kgf_run** out);
KGF_API void kgf_run_free(kgf_run* run);

/* Overrides one setting. Keys: dataset, output_dir, strategies ("ERS" or
 * "E,R"), relation_modes ("global,local"), k, self_loop (0/1), budget_tokens,
 * backend (replay/http/record), fixture, endpoint, model_id, concurrency,
 * seed, n_seeds, model, dim, epochs, learning_rate, margin, batch_size. */
KGF_API kgf_status kgf_run_set(kgf_run* run, const char* key, const char* value);

/* exit_code receives 0 on full success, 1 when items failed and
 * allow_partial is 0. log receives the progress text. */
KGF_API kgf_status kgf_run_enrich(kgf_run* run, int allow_partial, int* exit_code, char** log);

/* out_dir may be NULL for <output_dir>/composed. */
KGF_API kgf_status kgf_run_compose(kgf_run* run, const char* const* bundle_dirs, size_t n_bundles,
                                   const char* out_dir, char** log);

/* base_dir / augmented_dir may be NULL for the configured defaults. table
 * receives the aligned comparison table. */
KGF_API kgf_status kgf_run_eval(kgf_run* run, const char* base_dir, const char* augmented_dir,
                                char** table);

/* kind: "toy" or "synthetic". Writes dataset/, fixture.jsonl and run.json. */
KGF_API kgf_status kgf_write_fixtures(const char* kind, const char* dir);

#ifdef __cplusplus
}
#endif

#endif /* KGFORGE_H */
