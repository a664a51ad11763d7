#ifndef EVSEARCH_H
#define EVSEARCH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum EvsStatus {
  EVS_STATUS_OK = 0,
  EVS_STATUS_NULL_ARGUMENT = 1,
  EVS_STATUS_INVALID_UTF8 = 2,
  EVS_STATUS_IO = 3,
  EVS_STATUS_PARSE = 4,
  EVS_STATUS_INVALID_INPUT = 5,
  EVS_STATUS_UNSUPPORTED_LANGUAGE = 6,
  EVS_STATUS_PROVIDER = 7,
  EVS_STATUS_INTERNAL = 8,
} EvsStatus;

/**
 * An extraction pipeline together with its event index.
 */
typedef struct EvsEngine EvsEngine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Opens an engine. `config_path` selects a TOML configuration (built-in
 * data when null); `index_path` selects a persistent index file (in memory
 * when null).
 */
enum EvsStatus evs_engine_open(const char *config_path,
                               const char *index_path,
                               struct EvsEngine **out);

void evs_engine_free(struct EvsEngine *engine);

/**
 * Extracts events from `text` and writes the result JSON to `out`.
 * Translation and projection run when `translate` is nonzero.
 */
enum EvsStatus evs_extract_json(const struct EvsEngine *engine,
                                const char *id,
                                const char *language,
                                const char *text,
                                int32_t translate,
                                char **out);

/**
 * Ingests a JSON Lines corpus (`{"id","language","text"}` per line) and
 * writes the ingest report JSON to `out`.
 */
enum EvsStatus evs_ingest_jsonl(const struct EvsEngine *engine, const char *corpus, char **out);

/**
 * Runs a search. `request` is either `{"nl": "..."}` or a structured form
 * (`types`, `agent`, `patient`, `location`, `context`). `k` of 0 uses the
 * default. Writes `{"query", "hits"}` JSON to `out`.
 */
enum EvsStatus evs_search_json(const struct EvsEngine *engine,
                               const char *request,
                               size_t k,
                               char **out);

/**
 * Parses a natural-language query and writes the structured query JSON.
 */
enum EvsStatus evs_nl_query_json(const struct EvsEngine *engine, const char *text, char **out);

/**
 * Condition score with the engine's cross-lingual similarity provider.
 * `field` may be null (no field evidence); `beta` below 0 uses the default.
 */
enum EvsStatus evs_score_condition(const struct EvsEngine *engine,
                                   const char *query_text,
                                   const char *field,
                                   double extraction_confidence,
                                   const char *sentence,
                                   double beta,
                                   double *out);

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call on the same thread.
 */
const char *evs_last_error_message(void);

void evs_string_free(char *s);

/**
 * Library version as a static NUL-terminated string.
 */
const char *evs_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EVSEARCH_H */
