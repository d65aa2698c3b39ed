#ifndef AGORAD_H
#define AGORAD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a fallible call. The first four values match the CLI exit codes.
 */
typedef enum AgoradStatus {
  AGORAD_STATUS_OK = 0,
  /**
   * A search ran out of budget; nothing was decided.
   */
  AGORAD_STATUS_UNKNOWN = 1,
  AGORAD_STATUS_INPUT_ERROR = 2,
  AGORAD_STATUS_CAPACITY = 3,
  /**
   * A search covered its whole space without finding a witness.
   */
  AGORAD_STATUS_NOT_FOUND = 4,
  AGORAD_STATUS_NULL_ARGUMENT = 5,
  AGORAD_STATUS_INTERNAL = 6,
} AgoradStatus;

typedef enum AgoradWitnessKind {
  AGORAD_WITNESS_KIND_BINARY = 0,
  AGORAD_WITNESS_KIND_MAJORITY = 1,
  AGORAD_WITNESS_KIND_MINORITY = 2,
  AGORAD_WITNESS_KIND_UNIFORM = 3,
} AgoradWitnessKind;

/**
 * A verified aggregator.
 */
typedef struct AgoradAggregator AgoradAggregator;

/**
 * A parsed, validated domain.
 */
typedef struct AgoradDomain AgoradDomain;

/**
 * An analysis report.
 */
typedef struct AgoradReport AgoradReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next agorad call on this thread.
 */
const char *agorad_last_error(void);

/**
 * Frees a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void agorad_string_free(char *s);

/**
 * Parses and validates domain text. With `allow_large` the desk-scale
 * limits are lifted.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum AgoradStatus agorad_domain_parse(const char *text,
                                      bool allow_large,
                                      struct AgoradDomain **out);

/**
 * Loads a built-in domain by name.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
enum AgoradStatus agorad_domain_fixture(const char *name, struct AgoradDomain **out);

/**
 * # Safety
 * `d` must come from this library and not be freed twice. Null is ignored.
 */
void agorad_domain_free(struct AgoradDomain *d);

/**
 * Number of issues, or 0 for a null handle.
 *
 * # Safety
 * `d` must be null or a live handle.
 */
size_t agorad_domain_issue_count(const struct AgoradDomain *d);

/**
 * Number of feasible tuples, or 0 for a null handle.
 *
 * # Safety
 * `d` must be null or a live handle.
 */
size_t agorad_domain_feasible_count(const struct AgoradDomain *d);

/**
 * Canonical domain text, or null for a null handle.
 *
 * # Safety
 * `d` must be null or a live handle.
 */
char *agorad_domain_serialize(const struct AgoradDomain *d);

/**
 * Full analysis. Zero budgets select the defaults. Returns `Unknown` (with
 * the report still written) when a decision was left open.
 *
 * # Safety
 * `d` must be a live handle; `out` must be writable.
 */
enum AgoradStatus agorad_analyze(const struct AgoradDomain *d,
                                 uint64_t max_nodes,
                                 uint64_t max_millis,
                                 bool validate,
                                 struct AgoradReport **out);

/**
 * The `key = value` report text.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
char *agorad_report_text(const struct AgoradReport *r);

/**
 * Value of one report key, or null if the key does not exist.
 *
 * # Safety
 * `r` must be null or a live handle; `key` must be NUL-terminated.
 */
char *agorad_report_get(const struct AgoradReport *r, const char *key);

/**
 * # Safety
 * `r` must come from this library and not be freed twice. Null is ignored.
 */
void agorad_report_free(struct AgoradReport *r);

/**
 * Searches for an aggregator of the given kind. `Ok` writes a handle;
 * `NotFound` means none exists of that kind; `Unknown` means the budget ran
 * out. Binary searches use the blockedness graph unless `direct` is set.
 *
 * # Safety
 * `d` must be a live handle; `out` must be writable.
 */
enum AgoradStatus agorad_witness(const struct AgoradDomain *d,
                                 enum AgoradWitnessKind kind,
                                 bool direct,
                                 uint64_t max_nodes,
                                 uint64_t max_millis,
                                 struct AgoradAggregator **out);

/**
 * Ternary aggregator whose component `issue` (1-based) is commutative on
 * the two values `u`, `v` of `X_issue`.
 *
 * # Safety
 * `d` must be a live handle; `u`, `v` NUL-terminated; `out` writable.
 */
enum AgoradStatus agorad_witness_component(const struct AgoradDomain *d,
                                           size_t issue,
                                           const char *u,
                                           const char *v,
                                           uint64_t max_nodes,
                                           uint64_t max_millis,
                                           struct AgoradAggregator **out);

/**
 * Arity of the aggregator, or 0 for a null handle.
 *
 * # Safety
 * `a` must be null or a live handle.
 */
size_t agorad_aggregator_arity(const struct AgoradAggregator *a);

/**
 * Witness text of `a` over `d`, or null on a null handle.
 *
 * # Safety
 * `d` and `a` must be null or live handles, `a` obtained for `d`.
 */
char *agorad_aggregator_serialize(const struct AgoradDomain *d, const struct AgoradAggregator *a);

/**
 * # Safety
 * `a` must come from this library and not be freed twice. Null is ignored.
 */
void agorad_aggregator_free(struct AgoradAggregator *a);

/**
 * DOT text of the blockedness graph.
 *
 * # Safety
 * `d` must be a live handle; `out` must be writable.
 */
enum AgoradStatus agorad_graph_dot(const struct AgoradDomain *d, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AGORAD_H */
