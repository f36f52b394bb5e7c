#ifndef AFFORDNET_H
#define AFFORDNET_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum AfnStatus {
  AFN_STATUS_OK = 0,
  // A required pointer argument was null.
  AFN_STATUS_NULL_ARGUMENT = 1,
  // A string argument was not valid UTF-8.
  AFN_STATUS_INVALID_UTF8 = 2,
  // An argument was out of its domain (decay, penalty, node reference).
  AFN_STATUS_INVALID_ARGUMENT = 3,
  // A file could not be read or written.
  AFN_STATUS_IO = 4,
  // A graph or corpus file was malformed.
  AFN_STATUS_FORMAT = 5,
  // None of the query factors is in the graph.
  AFN_STATUS_NOT_FOUND = 6,
  // An index was past the end of a result set.
  AFN_STATUS_OUT_OF_RANGE = 7,
  // The library panicked; the handle arguments may be inconsistent.
  AFN_STATUS_PANIC = 99,
} AfnStatus;

// An immutable knowledge graph.
typedef struct AfnGraph AfnGraph;

// Ranked results of one query.
typedef struct AfnResults AfnResults;

// Query parameters; obtain defaults from [`afn_query_config_default`].
typedef struct AfnQueryConfig {
  double decay;
  double penalty;
  double threshold;
  size_t top_k;
} AfnQueryConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after a
// successful call. Valid until the next call on the same thread.
const char *afn_last_error(void);

// Library version, a static string.
const char *afn_version(void);

// Loads a graph file written by `afn_graph_save` or the command line.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a writable pointer.
enum AfnStatus afn_graph_load(const char *path, struct AfnGraph **out);

// Builds a graph from `count` corpus files (CoNLL-U or depjson, chosen by
// extension) on `jobs` threads; malformed records are skipped.
//
// # Safety
// `paths` must point to `count` NUL-terminated strings and `out` must be
// writable.
enum AfnStatus afn_graph_build(const char *const *paths,
                               size_t count,
                               size_t jobs,
                               struct AfnGraph **out);

// Writes the graph in the canonical text format.
//
// # Safety
// `graph` must come from this library and `path` be NUL-terminated.
enum AfnStatus afn_graph_save(const struct AfnGraph *graph, const char *path);

// Node and edge counts.
//
// # Safety
// `graph` must come from this library; outputs must be writable.
enum AfnStatus afn_graph_size(const struct AfnGraph *graph, size_t *nodes, size_t *edges);

// Releases a graph; null is ignored.
//
// # Safety
// `graph` must come from this library and not be used afterwards.
void afn_graph_free(struct AfnGraph *graph);

// Default parameters: decay 0.99, penalty 5, threshold 2, top 10.
struct AfnQueryConfig afn_query_config_default(void);

// Length of an edge composed `count` times.
//
// # Safety
// `out` must be writable.
enum AfnStatus afn_edge_weight(uint64_t count, double decay, double *out);

// Affordance of `action` for one factor: the shortest-path length capped
// at the penalty. Unknown nodes give the penalty. A null `config` means
// the defaults.
//
// # Safety
// `graph` must come from this library, strings must be NUL-terminated,
// `config` null or valid, `out` writable.
enum AfnStatus afn_affordance(const struct AfnGraph *graph,
                              const char *factor,
                              const char *action,
                              const struct AfnQueryConfig *config,
                              double *out);

// Ranks actions for the observed factors (objects or attributes).
//
// # Safety
// `graph` must come from this library, `factors` must point to `count`
// NUL-terminated strings, `config` null or valid, `out` writable.
enum AfnStatus afn_query(const struct AfnGraph *graph,
                         const char *const *factors,
                         size_t count,
                         const struct AfnQueryConfig *config,
                         struct AfnResults **out);

// Number of ranked actions; 0 for null.
//
// # Safety
// `results` must be null or come from [`afn_query`].
size_t afn_results_len(const struct AfnResults *results);

// Label of the action at `index` (rank `index + 1`). The string lives as
// long as `results`.
//
// # Safety
// `results` must come from [`afn_query`]; `out` must be writable.
enum AfnStatus afn_results_action(const struct AfnResults *results, size_t index, const char **out);

// Affordance value of the action at `index`.
//
// # Safety
// `results` must come from [`afn_query`]; `out` must be writable.
enum AfnStatus afn_results_value(const struct AfnResults *results, size_t index, double *out);

// Contribution of `factor` to the action at `index`.
//
// # Safety
// `results` must come from [`afn_query`], `factor` be NUL-terminated and
// `out` writable.
enum AfnStatus afn_results_factor_value(const struct AfnResults *results,
                                        size_t index,
                                        const char *factor,
                                        double *out);

// Number of query factors that were not in the graph.
//
// # Safety
// `results` must be null or come from [`afn_query`].
size_t afn_results_missing_len(const struct AfnResults *results);

// The `index`-th missing factor as `kind:label`; lives as long as
// `results`.
//
// # Safety
// `results` must come from [`afn_query`]; `out` must be writable.
enum AfnStatus afn_results_missing(const struct AfnResults *results,
                                   size_t index,
                                   const char **out);

// Releases query results; null is ignored.
//
// # Safety
// `results` must come from [`afn_query`] and not be used afterwards.
void afn_results_free(struct AfnResults *results);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AFFORDNET_H */
