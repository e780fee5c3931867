#ifndef PABISIM_H
#define PABISIM_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes of every call.
 */
typedef enum PabisimStatus {
  PABISIM_STATUS_OK = 0,
  PABISIM_STATUS_NULL_ARGUMENT = 1,
  PABISIM_STATUS_INVALID_UTF8 = 2,
  PABISIM_STATUS_PARSE_ERROR = 3,
  PABISIM_STATUS_QUERY_ERROR = 4,
  PABISIM_STATUS_UNKNOWN_STATE = 5,
  PABISIM_STATUS_RESOURCE_CAP = 6,
  PABISIM_STATUS_PANIC = 7,
} PabisimStatus;

/**
 * Scheduler optimum for [`pabisim_path_value`].
 */
typedef enum PabisimMode {
  PABISIM_MODE_INF = 0,
  PABISIM_MODE_SUP = 1,
} PabisimMode;

/**
 * Clause direction for [`pabisim_relate`].
 */
typedef enum PabisimDirection {
  /**
   * At-least for bisimulations, at-most for simulations.
   */
  PABISIM_DIRECTION_DEFAULT = 0,
  PABISIM_DIRECTION_AT_LEAST = 1,
  PABISIM_DIRECTION_AT_MOST = 2,
  PABISIM_DIRECTION_BOTH = 3,
} PabisimDirection;

/**
 * An automaton. Opaque to C.
 */
typedef struct PabisimModel PabisimModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until
 * the next call on this thread.
 */
const char *pabisim_last_error(void);

/**
 * Parses model text into a new handle.
 *
 * # Safety
 * `model_text` is a nul-terminated string; `out` is writable.
 */
enum PabisimStatus pabisim_model_parse(const char *model_text, struct PabisimModel **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `m` is null or a handle not yet freed.
 */
void pabisim_model_free(struct PabisimModel *m);

/**
 * Number of states, or 0 for a null handle.
 *
 * # Safety
 * `m` is null or a live handle.
 */
size_t pabisim_model_state_count(const struct PabisimModel *m);

/**
 * Model text of a handle, released with [`pabisim_string_free`].
 *
 * # Safety
 * `m` is a live handle; `out` is writable.
 */
enum PabisimStatus pabisim_model_write(const struct PabisimModel *m, char **out);

/**
 * Interleaving of two models, as a new handle.
 *
 * # Safety
 * `left` and `right` are live handles; `out` is writable.
 */
enum PabisimStatus pabisim_interleave(const struct PabisimModel *left,
                                      const struct PabisimModel *right,
                                      struct PabisimModel **out);

/**
 * Does the state formula hold at the named state?
 *
 * # Safety
 * Pointers are live handles, nul-terminated strings and a writable flag.
 */
enum PabisimStatus pabisim_check(const struct PabisimModel *m,
                                 const char *formula,
                                 const char *state_name,
                                 bool *holds);

/**
 * Optimal probability of a path formula at a state, written as `p/q`
 * (or an integer) and released with [`pabisim_string_free`].
 *
 * # Safety
 * Pointers are live handles, nul-terminated strings and a writable slot.
 */
enum PabisimStatus pabisim_path_value(const struct PabisimModel *m,
                                      const char *path,
                                      const char *state_name,
                                      enum PabisimMode mode,
                                      char **out);

/**
 * Computes a relation by name (`strong-1`, `weak-bisim`, ...) and reports
 * whether it relates `left` to `right`. `depth` 0 means no depth.
 *
 * # Safety
 * Pointers are live handles, nul-terminated strings and a writable flag.
 */
enum PabisimStatus pabisim_relate(const struct PabisimModel *m,
                                  const char *relation,
                                  size_t depth,
                                  enum PabisimDirection direction,
                                  const char *left,
                                  const char *right,
                                  bool *related);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` is null or a string from this library not yet freed.
 */
void pabisim_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PABISIM_H */
