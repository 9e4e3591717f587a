#ifndef LSPACE_H
#define LSPACE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum LsStatus {
  LS_STATUS_OK = 0,
  LS_STATUS_NULL_POINTER = 1,
  LS_STATUS_INVALID_UTF8 = 2,
  LS_STATUS_PARSE = 3,
  LS_STATUS_PRECONDITION = 4,
  LS_STATUS_INTERNAL = 5,
} LsStatus;

/**
 * Opaque framed graph matrix.
 */
typedef struct LsFramedMatrix LsFramedMatrix;

/**
 * Opaque Lagrangian subspace.
 */
typedef struct LsLagrangian LsLagrangian;

/**
 * Opaque ribbon graph.
 */
typedef struct LsRibbonGraph LsRibbonGraph;

/**
 * Topological counts of a ribbon graph.
 */
typedef struct LsCounts {
  size_t edges;
  size_t vertices;
  size_t boundary;
  int64_t euler_characteristic;
  bool orientable;
} LsCounts;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, empty after a success.
 * The pointer stays valid until the next library call on the same thread.
 */
const char *ls_last_error_message(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void ls_string_free(char *s);

/**
 * Parses a ribbon file (`ribbon` / `edges` / `twist` / `vertex` lines).
 *
 * # Safety
 * `text_in` must be a NUL-terminated string; `out` must be writable.
 */
enum LsStatus ls_ribbon_parse(const char *text_in, struct LsRibbonGraph **out);

/**
 * Releases a ribbon graph. Null is ignored.
 *
 * # Safety
 * `g` must come from this library and not be freed twice.
 */
void ls_ribbon_free(struct LsRibbonGraph *g);

/**
 * Edge, vertex and boundary counts, Euler characteristic and orientability.
 *
 * # Safety
 * `g` must be a live handle; `out` must be writable.
 */
enum LsStatus ls_ribbon_counts(const struct LsRibbonGraph *g, struct LsCounts *out);

/**
 * Partial dual with respect to the 1-based edge labels in `edges[0..len]`.
 *
 * # Safety
 * `g` must be a live handle, `edges` must point to `len` values (or be null
 * when `len` is 0) and `out` must be writable.
 */
enum LsStatus ls_ribbon_partial_dual(const struct LsRibbonGraph *g,
                                     const size_t *edges,
                                     size_t len,
                                     struct LsRibbonGraph **out);

/**
 * Applies the first (`kind == 1`) or second (`kind == 2`) move at `arc`.
 * `fixed` names the fixed edge of the second move and is ignored otherwise.
 *
 * # Safety
 * `g` must be a live handle; `out` must be writable.
 */
enum LsStatus ls_ribbon_vassiliev(const struct LsRibbonGraph *g,
                                  uint32_t kind,
                                  size_t arc,
                                  size_t fixed,
                                  struct LsRibbonGraph **out);

/**
 * The L-space of a ribbon graph.
 *
 * # Safety
 * `g` must be a live handle; `out` must be writable.
 */
enum LsStatus ls_ribbon_lspace(const struct LsRibbonGraph *g, struct LsLagrangian **out);

/**
 * The framed intersection matrix of a one-vertex ribbon graph.
 *
 * # Safety
 * `g` must be a live handle; `out` must be writable.
 */
enum LsStatus ls_ribbon_intersection_matrix(const struct LsRibbonGraph *g,
                                            struct LsFramedMatrix **out);

/**
 * Serializes a ribbon graph in the ribbon file format.
 *
 * # Safety
 * `g` must be a live handle; `out` must be writable.
 */
enum LsStatus ls_ribbon_to_text(const struct LsRibbonGraph *g, char **out);

/**
 * Releases a Lagrangian. Null is ignored.
 *
 * # Safety
 * `l` must come from this library and not be freed twice.
 */
void ls_lagrangian_free(struct LsLagrangian *l);

/**
 * Grade (half the ambient dimension) of a Lagrangian, or 0 for null.
 *
 * # Safety
 * `l` must be null or a live handle.
 */
size_t ls_lagrangian_grade(const struct LsLagrangian *l);

/**
 * Basis rows as text, one `e-block|f-block` row per line.
 *
 * # Safety
 * `l` must be a live handle; `out` must be writable.
 */
enum LsStatus ls_lagrangian_to_text(const struct LsLagrangian *l, char **out);

/**
 * Parses a graph file (`graph` / `vertices` / `frame` / `edge` lines).
 *
 * # Safety
 * `text_in` must be a NUL-terminated string; `out` must be writable.
 */
enum LsStatus ls_matrix_parse(const char *text_in, struct LsFramedMatrix **out);

/**
 * Releases a framed matrix. Null is ignored.
 *
 * # Safety
 * `m` must come from this library and not be freed twice.
 */
void ls_matrix_free(struct LsFramedMatrix *m);

/**
 * Rows of the matrix as space-separated bits.
 *
 * # Safety
 * `m` must be a live handle; `out` must be writable.
 */
enum LsStatus ls_matrix_to_text(const struct LsFramedMatrix *m, char **out);

/**
 * The interlace polynomial in `x` and `y`, e.g. `x^2 - 2x + 2y`.
 *
 * # Safety
 * `m` must be a live handle; `out` must be writable.
 */
enum LsStatus ls_matrix_interlace(const struct LsFramedMatrix *m, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LSPACE_H */
