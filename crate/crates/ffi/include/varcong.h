#ifndef VARCONG_H
#define VARCONG_H

#include <stdbool.h>
#include <stddef.h>

/**
 * Result code of every fallible call.
 */
typedef enum VcStatus {
  VC_STATUS_OK = 0,
  VC_STATUS_NULL_POINTER = 1,
  VC_STATUS_INVALID_UTF8 = 2,
  VC_STATUS_PARSE = 3,
  VC_STATUS_CAP_EXCEEDED = 4,
  VC_STATUS_NOT_CONGRUENCE = 5,
  VC_STATUS_UNIVERSAL = 6,
  VC_STATUS_INVALID = 7,
  VC_STATUS_INTERNAL = 8,
} VcStatus;

/**
 * A sandwich element with its regular part, local monoid and retraction.
 */
typedef struct VcContext VcContext;

/**
 * A congruence lattice produced by structural enumeration.
 */
typedef struct VcLattice VcLattice;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into this library on the same thread; do not free.
 */
const char *vc_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void vc_string_free(char *s);

/**
 * Builds the context of the sandwich element `a`, given as `"n: i1 ... in"`.
 *
 * # Safety
 * `a` must be a valid C string and `out` a valid pointer.
 */
enum VcStatus vc_context_new(const char *a, struct VcContext **out);

/**
 * # Safety
 * `ctx` must come from [`vc_context_new`] and not have been freed.
 */
void vc_context_free(struct VcContext *ctx);

/**
 * Sizes of the regular part `P` and of the local monoid, and the rank of `a`.
 *
 * # Safety
 * `ctx` must be a live handle; out-pointers may be null to skip a value.
 */
enum VcStatus vc_context_sizes(const struct VcContext *ctx,
                               size_t *size_p,
                               size_t *size_local,
                               size_t *rank);

/**
 * JSON summary of the context.
 *
 * # Safety
 * `ctx` must be a live handle and `out` a valid pointer.
 */
enum VcStatus vc_context_summary_json(const struct VcContext *ctx, char **out);

/**
 * Number of congruences of the regular part by brute force. Refused when
 * the regular part has more than `cap_elements` elements.
 *
 * # Safety
 * `ctx` must be a live handle and `out` a valid pointer.
 */
enum VcStatus vc_oracle_count(const struct VcContext *ctx, size_t cap_elements, size_t *out);

/**
 * Structural enumeration of the congruence lattice. `cap` bounds both the
 * system enumerations and the number of lattice nodes.
 *
 * # Safety
 * `ctx` must be a live handle and `out` a valid pointer.
 */
enum VcStatus vc_lattice_new(const struct VcContext *ctx, size_t cap, struct VcLattice **out);

/**
 * # Safety
 * `lat` must come from [`vc_lattice_new`] and not have been freed.
 */
void vc_lattice_free(struct VcLattice *lat);

/**
 * Number of congruences and the height of the lattice.
 *
 * # Safety
 * `lat` must be a live handle; out-pointers may be null to skip a value.
 */
enum VcStatus vc_lattice_stats(const struct VcLattice *lat, size_t *len, size_t *height);

/**
 * Lattice as JSON (`as_dot == false`) or Graphviz DOT.
 *
 * # Safety
 * `lat` must be a live handle and `out` a valid pointer.
 */
enum VcStatus vc_lattice_export(const struct VcLattice *lat, bool as_dot, char **out);

/**
 * Decomposes a congruence of the regular part given as a JSON list of
 * blocks (zero-based indices or transformation strings) and writes the
 * decomposition as JSON.
 *
 * # Safety
 * `ctx` must be a live handle, `blocks_json` a valid C string and `out` a
 * valid pointer.
 */
enum VcStatus vc_classify(const struct VcContext *ctx, const char *blocks_json, char **out);

/**
 * Closed-form lattice height for degree `n` and kernel block sizes
 * `blocks[0..len]`, written as a decimal string.
 *
 * # Safety
 * `blocks` must point to `len` readable values and `out` be a valid pointer.
 */
enum VcStatus vc_height_formula(size_t n, const size_t *blocks, size_t len, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VARCONG_H */
