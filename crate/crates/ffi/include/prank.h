#ifndef PRANK_H
#define PRANK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PrankFieldOp {
  PRANK_FIELD_OP_ADD = 0,
  PRANK_FIELD_OP_SUB = 1,
  PRANK_FIELD_OP_MUL = 2,
  /**
   * Ignores `b`; fails on zero.
   */
  PRANK_FIELD_OP_INV = 3,
} PrankFieldOp;

/**
 * Result codes. Values 2 to 5 match the command-line exit codes.
 */
typedef enum PrankStatus {
  PRANK_STATUS_OK = 0,
  PRANK_STATUS_NULL_POINTER = 1,
  PRANK_STATUS_INVALID_ARGUMENT = 2,
  PRANK_STATUS_MISMATCH = 3,
  PRANK_STATUS_FAMILY_VIOLATION = 4,
  PRANK_STATUS_BUDGET_EXCEEDED = 5,
  PRANK_STATUS_MALFORMED_INPUT = 6,
  PRANK_STATUS_PANIC = 7,
} PrankStatus;

/**
 * A partition-rank certificate.
 */
typedef struct PrankCertificate PrankCertificate;

/**
 * A finite field GF(q).
 */
typedef struct PrankField PrankField;

/**
 * A dense tensor over a finite field.
 */
typedef struct PrankTensor PrankTensor;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Owned by the
 * library and valid until the next call on the same thread.
 */
const char *prank_last_error(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must be NULL or a pointer obtained from this library, freed once.
 */
void prank_string_free(char *s);

/**
 * Library version, static storage.
 */
const char *prank_version(void);

/**
 * # Safety
 * `out_field` must be a valid pointer.
 */
enum PrankStatus prank_field_new(uint64_t q, struct PrankField **out_field);

/**
 * # Safety
 * `field` must be NULL or a handle from `prank_field_new`, freed once.
 */
void prank_field_free(struct PrankField *field);

/**
 * # Safety
 * `field` must be a valid handle.
 */
uint32_t prank_field_order(const struct PrankField *field);

/**
 * # Safety
 * `field` must be a valid handle.
 */
uint32_t prank_field_characteristic(const struct PrankField *field);

/**
 * Applies `op` to element codes `a` and `b`.
 *
 * # Safety
 * `field` must be a valid handle and `out_code` a valid pointer.
 */
enum PrankStatus prank_field_op(const struct PrankField *field,
                                enum PrankFieldOp op,
                                uint32_t a,
                                uint32_t b,
                                uint32_t *out_code);

/**
 * Monomial count as a JSON report. `method` is "exact", "binomial" or "chernoff".
 *
 * # Safety
 * `method` must be a NUL-terminated string and `out_json` a valid pointer.
 */
enum PrankStatus prank_bounds_monomials(uint64_t q,
                                        uint64_t n,
                                        double d,
                                        const char *method,
                                        char **out_json);

/**
 * Right-angle bound as a JSON report.
 *
 * # Safety
 * `out_json` must be a valid pointer.
 */
enum PrankStatus prank_bounds_right_angle(uint64_t q, uint64_t n, char **out_json);

/**
 * Corner bounds. `mode` is "simplified", "precise", "displayed" (one JSON
 * report) or "all" (a JSON array).
 *
 * # Safety
 * `mode` must be a NUL-terminated string and `out_json` a valid pointer.
 */
enum PrankStatus prank_bounds_corner(uint64_t k,
                                     uint64_t q,
                                     uint64_t n,
                                     const char *mode,
                                     char **out_json);

/**
 * Built-in tensor: "dxy-dzw", "diag", "hk", "right-angle-f", "fk", "jk".
 * `k < 0` selects the default arity. For corner tensors `axis_size` must be
 * a power of `q`.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out_tensor` a valid pointer.
 */
enum PrankStatus prank_tensor_builtin(const char *name,
                                      uint64_t q,
                                      int64_t k,
                                      uintptr_t axis_size,
                                      struct PrankTensor **out_tensor);

/**
 * # Safety
 * `json` must be a NUL-terminated string and `out_tensor` a valid pointer.
 */
enum PrankStatus prank_tensor_from_json(const char *json, struct PrankTensor **out_tensor);

/**
 * # Safety
 * `tensor` must be a valid handle and `out_json` a valid pointer.
 */
enum PrankStatus prank_tensor_to_json(const struct PrankTensor *tensor, char **out_json);

/**
 * # Safety
 * `tensor` must be NULL or a handle from this library, freed once.
 */
void prank_tensor_free(struct PrankTensor *tensor);

/**
 * # Safety
 * `tensor` must be a valid handle.
 */
uintptr_t prank_tensor_arity(const struct PrankTensor *tensor);

/**
 * # Safety
 * `tensor` must be a valid handle.
 */
uintptr_t prank_tensor_axis_size(const struct PrankTensor *tensor);

/**
 * Entry at `tuple` (length = arity) as an element code.
 *
 * # Safety
 * `tuple` must point to `len` values and `out_code` be a valid pointer.
 */
enum PrankStatus prank_tensor_get(const struct PrankTensor *tensor,
                                  const uintptr_t *tuple,
                                  uintptr_t len,
                                  uint32_t *out_code);

/**
 * Number of non-zero diagonal entries, or -1 when the tensor is not diagonal.
 *
 * # Safety
 * `tensor` must be a valid handle and `out_count` a valid pointer.
 */
enum PrankStatus prank_tensor_diagonal_bound(const struct PrankTensor *tensor, int64_t *out_count);

/**
 * # Safety
 * `json` must be a NUL-terminated string and `out_cert` a valid pointer.
 */
enum PrankStatus prank_certificate_from_json(const char *json, struct PrankCertificate **out_cert);

/**
 * # Safety
 * `cert` must be a valid handle and `out_json` a valid pointer.
 */
enum PrankStatus prank_certificate_to_json(const struct PrankCertificate *cert, char **out_json);

/**
 * # Safety
 * `cert` must be NULL or a handle from this library, freed once.
 */
void prank_certificate_free(struct PrankCertificate *cert);

/**
 * # Safety
 * `cert` must be a valid handle.
 */
uintptr_t prank_certificate_term_count(const struct PrankCertificate *cert);

/**
 * Checks `cert` against `target` pointwise. Returns `Ok`, `Mismatch` or
 * `FamilyViolation`. When `out_json` is non-NULL it receives the outcome,
 * including the first mismatching tuple.
 *
 * # Safety
 * Handles must be valid; `out_json` may be NULL.
 */
enum PrankStatus prank_certificate_verify(const struct PrankCertificate *cert,
                                          const struct PrankTensor *target,
                                          char **out_json);

/**
 * Slice-rank certificate for the right-angle tensor on `(F_q^n)^3`.
 * `out_report` may be NULL.
 *
 * # Safety
 * `out_cert` must be a valid pointer.
 */
enum PrankStatus prank_decompose_right_angle(uint64_t q,
                                             uintptr_t n,
                                             struct PrankCertificate **out_cert,
                                             char **out_report);

/**
 * Partition-rank certificate for J_k on `(F_q^n)^(k+1)`. `out_report` may be NULL.
 *
 * # Safety
 * `out_cert` must be a valid pointer.
 */
enum PrankStatus prank_decompose_jk(uintptr_t k,
                                    uint64_t q,
                                    uintptr_t n,
                                    struct PrankCertificate **out_cert,
                                    char **out_report);

/**
 * First k-right corner among `npoints` points of `F_q^n`, given as
 * row-major coordinate codes (`npoints * n` values). Writes the witness as
 * JSON, or `null` when the set is corner-free.
 *
 * # Safety
 * `codes` must point to `npoints * n` values and `out_json` be valid.
 */
enum PrankStatus prank_find_corner(uint64_t q,
                                   uintptr_t n,
                                   uintptr_t k,
                                   const uint32_t *codes,
                                   uintptr_t npoints,
                                   char **out_json);

/**
 * Largest corner-free subset search. `mode` is "exhaustive", "greedy" or
 * "random-restart"; `node_budget == 0` means unlimited. Returns
 * `BudgetExceeded` (with the result still written) when an exhaustive run is cut.
 *
 * # Safety
 * `mode` must be a NUL-terminated string and `out_json` a valid pointer.
 */
enum PrankStatus prank_max_corner_free(uint64_t q,
                                       uintptr_t n,
                                       uintptr_t k,
                                       const char *mode,
                                       uint64_t seed,
                                       uint64_t node_budget,
                                       char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PRANK_H */
