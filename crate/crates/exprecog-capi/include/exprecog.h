/* C interface for the exprecog library. */

#ifndef EXPRECOG_H
#define EXPRECOG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible call.
typedef enum ExpRecogStatus {
  EXP_RECOG_STATUS_OK = 0,
  // A required pointer argument was null.
  EXP_RECOG_STATUS_NULL_ARGUMENT = 1,
  // Arguments violate a precondition (bad dimension, tolerance, …).
  EXP_RECOG_STATUS_INVALID_ARGUMENT = 2,
  // Expression or sample text failed to parse.
  EXP_RECOG_STATUS_PARSE_ERROR = 3,
  // Evaluation failed (off-lattice query, non-finite values, …).
  EXP_RECOG_STATUS_EVALUATION_ERROR = 4,
  // An unexpected internal failure; details in the last error message.
  EXP_RECOG_STATUS_INTERNAL_ERROR = 5,
} ExpRecogStatus;

// Opaque oracle handle.
typedef struct ExpRecogOracle ExpRecogOracle;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string; do not free.
const char *exprecog_version(void);

// The most recent error message on this thread, or null. Free with
// `exprecog_string_free`.
char *exprecog_last_error_message(void);

// Release a string returned by this library.
//
// # Safety
// `s` must be a pointer previously returned by an exprecog function and
// not yet freed.
void exprecog_string_free(char *s);

// Build an oracle from a closed-form expression in variables x1..xd.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum ExpRecogStatus exprecog_oracle_from_expression(const char *text,
                                                    size_t dim,
                                                    struct ExpRecogOracle **out);

// Build an oracle from samples in the JSON schema
// `{"dim": d, "points": [...], "values_re": [...], "values_im": [...]}`.
// The points must form a complete uniform grid.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum ExpRecogStatus exprecog_oracle_from_samples_json(const char *json,
                                                      struct ExpRecogOracle **out);

// Number of variables, or 0 for a null handle.
//
// # Safety
// `oracle` must be null or a live handle.
size_t exprecog_oracle_dim(const struct ExpRecogOracle *oracle);

// Evaluate the oracle at a point of `len` coordinates.
//
// # Safety
// `point` must reference `len` readable doubles; out pointers must be
// valid; `oracle` must be a live handle.
enum ExpRecogStatus exprecog_oracle_eval(const struct ExpRecogOracle *oracle,
                                         const double *point,
                                         size_t len,
                                         double *out_re,
                                         double *out_im);

// Release an oracle handle.
//
// # Safety
// `oracle` must be null or a handle not yet freed.
void exprecog_oracle_free(struct ExpRecogOracle *oracle);

// Run the determinant vanishing test at the given order over a seeded
// grid. Writes pass/fail and, when `out_json` is non-null, a JSON report.
//
// # Safety
// `oracle` must be a live handle; `out_pass` must be valid; `out_json`
// may be null.
enum ExpRecogStatus exprecog_check(const struct ExpRecogOracle *oracle,
                                   size_t order,
                                   double tol,
                                   size_t grid_size,
                                   uint64_t seed,
                                   bool *out_pass,
                                   char **out_json);

// Find the smallest passing order up to `n_max`. `*out_found` reports
// whether one exists; `*out_order` is meaningful only when found.
//
// # Safety
// `oracle` must be a live handle; out pointers must be valid.
enum ExpRecogStatus exprecog_estimate_order(const struct ExpRecogOracle *oracle,
                                            size_t n_max,
                                            double tol,
                                            size_t grid_size,
                                            uint64_t seed,
                                            bool *out_found,
                                            size_t *out_order);

// Recover a 1-D exponential polynomial model. Writes whether a model was
// recovered and, when `out_json` is non-null, a JSON report with the model
// or the failing stage.
//
// # Safety
// `oracle` must be a live 1-D handle; `out_recovered` must be valid;
// `out_json` may be null.
enum ExpRecogStatus exprecog_recover_1d(const struct ExpRecogOracle *oracle,
                                        size_t n_max,
                                        double accept_tol,
                                        uint64_t seed,
                                        bool *out_recovered,
                                        char **out_json);

// Verify the finite span conditions at dense-subgroup generators drawn
// from the ball of the given radius around the origin. `*out_certified`
// is true only when every generator passes.
//
// # Safety
// `oracle` must be a live handle; `out_certified` must be valid;
// `out_json` may be null.
enum ExpRecogStatus exprecog_montel_certify(const struct ExpRecogOracle *oracle,
                                            size_t order,
                                            double radius,
                                            double tol,
                                            uint64_t seed,
                                            bool *out_certified,
                                            char **out_json);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* EXPRECOG_H */
