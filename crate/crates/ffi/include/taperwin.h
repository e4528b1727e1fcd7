/* C interface of the taperwin window solver. */

#ifndef TAPERWIN_H
#define TAPERWIN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Solution strategy, mirroring the command-line `--method` choices.
typedef enum TwMethod {
  TW_METHOD_AUTO = 0,
  TW_METHOD_CLOSED = 1,
  TW_METHOD_PROJECT = 2,
  TW_METHOD_GRID = 3,
} TwMethod;

// Status codes returned by every entry point.
typedef enum TwStatus {
  // Success.
  TW_OK = 0,
  // A required pointer argument was NULL.
  TW_NULL_POINTER = 1,
  // The input signal or a parameter was unusable.
  TW_INVALID_INPUT = 2,
  // The solver failed to converge.
  TW_SOLVER_FAILURE = 3,
  // A caller-provided buffer had the wrong length.
  TW_BAD_BUFFER = 4,
} TwStatus;

// Which stage of the cascade produced the result.
typedef enum TwStage {
  TW_STAGE_UNCONSTRAINED = 0,
  TW_STAGE_EQUALITY = 1,
  TW_STAGE_PROJECTION = 2,
  TW_STAGE_GRID = 3,
} TwStage;

// An opaque solver report. Allocate with [`tw_solve`], read through the
// accessor functions, release with [`tw_report_free`].
typedef struct TwReport TwReport;

// Solver parameters. Zero-initialise and overwrite what you need:
// a zero field means "use the documented default".
typedef struct TwOptions {
  // Averaging half-width; 0 selects the maximum `(n - 1) / 2`.
  size_t order;
  // Solution strategy.
  enum TwMethod method;
  // Feasibility / certificate tolerance; 0 selects 1e-9.
  double tol;
  // Projection iteration budget; 0 selects 10000.
  size_t max_iter;
  // Grid steps per coefficient for `TW_METHOD_GRID`; 0 selects 50.
  size_t grid_resolution;
} TwOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// The default options: auto method, maximum order, documented tolerances.
struct TwOptions tw_options_default(void);

// Solves for the optimal tapered window of a cyclic signal.
//
// `samples`/`len` describe one period (odd length >= 3, finite values).
// On success, `*out` receives a fresh report handle. On failure the status
// tells the class of problem and [`tw_last_error_message`] the details;
// `*out` is left untouched.
//
// # Safety
//
// `samples` must point to `len` readable doubles and `out` to a writable
// pointer slot.
enum TwStatus tw_solve(const double *samples,
                       size_t len,
                       const struct TwOptions *options,
                       struct TwReport **out);

// Releases a report handle. NULL is a no-op.
//
// # Safety
//
// `report` must be a pointer returned by [`tw_solve`] that has not already
// been freed.
void tw_report_free(struct TwReport *report);

// Signal length `n` of a report, or 0 for NULL.
//
// # Safety
//
// `report` must be a live report handle or NULL.
size_t tw_report_signal_len(const struct TwReport *report);

// Window half-width `k` of a report, or 0 for NULL.
//
// # Safety
//
// `report` must be a live report handle or NULL.
size_t tw_report_order(const struct TwReport *report);

// The directly recomputed smoothing loss, or NaN for NULL.
//
// # Safety
//
// `report` must be a live report handle or NULL.
double tw_report_loss(const struct TwReport *report);

// Which stage produced the result; NULL maps to the unconstrained stage.
//
// # Safety
//
// `report` must be a live report handle or NULL.
enum TwStage tw_report_stage(const struct TwReport *report);

// Whether the optimal mixture was non-unique (rank-deficient objective).
//
// # Safety
//
// `report` must be a live report handle or NULL.
bool tw_report_degenerate(const struct TwReport *report);

// Projection major cycles (or grid evaluations); 0 for closed forms.
//
// # Safety
//
// `report` must be a live report handle or NULL.
size_t tw_report_iterations(const struct TwReport *report);

// Copies the full-length window weights (length `n`, centre at index
// `n / 2`) into `buffer`.
//
// # Safety
//
// `report` must be a live report handle; `buffer` must point to `buffer_len`
// writable doubles.
enum TwStatus tw_report_weights(const struct TwReport *report, double *buffer, size_t buffer_len);

// Copies the mixture coefficients (length `k`) into `buffer`.
//
// # Safety
//
// `report` must be a live report handle; `buffer` must point to `buffer_len`
// writable doubles.
enum TwStatus tw_report_mixture(const struct TwReport *report, double *buffer, size_t buffer_len);

// Smooths `samples` with the report's window, writing `len` samples to
// `out`. `len` must equal the report's signal length.
//
// # Safety
//
// `report` must be a live report handle; `samples` and `out` must point to
// `len` readable / writable doubles respectively.
enum TwStatus tw_smooth(const struct TwReport *report,
                        const double *samples,
                        size_t len,
                        double *out);

// The message describing this thread's most recent failure, or NULL if no
// failure has occurred. The pointer stays valid until the next failing call
// on the same thread; do not free it.
const char *tw_last_error_message(void);

// Stable lowercase name of a stage value.
const char *tw_stage_name(enum TwStage stage);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TAPERWIN_H */
