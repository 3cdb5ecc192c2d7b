/* C interface to the biphoton library.
 *
 * Conventions: constructors write an opaque handle through an out pointer
 * and return a status code; handles are released with the matching _free
 * function; biphoton_last_error_message() describes the most recent
 * failure on the calling thread.
 *
 * All angular frequencies are rad/ps, delays ps, crystal lengths mm,
 * group-delay mismatches ps/mm.
 *
 * Kept in sync with crates/ffi/src/lib.rs; regenerate with
 *   cbindgen --config cbindgen.toml --crate biphoton-ffi --output include/biphoton.h
 * when cbindgen is available.
 */

#ifndef BIPHOTON_H
#define BIPHOTON_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes, aligned with the command-line exit classes. */
typedef enum biphoton_status {
  BIPHOTON_OK = 0,
  BIPHOTON_INVALID_ARGUMENT = 1,
  BIPHOTON_CONFIG_ERROR = 2,
  BIPHOTON_NUMERICAL_ERROR = 3,
  BIPHOTON_IO_ERROR = 4,
} biphoton_status;

/* Opaque process model handle. */
typedef struct biphoton_model biphoton_model;
/* Opaque sampled joint-spectrum handle. */
typedef struct biphoton_grid biphoton_grid;
/* Opaque coincidence-trace handle. */
typedef struct biphoton_trace biphoton_trace;

/* Message for the most recent failure on this thread. The pointer stays
 * valid until the next failing call on the same thread. */
const char *biphoton_last_error_message(void);

/* Create a single-process model. sinc_shape nonzero selects the true sinc
 * phasematching, zero the Gaussian approximation. */
biphoton_status biphoton_model_new(double omega_c_rad_per_ps,
                                   double sigma_rad_per_ps,
                                   double length_mm,
                                   double dk_s_ps_per_mm,
                                   double dk_i_ps_per_mm,
                                   int sinc_shape,
                                   biphoton_model **out);

/* Attach the displaced-process superposition F = f+ + r e^{i phi} f-. */
biphoton_status biphoton_model_set_superposition(biphoton_model *model,
                                                 double delta_omega_rad_per_ps,
                                                 double r,
                                                 double phi_rad);

void biphoton_model_free(biphoton_model *model);

/* Sample the normalized joint spectrum. Pass samples = 0 or
 * half_span_rad_per_ps = 0 to derive either from the model. */
biphoton_status biphoton_jsa_build(const biphoton_model *model,
                                   size_t samples,
                                   double half_span_rad_per_ps,
                                   biphoton_grid **out);

void biphoton_grid_free(biphoton_grid *grid);

/* Samples per axis of a built grid; 0 on a null handle. */
size_t biphoton_grid_samples(const biphoton_grid *grid);

/* Coincidence probability of the sampled state at one delay. */
biphoton_status biphoton_hom_numeric(const biphoton_grid *grid,
                                     double tau_ps,
                                     double *out_p);

/* Closed-form coincidence probability of a Gaussian-approximation model. */
biphoton_status biphoton_hom_analytic(const biphoton_model *model,
                                      double tau_ps,
                                      double *out_p);

/* Sweep either engine over a uniform delay axis of `count` samples. */
biphoton_status biphoton_sweep_numeric(const biphoton_grid *grid,
                                       double start_ps,
                                       double stop_ps,
                                       size_t count,
                                       biphoton_trace **out);

biphoton_status biphoton_sweep_analytic(const biphoton_model *model,
                                        double start_ps,
                                        double stop_ps,
                                        size_t count,
                                        biphoton_trace **out);

size_t biphoton_trace_len(const biphoton_trace *trace);

/* Read one trace sample. */
biphoton_status biphoton_trace_get(const biphoton_trace *trace,
                                   size_t index,
                                   double *out_tau_ps,
                                   double *out_p);

void biphoton_trace_free(biphoton_trace *trace);

/* Apply the p > 1/2 witness. Pass a negative epsilon for the default guard
 * band. Writes 1 for Entangled, 0 for Inconclusive. */
biphoton_status biphoton_witness(const biphoton_trace *trace,
                                 double epsilon,
                                 int *out_entangled);

/* Weight of the antisymmetric two-mode state in the sampled spectrum, in
 * the Hermite basis described by center, scale and max order. */
biphoton_status biphoton_singlet_overlap(const biphoton_grid *grid,
                                         double center_rad_per_ps,
                                         double scale_rad_per_ps,
                                         size_t max_order,
                                         double *out_overlap);

/* Copy up to `capacity` Schmidt values (descending) into out_values; the
 * number written lands in out_written. */
biphoton_status biphoton_schmidt_values(const biphoton_grid *grid,
                                        double *out_values,
                                        size_t capacity,
                                        size_t *out_written);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* BIPHOTON_H */
