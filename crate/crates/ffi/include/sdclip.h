#ifndef SDCLIP_H
#define SDCLIP_H

/* Generated by cbindgen from crates/ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum SdcStatus {
  SDC_STATUS_OK = 0,
  SDC_STATUS_NULL_POINTER = 1,
  SDC_STATUS_INVALID_ARGUMENT = 2,
  SDC_STATUS_DIMENSION_MISMATCH = 3,
  SDC_STATUS_RANK_DEFICIENT = 4,
  SDC_STATUS_CONFIG = 5,
  SDC_STATUS_BUFFER_TOO_SMALL = 6,
  SDC_STATUS_INTERNAL = 7,
} SdcStatus;

// Opaque clipping-level controller.
typedef struct SdcController SdcController;

// Opaque sphere decoder bound to a constellation and antenna count.
typedef struct SdcDetector SdcDetector;

// Complex number as two doubles.
typedef struct SdcComplex {
  double re;
  double im;
} SdcComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Description of the last failure on this thread. The pointer stays valid
// until the next failing call on the same thread.
const char *sdc_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *sdc_version(void);

// Frees a string returned by this library.
//
// # Safety
// `s` must be null or a pointer obtained from this library and not yet freed.
void sdc_string_free(char *s);

// Error probability `1 / (1 + e^|L|)` of a hard decision.
//
// # Safety
// `out` must be valid for one write.
enum SdcStatus sdc_bit_error_prob(double llr_magnitude, double *out);

// Block BER estimate from the `n` least reliable of `len` information LLRs.
//
// # Safety
// `llrs` must be valid for `len` reads and `out` for one write.
enum SdcStatus sdc_estimate_block_ber(const double *llrs, size_t len, size_t n, double *out);

// Creates a controller at `l_cl = ln(1/ter - 1)`.
//
// # Safety
// `out` must be valid for one write; the handle must be released with
// [`sdc_controller_free`].
enum SdcStatus sdc_controller_new(double ter, double mu, double l_min, struct SdcController **out);

// Applies one controller step with the previous block's BER estimate.
//
// # Safety
// `handle` must come from [`sdc_controller_new`].
enum SdcStatus sdc_controller_update(struct SdcController *handle, double p_hat_prev);

// Current clipping level.
//
// # Safety
// `handle` must come from [`sdc_controller_new`] and `out` be valid for one write.
enum SdcStatus sdc_controller_level(const struct SdcController *handle, double *out);

// # Safety
// `handle` must be null or come from [`sdc_controller_new`] and not be used afterwards.
void sdc_controller_free(struct SdcController *handle);

// Creates a detector for `m_t` antennas and a constellation of order 2, 4, 16 or 64.
//
// # Safety
// `out` must be valid for one write; release with [`sdc_detector_free`].
enum SdcStatus sdc_detector_new(size_t order, size_t m_t, struct SdcDetector **out);

// Number of LLRs one detection produces (`m_t * bits per symbol`).
//
// # Safety
// `handle` must come from [`sdc_detector_new`].
size_t sdc_detector_num_bits(const struct SdcDetector *handle);

// Soft detection of one channel use.
//
// `r` is the `m_t x m_t` upper-triangular factor (row-major) with a real
// positive diagonal, `y_rot` the rotated received vector of length `m_t`.
// Pass `clip = INFINITY` for unclipped LLRs. `visited_nodes` may be null.
//
// # Safety
// `r` must hold `m_t * m_t` elements, `y_rot` `m_t` elements and `llrs`
// room for `llrs_len` doubles.
enum SdcStatus sdc_detector_detect(struct SdcDetector *handle,
                                   const struct SdcComplex *r,
                                   const struct SdcComplex *y_rot,
                                   double sigma2,
                                   double clip,
                                   double *llrs,
                                   size_t llrs_len,
                                   uint64_t *visited_nodes);

// # Safety
// `handle` must be null or come from [`sdc_detector_new`] and not be used afterwards.
void sdc_detector_free(struct SdcDetector *handle);

// Thin QR of an `m_r x m_t` row-major matrix with a real positive diagonal of `r`.
//
// # Safety
// `h` and `q` must hold `m_r * m_t` elements, `r` must hold `m_t * m_t`.
enum SdcStatus sdc_qr_decompose(const struct SdcComplex *h,
                                size_t m_r,
                                size_t m_t,
                                struct SdcComplex *q,
                                struct SdcComplex *r);

// Log-MAP decoding of `2K` coded-bit a-priori LLRs.
//
// Writes `K` information LLRs to `app_info`; `app_coded` may be null,
// otherwise it receives `2K` coded-bit LLRs.
//
// # Safety
// `a_priori` must hold `len` doubles, `app_info` `len / 2` and `app_coded`
// (when non-null) `len`.
enum SdcStatus sdc_bcjr_decode(const double *a_priori,
                               size_t len,
                               double *app_info,
                               double *app_coded);

// Runs an experiment described by flat `key = value` text and returns the
// CSV output in `*csv_out` (free with [`sdc_string_free`]).
//
// # Safety
// `config_text` must be a NUL-terminated string and `csv_out` valid for one write.
enum SdcStatus sdc_run_experiment(const char *config_text, char **csv_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SDCLIP_H */
