/* C interface of the multirate FRF identification library. */
#ifndef MRFRF_H
#define MRFRF_H

#include <stddef.h>
#include <stdint.h>

#if defined(MRFRF_BUILDING_LIBRARY)
#define MRFRF_API __attribute__((visibility("default")))
#else
#define MRFRF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mrfrf_status {
  MRFRF_OK = 0,
  MRFRF_E_INVALID_ARGUMENT = 1,
  MRFRF_E_INVALID_CONFIG = 2,
  MRFRF_E_RANK_DEFICIENT = 3,
  MRFRF_E_LOCAL_POLE = 4,
  MRFRF_E_DEGREES_OF_FREEDOM = 5,
  MRFRF_E_POLE_ON_GRID = 6,
  MRFRF_E_OVERFLOW = 7,
  MRFRF_E_IO = 8,
  MRFRF_E_INGESTION = 9,
  MRFRF_E_GRID_MISMATCH = 10,
  MRFRF_E_INTERNAL = 11
} mrfrf_status;

/* per-bin status codes in estimates */
enum {
  MRFRF_BIN_OK = 0,
  MRFRF_BIN_RANK_DEFICIENT = 1,
  MRFRF_BIN_LOCAL_POLE = 2,
  MRFRF_BIN_NO_DOF = 3,
  MRFRF_BIN_NO_INPUT_POWER = 4
};

enum {
  MRFRF_METHOD_LRM = 0,
  MRFRF_METHOD_LPM = 1,
  MRFRF_METHOD_SA = 2,
  MRFRF_METHOD_LRM_SK = 3,
  MRFRF_METHOD_LRM_SK_LM = 4
};

typedef struct mrfrf_spectrum mrfrf_spectrum;
typedef struct mrfrf_system mrfrf_system;
typedef struct mrfrf_estimate mrfrf_estimate;
typedef struct mrfrf_config mrfrf_config;
typedef struct mrfrf_report mrfrf_report;

MRFRF_API const char* mrfrf_version(void);

/* Message of the last failed call on this thread; "" when none. */
MRFRF_API const char* mrfrf_last_error(void);
MRFRF_API const char* mrfrf_status_name(mrfrf_status s);
/* 0 success, 2 config/validation, 3 numerical, 4 I/O */
MRFRF_API int mrfrf_exit_code(mrfrf_status s);

/* spectra */
MRFRF_API mrfrf_status mrfrf_spectrum_from_samples(const double* samples, size_t n, double sampling_time,
                                                   mrfrf_spectrum** out);
MRFRF_API size_t mrfrf_spectrum_size(const mrfrf_spectrum* s);
MRFRF_API mrfrf_status mrfrf_spectrum_get(const mrfrf_spectrum* s, size_t k, double* re, double* im);
MRFRF_API void mrfrf_spectrum_free(mrfrf_spectrum* s);

/* signals */
MRFRF_API mrfrf_status mrfrf_multisine(size_t n, double rms, uint64_t seed, double* samples_out);
/* out must hold n / factor samples */
MRFRF_API mrfrf_status mrfrf_downsample(const double* samples, size_t n, int factor, double* out);

/* systems: coefficients in ascending powers of q^-1 */
MRFRF_API mrfrf_status mrfrf_system_create(const double* b, size_t nb, const double* a, size_t na,
                                           mrfrf_system** out);
MRFRF_API mrfrf_status mrfrf_system_resonant(const double* frequency_hz, const double* damping, const double* gain,
                                             size_t modes, double sampling_time, mrfrf_system** out);
MRFRF_API mrfrf_status mrfrf_system_simulate(const mrfrf_system* sys, const double* input, size_t n,
                                             double* output);
MRFRF_API mrfrf_status mrfrf_system_freqresp(const mrfrf_system* sys, size_t n_points, double sampling_time,
                                             mrfrf_spectrum** out);
MRFRF_API void mrfrf_system_free(mrfrf_system* sys);

/* closed-form local model estimate */
typedef struct mrfrf_estimator_options {
  int factor;
  int window_size;
  int system_degree;
  int transient_degree;
  int denominator_degree;
  double rcond_threshold; /* <= 0 selects the default */
  unsigned threads;
} mrfrf_estimator_options;

MRFRF_API mrfrf_status mrfrf_identify(const mrfrf_spectrum* input, const mrfrf_spectrum* output,
                                      const mrfrf_estimator_options* options, mrfrf_estimate** out);
MRFRF_API size_t mrfrf_estimate_size(const mrfrf_estimate* e);
MRFRF_API mrfrf_status mrfrf_estimate_get(const mrfrf_estimate* e, size_t i, size_t* fast_bin, double* re,
                                          double* im, double* variance, int* status);
/* cumulative error against a true FRF on the N-point grid, fast bins 1..n */
MRFRF_API mrfrf_status mrfrf_cumulative_error(const mrfrf_spectrum* truth, const mrfrf_estimate* e, size_t n,
                                              double* value);
MRFRF_API void mrfrf_estimate_free(mrfrf_estimate* e);

/* experiment runs */
MRFRF_API mrfrf_status mrfrf_config_load(const char* path, mrfrf_config** out);
MRFRF_API mrfrf_status mrfrf_config_parse(const char* json_text, mrfrf_config** out);
MRFRF_API mrfrf_status mrfrf_config_set_seed(mrfrf_config* c, uint64_t seed);
MRFRF_API mrfrf_status mrfrf_config_set_threads(mrfrf_config* c, unsigned threads);
MRFRF_API mrfrf_status mrfrf_config_set_output_directory(mrfrf_config* c, const char* dir);
/* comma-separated names: LRM,LPM,SA,LRM+SK,LRM+SK+LM */
MRFRF_API mrfrf_status mrfrf_config_set_methods(mrfrf_config* c, const char* methods);
MRFRF_API void mrfrf_config_free(mrfrf_config* c);

MRFRF_API mrfrf_status mrfrf_run_simulate(const mrfrf_config* c, mrfrf_report** out);
MRFRF_API mrfrf_status mrfrf_run_identify(const mrfrf_config* c, mrfrf_report** out);
MRFRF_API mrfrf_status mrfrf_run_compare(const mrfrf_config* c, mrfrf_report** out);
MRFRF_API mrfrf_status mrfrf_run_validate(const mrfrf_config* c, mrfrf_report** out);

MRFRF_API size_t mrfrf_report_line_count(const mrfrf_report* r);
MRFRF_API const char* mrfrf_report_line(const mrfrf_report* r, size_t i);
MRFRF_API void mrfrf_report_free(mrfrf_report* r);

#ifdef __cplusplus
}
#endif

#endif
