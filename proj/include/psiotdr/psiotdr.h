#ifndef PSIOTDR_PSIOTDR_H
#define PSIOTDR_PSIOTDR_H

/* Photon-counting OTDR simulator and trace analysis.
 *
 * Every fallible call returns a psiotdr_status; on failure the message is
 * available from psiotdr_last_error() on the same thread. Strings returned
 * through char** are owned by the caller and released with
 * psiotdr_string_free(). Files are written to a temporary name and renamed
 * into place, so a failed call never leaves a partial artifact. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(PSIOTDR_BUILDING_LIBRARY)
#    define PSIOTDR_API __declspec(dllexport)
#  else
#    define PSIOTDR_API __declspec(dllimport)
#  endif
#else
#  define PSIOTDR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum psiotdr_status {
  PSIOTDR_OK = 0,
  PSIOTDR_ERR_CONFIG = 2,
  PSIOTDR_ERR_ANALYSIS = 3,
  PSIOTDR_ERR_IO = 4,
  PSIOTDR_ERR_INVALID_ARGUMENT = 5,
  PSIOTDR_ERR_INTERNAL = 6
} psiotdr_status;

typedef struct psiotdr_scenario psiotdr_scenario;
typedef struct psiotdr_histogram psiotdr_histogram;

PSIOTDR_API const char* psiotdr_version(void);
/* Message of the last failed call on this thread ("" if none). */
PSIOTDR_API const char* psiotdr_last_error(void);
PSIOTDR_API void psiotdr_string_free(char* s);

/* ---- scenarios ---- */

PSIOTDR_API psiotdr_status psiotdr_scenario_load_file(const char* path, psiotdr_scenario** out);
PSIOTDR_API psiotdr_status psiotdr_scenario_from_json(const char* json, psiotdr_scenario** out);
PSIOTDR_API psiotdr_status psiotdr_scenario_preset(const char* name, psiotdr_scenario** out);
PSIOTDR_API void psiotdr_scenario_free(psiotdr_scenario* s);

/* Newline-separated preset names. */
PSIOTDR_API psiotdr_status psiotdr_preset_names(char** out);

PSIOTDR_API psiotdr_status psiotdr_scenario_to_json(const psiotdr_scenario* s, char** out);
PSIOTDR_API psiotdr_status psiotdr_scenario_write_file(const psiotdr_scenario* s, const char* path);
PSIOTDR_API psiotdr_status psiotdr_scenario_hash(const psiotdr_scenario* s, char** out);
PSIOTDR_API uint64_t psiotdr_scenario_seed(const psiotdr_scenario* s);
PSIOTDR_API uint64_t psiotdr_scenario_shots(const psiotdr_scenario* s);

/* Derived quantities and warnings as JSON:
 * {"round_trip_s", "max_repetition_rate_hz", "repetition_rate_hz", "shots",
 *  "per_shot_probability", "warnings": [...]} */
PSIOTDR_API psiotdr_status psiotdr_scenario_diagnostics(const psiotdr_scenario* s, char** out);

/* ---- simulation ---- */

typedef struct psiotdr_run_options {
  int has_seed;
  uint64_t seed;
  int has_shots;
  uint64_t shots;
  unsigned threads; /* 0: hardware concurrency; never changes results */
} psiotdr_run_options;

PSIOTDR_API void psiotdr_run_options_init(psiotdr_run_options* opt);

/* opt may be NULL. */
PSIOTDR_API psiotdr_status psiotdr_simulate(const psiotdr_scenario* s, const psiotdr_run_options* opt,
                                            psiotdr_histogram** out);

/* ---- histograms ---- */

PSIOTDR_API psiotdr_status psiotdr_histogram_read_csv(const char* path, psiotdr_histogram** out);
PSIOTDR_API psiotdr_status psiotdr_histogram_write_csv(const psiotdr_histogram* h, const char* path);
PSIOTDR_API psiotdr_status psiotdr_histogram_to_csv(const psiotdr_histogram* h, char** out);
PSIOTDR_API void psiotdr_histogram_free(psiotdr_histogram* h);

PSIOTDR_API size_t psiotdr_histogram_bins(const psiotdr_histogram* h);
PSIOTDR_API uint64_t psiotdr_histogram_count(const psiotdr_histogram* h, size_t bin);
PSIOTDR_API uint64_t psiotdr_histogram_shots(const psiotdr_histogram* h);
PSIOTDR_API uint64_t psiotdr_histogram_seed(const psiotdr_histogram* h);
PSIOTDR_API double psiotdr_histogram_bin_width_s(const psiotdr_histogram* h);
PSIOTDR_API double psiotdr_histogram_origin_s(const psiotdr_histogram* h);

/* ---- analysis ---- */

typedef struct psiotdr_analysis_options {
  int has_fit_window;
  double fit_window_m[2];
  int has_noise_window;
  double noise_window_m[2];
  /* air regions as consecutive [begin, end) pairs, display metres */
  const double* air_regions_m;
  size_t air_region_count;
  double group_index;       /* 0: scenario value or the default 1.468 */
  double min_prominence_db; /* 0: scenario value or the default 3 dB */
  int beat_length;          /* attempt beat-length estimation in the fit window */
} psiotdr_analysis_options;

PSIOTDR_API void psiotdr_analysis_options_init(psiotdr_analysis_options* opt);

/* Report JSON. `hints` (may be NULL) supplies windows, air regions and the
 * display group index; explicit fields in `opt` override them. */
PSIOTDR_API psiotdr_status psiotdr_analyze(const psiotdr_histogram* h, const psiotdr_scenario* hints,
                                           const psiotdr_analysis_options* opt, char** out);

/* group_index 0 selects the default. */
PSIOTDR_API psiotdr_status psiotdr_trace_write_csv(const psiotdr_histogram* h, double group_index,
                                                   const char* path);
PSIOTDR_API psiotdr_status psiotdr_trace_write_svg(const psiotdr_histogram* h, double group_index,
                                                   double min_prominence_db, const char* path);

/* Repeated acquisitions; report JSON with the accuracy object filled in. */
PSIOTDR_API psiotdr_status psiotdr_accuracy(const psiotdr_scenario* s, size_t repeats, int identical_seeds,
                                            const psiotdr_run_options* opt, char** out);

/* ---- detector figures ---- */

PSIOTDR_API double psiotdr_nep(double efficiency, double dark_rate_hz, double wavelength_m);

/* Atomically replace `path` with `content`. */
PSIOTDR_API psiotdr_status psiotdr_write_text_file(const char* path, const char* content);

#ifdef __cplusplus
}
#endif

#endif
