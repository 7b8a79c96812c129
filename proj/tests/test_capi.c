/* The public API exercised from plain C. */

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "psiotdr/psiotdr.h"

static int failures = 0;

#define EXPECT(cond)                                                  \
  do {                                                                \
    if (!(cond)) {                                                    \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                     \
    }                                                                 \
  } while (0)

int main(int argc, char** argv) {
  const char* dir = argc > 1 ? argv[1] : ".";
  char csv[1024], trace[1024], svg[1024];
  snprintf(csv, sizeof csv, "%s/capi_hist.csv", dir);
  snprintf(trace, sizeof trace, "%s/capi_trace.csv", dir);
  snprintf(svg, sizeof svg, "%s/capi_trace.svg", dir);

  EXPECT(fabs(psiotdr_nep(0.008, 2000.0, 1551e-9) / 1.0125e-15 - 1.0) < 1e-3);

  psiotdr_scenario* bad = NULL;
  EXPECT(psiotdr_scenario_preset("no-such-preset", &bad) == PSIOTDR_ERR_CONFIG);
  EXPECT(bad == NULL);
  EXPECT(strstr(psiotdr_last_error(), "unknown preset") != NULL);
  EXPECT(psiotdr_scenario_preset(NULL, &bad) == PSIOTDR_ERR_INVALID_ARGUMENT);
  EXPECT(psiotdr_scenario_from_json("{ \"name\": ", &bad) == PSIOTDR_ERR_CONFIG);
  EXPECT(strncmp(psiotdr_last_error(), "line 1", 6) == 0);

  char* names = NULL;
  EXPECT(psiotdr_preset_names(&names) == PSIOTDR_OK);
  EXPECT(names && strstr(names, "pigtail2.3m-accuracy\n") != NULL);
  psiotdr_string_free(names);

  psiotdr_scenario* s = NULL;
  EXPECT(psiotdr_scenario_preset("pigtail2.3m-accuracy", &s) == PSIOTDR_OK);
  EXPECT(psiotdr_scenario_shots(s) == 100000);

  char* json = NULL;
  EXPECT(psiotdr_scenario_to_json(s, &json) == PSIOTDR_OK);
  psiotdr_scenario* again = NULL;
  EXPECT(psiotdr_scenario_from_json(json, &again) == PSIOTDR_OK);
  char *h1 = NULL, *h2 = NULL;
  psiotdr_scenario_hash(s, &h1);
  psiotdr_scenario_hash(again, &h2);
  EXPECT(h1 && h2 && strcmp(h1, h2) == 0 && strlen(h1) == 16);
  psiotdr_string_free(h1);
  psiotdr_string_free(h2);
  psiotdr_string_free(json);
  psiotdr_scenario_free(again);

  char* diag = NULL;
  EXPECT(psiotdr_scenario_diagnostics(s, &diag) == PSIOTDR_OK);
  EXPECT(diag && strstr(diag, "per_shot_probability") != NULL);
  psiotdr_string_free(diag);

  psiotdr_run_options opt;
  psiotdr_run_options_init(&opt);
  opt.has_shots = 1;
  opt.shots = 0;
  psiotdr_histogram* h = NULL;
  EXPECT(psiotdr_simulate(s, &opt, &h) == PSIOTDR_ERR_CONFIG);
  EXPECT(strstr(psiotdr_last_error(), "shots must be >= 1") != NULL);

  opt.shots = 50000;
  opt.threads = 2;
  EXPECT(psiotdr_simulate(s, &opt, &h) == PSIOTDR_OK);
  EXPECT(psiotdr_histogram_shots(h) == 50000);
  EXPECT(psiotdr_histogram_seed(h) == psiotdr_scenario_seed(s));
  EXPECT(psiotdr_histogram_bins(h) > 3000);
  {
    uint64_t total = 0;
    for (size_t i = 0; i < psiotdr_histogram_bins(h); ++i) total += psiotdr_histogram_count(h, i);
    EXPECT(total > 0 && total <= 50000);
  }
  EXPECT(psiotdr_histogram_write_csv(h, csv) == PSIOTDR_OK);

  psiotdr_histogram* back = NULL;
  EXPECT(psiotdr_histogram_read_csv(csv, &back) == PSIOTDR_OK);
  EXPECT(psiotdr_histogram_bins(back) == psiotdr_histogram_bins(h));
  EXPECT(psiotdr_histogram_bin_width_s(back) == psiotdr_histogram_bin_width_s(h));
  EXPECT(psiotdr_histogram_origin_s(back) == psiotdr_histogram_origin_s(h));

  psiotdr_analysis_options ao;
  psiotdr_analysis_options_init(&ao);
  char* report = NULL;
  EXPECT(psiotdr_analyze(back, s, &ao, &report) == PSIOTDR_OK);
  EXPECT(report && strstr(report, "\"delta_m\"") != NULL);
  psiotdr_string_free(report);

  ao.has_fit_window = 1;
  ao.fit_window_m[0] = 5.0;
  ao.fit_window_m[1] = 1.0;
  EXPECT(psiotdr_analyze(back, NULL, &ao, &report) == PSIOTDR_ERR_INVALID_ARGUMENT);

  EXPECT(psiotdr_trace_write_csv(back, 0.0, trace) == PSIOTDR_OK);
  EXPECT(psiotdr_trace_write_svg(back, 0.0, 0.0, svg) == PSIOTDR_OK);
  {
    FILE* f = fopen(trace, "r");
    char line[128] = {0};
    EXPECT(f != NULL);
    if (f) {
      EXPECT(fgets(line, sizeof line, f) != NULL);
      EXPECT(strcmp(line, "distance_m,level_db,counts\n") == 0);
      fclose(f);
    }
  }

  EXPECT(psiotdr_histogram_read_csv("/nonexistent/h.csv", &back) == PSIOTDR_ERR_IO);
  EXPECT(psiotdr_histogram_write_csv(h, "/nonexistent/dir/h.csv") == PSIOTDR_ERR_IO);

  char* acc = NULL;
  EXPECT(psiotdr_accuracy(s, 3, 0, &opt, &acc) == PSIOTDR_OK);
  EXPECT(acc && strstr(acc, "\"std_m\"") != NULL);
  psiotdr_string_free(acc);

  psiotdr_scenario* merged = NULL;
  EXPECT(psiotdr_scenario_preset("artefact2-config2-50km-smf", &merged) == PSIOTDR_OK);
  opt.shots = 100000;
  EXPECT(psiotdr_accuracy(merged, 2, 0, &opt, &acc) == PSIOTDR_ERR_ANALYSIS);
  EXPECT(strstr(psiotdr_last_error(), "repeat 0") != NULL);
  psiotdr_scenario_free(merged);

  psiotdr_histogram_free(back);
  psiotdr_histogram_free(h);
  psiotdr_scenario_free(s);
  psiotdr_scenario_free(NULL);
  psiotdr_histogram_free(NULL);

  if (failures) fprintf(stderr, "%d failure(s)\n", failures);
  return failures ? 1 : 0;
}
