#ifndef FIELDCHECK_H
#define FIELDCHECK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes. The first four mirror the command-line exit codes.
typedef enum FcStatus {
  FC_STATUS_OK = 0,
  // The run completed and its verdict is a failure.
  FC_STATUS_FAIL = 1,
  FC_STATUS_CONFIG = 2,
  FC_STATUS_NUMERICAL = 3,
  // A required pointer was null or a string was not UTF-8.
  FC_STATUS_INVALID_ARGUMENT = 4,
  // The library panicked; the handle arguments are left untouched.
  FC_STATUS_PANIC = 5,
} FcStatus;

typedef enum FcCommand {
  FC_COMMAND_VERIFY = 0,
  FC_COMMAND_FLUX = 1,
  FC_COMMAND_CHARGE = 2,
  FC_COMMAND_CONVERGENCE = 3,
  FC_COMMAND_SAMPLE = 4,
} FcCommand;

typedef enum FcFormat {
  FC_FORMAT_JSON = 0,
  FC_FORMAT_CSV = 1,
  FC_FORMAT_TEXT = 2,
} FcFormat;

// A finished run, pre-rendered in every format.
typedef struct FcReport FcReport;

// A parsed and validated scenario.
typedef struct FcScenario FcScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses a scenario from a JSON document.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer. On
// success `*out` holds a handle to release with [`fc_scenario_free`].
enum FcStatus fc_scenario_from_json(const char *json, struct FcScenario **out);

// Reads and parses a scenario file.
//
// # Safety
// Same contract as [`fc_scenario_from_json`], with `path` a file path.
enum FcStatus fc_scenario_from_path(const char *path, struct FcScenario **out);

// # Safety
// `scenario` must come from this library and not be used afterwards. Null is ignored.
void fc_scenario_free(struct FcScenario *scenario);

// Scenario name as a new string, or null.
//
// # Safety
// `scenario` must be a live handle or null.
char *fc_scenario_name(const struct FcScenario *scenario);

// Runs one command. Returns `FC_STATUS_OK` or `FC_STATUS_FAIL` according
// to the verdict when a report was produced, an error status otherwise.
//
// # Safety
// `scenario` must be a live handle and `out` a valid pointer. On success
// `*out` holds a handle to release with [`fc_report_free`].
enum FcStatus fc_run(const struct FcScenario *scenario,
                     enum FcCommand command,
                     struct FcReport **out);

// Convenience for `fc_run(scenario, FC_COMMAND_VERIFY, out)`.
//
// # Safety
// See [`fc_run`].
enum FcStatus fc_verify(const struct FcScenario *scenario, struct FcReport **out);

// 1 if the report passed, 0 if it failed, -1 for a null handle.
//
// # Safety
// `report` must be a live handle or null.
int fc_report_passed(const struct FcReport *report);

// The report rendered in `format`, as a new string; null for a null handle.
//
// # Safety
// `report` must be a live handle or null.
char *fc_report_render(const struct FcReport *report, enum FcFormat format);

// The report as JSON; same as `fc_report_render(report, FC_FORMAT_JSON)`.
//
// # Safety
// `report` must be a live handle or null.
char *fc_report_json(const struct FcReport *report);

// # Safety
// `report` must come from this library and not be used afterwards. Null is ignored.
void fc_report_free(struct FcReport *report);

// Message for the last failed call on this thread, as a new string, or null.
char *fc_last_error(void);

// # Safety
// `s` must be a string returned by this library, or null.
void fc_string_free(char *s);

// Library version, statically allocated.
const char *fc_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FIELDCHECK_H */
