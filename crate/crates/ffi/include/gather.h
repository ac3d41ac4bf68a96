#ifndef GATHER_H
#define GATHER_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum GatherStatus {
  GATHER_STATUS_OK = 0,
  GATHER_STATUS_NULL_ARGUMENT = 1,
  GATHER_STATUS_INVALID_UTF8 = 2,
  GATHER_STATUS_INVALID_SCENARIO = 3,
  GATHER_STATUS_INVALID_TRACE = 4,
  GATHER_STATUS_UNKNOWN_CHECK = 5,
  // The run stopped on its step budget; the trace is still returned.
  GATHER_STATUS_BUDGET_EXHAUSTED = 6,
  // The trace violated a check; the report is still returned.
  GATHER_STATUS_CHECK_FAILED = 7,
  GATHER_STATUS_ENGINE_ERROR = 8,
  GATHER_STATUS_PANIC = 9,
} GatherStatus;

// A validated scenario.
typedef struct GatherScenario GatherScenario;

// An execution trace.
typedef struct GatherTrace GatherTrace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parse and validate a scenario from JSON.
//
// # Safety
// `json` must be a nul-terminated string and `out` a valid pointer.
enum GatherStatus gather_scenario_from_json(const char *json, struct GatherScenario **out);

// Serialize a scenario back to JSON.
//
// # Safety
// `scenario` must come from [`gather_scenario_from_json`]; `out` must be valid.
enum GatherStatus gather_scenario_to_json(const struct GatherScenario *scenario, char **out);

// Execute a scenario. On `BudgetExhausted` the partial trace is still
// stored in `out`.
//
// # Safety
// `scenario` must come from [`gather_scenario_from_json`]; `out` must be valid.
enum GatherStatus gather_run(const struct GatherScenario *scenario, struct GatherTrace **out);

// Parse a JSONL trace.
//
// # Safety
// `jsonl` must be a nul-terminated string and `out` a valid pointer.
enum GatherStatus gather_trace_from_jsonl(const char *jsonl, struct GatherTrace **out);

// Serialize a trace as JSONL.
//
// # Safety
// `trace` must come from this library; `out` must be valid.
enum GatherStatus gather_trace_to_jsonl(const struct GatherTrace *trace, char **out);

// Whether the last configuration of the trace has every robot on one point.
//
// # Safety
// `trace` must come from this library; `out` must be valid.
enum GatherStatus gather_trace_is_gathered(const struct GatherTrace *trace, bool *out);

// Run a named check (`monotone`, `cycle`, `switch`, `shrink`, `gather`,
// `equivariance` or `all`) and store the JSON report in `report_out`.
// Returns `CheckFailed` when the report has violations.
//
// # Safety
// `trace` must come from this library; `check` must be a nul-terminated
// string; `report_out` must be valid.
enum GatherStatus gather_check(const struct GatherTrace *trace,
                               const char *check,
                               uint64_t seed,
                               char **report_out);

// Message of the last failed call on this thread, or null. The pointer is
// valid until the next call into this library on the same thread.
const char *gather_last_error_message(void);

// # Safety
// `s` must be null or a string returned by this library, freed once.
void gather_string_free(char *s);

// # Safety
// `t` must be null or a trace returned by this library, freed once.
void gather_trace_free(struct GatherTrace *t);

// # Safety
// `s` must be null or a scenario returned by this library, freed once.
void gather_scenario_free(struct GatherScenario *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GATHER_H */
