#ifndef ERGODYN_H
#define ERGODYN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ErgodynStatus {
  ERGODYN_STATUS_OK = 0,
  ERGODYN_STATUS_CONFIG = 1,
  // The governing condition fails; the result may still have been written.
  ERGODYN_STATUS_CONDITION_FAILS = 2,
  ERGODYN_STATUS_NULL_POINTER = 3,
  ERGODYN_STATUS_INVALID_UTF8 = 4,
  ERGODYN_STATUS_DOMAIN = 5,
  ERGODYN_STATUS_NON_CONVERGENCE = 6,
  ERGODYN_STATUS_REFUSED = 7,
  ERGODYN_STATUS_UNSUPPORTED = 8,
  ERGODYN_STATUS_IO = 9,
  ERGODYN_STATUS_INTERNAL = 10,
  ERGODYN_STATUS_PANIC = 11,
} ErgodynStatus;

// Opaque validated experiment configuration.
typedef struct ErgodynExperiment ErgodynExperiment;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or null. Owned by the library;
// valid until the next call on the same thread.
const char *ergodyn_last_error(void);

// Parses and validates a configuration text.
//
// # Safety
// `text` must be a valid NUL-terminated string and `out` a valid pointer.
enum ErgodynStatus ergodyn_experiment_parse(const char *text, struct ErgodynExperiment **out);

// Loads one of the shipped presets.
//
// # Safety
// `name` must be a valid NUL-terminated string and `out` a valid pointer.
enum ErgodynStatus ergodyn_experiment_preset(const char *name, struct ErgodynExperiment **out);

// # Safety
// `h` must be null or a handle returned by this library, not yet freed.
void ergodyn_experiment_free(struct ErgodynExperiment *h);

// Replaces the master seed.
//
// # Safety
// `h` must be a live handle.
enum ErgodynStatus ergodyn_experiment_set_seed(struct ErgodynExperiment *h, uint64_t seed);

// Canonical configuration text; free with [`ergodyn_string_free`].
//
// # Safety
// `h` must be a live handle and `out` a valid pointer.
enum ErgodynStatus ergodyn_experiment_serialize(const struct ErgodynExperiment *h, char **out);

// # Safety
// `s` must be null or a string returned by this library, not yet freed.
void ergodyn_string_free(char *s);

// Verdict map and certificate as text. `governing_holds` receives 1 when the
// governing condition holds and 0 otherwise.
//
// # Safety
// `h` must be a live handle; `governing_holds` and `report` valid pointers.
enum ErgodynStatus ergodyn_check(const struct ErgodynExperiment *h,
                                 int *governing_holds,
                                 char **report);

// Observations of a stationary path of length `len`, written to `buf`.
//
// # Safety
// `h` must be a live handle and `buf` valid for `len` writes.
enum ErgodynStatus ergodyn_simulate(const struct ErgodynExperiment *h, double *buf, uintptr_t len);

// Lyapunov exponent estimate with `run.n` steps and `run.replicates` paths.
//
// # Safety
// `h` must be a live handle; `chi` and `stderr` valid pointers.
enum ErgodynStatus ergodyn_lyapunov(const struct ErgodynExperiment *h, double *chi, double *stderr);

// Runs a command by name and writes the report and tables into `out_dir`.
// Returns [`ErgodynStatus::ConditionFails`] when the run exits with status 2.
//
// # Safety
// `h` must be a live handle; `command` and `out_dir` valid strings.
enum ErgodynStatus ergodyn_run(const struct ErgodynExperiment *h,
                               const char *command,
                               const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ERGODYN_H */
