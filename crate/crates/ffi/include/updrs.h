#ifndef UPDRS_H
#define UPDRS_H

#include <stddef.h>
#include <stdint.h>

// Result code of every fallible call.
typedef enum UpdrsStatus {
  UPDRS_STATUS_OK = 0,
  UPDRS_STATUS_NULL_POINTER = 1,
  UPDRS_STATUS_INVALID_UTF8 = 2,
  UPDRS_STATUS_FILE_NOT_FOUND = 3,
  UPDRS_STATUS_CHECKPOINT = 4,
  UPDRS_STATUS_SHAPE = 5,
  UPDRS_STATUS_BUFFER_TOO_SMALL = 6,
  UPDRS_STATUS_IO = 7,
  UPDRS_STATUS_RUNTIME = 8,
  UPDRS_STATUS_PANIC = 9,
} UpdrsStatus;

// A loaded checkpoint.
typedef struct UpdrsModel UpdrsModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null if none.
// The pointer stays valid until the next failing call on this thread.
const char *updrs_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *updrs_version(void);

// Number of raw features each input row must carry.
size_t updrs_feature_count(void);

// Loads a JSON checkpoint. On success `*out` owns a new handle.
//
// # Safety
// `path` must be null or a NUL-terminated string; `out` must be null or
// valid for writing one pointer.
enum UpdrsStatus updrs_model_load(const char *path, struct UpdrsModel **out);

// Releases a handle from [`updrs_model_load`]. Null is ignored.
//
// # Safety
// `model` must be null or a handle not yet freed.
void updrs_model_free(struct UpdrsModel *model);

// Raw features per input row (0 for a null handle).
//
// # Safety
// `model` must be null or a live handle.
size_t updrs_model_input_dim(const struct UpdrsModel *model);

// Values written per input row by [`updrs_model_predict`] (0 for a null handle).
//
// # Safety
// `model` must be null or a live handle.
size_t updrs_model_output_count(const struct UpdrsModel *model);

// Name of output column `index`, or null when out of range. Owned by the handle.
//
// # Safety
// `model` must be null or a live handle.
const char *updrs_model_output_name(const struct UpdrsModel *model, size_t index);

// Scores `n_rows` row-major raw feature rows into `out`, which must hold
// `n_rows * updrs_model_output_count(model)` values.
//
// # Safety
// `features` must point to `n_rows * updrs_feature_count()` readable values
// and `out` to `out_len` writable values; both may be null when `n_rows` is 0.
enum UpdrsStatus updrs_model_predict(const struct UpdrsModel *model,
                                     const double *features,
                                     size_t n_rows,
                                     double *out,
                                     size_t out_len);

// Severity labels for a pair of UPDRS values (1 = severe).
//
// # Safety
// Both output pointers must be valid for writing one byte.
enum UpdrsStatus updrs_severity_labels(double motor_updrs,
                                       double total_updrs,
                                       uint8_t *motor_severe,
                                       uint8_t *total_severe);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UPDRS_H */
