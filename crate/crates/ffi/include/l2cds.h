#ifndef L2CDS_H
#define L2CDS_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum L2cdsStatus {
  L2CDS_STATUS_OK = 0,
  L2CDS_STATUS_NULL_POINTER = 1,
  L2CDS_STATUS_INVALID_ARGUMENT = 2,
  L2CDS_STATUS_DIMENSION_MISMATCH = 3,
  L2CDS_STATUS_IO = 4,
  L2CDS_STATUS_MALFORMED = 5,
  L2CDS_STATUS_NUMERICAL = 6,
  L2CDS_STATUS_BUFFER_TOO_SMALL = 7,
  L2CDS_STATUS_PANIC = 8,
} L2cdsStatus;

/**
 * A collected or loaded trajectory dataset.
 */
typedef struct L2cdsDataset L2cdsDataset;

/**
 * A trained or loaded correspondence model.
 */
typedef struct L2cdsModel L2cdsModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failed call on this thread, or null if the
 * last call succeeded. Valid until the next call on the same thread.
 */
const char *l2cds_last_error_message(void);

/**
 * Simulates `resets` trajectories of `horizon` steps of the named system
 * (`pendulum`, `two-link`, `wedge-left`, `wedge-right`) with default
 * parameters and noise levels.
 *
 * # Safety
 * `system` must be a nul-terminated string and `out` a valid pointer.
 */
enum L2cdsStatus l2cds_dataset_collect(const char *system,
                                       uintptr_t horizon,
                                       uintptr_t resets,
                                       uint64_t seed,
                                       struct L2cdsDataset **out);

/**
 * # Safety
 * `path` must be a nul-terminated string and `out` a valid pointer.
 */
enum L2cdsStatus l2cds_dataset_load(const char *path, struct L2cdsDataset **out);

/**
 * # Safety
 * `dataset` must come from this library; `path` must be nul-terminated.
 */
enum L2cdsStatus l2cds_dataset_save(const struct L2cdsDataset *dataset, const char *path);

/**
 * Number of transition pairs, or 0 for a null handle.
 *
 * # Safety
 * `dataset` must be null or come from this library.
 */
uintptr_t l2cds_dataset_len(const struct L2cdsDataset *dataset);

/**
 * # Safety
 * `dataset` must be null or come from this library.
 */
uintptr_t l2cds_dataset_state_dim(const struct L2cdsDataset *dataset);

/**
 * # Safety
 * `dataset` must be null or a handle not yet freed.
 */
void l2cds_dataset_free(struct L2cdsDataset *dataset);

/**
 * Trains a model on two datasets with a named preset (`wedge`, `periodic`,
 * `walker-pendulum`, `walker-ostrich`). `steps == 0` keeps the preset's
 * step count.
 *
 * # Safety
 * Handles must come from this library; `preset` must be nul-terminated;
 * `out` must be a valid pointer.
 */
enum L2cdsStatus l2cds_train(const struct L2cdsDataset *dataset_a,
                             const struct L2cdsDataset *dataset_b,
                             const char *preset,
                             uintptr_t steps,
                             uint64_t seed,
                             struct L2cdsModel **out);

/**
 * # Safety
 * `path` must be a nul-terminated string and `out` a valid pointer.
 */
enum L2cdsStatus l2cds_model_load(const char *path, struct L2cdsModel **out);

/**
 * Saves the model without optimizer state.
 *
 * # Safety
 * `model` must come from this library; `path` must be nul-terminated.
 */
enum L2cdsStatus l2cds_model_save(const struct L2cdsModel *model, const char *path);

/**
 * Writes the state widths of systems A and B and the latent width.
 *
 * # Safety
 * `model` must come from this library; the outputs must be valid pointers.
 */
enum L2cdsStatus l2cds_model_dims(const struct L2cdsModel *model,
                                  uintptr_t *dim_a,
                                  uintptr_t *dim_b,
                                  uintptr_t *latent_dim);

/**
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void l2cds_model_free(struct L2cdsModel *model);

/**
 * Projects `rows` row-major states of width `cols` along `path` (e.g.
 * `"ALB"`). The result is written row-major to `output`, which must hold
 * `output_len` doubles; its width goes to `out_cols`. If the buffer is too
 * small nothing is written except `out_cols`, and `BufferTooSmall` is
 * returned.
 *
 * # Safety
 * `input` must point to `rows * cols` doubles and `output` to `output_len`.
 */
enum L2cdsStatus l2cds_project(const struct L2cdsModel *model,
                               const char *path,
                               const double *input,
                               uintptr_t rows,
                               uintptr_t cols,
                               double *output,
                               uintptr_t output_len,
                               uintptr_t *out_cols);

/**
 * Mean symmetric nearest-neighbour distance between two row-major sets of
 * `rows` points of width `cols`.
 *
 * # Safety
 * `a` and `b` must each point to `rows * cols` doubles; `out` must be valid.
 */
enum L2cdsStatus l2cds_msnn(const double *a,
                            const double *b,
                            uintptr_t rows,
                            uintptr_t cols,
                            double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* L2CDS_H */
