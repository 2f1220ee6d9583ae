#ifndef URLLC_ACCESS_H
#define URLLC_ACCESS_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result code of every fallible call.
 */
typedef enum UaStatus {
  UA_STATUS_OK = 0,
  UA_STATUS_NULL_POINTER = 1,
  UA_STATUS_INVALID_ARGUMENT = 2,
  UA_STATUS_DOMAIN = 3,
  UA_STATUS_IO = 4,
  UA_STATUS_CHECKPOINT = 5,
  UA_STATUS_DIMENSION_MISMATCH = 6,
  UA_STATUS_INTERNAL = 7,
} UaStatus;

/*
 Opaque experiment configuration.
 */
typedef struct UaConfig UaConfig;

/*
 Opaque Q-network loaded from a model file.
 */
typedef struct UaQNet UaQNet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread; empty after a success. The
 pointer stays valid until the next call on the same thread.
 */
const char *ua_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *ua_version(void);

/*
 Lower real branch of the Lambert W function for `x` in `[-1/e, 0)`.

 # Safety
 `out` must be null or point to writable memory for one `double`.
 */
enum UaStatus ua_lambert_w_minus1(double x, double *out);

/*
 Minimum spectral rate (bps/Hz) keeping the latency-violation probability of
 a Poisson URLLC flow below `p_latency_max`.

 # Safety
 `out` must be null or point to writable memory for one `double`.
 */
enum UaStatus ua_min_rate_urllc(double arrival_per_slot,
                                double mean_packet_bits,
                                double latency_max_s,
                                double p_latency_max,
                                double bandwidth_hz,
                                double slot_duration_s,
                                double *out);

/*
 Built-in default configuration.

 # Safety
 `out` must be null or point to writable memory for one pointer.
 */
enum UaStatus ua_config_default(struct UaConfig **out);

/*
 Parses configuration text (flat `key = value` lines).

 # Safety
 `text` must be a NUL-terminated string; `out` as in [`ua_config_default`].
 */
enum UaStatus ua_config_parse(const char *text, struct UaConfig **out);

/*
 Loads a configuration file.

 # Safety
 `path` must be a NUL-terminated string; `out` as in [`ua_config_default`].
 */
enum UaStatus ua_config_load(const char *path, struct UaConfig **out);

/*
 Number of links (C-devices plus D2D pairs) of a configuration.

 # Safety
 `cfg` must be null or a live handle; `out` must be null or writable.
 */
enum UaStatus ua_config_num_links(const struct UaConfig *cfg, size_t *out);

/*
 Releases a configuration. Null is ignored.

 # Safety
 `cfg` must be null or a handle not yet freed.
 */
void ua_config_free(struct UaConfig *cfg);

/*
 Loads a model file written by the `train` command.

 # Safety
 `path` must be a NUL-terminated string; `out` must be null or writable.
 */
enum UaStatus ua_qnet_load(const char *path, struct UaQNet **out);

/*
 Input and output widths of a network.

 # Safety
 `net` must be null or a live handle; the outputs must be null or writable.
 */
enum UaStatus ua_qnet_dims(const struct UaQNet *net, size_t *input_dim, size_t *output_dim);

/*
 Q-values of `state` (`state_len` doubles) written to `q_out` (`q_len`
 doubles). Both lengths must match the network.

 # Safety
 `net` must be a live handle and the buffers valid for the given lengths.
 */
enum UaStatus ua_qnet_forward(const struct UaQNet *net,
                              const double *state,
                              size_t state_len,
                              double *q_out,
                              size_t q_len);

/*
 Releases a network. Null is ignored.

 # Safety
 `net` must be null or a handle not yet freed.
 */
void ua_qnet_free(struct UaQNet *net);

/*
 Runs an experiment and writes its CSV files to `out_dir`.

 `approaches` is a comma-separated list (empty or null for all), `sweep` one
 of `none`, `reliability`, `latency`, `arrival_rate` (null for `none`) and
 `values` holds `num_values` sweep points.

 # Safety
 Strings must be NUL-terminated or null where allowed; `values` must be
 valid for `num_values` doubles.
 */
enum UaStatus ua_run_experiment(const struct UaConfig *cfg,
                                const char *approaches,
                                const char *sweep,
                                const double *values,
                                size_t num_values,
                                const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* URLLC_ACCESS_H */
