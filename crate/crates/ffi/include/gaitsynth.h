#ifndef GAITSYNTH_H
#define GAITSYNTH_H

#include <stdbool.h>
#include <stddef.h>

/**
 * Number of Bézier coefficients in one gait (10 outputs of order 5).
 */
#define GS_ALPHA_LEN 60

typedef enum GsStance {
  GS_STANCE_RIGHT = 0,
  GS_STANCE_LEFT = 1,
} GsStance;

typedef enum GsStatus {
  GS_STATUS_OK = 0,
  GS_STATUS_NULL_POINTER = 1,
  GS_STATUS_INVALID_ARGUMENT = 2,
  GS_STATUS_IO = 3,
  GS_STATUS_PARSE = 4,
  GS_STATUS_OUT_OF_RANGE = 5,
  GS_STATUS_PREDICTION_FAILED = 6,
  GS_STATUS_UNREACHABLE = 7,
  GS_STATUS_INTERNAL = 8,
} GsStatus;

/**
 * Loaded gait library.
 */
typedef struct GsLibrary GsLibrary;

/**
 * Synthesizer bound to its own copy of a library and a configuration.
 */
typedef struct GsSynthesizer GsSynthesizer;

typedef struct GsLibraryDims {
  size_t periods;
  size_t vx;
  size_t rvy;
  size_t lvy;
  size_t gaits;
  size_t order;
} GsLibraryDims;

/**
 * Synthesizer settings. Regions keep their defaults.
 */
typedef struct GsSynthConfig {
  double kx;
  double ky;
  double vx_desired;
  double vy_right_desired;
  double vy_left_desired;
  size_t period_index;
  double support_halfwidth[2];
  double max_modification;
  double kp;
  double kd;
  double mass;
  double gravity;
} GsSynthConfig;

/**
 * CoM state relative to the stance foot.
 */
typedef struct GsState {
  double z;
  double zdot;
  double p[2];
  double v[2];
} GsState;

typedef struct GsPhase {
  double t0;
  double s0;
  double period;
  enum GsStance stance;
} GsPhase;

typedef struct GsSynthesis {
  /**
   * Row-major, one row of `order + 1` coefficients per output.
   */
  double alpha[GS_ALPHA_LEN];
  double period;
  size_t period_index;
  double step_duration;
  struct GsState predicted;
  bool has_prediction;
  bool saturated;
  bool truncated;
  bool fall;
} GsSynthesis;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *gs_last_error(void);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum GsStatus gs_library_load(const char *path, struct GsLibrary **out);

/**
 * Builds the default desk-scale library.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum GsStatus gs_library_build_default(struct GsLibrary **out);

/**
 * # Safety
 * `lib` must come from this library and `path` be NUL-terminated.
 */
enum GsStatus gs_library_save(const struct GsLibrary *lib, const char *path);

/**
 * # Safety
 * `lib` must be null or a handle not yet freed.
 */
void gs_library_free(struct GsLibrary *lib);

/**
 * # Safety
 * Both pointers must be valid.
 */
enum GsStatus gs_library_dims(const struct GsLibrary *lib, struct GsLibraryDims *out);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum GsStatus gs_synth_config_default(struct GsSynthConfig *out);

/**
 * Copies the library; the caller may free `lib` afterwards.
 *
 * # Safety
 * All pointers must be valid.
 */
enum GsStatus gs_synthesizer_new(const struct GsLibrary *lib,
                                 const struct GsSynthConfig *cfg,
                                 struct GsSynthesizer **out);

/**
 * # Safety
 * `synth` must be null or a handle not yet freed.
 */
void gs_synthesizer_free(struct GsSynthesizer *synth);

/**
 * One synthesis call. On failure `out` is left untouched.
 *
 * # Safety
 * All pointers must be valid.
 */
enum GsStatus gs_synthesize(const struct GsSynthesizer *synth,
                            const struct GsState *state,
                            const struct GsPhase *phase,
                            struct GsSynthesis *out);

/**
 * Evaluates a Bézier polynomial with `n` coefficients at `s` in `[0, 1]`.
 *
 * # Safety
 * `coeffs` must point to `n` doubles and `out` be valid.
 */
enum GsStatus gs_bezier_eval(const double *coeffs, size_t n, double s, double *out);

/**
 * Integrates the centroidal model from `t0` to `tt` tracking a constant
 * height `z_ref`, using the gains in `cfg`.
 *
 * # Safety
 * All pointers must be valid.
 */
enum GsStatus gs_predict_preimpact(const struct GsSynthConfig *cfg,
                                   const struct GsState *state,
                                   double t0,
                                   double tt,
                                   double z_ref,
                                   struct GsState *out);

/**
 * # Safety
 * `p`, `v` and `out` must each point to two doubles.
 */
enum GsStatus gs_capture_point(const double *p,
                               const double *v,
                               double z,
                               double gravity,
                               double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GAITSYNTH_H */
