#ifndef COPSON_H
#define COPSON_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Which condition a [`CopsonCertificate`] is about.
typedef enum CopsonCondition {
  COPSON_CONDITION_INDEX_CONDITION = 0,
  COPSON_CONDITION_GAP_BOUND = 1,
  COPSON_CONDITION_RELAXED_GAP_BOUND = 2,
  COPSON_CONDITION_POLYNOMIAL_CRITERION = 3,
  COPSON_CONDITION_THRESHOLD_CRITERION = 4,
  COPSON_CONDITION_WEIGHTED_INDEX_CONDITION = 5,
} CopsonCondition;

// Result code of every fallible call.
typedef enum CopsonStatus {
  COPSON_STATUS_OK = 0,
  COPSON_STATUS_NULL_POINTER = 1,
  COPSON_STATUS_INVALID_ARGUMENT = 2,
  COPSON_STATUS_INDEX_OUT_OF_RANGE = 3,
  COPSON_STATUS_NON_FINITE = 4,
  COPSON_STATUS_INVALID_SEQUENCE = 5,
  COPSON_STATUS_PARSE = 6,
  COPSON_STATUS_IO = 7,
  COPSON_STATUS_PANIC = 8,
} CopsonStatus;

// Opaque weight family.
typedef struct CopsonFamily CopsonFamily;

// Opaque auxiliary weight sequence.
typedef struct CopsonTrace CopsonTrace;

// Verdict summary; the full record is available as JSON.
typedef struct CopsonCertificate {
  enum CopsonCondition condition;
  bool passed;
  double min_margin;
  // 0 for criteria not indexed by n.
  size_t argmin_n;
  size_t horizon;
} CopsonCertificate;

typedef struct CopsonSignReport {
  double min_value;
  double argmin_x;
  double floor;
  double min_margin;
  bool certified_regime;
  bool anomaly;
} CopsonSignReport;

typedef struct CopsonEstimate {
  // Upper bound on the truncated infimum of the ratio.
  double value;
  size_t iterations;
  double residual;
  bool converged;
} CopsonEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failure on this thread, or `NULL`.
const char *copson_last_error(void);

// Releases a string returned by this library.
//
// # Safety
// `s` must come from this library and not have been freed.
void copson_string_free(char *s);

// Library version as a static string.
const char *copson_version(void);

// # Safety
// `family_out` must be a valid pointer.
enum CopsonStatus copson_family_unit(struct CopsonFamily **family_out);

// `λ_n = n^α − (n−1)^α`, `α ≥ 1`.
//
// # Safety
// `family_out` must be a valid pointer.
enum CopsonStatus copson_family_power_diff(double alpha, struct CopsonFamily **family_out);

// `λ_n = n^{α−1}`, `α ≥ 1`.
//
// # Safety
// `family_out` must be a valid pointer.
enum CopsonStatus copson_family_power_kernel(double alpha, struct CopsonFamily **family_out);

// Finite family from `len` positive values (copied).
//
// # Safety
// `values` must point to `len` doubles; `family_out` must be valid.
enum CopsonStatus copson_family_custom(const double *values,
                                       size_t len,
                                       struct CopsonFamily **family_out);

// Parses `unit`, `powerdiff:A`, `powerkernel:A` or `custom:PATH`.
//
// # Safety
// `spec` must be a NUL-terminated string; `family_out` must be valid.
enum CopsonStatus copson_family_from_spec(const char *spec, struct CopsonFamily **family_out);

// # Safety
// `family` must come from a `copson_family_*` constructor, or be `NULL`.
void copson_family_free(struct CopsonFamily *family);

// # Safety
// Pointers must be valid.
enum CopsonStatus copson_family_lambda(const struct CopsonFamily *family,
                                       size_t n,
                                       double *value_out);

// `Λ_n = λ_1 + … + λ_n`.
//
// # Safety
// Pointers must be valid.
enum CopsonStatus copson_family_big_lambda(const struct CopsonFamily *family,
                                           size_t n,
                                           double *value_out);

// `Λ_{n+1}/λ_{n+1} − Λ_n/λ_n`.
//
// # Safety
// Pointers must be valid.
enum CopsonStatus copson_family_gap(const struct CopsonFamily *family, size_t n, double *value_out);

// Left side `Σ_n (Λ_n^{-1} Σ_{k≥n} λ_k x_k)^p` over `x[0..len]`.
//
// # Safety
// `x` must point to `len` doubles; other pointers must be valid.
enum CopsonStatus copson_lhs_value(const struct CopsonFamily *family,
                                   const double *x,
                                   size_t len,
                                   double p,
                                   double *value_out);

// Ratio of the left side to `Σ x_n^p`.
//
// # Safety
// `x` must point to `len` doubles; other pointers must be valid.
enum CopsonStatus copson_ratio(const struct CopsonFamily *family,
                               const double *x,
                               size_t len,
                               double p,
                               double *value_out);

// Both sides of the dual inequality (`lhs ≤ rhs` expected); needs every `x_n > 0`.
//
// # Safety
// `x` must point to `len` doubles; other pointers must be valid.
enum CopsonStatus copson_dual_sides(const struct CopsonFamily *family,
                                    const double *x,
                                    size_t len,
                                    double p,
                                    double l,
                                    double *lhs_out,
                                    double *rhs_out);

double copson_a1(double l, double p);

double copson_a2(double l, double p);

// `L²/4` for `0 < L < 1`.
//
// # Safety
// `value_out` must be valid.
enum CopsonStatus copson_small_gap_threshold(double l, double *value_out);

// Relaxed threshold for `1/2 < L < 1`, `L + 2M < 1`.
//
// # Safety
// `value_out` must be valid.
enum CopsonStatus copson_relaxed_threshold(double l, double m, double *value_out);

// Per-index condition for `n = 1..=horizon`.
//
// # Safety
// `family` and `cert_out` must be valid; `json_out` valid or `NULL`.
enum CopsonStatus copson_check_index_condition(const struct CopsonFamily *family,
                                               double p,
                                               double l,
                                               size_t horizon,
                                               double tol,
                                               struct CopsonCertificate *cert_out,
                                               char **json_out);

// # Safety
// `family` and `cert_out` must be valid; `json_out` valid or `NULL`.
enum CopsonStatus copson_check_gap_bound(const struct CopsonFamily *family,
                                         double l,
                                         size_t horizon,
                                         double tol,
                                         struct CopsonCertificate *cert_out,
                                         char **json_out);

// # Safety
// `family` and `cert_out` must be valid; `json_out` valid or `NULL`.
enum CopsonStatus copson_check_relaxed_gap_bound(const struct CopsonFamily *family,
                                                 double l,
                                                 double m,
                                                 size_t horizon,
                                                 double tol,
                                                 struct CopsonCertificate *cert_out,
                                                 char **json_out);

// Polynomial criterion, decided exactly on the binary values of `l` and `p`.
//
// # Safety
// `cert_out` must be valid; `json_out` valid or `NULL`.
enum CopsonStatus copson_check_polynomial_criterion(double l,
                                                    double p,
                                                    double tol,
                                                    struct CopsonCertificate *cert_out,
                                                    char **json_out);

// Threshold criterion; `m < 0` means "no M".
//
// # Safety
// `cert_out` must be valid; `json_out` valid or `NULL`.
enum CopsonStatus copson_check_threshold_criterion(double l,
                                                   double m,
                                                   double p,
                                                   double tol,
                                                   struct CopsonCertificate *cert_out,
                                                   char **json_out);

// Builds `w_1..w_{horizon+1}`.
//
// # Safety
// `family` and `trace_out` must be valid.
enum CopsonStatus copson_trace_build(const struct CopsonFamily *family,
                                     double p,
                                     double l,
                                     size_t horizon,
                                     struct CopsonTrace **trace_out);

// # Safety
// `trace` must come from [`copson_trace_build`], or be `NULL`.
void copson_trace_free(struct CopsonTrace *trace);

// Horizon `N` of the trace, or 0 for `NULL`.
//
// # Safety
// `trace` must be valid or `NULL`.
size_t copson_trace_horizon(const struct CopsonTrace *trace);

// `ln w_n` for `1 ≤ n ≤ N+1`.
//
// # Safety
// Pointers must be valid.
enum CopsonStatus copson_trace_log_w(const struct CopsonTrace *trace, size_t n, double *value_out);

// Largest relative residual of the mean identity along the trace.
//
// # Safety
// Pointers must be valid.
enum CopsonStatus copson_trace_mean_identity(const struct CopsonFamily *family,
                                             const struct CopsonTrace *trace,
                                             double *residual_out);

// Weighted index condition for `n ≤ horizon` using the trace.
//
// # Safety
// `family`, `trace` and `cert_out` must be valid; `json_out` valid or `NULL`.
enum CopsonStatus copson_trace_verify(const struct CopsonFamily *family,
                                      const struct CopsonTrace *trace,
                                      size_t horizon,
                                      double tol,
                                      struct CopsonCertificate *cert_out,
                                      char **json_out);

// Evaluates the auxiliary function named `id` (e.g. `"g"`, `"v_LMp"`) at `x`.
//
// # Safety
// `id` must be a NUL-terminated string; `value_out` must be valid.
enum CopsonStatus copson_aux_eval(const char *id,
                                  double l,
                                  double m,
                                  double p,
                                  double x,
                                  double *value_out);

// Minimum of the auxiliary function over `x = i/grid`, `i = 1..=grid`.
//
// # Safety
// `id` must be a NUL-terminated string; `report_out` must be valid.
enum CopsonStatus copson_aux_sign_scan(const char *id,
                                       double l,
                                       double m,
                                       double p,
                                       size_t grid,
                                       double tol,
                                       struct CopsonSignReport *report_out);

// Ratio at `x_n = n^{−1/p−ε}`, `n ≤ horizon`.
//
// # Safety
// Pointers must be valid.
enum CopsonStatus copson_extremal_probe(const struct CopsonFamily *family,
                                        double p,
                                        double eps,
                                        size_t horizon,
                                        double *value_out);

// Minimises the ratio over sequences of length `horizon` with the default
// optimiser settings and the given iteration cap and seed. When
// `sequence_out` is non-null it receives the `horizon` entries of the
// achieving sequence, normalised to `Σ x_n^p = 1`.
//
// # Safety
// `family` and `estimate_out` must be valid; `sequence_out` must hold
// `horizon` doubles or be `NULL`.
enum CopsonStatus copson_minimize_ratio(const struct CopsonFamily *family,
                                        double p,
                                        size_t horizon,
                                        size_t max_iters,
                                        uint64_t seed,
                                        struct CopsonEstimate *estimate_out,
                                        double *sequence_out);

// Exhaustive grid minimum of the ratio for `horizon ∈ {1,2,3}`.
//
// # Safety
// `family` and `value_out` must be valid; `sequence_out` must hold
// `horizon` doubles or be `NULL`.
enum CopsonStatus copson_brute_force_oracle(const struct CopsonFamily *family,
                                            double p,
                                            size_t horizon,
                                            size_t resolution,
                                            double *value_out,
                                            double *sequence_out);

// Norm of the scale-projected log-coordinate gradient of the ratio at `x`.
//
// # Safety
// `x` must point to `len` doubles; other pointers must be valid.
enum CopsonStatus copson_stationarity(const struct CopsonFamily *family,
                                      const double *x,
                                      size_t len,
                                      double p,
                                      double *value_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COPSON_H */
