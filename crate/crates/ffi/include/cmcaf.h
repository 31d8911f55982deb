#ifndef CMCAF_H
#define CMCAF_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

#define CMCAF_OK 0

#define CMCAF_ERR_NUMERIC 1

#define CMCAF_ERR_DOMAIN 2

#define CMCAF_ERR_CONSISTENCY 3

#define CMCAF_ERR_IO 4

#define CMCAF_ERR_ARGUMENT 5

#define CMCAF_ERR_PANIC 6

/**
 * Opaque constructed annulus: model, triangulated mesh, verdicts.
 */
typedef struct CmcafModel CmcafModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent error on this thread. Valid until the next
 * failing call on the same thread.
 */
const char *cmcaf_last_error(void);

/**
 * Period map Per(α, β, γ).
 */
int32_t cmcaf_per(double alpha, double beta, double gamma, double *out);

/**
 * Half-period σ(α, β, γ).
 */
int32_t cmcaf_sigma(double alpha, double beta, double gamma, double *out);

/**
 * Solve Per(α, β, γ) = c for γ, with c in (-1, 0].
 */
int32_t cmcaf_gamma_level(double c, double alpha, double beta, double *out);

/**
 * Build and verify the annulus with n lobes at family parameter μ ≥ 0.
 * `u_samples`/`v_samples` of 0 select the default resolution.
 */
int32_t cmcaf_construct(uint32_t n,
                        double mu,
                        uintptr_t u_samples,
                        uintptr_t v_samples,
                        struct CmcafModel **out);

/**
 * 1 if every verdict passed, else 0.
 */
int32_t cmcaf_model_all_pass(const struct CmcafModel *model, int32_t *out);

/**
 * Rescaled mean curvature of the model.
 */
int32_t cmcaf_model_mean_curvature(const struct CmcafModel *model, double *out);

/**
 * Full report as a JSON string; free it with `cmcaf_string_free`.
 */
int32_t cmcaf_model_report_json(const struct CmcafModel *model, char **out);

/**
 * Write the triangulated mesh as ASCII OBJ.
 */
int32_t cmcaf_model_export_obj(const struct CmcafModel *model, const char *path);

void cmcaf_model_free(struct CmcafModel *model);

void cmcaf_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CMCAF_H */
