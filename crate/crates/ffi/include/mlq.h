#ifndef MLQ_H
#define MLQ_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define MLQ_OK 0

#define MLQ_ERR_NULL 1

#define MLQ_ERR_INVALID 2

/*
 Operands live on different grids, contexts or lattice sectors.
 */
#define MLQ_ERR_MISMATCH 3

#define MLQ_ERR_PARSE 4

/*
 The caller's buffer is too small; the required size was written.
 */
#define MLQ_ERR_BUFFER 5

#define MLQ_ERR_PANIC 6

#define MLQ_PAIR_MAIN 0

#define MLQ_PAIR_ALT 1

/*
 Physical parameters plus the angle grid.
 */
typedef struct MlqContext MlqContext;

/*
 An element of the star algebra.
 */
typedef struct MlqElement MlqElement;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Creates a context. Even `grid_n` is bumped to the next odd size.

 # Safety
 `out` must be a valid pointer.
 */
int32_t mlq_context_new(double beta,
                        double hbar,
                        double lambda,
                        size_t grid_n,
                        struct MlqContext **out);

/*
 # Safety
 `c` must be null or a pointer from `mlq_context_new` not yet freed.
 */
void mlq_context_free(struct MlqContext *c);

/*
 # Safety
 `c` must be a live context and `n` a valid pointer.
 */
int32_t mlq_context_grid_size(const struct MlqContext *c, size_t *n);

/*
 Position eigenvector ρ_ξ.

 # Safety
 `c` must be a live context and `out` a valid pointer.
 */
int32_t mlq_element_position_eigenvector(const struct MlqContext *c,
                                         double xi,
                                         struct MlqElement **out);

/*
 Maximal-localization state centred at ξ.

 # Safety
 `c` must be a live context and `out` a valid pointer.
 */
int32_t mlq_element_ml_state(const struct MlqContext *c, double xi, struct MlqElement **out);

/*
 Seeded random band-limited element with modes |k| ≤ band.

 # Safety
 `c` must be a live context and `out` a valid pointer.
 */
int32_t mlq_element_random(const struct MlqContext *c,
                           uint64_t seed,
                           uint32_t band,
                           struct MlqElement **out);

/*
 # Safety
 `e` must be null or a pointer returned by this library not yet freed.
 */
void mlq_element_free(struct MlqElement *e);

/*
 out = a ⋆ b.

 # Safety
 `a`, `b` must be live elements and `out` a valid pointer.
 */
int32_t mlq_star(const struct MlqElement *a, const struct MlqElement *b, struct MlqElement **out);

/*
 out = a*.

 # Safety
 `a` must be a live element and `out` a valid pointer.
 */
int32_t mlq_involution(const struct MlqElement *a, struct MlqElement **out);

/*
 # Safety
 `e` must be a live element; `re`, `im` valid pointers.
 */
int32_t mlq_element_trace(const struct MlqElement *e, double *re, double *im);

/*
 # Safety
 `e` must be a live element and `norm` a valid pointer.
 */
int32_t mlq_element_norm2(const struct MlqElement *e, double *norm);

/*
 Copies the n×n torus samples f̃(u_i, α_k), row-major in i, into `re` and `im`.
 `len` is the capacity of each buffer; on `MLQ_ERR_BUFFER` it holds n² on return.

 # Safety
 `e` must be a live element, `len` valid, and `re`, `im` hold `*len` doubles.
 */
int32_t mlq_element_samples(const struct MlqElement *e, double *re, double *im, size_t *len);

/*
 Exact formal product (or commutator when `commutator` ≠ 0) of two
 polynomial expressions, written as NUL-terminated canonical text.

 `cap` is the buffer capacity in bytes. `needed` always receives the size
 including the terminator; `terminated` receives 1 when the series stopped
 before `order`. On `MLQ_ERR_PARSE`, `needed` holds the character offset.

 # Safety
 `f`, `g` must be NUL-terminated strings; `buf` must hold `cap` bytes or be
 null with `cap` = 0; `needed` and `terminated` must be valid pointers.
 */
int32_t mlq_formal(int32_t pair,
                   const char *f,
                   const char *g,
                   uint32_t order,
                   int32_t commutator,
                   char *buf,
                   size_t cap,
                   size_t *needed,
                   int32_t *terminated);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MLQ_H */
