#ifndef CRITGRAPH_H
#define CRITGRAPH_H

#include <stddef.h>
#include <stdint.h>

typedef enum CgStatus {
  CG_STATUS_OK = 0,
  CG_STATUS_NULL_POINTER = 1,
  CG_STATUS_INVALID_ARGUMENT = 2,
  CG_STATUS_NOT_TENABLE = 3,
  CG_STATUS_BUDGET_EXCEEDED = 4,
  CG_STATUS_ATTEMPTS_EXHAUSTED = 5,
  CG_STATUS_BUFFER_TOO_SMALL = 6,
  CG_STATUS_PANIC = 7,
  CG_STATUS_INTERNAL = 8,
} CgStatus;

/*
 Multigraph on vertices `0..n`.
 */
typedef struct CgGraph CgGraph;

/*
 Seeded generator.
 */
typedef struct CgRng CgRng;

/*
 Plane tree in depth-first order, root 0.
 */
typedef struct CgTree CgTree;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread; empty if none. Valid
 until the next failing call on the same thread.
 */
const char *cg_last_error(void);

/*
 Library version, static storage.
 */
const char *cg_version(void);

struct CgRng *cg_rng_new(uint64_t seed);

/*
 # Safety
 `rng` must come from [`cg_rng_new`] and not be used afterwards.
 */
void cg_rng_free(struct CgRng *rng);

/*
 Configuration model multigraph with degrees `degrees[0..n]`.

 # Safety
 `degrees` must point to `n` values; `rng` must be live; `out` writable.
 */
enum CgStatus cg_sample_cm(const uint32_t *degrees_ptr,
                           size_t n,
                           struct CgRng *rng,
                           struct CgGraph **out);

/*
 Uniform simple graph; `attempts` (may be null) receives the number of
 configuration-model draws used.

 # Safety
 As for [`cg_sample_cm`]; `attempts` is null or writable.
 */
enum CgStatus cg_sample_simple(const uint32_t *degrees_ptr,
                               size_t n,
                               uint64_t max_attempts,
                               struct CgRng *rng,
                               struct CgGraph **out,
                               uint64_t *attempts);

/*
 Uniform connected simple graph with surplus `k`; some vertex needs degree 1.

 # Safety
 As for [`cg_sample_cm`].
 */
enum CgStatus cg_sample_connected(const uint32_t *degrees_ptr,
                                  size_t n,
                                  size_t k,
                                  struct CgRng *rng,
                                  struct CgGraph **out);

/*
 # Safety
 `g` must be a live graph handle or null.
 */
size_t cg_graph_vertex_count(const struct CgGraph *g);

/*
 # Safety
 `g` must be a live graph handle or null.
 */
size_t cg_graph_edge_count(const struct CgGraph *g);

/*
 Writes the edges as `2 * edge_count` endpoints into `out[0..capacity]`.

 # Safety
 `g` live; `out` points to `capacity` writable values.
 */
enum CgStatus cg_graph_edges(const struct CgGraph *g, uint32_t *out, size_t capacity);

/*
 Size of the largest connected component.

 # Safety
 `g` must be a live graph handle or null.
 */
size_t cg_graph_largest_component(const struct CgGraph *g);

/*
 # Safety
 `g` must come from a sampler and not be used afterwards.
 */
void cg_graph_free(struct CgGraph *g);

/*
 Uniform plane tree; `children[i]` is the children count of vertex `i`.

 # Safety
 `children` points to `m` values; `rng` live; `out` writable.
 */
enum CgStatus cg_sample_tree(const uint32_t *children,
                             size_t m,
                             struct CgRng *rng,
                             struct CgTree **out);

/*
 # Safety
 `t` must be a live tree handle or null.
 */
size_t cg_tree_len(const struct CgTree *t);

/*
 Parent of every vertex in depth-first order; the root gets -1.

 # Safety
 `t` live; `out` points to `capacity` writable values.
 */
enum CgStatus cg_tree_parents(const struct CgTree *t, int64_t *out, size_t capacity);

/*
 # Safety
 `t` must come from [`cg_sample_tree`] and not be used afterwards.
 */
void cg_tree_free(struct CgTree *t);

/*
 Exact counts for `(degrees, k)` as a JSON object; release the string with
 [`cg_string_free`].

 # Safety
 `degrees_ptr` points to `n` values; `out` writable.
 */
enum CgStatus cg_enumerate_json(const uint32_t *degrees_ptr, size_t n, size_t k, char **out);

/*
 # Safety
 `s` must come from this library and not be used afterwards.
 */
void cg_string_free(char *s);

/*
 Wright ratio as a float.

 # Safety
 `degrees_ptr` points to `n` values; `out` writable.
 */
enum CgStatus cg_wright_ratio(const uint32_t *degrees_ptr, size_t n, size_t k, double *out);

/*
 Monte Carlo `E[(∫e)^k]` on a grid of `2 * grid` steps.

 # Safety
 `value` and `standard_error` writable.
 */
enum CgStatus cg_area_moment(uint32_t k,
                             size_t grid,
                             size_t samples,
                             uint64_t seed,
                             double *value,
                             double *standard_error);

/*
 `u★` and `p_vac` for random `r`-regular graphs.

 # Safety
 `u_star` and `p_vac` writable.
 */
enum CgStatus cg_vacant_critical(uint32_t r, double *u_star, double *p_vac);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CRITGRAPH_H */
