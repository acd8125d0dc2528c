#include <stdio.h>
#include <stdlib.h>
#include "critgraph.h"

int main(void) {
    uint32_t degrees[] = {1, 3, 2, 2, 3, 1};
    CgRng *rng = cg_rng_new(42);
    CgGraph *g = NULL;
    if (cg_sample_connected(degrees, 6, 1, rng, &g) != CG_STATUS_OK) {
        fprintf(stderr, "error: %s\n", cg_last_error());
        return 1;
    }
    size_t e = cg_graph_edge_count(g);
    uint32_t *edges = malloc(2 * e * sizeof *edges);
    cg_graph_edges(g, edges, 2 * e);
    for (size_t i = 0; i < e; i++)
        printf("%u %u\n", edges[2 * i], edges[2 * i + 1]);
    free(edges);
    cg_graph_free(g);
    cg_rng_free(rng);
    return 0;
}
