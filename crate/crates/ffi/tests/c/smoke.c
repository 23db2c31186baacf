#include <math.h>
#include <stdio.h>
#include "radial_sobolev.h"

int main(void) {
    RsSpacing law = {RS_SPACING_KIND_ALGEBRAIC, 1.0, 2.0};
    RsGrid *grid = NULL;
    if (rs_grid_new(INFINITY, 400, law, &grid) != RS_STATUS_OK) return 10;
    RsParams params = {1, 2.0, 3.0, 3.0, INFINITY};
    RsExtremal *ext = NULL;
    if (rs_minimize(&params, grid, 1e-6, 500, &ext) != RS_STATUS_OK) return 11;
    RsExtremalSummary s;
    if (rs_extremal_summary(ext, &s) != RS_STATUS_OK) return 12;
    printf("%.12f\n", s.s_estimate);
    if (fabs(s.s_estimate - 4.0 / sqrt(3.0)) > 1e-6) return 13;
    RsParams bad = {2, 2.0, 3.0, 3.0, INFINITY};
    if (rs_minimize(&bad, grid, 1e-6, 500, &ext) != RS_STATUS_REGIME) return 14;
    if (rs_last_error() == NULL) return 15;
    rs_extremal_free(ext);
    rs_grid_free(grid);
    return 0;
}
