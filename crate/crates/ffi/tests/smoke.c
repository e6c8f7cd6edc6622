/* Minimal C consumer: runs ATM-R on BNH and a callback problem. */
#include <stdio.h>
#include <stdlib.h>
#include "atmr.h"

static int sch(const double *x, size_t n, double *f, double *g, double *h, void *ud) {
    (void)n; (void)g; (void)h; (void)ud;
    f[0] = x[0] * x[0];
    f[1] = (x[0] - 2.0) * (x[0] - 2.0);
    return 0;
}

int main(void) {
    AtmrProblem *p = NULL;
    if (atmr_problem_new("BNH", NULL, NULL, 0, &p) != ATMR_STATUS_OK) return 1;
    AtmrConfig cfg = atmr_config_default(p);
    cfg.n = 20;
    cfg.max_fes = 400;
    cfg.seed = 3;
    AtmrRun *run = NULL;
    if (atmr_run(p, ATMR_ALGORITHM_ATMR, &cfg, &run) != ATMR_STATUS_OK) return 2;
    size_t n = atmr_run_size(run);
    double *f = malloc(sizeof(double) * n * 2);
    if (atmr_run_objectives(run, f, n * 2) != ATMR_STATUS_OK) return 3;
    double ref[2] = {200.0, 100.0}, hv = 0.0;
    if (atmr_hypervolume(f, n, 2, ref, &hv) != ATMR_STATUS_OK || !(hv > 0.0)) return 4;
    free(f);
    atmr_run_free(run);
    atmr_problem_free(p);

    if (atmr_problem_new("NOPE", NULL, NULL, 0, &p) != ATMR_STATUS_UNKNOWN_PROBLEM) return 5;
    if (atmr_last_error_message() == NULL) return 6;

    double lo[1] = {-5.0}, hi[1] = {5.0};
    if (atmr_problem_new_callback("SCH", 1, 2, 0, 0, lo, hi, sch, NULL, &p) != ATMR_STATUS_OK) return 7;
    cfg = atmr_config_default(p);
    cfg.n = 20;
    cfg.max_fes = 400;
    if (atmr_run(p, ATMR_ALGORITHM_NSGA2_CDP, &cfg, &run) != ATMR_STATUS_OK) return 8;
    if (atmr_run_fes(run) != 400) return 9;
    atmr_run_free(run);
    atmr_problem_free(p);
    printf("ok %zu\n", n);
    return 0;
}
