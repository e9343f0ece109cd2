#include <stdio.h>
#include "cellfree.h"

int main(void) {
    CfConfig *cfg = NULL;
    CfModel *model = NULL;
    CfPlanOptimum opt;

    if (cf_config_load("default", &cfg) != CF_STATUS_OK) {
        fprintf(stderr, "config: %s\n", cf_last_error());
        return 1;
    }
    if (cf_model_new(cfg, 42, &model) != CF_STATUS_OK ||
        cf_grid_search(model, 1.0, 10.0, 0.1, &opt) != CF_STATUS_OK) {
        fprintf(stderr, "error: %s\n", cf_last_error());
        cf_config_free(cfg);
        return 1;
    }
    printf("N* = %.1f, M_OF* = %zu, EE* = %.4e bits/J\n", opt.n_star, opt.m_of_star, opt.ee_star);
    cf_model_free(model);
    cf_config_free(cfg);
    return 0;
}
