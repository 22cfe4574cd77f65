#include <stdio.h>
#include <string.h>
#include "flc.h"

int main(void) {
    FlcRun *run = NULL;
    if (flc_run_from_preset("silver_mean", &run) != FLC_STATUS_OK) {
        fprintf(stderr, "%s\n", flc_last_error());
        return 1;
    }
    char *json = NULL;
    bool pass = false;
    if (flc_check(run, "ud", &json, &pass) != FLC_STATUS_OK || !pass) {
        return 2;
    }
    flc_string_free(json);

    FlcRun *bad = NULL;
    if (flc_run_from_json("{\"descriptor\": \"penrose\"}", &bad) != FLC_STATUS_ERROR_CONFIG) {
        return 3;
    }
    if (flc_last_error() == NULL || bad != NULL) {
        return 4;
    }
    flc_run_free(run);
    printf("ok %s\n", flc_version());
    return 0;
}
