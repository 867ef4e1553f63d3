#include <assert.h>
#include <stdio.h>
#include <string.h>
#include "peterweyl.h"

int main(void) {
    assert(pw_abi_version() == PW_ABI_VERSION);

    PwContext *ctx = pw_context_new_su2();
    assert(ctx != NULL);

    size_t len = 0;
    assert(pw_grid_len(ctx, 4, &len) == PW_OK);
    assert(len == 4 * 4 * 4 * 8);

    double quat[4];
    assert(pw_grid_node(ctx, 4, 0, quat, 4) == PW_OK);

    char *json = NULL;
    assert(pw_run_check(ctx, "weyl", 32.0, 4, 7, &json) == PW_OK);
    assert(json != NULL);
    assert(strstr(json, "\"pass\": true") != NULL);
    pw_string_free(json);

    json = NULL;
    assert(pw_run_check(ctx, "nosuch", 16.0, 16, 7, &json) == PW_ERR_USAGE);
    assert(json == NULL);
    assert(strstr(pw_last_error(), "unknown check") != NULL);

    json = NULL;
    assert(pw_solve(ctx, "heat", 8.0, 12, 7, &json) == PW_OK);
    assert(strstr(json, "\"operator\": \"heat\"") != NULL);
    pw_string_free(json);

    pw_context_free(ctx);

    PwContext *torus = pw_context_new_torus();
    assert(pw_grid_len(torus, 8, &len) == PW_OK && len == 16);
    json = NULL;
    assert(pw_run_check(torus, "weyl", 16.0, 16, 7, &json) == PW_ERR_USAGE);
    pw_context_free(torus);

    puts("ffi smoke: all assertions passed");
    return 0;
}
