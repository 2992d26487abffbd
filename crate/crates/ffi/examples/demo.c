/* Build: cargo build -p uafkit-ffi --release
 *        cc demo.c -I../include ../../../target/release/libuafkit_ffi.a -lm -lpthread -ldl -o demo */
#include <stdio.h>
#include "uafkit.h"

int main(void) {
    UafkitParams p;
    if (uafkit_preset("tanh", &p) != UAFKIT_STATUS_OK) {
        fprintf(stderr, "%s\n", uafkit_last_error());
        return 1;
    }
    double y;
    uafkit_eval_stable(&p, 0.5, &y);
    printf("tanh preset A=%.8f f(0.5)=%.8f\n", p.a, y);

    UafkitErrorReport *report = NULL;
    if (uafkit_error_report(&p, "tanh", -10.0, 10.0, 2001, &report) != UAFKIT_STATUS_OK) {
        fprintf(stderr, "%s\n", uafkit_last_error());
        return 1;
    }
    double max_err, loc;
    uafkit_error_report_max_abs_error(report, &max_err);
    uafkit_error_report_location(report, 1, &loc);
    printf("max |error| %.6f at x = %.6f\n", max_err, loc);
    uafkit_error_report_free(report);

    UafkitFitResult *fit = NULL;
    uafkit_fit_builtin("sigmoid-family", &fit);
    UafkitParams fitted;
    uafkit_fit_result_params(fit, &fitted);
    printf("fitted sigmoid A = %.8f\n", fitted.a);
    uafkit_fit_result_free(fit);

    if (uafkit_eval_naive(&(UafkitParams){1000, 0, 0, 0, 0}, 5.0, &y) == UAFKIT_STATUS_OVERFLOW)
        printf("naive overflow: %s\n", uafkit_last_error());
    return 0;
}
