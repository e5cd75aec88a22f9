#include <assert.h>
#include <math.h>
#include <stdio.h>
#include <string.h>
#include "fcmwdtw.h"

int main(void) {
    printf("version %s\n", fcmwdtw_version());

    struct FcmwdtwFitOptions options;
    assert(fcmwdtw_fit_options_default(&options) == FcmwdtwStatus_Ok);
    options.window_length = 8;
    options.stride = 2;
    options.clusters = 2;
    options.max_iters = 6;

    enum { N = 160, D = 2 };
    double values[N * D];
    for (int t = 0; t < N; t++) {
        values[t * D] = sin(t * 0.2);
        values[t * D + 1] = cos(t * 0.2);
    }

    struct FcmwdtwModel *model = NULL;
    FcmwdtwStatus status = fcmwdtw_fit(values, N, D, &options, &model);
    if (status != FcmwdtwStatus_Ok) {
        fprintf(stderr, "fit: %s\n", fcmwdtw_last_error());
        return 1;
    }

    struct FcmwdtwModelInfo info;
    assert(fcmwdtw_model_info(model, &info) == FcmwdtwStatus_Ok);
    assert(info.clusters == 2 && info.dims == 2 && info.window_length == 8);

    double scores[N];
    status = fcmwdtw_score_series(model, values, N, D, FcmwdtwAggregation_Mean, scores);
    assert(status == FcmwdtwStatus_Ok);
    int covered = 0;
    for (int t = 0; t < N; t++) covered += !isnan(scores[t]);
    assert(covered > 0);

    double x[] = {0.0, 1.0, 2.0};
    double y[] = {0.0, 2.0};
    double dist = -1.0;
    assert(fcmwdtw_distance(x, 3, y, 2, 1, NULL, 2.0, &dist) == FcmwdtwStatus_Ok);
    assert(dist >= 0.0);

    assert(fcmwdtw_fit(NULL, N, D, &options, &model) == FcmwdtwStatus_NullArgument);
    assert(strlen(fcmwdtw_last_error()) > 0);

    fcmwdtw_model_free(model);
    printf("smoke ok (covered=%d dist=%.3f loss=%.4f iters=%zu)\n",
           covered, dist, info.final_loss, info.iterations);
    return 0;
}
