#include <math.h>
#include <stdio.h>
#include <string.h>

#include "ncerg.h"

#define CHECK(call)                                                            \
  do {                                                                         \
    NcergStatus s_ = (call);                                                   \
    if (s_ != NCERG_STATUS_OK) {                                               \
      fprintf(stderr, "%s -> %d: %s\n", #call, (int)s_,                        \
              ncerg_last_error_message());                                     \
      return 1;                                                                \
    }                                                                          \
  } while (0)

int main(void) {
  size_t dims[] = {2, 1};
  double weights[] = {1.0, 0.5};
  double diag[] = {3.0, -1.0, 2.0};
  NcergOperator *x = NULL;
  CHECK(ncerg_operator_diagonal(dims, weights, 2, diag, 3, &x));

  double tr = 0.0, ti = 0.0, n2 = 0.0;
  CHECK(ncerg_operator_trace(x, &tr, &ti));
  CHECK(ncerg_operator_norm_p(x, 2.0, &n2));
  if (fabs(tr - 3.0) > 1e-12 || fabs(n2 - sqrt(12.0)) > 1e-12) {
    fprintf(stderr, "trace %g norm %g\n", tr, n2);
    return 1;
  }

  size_t len = 0;
  if (ncerg_operator_mu(x, NULL, NULL, 0, &len) != NCERG_STATUS_BUFFER_TOO_SMALL || len != 3) {
    fprintf(stderr, "mu length %zu\n", len);
    return 1;
  }

  NcergSemigroup *sg = NULL;
  CHECK(ncerg_semigroup_from_json("{\"family\":\"heat_cycle\",\"n\":2}", &sg));
  size_t d2[] = {1, 1};
  double w2[] = {1.0, 1.0};
  double v2[] = {1.0, -1.0};
  NcergOperator *y = NULL, *a = NULL;
  CHECK(ncerg_operator_diagonal(d2, w2, 2, v2, 2, &y));
  CHECK(ncerg_average_phi1(sg, y, 1.0, &a));
  double re[2], im[2];
  CHECK(ncerg_operator_entries(a, re, im, 2, &len));
  if (fabs(re[0] - (1.0 - exp(-2.0)) / 2.0) > 1e-12) {
    fprintf(stderr, "factor %g\n", re[0]);
    return 1;
  }

  if (ncerg_semigroup_from_json("{\"family\":\"nope\"}", &sg) == NCERG_STATUS_OK ||
      ncerg_last_error_message() == NULL) {
    return 1;
  }

  ncerg_operator_free(a);
  ncerg_operator_free(y);
  ncerg_operator_free(x);
  ncerg_semigroup_free(sg);
  printf("ok %s\n", ncerg_version());
  return 0;
}
