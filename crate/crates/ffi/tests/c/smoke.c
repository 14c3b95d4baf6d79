#include <math.h>
#include <stdio.h>
#include "onebit.h"

#define CHECK(cond) do { if (!(cond)) { printf("fail line %d: %s\n", __LINE__, onebit_last_error()); return 1; } } while (0)

int main(void) {
    double z;
    CHECK(onebit_zeta(0, 0.0, &z) == ONEBIT_STATUS_OK);
    CHECK(fabs(z - 2.0 / M_PI) < 1e-12);

    OnebitCapacity c;
    CHECK(onebit_capacity_coherent(1.0, 1, 4096, ONEBIT_COHERENT_METHOD_EXACT, &c) == ONEBIT_STATUS_OK);
    CHECK(c.has_terms == 1);
    CHECK(fabs(c.term_dimension + c.term_volume + c.term_alpha - c.bits) < 1e-9);

    CHECK(onebit_capacity_noncoherent(1.0, 5, 5, 1000, ONEBIT_NONCOHERENT_METHOD_EXACT, 0, 0, &c)
          == ONEBIT_STATUS_UNSUPPORTED);
    CHECK(onebit_last_error()[0] != '\0');

    double q[3] = {0.5, 0.2, 0.1};
    OnebitPmf *p = NULL;
    CHECK(onebit_pmf_exact(3, q, 3, &p) == ONEBIT_STATUS_OK);
    double buf[8], s = 0.0;
    CHECK(onebit_pmf_copy(p, buf, 4) == ONEBIT_STATUS_BUFFER_TOO_SMALL);
    CHECK(onebit_pmf_copy(p, buf, 8) == ONEBIT_STATUS_OK);
    for (int i = 0; i < 8; i++) s += buf[i];
    CHECK(fabs(s - 1.0) < 1e-14);
    onebit_pmf_free(p);

    OnebitQSampler *qs = NULL;
    CHECK(onebit_q_sampler_new(4, 0.9, 7, &qs) == ONEBIT_STATUS_OK);
    double draw[6];
    CHECK(onebit_q_sampler_next(qs, draw, 6) == ONEBIT_STATUS_OK);
    onebit_q_sampler_free(qs);

    printf("ok %s\n", onebit_version());
    return 0;
}
