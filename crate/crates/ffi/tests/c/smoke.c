#include <stdio.h>
#include <string.h>
#include "unitaylor.h"

static int fail(const char *what, UtStatus st) {
    const char *msg = ut_last_error_message();
    fprintf(stderr, "%s: status %d: %s\n", what, (int)st, msg ? msg : "(none)");
    return 1;
}

int main(int argc, char **argv) {
    if (argc < 2) return 2;
    FILE *f = fopen(argv[1], "rb");
    if (!f) return 2;
    static char scenario[1 << 16];
    size_t n = fread(scenario, 1, sizeof scenario - 1, f);
    fclose(f);
    scenario[n] = 0;

    UtPoly *p = NULL;
    UtStatus st = ut_poly_from_json("[{\"w_exp\":[],\"z_exp\":[2],\"re\":1,\"im\":0}]", &p);
    if (st != UT_STATUS_OK) return fail("poly", st);
    double z[2] = {0.0, 1.0}, v[2];
    st = ut_poly_eval(p, NULL, z, v);
    if (st != UT_STATUS_OK) return fail("eval", st);
    ut_poly_free(p);
    if (v[0] != -1.0 || v[1] != 0.0) return 3;

    if (ut_poly_from_json("[", &p) != UT_STATUS_INVALID_INPUT || !ut_last_error_message()) return 4;

    UtConstruction *c = NULL;
    st = ut_construct(scenario, &c);
    if (st != UT_STATUS_OK) return fail("construct", st);
    UtStream *s = NULL;
    UtCertificate *cert = NULL;
    if ((st = ut_construction_stream(c, &s)) != UT_STATUS_OK) return fail("stream", st);
    if ((st = ut_construction_certificate(c, &cert)) != UT_STATUS_OK) return fail("certificate", st);
    bool ok = false;
    char *report = NULL;
    if ((st = ut_verify(s, cert, &ok, &report)) != UT_STATUS_OK) return fail("verify", st);
    printf("passed=%d verified=%d\n%s\n", ut_construction_passed(c), ok, report);
    ut_string_free(report);
    ut_certificate_free(cert);
    ut_stream_free(s);
    ut_construction_free(c);
    return ok ? 0 : 5;
}
