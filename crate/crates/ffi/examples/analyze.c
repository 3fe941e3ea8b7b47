#include <stdio.h>
#include <stdlib.h>
#include "pclass.h"

int main(int argc, char **argv) {
    uint64_t p = argc > 1 ? strtoull(argv[1], NULL, 10) : 37;
    PclassReport *report = NULL;
    PclassStatus status = pclass_analyze(p, NULL, &report);
    if (status != PCLASS_STATUS_OK) {
        fprintf(stderr, "pclass: %s\n", pclass_last_error());
        return (int)status;
    }
    printf("p = %llu: r = %u, lambda = %u, nu = %lld\n",
           (unsigned long long)pclass_report_prime(report),
           pclass_report_r(report), pclass_report_lambda(report),
           (long long)pclass_report_nu(report));
    status = pclass_report_status(report);
    pclass_report_free(report);
    return (int)status;
}
