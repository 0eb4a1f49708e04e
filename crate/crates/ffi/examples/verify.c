/* Load a scenario file, run verify and print the text report.
 *
 *   cc -I crates/ffi/include crates/ffi/examples/verify.c \
 *      target/release/libfieldcheck_ffi.a -lpthread -ldl -lm -o verify
 *   ./verify crates/core/scenarios/oscillating-monopole.json
 */
#include <stdio.h>

#include "fieldcheck.h"

int main(int argc, char **argv) {
    if (argc != 2) {
        fprintf(stderr, "usage: %s SCENARIO.json\n", argv[0]);
        return 2;
    }
    FcScenario *scenario = NULL;
    FcStatus st = fc_scenario_from_path(argv[1], &scenario);
    if (st != FC_STATUS_OK) {
        char *msg = fc_last_error();
        fprintf(stderr, "fieldcheck %s: %s\n", fc_version(), msg ? msg : "unknown error");
        fc_string_free(msg);
        return (int)st;
    }

    FcReport *report = NULL;
    st = fc_run(scenario, FC_COMMAND_VERIFY, &report);
    if (report == NULL) {
        char *msg = fc_last_error();
        fprintf(stderr, "%s\n", msg ? msg : "unknown error");
        fc_string_free(msg);
        fc_scenario_free(scenario);
        return (int)st;
    }

    char *text = fc_report_render(report, FC_FORMAT_TEXT);
    fputs(text, stdout);
    fc_string_free(text);
    printf("passed: %d\n", fc_report_passed(report));

    fc_report_free(report);
    fc_scenario_free(scenario);
    return (int)st;
}
