/* C interface to the evaluation toolkit. All functions return a status code;
 * 0 is success. String outputs are heap-allocated and must be released with
 * esteval_string_free. Failure details for the calling thread are available
 * via esteval_last_error until the next call. */
#ifndef ESTEVAL_H
#define ESTEVAL_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum esteval_status {
    ESTEVAL_OK = 0,
    ESTEVAL_E_CONFIG = 1,   /* config parse or validation problem */
    ESTEVAL_E_DATASET = 2,  /* missing or malformed input data */
    ESTEVAL_E_NUMERIC = 3,  /* rank deficiency, non-convergence, ... */
    ESTEVAL_E_INVALID = 4,  /* precondition violated */
    ESTEVAL_E_IO = 5,       /* file system failure */
    ESTEVAL_E_INTERNAL = 6
} esteval_status;

typedef struct esteval_config esteval_config;

uint32_t esteval_abi_version(void); /* 1 */

/* Message for the most recent failure in this thread; never NULL. */
const char* esteval_last_error(void);

esteval_status esteval_config_load(const char* path, esteval_config** out);
esteval_status esteval_config_parse(const char* json_text, esteval_config** out);
void esteval_config_free(esteval_config* cfg);

/* Overrides applied on top of the loaded config; mirror the CLI flags.
 * Replications map to the kind's replication count (cv replications or
 * clustering simulations); other kinds reject the override. */
esteval_status esteval_config_set_seed(esteval_config* cfg, uint64_t seed);
esteval_status esteval_config_set_replications(esteval_config* cfg, uint64_t n);
esteval_status esteval_config_set_output_dir(esteval_config* cfg, const char* dir);
esteval_status esteval_config_set_threads(esteval_config* cfg, uint64_t threads);

/* Issues joined with newlines; empty string when the config is runnable. */
esteval_status esteval_config_validate(const esteval_config* cfg, char** issues);

/* Executes the experiment, writes the artifacts into the configured output
 * directory and returns the report.json content. */
esteval_status esteval_run(const esteval_config* cfg, char** report_json);

/* Summary-table CSV for a report.json document. */
esteval_status esteval_render_table(const char* report_json, char** csv);

void esteval_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* ESTEVAL_H */
