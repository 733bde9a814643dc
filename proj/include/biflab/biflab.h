#ifndef BIFLAB_H
#define BIFLAB_H

#ifdef __cplusplus
extern "C" {
#endif

/* Opaque result handle owning the JSON document produced by a verb. */
typedef struct biflab_result biflab_result;

/* Run one verb ("render", "solve-per", "continue-per", "solve-neutral",
 * "find-misiurewicz", "find-window", "baby-mandel", "straighten-check",
 * "embed-sample", "boxdim", "experiment", "verify") on a JSON config string.
 *
 * Returns 0 on success, 2 on validation errors (bad config, bad artifact),
 * 3 on convergence failures, 4 on I/O errors. On success *out receives a
 * handle the caller must free with biflab_result_free; on failure *out is
 * set to NULL and biflab_last_error() describes the problem. */
int biflab_run_verb(const char* verb, const char* config_json,
                    biflab_result** out);

/* The result document as a JSON string; owned by the handle. */
const char* biflab_result_json(const biflab_result* r);

void biflab_result_free(biflab_result* r);

/* Message for the last failing call on this thread. */
const char* biflab_last_error(void);

/* Machine-readable error name for the last failing call on this thread. */
const char* biflab_last_error_name(void);

/* Tolerance documentation table (JSON array of {name, default, module, doc});
 * static storage, do not free. */
const char* biflab_tolerances_json(void);

const char* biflab_version(void);

#ifdef __cplusplus
}
#endif

#endif /* BIFLAB_H */
