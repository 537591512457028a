/*
 * C interface of the ivpinn shared library.
 *
 * All functions return an error code (IVPINN_OK on success) and report
 * details through the caller-supplied errmsg buffer when one is accepted.
 * Runs are opaque handles created from a config file, executed once, and
 * queried for their result table.
 */
#ifndef IVPINN_H
#define IVPINN_H

#ifdef __cplusplus
extern "C" {
#endif

#define IVPINN_OK 0
#define IVPINN_ERR_INVALID_ARGUMENT 1
#define IVPINN_ERR_RUNTIME 2
#define IVPINN_ERR_CONFIG 3
#define IVPINN_ERR_PARTIAL 4 /* experiment finished, but some rows failed */

const char* ivpinn_version(void);
const char* ivpinn_error_name(int code);

typedef struct ivpinn_run ivpinn_run;

/* Parses the config file; the run is not executed yet. */
int ivpinn_run_create(const char* config_path, ivpinn_run** out, char* errmsg, int errmsg_len);

/* Overrides the output directory (else config out_dir, else $IVPINN_OUT). */
int ivpinn_run_set_out_dir(ivpinn_run* run, const char* out_dir, char* errmsg, int errmsg_len);

/* Executes the experiment; artifacts are written to the output directory.
 * Returns IVPINN_OK, IVPINN_ERR_PARTIAL (some rows failed) or an error. */
int ivpinn_run_execute(ivpinn_run* run, char* errmsg, int errmsg_len);

/* Result table of the executed run. */
int ivpinn_run_row_count(const ivpinn_run* run, int* n);
int ivpinn_run_col_count(const ivpinn_run* run, int* n);
int ivpinn_run_col_name(const ivpinn_run* run, int col, char* buf, int buf_len);
int ivpinn_run_value(const ivpinn_run* run, int row, int col, double* out);

/* Fitted log-log convergence rate; IVPINN_ERR_RUNTIME when undefined. */
int ivpinn_run_fitted_rate(const ivpinn_run* run, double* out);

/* Process-style exit code of the run: 0 ok, 1 partial, 2 config error. */
int ivpinn_run_exit_code(const ivpinn_run* run, int* out);

/* Number of files the run wrote, and their paths. */
int ivpinn_run_file_count(const ivpinn_run* run, int* n);
int ivpinn_run_file_path(const ivpinn_run* run, int i, char* buf, int buf_len);

void ivpinn_run_destroy(ivpinn_run* run);

/* Newline-separated names of the built-in test cases. */
int ivpinn_list_cases(char* buf, int buf_len);

/* Consistency/exactness self-tests; the log (one line per check) is written
 * into buf. Returns IVPINN_OK when every check passes. */
int ivpinn_self_check(char* buf, int buf_len);

#ifdef __cplusplus
}
#endif

#endif /* IVPINN_H */
