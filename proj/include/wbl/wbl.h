#ifndef WBL_WBL_H
#define WBL_WBL_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define WBL_API __declspec(dllexport)
#else
#define WBL_API __attribute__((visibility("default")))
#endif

/* Status values. The process exit code for a status is wbl_exit_code(). */
typedef enum wbl_status {
  WBL_OK = 0,
  WBL_ERR_CONFIG = 1,
  WBL_ERR_DATA = 2,
  WBL_ERR_UPSTREAM = 3,
  WBL_ERR_STATE = 4,
  WBL_ERR_IO = 5,
  WBL_ERR_ARGUMENT = 6,
  WBL_ERR_INTERNAL = 7
} wbl_status;

typedef struct wbl_corpus wbl_corpus;
typedef struct wbl_server wbl_server;

WBL_API const char* wbl_version(void);

/* Details of the last failure on the calling thread. The code is the
   library's error name (e.g. "MalformedRecord"); both strings stay valid
   until the next failing call on the same thread. */
WBL_API const char* wbl_last_error_code(void);
WBL_API const char* wbl_last_error_message(void);
WBL_API const char* wbl_last_error_detail(void);

/* 0 success, 1 config, 2 data, 3 upstream provider. */
WBL_API int wbl_exit_code(wbl_status status);

/* Strings returned through char** out-parameters are owned by the caller. */
WBL_API void wbl_string_free(char* s);

/* --- corpora --- */

WBL_API wbl_status wbl_corpus_load(const char* path, wbl_corpus** out);
WBL_API wbl_status wbl_corpus_parse(const char* text, size_t length, wbl_corpus** out);
WBL_API void wbl_corpus_free(wbl_corpus* corpus);
/* Canonical line-delimited form. */
WBL_API wbl_status wbl_corpus_export(const wbl_corpus* corpus, char** out);
/* SHA-256 of the canonical form, hex. */
WBL_API wbl_status wbl_corpus_fingerprint(const wbl_corpus* corpus, char** out);
/* Counts as a JSON object. */
WBL_API wbl_status wbl_corpus_summary(const wbl_corpus* corpus, char** out_json);

/* Runs the configured analyses on an in-memory corpus; the report is
   line-delimited JSON. config_json may be NULL for defaults. */
WBL_API wbl_status wbl_corpus_analyze(const wbl_corpus* corpus, const char* config_json, char** out_report);

/* --- commands --- */

/* Runs ingest, score, analyze, report or simulate with a JSON run
   configuration (keys as in the config file: corpus, provider, seed,
   analyses, out, jobs, include_partial, ...). On return *out_json holds a
   JSON summary, or NULL on failure. When some analyses failed but the
   artifacts were written, the summary lists them under "failed" and the
   status is WBL_ERR_DATA. */
WBL_API wbl_status wbl_run(const char* command, const char* config_json, char** out_json);

/* Comma-separated analysis ids, in report order. */
WBL_API const char* wbl_analysis_ids(void);

/* --- study service --- */

/* Binds the HTTP service (serve.host / serve.port, 0 picks a free port). */
WBL_API wbl_status wbl_server_create(const char* config_json, wbl_server** out);
WBL_API int wbl_server_port(const wbl_server* server);
/* Blocks until wbl_server_stop() is called from another thread. */
WBL_API wbl_status wbl_server_run(wbl_server* server);
WBL_API void wbl_server_stop(wbl_server* server);
WBL_API void wbl_server_free(wbl_server* server);

#ifdef __cplusplus
}
#endif

#endif
