/*
 * treebandit C API.
 *
 * Every function returns a tb_status. On failure the message of the most
 * recent error on the calling thread is available from tb_last_error().
 * Strings returned through char** out-parameters are owned by the caller
 * and must be released with tb_free_string(). Output file paths accept "-"
 * for standard output.
 */
#ifndef TREEBANDIT_TREEBANDIT_H
#define TREEBANDIT_TREEBANDIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define TB_API __declspec(dllexport)
#else
#define TB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tb_status {
  TB_OK = 0,
  TB_ERR_STRUCTURAL = 1,  /* malformed trajectory, tree or session state */
  TB_ERR_PARAMETER = 2,   /* invalid argument or config value */
  TB_ERR_GENERATION = 3,  /* instance generation failed */
  TB_ERR_PARSE = 4,       /* unreadable file or token */
  TB_ERR_PROTOCOL = 5,    /* agent protocol violation or timeout */
  TB_ERR_UNSUPPORTED = 6, /* combination not supported */
  TB_ERR_INVARIANT = 7,   /* internal check failed, or checksum mismatch */
  TB_ERR_IO = 8,
  TB_ERR_CAPACITY = 9, /* model too small for the input */
  TB_ERR_NULL = 10,    /* null handle or out-parameter */
  TB_ERR_UNKNOWN = 99
} tb_status;

typedef struct tb_config tb_config;
typedef struct tb_model tb_model;

TB_API const char* tb_version(void);
TB_API const char* tb_last_error(void);
TB_API void tb_free_string(char* s);

/* Experiment configuration. */
TB_API tb_status tb_config_new(tb_config** out);
TB_API tb_status tb_config_load(const char* path, tb_config** out);
/* Dotted key override, e.g. ("tree.depth", "4") or ("policies", "uniform-leaf,path-uct"). */
TB_API tb_status tb_config_set(tb_config* cfg, const char* key, const char* value);
TB_API tb_status tb_config_to_json(const tb_config* cfg, char** out_json);
TB_API void tb_config_free(tb_config* cfg);

/* Writes <dir>/instances.json with train, val and test instances. */
TB_API tb_status tb_gen_instances(const tb_config* cfg, const char* dir, size_t* out_count);
/* Writes the corpus, vocab and manifest into dir. out_records may be NULL. */
TB_API tb_status tb_gen_corpus(const tb_config* cfg, const char* dir, size_t* out_records);
/* Recomputes corpus checksums and split bookkeeping. */
TB_API tb_status tb_verify_corpus(const char* manifest_path);

/*
 * Agent strings: "<policy>", "policy:<policy>", "model:<policy>",
 * "model-file:<path>", "cmd:<shell command>", "listen:[host:]port".
 * Policies: uniform-leaf, greedy-leaf, uniform-path, path-pure-exploration,
 * path-greedy, path-uct, with options such as "path-uct:c=0.2:succ=plain".
 */

/* Metric summary CSV to summary_csv, per-run CSV to runs_csv (either may be
 * NULL). out_failed receives the number of failed runs (may be NULL). */
TB_API tb_status tb_eval(const tb_config* cfg, const char* agent, const char* summary_csv, const char* runs_csv,
                         size_t* out_failed);
/* axis: budget, depth, goals or wall_density. */
TB_API tb_status tb_sweep(const tb_config* cfg, const char* agent, const char* axis, const double* values,
                          size_t n_values, const char* out_csv);
TB_API tb_status tb_kl_eval(const tb_config* cfg, const char* reference_policy, const char* candidate,
                            const char* out_csv);

/* Constructed hard-attention models. */
TB_API tb_status tb_model_build(const char* policy, int budget, int branching, tb_model** out);
TB_API tb_status tb_model_load(const char* path, tb_model** out);
TB_API tb_status tb_model_save(const tb_model* model, const char* path);
TB_API tb_status tb_model_info(const tb_model* model, int* out_dimension, int* out_layers, int* out_slots);
TB_API void tb_model_free(tb_model* model);

/*
 * Environment side of the wire protocol for one instance file.
 * transport: "stdio" (this process's stdin/stdout), "cmd:<shell command>"
 * or "listen:[host:]port". instance_path may name one entry of an
 * instances file as "instances.json#<id>". Runs `sessions` sessions back to back; session k
 * draws values from seed/k. The session log goes to log_path and the
 * empirical traces to trace_path (either may be NULL). out_failed counts
 * sessions that did not end with ok or exhausted.
 */
TB_API tb_status tb_serve(const char* instance_path, int budget, int rollouts, const char* transport, int sessions,
                          uint64_t seed, double timeout_s, const char* log_path, const char* trace_path,
                          size_t* out_failed);
/*
 * Agent side of the wire protocol, driven by an internal policy or a
 * constructed model ("<policy>" or "model:<policy>"; branching sizes
 * constructed models). transport: "stdio" or "connect:host:port". Returns
 * after end of stream; out_sessions (may be NULL) counts completed sessions.
 */
TB_API tb_status tb_agent(const char* agent, int branching, uint64_t seed, const char* transport, double timeout_s,
                          int* out_sessions);

#ifdef __cplusplus
}
#endif

#endif
