/* C interface to the unlearning laboratory. The shared library exposes the
 * dataset and model objects behind opaque handles plus the pipeline commands
 * (pretrain / unlearn / evaluate / sweep / leakage check) driven by a
 * TOML-style experiment config. Every call returns a status code; the
 * message for the most recent failure on the calling thread is available
 * through mu_last_error(). Strings returned through char** are owned by the
 * caller and released with mu_string_free(). */
#ifndef MULAB_CAPI_H
#define MULAB_CAPI_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MULAB_API __declspec(dllexport)
#else
#define MULAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mu_status {
  MU_OK = 0,
  MU_ERR_INVALID_ARGUMENT = 1,
  MU_ERR_IO = 2,
  MU_ERR_NUMERIC = 3,
  MU_ERR_RUNTIME = 4,
} mu_status;

MULAB_API const char* mu_version(void);

/* Message for the most recent failure on this thread; empty if none. */
MULAB_API const char* mu_last_error(void);

typedef struct mu_dataset mu_dataset;
typedef struct mu_net mu_net;

/* ---- datasets ---------------------------------------------------------- */

typedef struct mu_dataset_spec {
  int k;
  int n_per_class;
  int dim;
  double spread;
  uint64_t seed;
  double forget_fraction;
  double unseen_fraction;
  double test_fraction;
  int stratified;   /* 0/1 */
  int forget_class; /* -1 = instance-wise split, otherwise the class index */
  double center_shift;
} mu_dataset_spec;

MULAB_API void mu_dataset_spec_defaults(mu_dataset_spec* spec);

MULAB_API mu_status mu_dataset_generate(const mu_dataset_spec* spec,
                                        mu_dataset** out);
MULAB_API mu_status mu_dataset_load(const char* path, mu_dataset** out);
MULAB_API mu_status mu_dataset_save(const mu_dataset* ds, const char* path);

/* Counts, class count, dimension, and per-split checksums as JSON. */
MULAB_API mu_status mu_dataset_info_json(const mu_dataset* ds, char** json_out);

/* Duplicate scan: within-split pairs and cross-split leaks as JSON. */
MULAB_API mu_status mu_dataset_leakage_json(const mu_dataset* ds,
                                            char** json_out);

MULAB_API void mu_dataset_free(mu_dataset* ds);

/* ---- models ------------------------------------------------------------ */

MULAB_API mu_status mu_net_load(const char* path, mu_net** out);
MULAB_API mu_status mu_net_save(const mu_net* net, const char* path);
MULAB_API mu_status mu_net_input_dim(const mu_net* net, int* out);
MULAB_API mu_status mu_net_num_classes(const mu_net* net, int* out);

/* logits_len must equal the class count. */
MULAB_API mu_status mu_net_forward(const mu_net* net, const double* input,
                                   size_t input_len, double* logits_out,
                                   size_t logits_len);

/* split is one of "forget", "retain", "unseen", "test". */
MULAB_API mu_status mu_net_accuracy(const mu_net* net, const mu_dataset* ds,
                                    const char* split, double* out);

MULAB_API void mu_net_free(mu_net* net);

/* ---- pipeline ----------------------------------------------------------- */
/* config_path names a TOML-style experiment config. out_dir overrides the
 * config's run.out_dir when non-NULL. JSON results are returned through the
 * char** out parameters. */

/* Copies the config's seed list into seeds_out (up to capacity entries) and
 * reports the full count; call with capacity 0 to size the buffer. */
MULAB_API mu_status mu_config_seeds(const char* config_path,
                                    uint64_t* seeds_out, size_t capacity,
                                    size_t* count_out);

MULAB_API mu_status mu_pretrain(const char* config_path, uint64_t seed,
                                const char* out_dir, char** result_json);

/* method: lotus | gold | finetune | neggrad_plus | random_label |
 * bad_teacher */
MULAB_API mu_status mu_unlearn(const char* config_path, const char* method,
                               uint64_t seed, const char* out_dir,
                               char** result_json);

/* Evaluates the given run manifests; with n_manifests == 0 every manifest
 * found under the output directory is evaluated. */
MULAB_API mu_status mu_evaluate(const char* config_path,
                                const char* const* manifest_paths,
                                size_t n_manifests, const char* out_dir,
                                char** table_json);

/* Full pipeline over the config's seeds and methods. */
MULAB_API mu_status mu_sweep(const char* config_path, const char* out_dir,
                             char** table_json);

/* dataset_path, when non-NULL, checks that file; otherwise the config's
 * generated dataset for the given seed is checked. */
MULAB_API mu_status mu_leakage_check(const char* config_path, uint64_t seed,
                                     const char* dataset_path,
                                     char** report_json);

MULAB_API void mu_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* MULAB_CAPI_H */
