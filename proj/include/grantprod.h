/* C interface to the grant productivity prediction library.
 *
 * All functions return gp_status; GP_OK is 0. On failure, gp_last_error()
 * returns a thread-local message describing the most recent error. Strings
 * returned through out-parameters are heap-allocated and must be released
 * with gp_string_free().
 */
#ifndef GRANTPROD_H
#define GRANTPROD_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gp_status {
  GP_OK = 0,
  GP_ERR_PARSE = 1,
  GP_ERR_CORPUS = 2,       /* duplicate ids, dangling references, unknown entities */
  GP_ERR_DATA = 3,         /* degenerate or insufficient data */
  GP_ERR_MODEL = 4,        /* hyperparameters, dimensions, model misuse */
  GP_ERR_CONFIG = 5,       /* invalid configuration */
  GP_ERR_NO_RESULTS = 6,   /* report requested before any experiment ran */
  GP_ERR_IO = 7,
  GP_ERR_INTERNAL = 8
} gp_status;

typedef struct gp_corpus gp_corpus;

const char* gp_last_error(void);
void gp_string_free(char* s);

/* Loads the five JSONL corpus files and verifies referential integrity. */
gp_status gp_corpus_open(const char* grants_path, const char* researchers_path,
                         const char* publications_path, const char* institutions_path,
                         const char* taxonomy_path, gp_corpus** out);
void gp_corpus_close(gp_corpus* corpus);

/* Plain-text ingestion report: entity counts and warnings. */
gp_status gp_corpus_summary(const gp_corpus* corpus, char** out_text);

/* Writes a synthetic corpus plus its ground-truth file into out_dir.
 * config_json may be "{}" for defaults. */
gp_status gp_synth_generate(const char* config_json, const char* out_dir);

/* Feature matrix as CSV for one field. families_csv is a comma-separated
 * family list or NULL/empty for all families. */
gp_status gp_features_csv(const gp_corpus* corpus, const char* field, const char* families_csv,
                          int paper_mode, char** out_csv);

/* Runs one experiment ("eval-single", "eval-combo", "select", "vote").
 * options_json carries fields/families/classifiers/k/seed/repetitions/
 * folds/paper_mode/out_dir; out_dir_used receives the directory written. */
gp_status gp_experiment_run(const gp_corpus* corpus, const char* experiment,
                            const char* options_json, char** out_dir_used);

/* Renders the result tables with reference values side by side. */
gp_status gp_report_render(const char* results_root, const char* reference_csv, char** out_text);

#ifdef __cplusplus
}
#endif

#endif /* GRANTPROD_H */
