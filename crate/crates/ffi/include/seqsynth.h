#ifndef SEQSYNTH_H
#define SEQSYNTH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Result code of every fallible call.
 */
typedef enum SeqsynthStatus {
  SEQSYNTH_STATUS_OK = 0,
  SEQSYNTH_STATUS_NULL_POINTER = 1,
  SEQSYNTH_STATUS_INVALID_ARGUMENT = 2,
  SEQSYNTH_STATUS_IO = 3,
  SEQSYNTH_STATUS_PARSE = 4,
  SEQSYNTH_STATUS_DIMENSION_MISMATCH = 5,
  /**
   * A Rust panic was caught at the boundary.
   */
  SEQSYNTH_STATUS_INTERNAL = 6,
} SeqsynthStatus;

typedef enum SeqsynthMatrixKind {
  SEQSYNTH_MATRIX_KIND_DS = 0,
  SEQSYNTH_MATRIX_KIND_CVS = 1,
} SeqsynthMatrixKind;

typedef enum SeqsynthCountingMode {
  SEQSYNTH_COUNTING_MODE_PER_STREAM = 0,
  SEQSYNTH_COUNTING_MODE_PER_OCCURRENCE = 1,
} SeqsynthCountingMode;

typedef enum SeqsynthLengthKind {
  /**
   * Length histogram of the reference corpus.
   */
  SEQSYNTH_LENGTH_KIND_EMPIRICAL = 0,
  /**
   * `param_a` = length.
   */
  SEQSYNTH_LENGTH_KIND_CONSTANT = 1,
  /**
   * `param_a` = success probability p; lengths are failures + 1.
   */
  SEQSYNTH_LENGTH_KIND_GEOMETRIC = 2,
  /**
   * `param_a` = lambda.
   */
  SEQSYNTH_LENGTH_KIND_POISSON = 3,
  /**
   * `param_a` = mean, `param_b` = standard deviation.
   */
  SEQSYNTH_LENGTH_KIND_NORMAL = 4,
} SeqsynthLengthKind;

typedef enum SeqsynthStartKind {
  SEQSYNTH_START_KIND_UNIFORM = 0,
  /**
   * First-item frequencies of the reference corpus.
   */
  SEQSYNTH_START_KIND_EMPIRICAL = 1,
} SeqsynthStartKind;

/**
 * Opaque clickstream corpus with its vocabulary.
 */
typedef struct SeqsynthCorpus SeqsynthCorpus;

/**
 * Opaque sparse count matrix (DS or CVS).
 */
typedef struct SeqsynthMatrix SeqsynthMatrix;

/**
 * Generation parameters. A `memory_std` of zero means constant memory
 * `round(memory_mean)`.
 */
typedef struct SeqsynthGenerateConfig {
  double memory_mean;
  double memory_std;
  enum SeqsynthLengthKind length_kind;
  double length_param_a;
  double length_param_b;
  enum SeqsynthStartKind start_kind;
  double epsilon;
  size_t stream_count;
  uint64_t seed;
  /**
   * Zero selects the number of available CPUs.
   */
  size_t workers;
} SeqsynthGenerateConfig;

typedef struct SeqsynthGenerationStats {
  uint64_t dead_end_fallbacks;
  uint64_t zero_memory_walks;
  uint64_t items_emitted;
} SeqsynthGenerationStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next call on this thread.
 */
const char *seqsynth_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *seqsynth_version(void);

/**
 * Frees a string returned by this library.
 */
void seqsynth_string_free(char *s);

enum SeqsynthStatus seqsynth_corpus_load(const char *path, struct SeqsynthCorpus **out);

enum SeqsynthStatus seqsynth_corpus_save(const struct SeqsynthCorpus *corpus, const char *path);

/**
 * Number of clickstreams.
 */
enum SeqsynthStatus seqsynth_corpus_len(const struct SeqsynthCorpus *corpus, size_t *out);

/**
 * Vocabulary size.
 */
enum SeqsynthStatus seqsynth_corpus_item_count(const struct SeqsynthCorpus *corpus, size_t *out);

void seqsynth_corpus_free(struct SeqsynthCorpus *corpus);

enum SeqsynthStatus seqsynth_matrix_build(const struct SeqsynthCorpus *corpus,
                                          enum SeqsynthMatrixKind kind,
                                          enum SeqsynthCountingMode mode,
                                          struct SeqsynthMatrix **out);

enum SeqsynthStatus seqsynth_matrix_load(const char *path, struct SeqsynthMatrix **out);

enum SeqsynthStatus seqsynth_matrix_save(const struct SeqsynthMatrix *matrix, const char *path);

/**
 * TSV text of the matrix; release with [`seqsynth_string_free`].
 */
enum SeqsynthStatus seqsynth_matrix_to_tsv(const struct SeqsynthMatrix *matrix, char **out);

/**
 * Copy of `matrix` keeping only entries with count >= k.
 */
enum SeqsynthStatus seqsynth_matrix_filter(const struct SeqsynthMatrix *matrix,
                                           uint64_t k,
                                           struct SeqsynthMatrix **out);

enum SeqsynthStatus seqsynth_matrix_kind(const struct SeqsynthMatrix *matrix,
                                         enum SeqsynthMatrixKind *out);

/**
 * Number of items (rows = columns).
 */
enum SeqsynthStatus seqsynth_matrix_dim(const struct SeqsynthMatrix *matrix, size_t *out);

/**
 * Number of stored non-zero entries.
 */
enum SeqsynthStatus seqsynth_matrix_nnz(const struct SeqsynthMatrix *matrix, size_t *out);

enum SeqsynthStatus seqsynth_matrix_get(const struct SeqsynthMatrix *matrix,
                                        uint32_t row,
                                        uint32_t col,
                                        uint64_t *out);

void seqsynth_matrix_free(struct SeqsynthMatrix *matrix);

/**
 * Generates a synthetic corpus from DS and CVS matrices.
 *
 * `reference` supplies the vocabulary and, when requested, the empirical
 * length and start distributions. `stats` may be null.
 */
enum SeqsynthStatus seqsynth_generate(const struct SeqsynthMatrix *ds,
                                      const struct SeqsynthMatrix *cvs,
                                      const struct SeqsynthCorpus *reference,
                                      const struct SeqsynthGenerateConfig *config,
                                      struct SeqsynthCorpus **out,
                                      struct SeqsynthGenerationStats *stats);

/**
 * Top-`z` rank correlation of every row of `real` against `syn`.
 *
 * Writes the mean and population standard deviation over evaluated rows
 * (NaN when none could be evaluated) and the number of skipped rows.
 */
enum SeqsynthStatus seqsynth_fidelity(const struct SeqsynthMatrix *real,
                                      const struct SeqsynthMatrix *syn,
                                      size_t z,
                                      double *out_avg,
                                      double *out_std,
                                      size_t *out_skipped);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEQSYNTH_H */
