#ifndef ASPECT_SENTIMENT_H
#define ASPECT_SENTIMENT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum AsStatus {
  AS_STATUS_OK = 0,
  AS_STATUS_NULL_POINTER = 1,
  AS_STATUS_INVALID_UTF8 = 2,
  AS_STATUS_IO = 3,
  AS_STATUS_PARSE = 4,
  AS_STATUS_INVALID_ARGUMENT = 5,
  AS_STATUS_SHAPE = 6,
  AS_STATUS_NOT_FITTED = 7,
  AS_STATUS_ZERO_VECTOR = 8,
  AS_STATUS_NUMERICAL = 9,
  AS_STATUS_PANIC = 10,
} AsStatus;

// Aspect catalog.
typedef struct AsCatalog AsCatalog;

// Fitted extreme learning machine.
typedef struct AsElm AsElm;

// Merged sentiment lexicon.
typedef struct AsLexicon AsLexicon;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failing call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *as_last_error(void);

// Frees a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be freed twice.
void as_string_free(char *s);

// Library version as a static string.
const char *as_version(void);

// Loads a merged lexicon table and re-applies `threshold`.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum AsStatus as_lexicon_load(const char *path, double threshold, struct AsLexicon **out);

// # Safety
// `lex` must come from [`as_lexicon_load`] and not be used afterwards.
void as_lexicon_free(struct AsLexicon *lex);

// Zero for a null handle.
//
// # Safety
// `lex` must be null or a live handle.
size_t as_lexicon_len(const struct AsLexicon *lex);

// Polarity of `term`; `*found` is false and `*polarity` untouched when
// the term is unknown.
//
// # Safety
// Pointers must be valid; `term` NUL-terminated.
enum AsStatus as_lexicon_lookup(const struct AsLexicon *lex,
                                const char *term,
                                double *polarity,
                                bool *found);

// The built-in 30-aspect catalog.
//
// # Safety
// `out` must be writable.
enum AsStatus as_catalog_default(struct AsCatalog **out);

// Loads a TOML catalog.
//
// # Safety
// `path` must be NUL-terminated; `out` writable.
enum AsStatus as_catalog_load(const char *path, struct AsCatalog **out);

// # Safety
// `cat` must come from this library and not be used afterwards.
void as_catalog_free(struct AsCatalog *cat);

// Zero for a null handle.
//
// # Safety
// `cat` must be null or a live handle.
size_t as_catalog_len(const struct AsCatalog *cat);

// Name of aspect `index`; free the result with [`as_string_free`].
//
// # Safety
// `cat` must be valid; `out` writable.
enum AsStatus as_catalog_name(const struct AsCatalog *cat, size_t index, char **out);

// Aspect index matched by `term` (exact catalog term), or -1.
//
// # Safety
// `cat` must be valid; `term` NUL-terminated.
enum AsStatus as_catalog_aspect_for_term(const struct AsCatalog *cat,
                                         const char *term,
                                         int64_t *out);

// Loads a fitted model saved by `train-elm`.
//
// # Safety
// `path` must be NUL-terminated; `out` writable.
enum AsStatus as_elm_load(const char *path, struct AsElm **out);

// Fits a sigmoid ELM on `rows × cols` row-major `x` and `rows` targets.
//
// # Safety
// `x` must hold `rows * cols` values and `y` `rows` values; `out` writable.
enum AsStatus as_elm_fit(const double *x,
                         size_t rows,
                         size_t cols,
                         const double *y,
                         size_t hidden,
                         double ridge,
                         uint64_t seed_value,
                         struct AsElm **out);

// # Safety
// `elm` must come from this library and not be used afterwards.
void as_elm_free(struct AsElm *elm);

// Zero for a null handle.
//
// # Safety
// `elm` must be null or a live handle.
size_t as_elm_input_dim(const struct AsElm *elm);

// Raw output `β·h(x)`.
//
// # Safety
// `x` must hold `len` values; `out` writable.
enum AsStatus as_elm_predict(const struct AsElm *elm, const double *x, size_t len, double *out);

// Thresholded label: 1 positive, 0 negative.
//
// # Safety
// `x` must hold `len` values; `out` writable.
enum AsStatus as_elm_classify(const struct AsElm *elm, const double *x, size_t len, int32_t *out);

// Cosine similarity; `ZeroVector` when either side is all zeros.
//
// # Safety
// `a` and `b` must hold `len` values; `out` writable.
enum AsStatus as_cosine(const double *a, const double *b, size_t len, double *out);

// Lexicon polarity of `word`, sign-flipped when `label` is 0.
//
// # Safety
// Pointers must be valid; `word` NUL-terminated.
enum AsStatus as_score_elm_lookup(const struct AsLexicon *lex,
                                  const char *word,
                                  int32_t label,
                                  double *score,
                                  bool *found);

// Deterministic draw in (0, 1) for label 1 or (-1, 0) for label 0.
//
// # Safety
// `out` must be writable.
enum AsStatus as_score_semi_random(int32_t label, uint64_t seed_value, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ASPECT_SENTIMENT_H */
