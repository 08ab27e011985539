#include <math.h>
#include <stdio.h>
#include <string.h>

#include "aspect_sentiment.h"

#define CHECK(cond)                                                      \
  do {                                                                   \
    if (!(cond)) {                                                       \
      fprintf(stderr, "line %d: %s (%s)\n", __LINE__, #cond,             \
              as_last_error() ? as_last_error() : "no error");           \
      return 1;                                                          \
    }                                                                    \
  } while (0)

int main(int argc, char **argv) {
  CHECK(argc == 2);
  AsLexicon *lex = NULL;
  CHECK(as_lexicon_load(argv[1], 0.25, &lex) == AS_STATUS_OK);
  CHECK(as_lexicon_len(lex) == 2);

  double score = 0.0;
  bool found = false;
  CHECK(as_score_elm_lookup(lex, "pay", 0, &score, &found) == AS_STATUS_OK);
  CHECK(found && score == -0.5);
  CHECK(as_score_elm_lookup(lex, "pay", 7, &score, &found) == AS_STATUS_INVALID_ARGUMENT);
  CHECK(strstr(as_last_error(), "label") != NULL);
  as_lexicon_free(lex);

  double a[3] = {1.0, 0.0, 1.0}, b[3] = {2.0, 0.0, 2.0}, z[3] = {0.0, 0.0, 0.0};
  double c = 0.0;
  CHECK(as_cosine(a, b, 3, &c) == AS_STATUS_OK && fabs(c - 1.0) < 1e-12);
  CHECK(as_cosine(a, z, 3, &c) == AS_STATUS_ZERO_VECTOR);

  AsCatalog *cat = NULL;
  CHECK(as_catalog_default(&cat) == AS_STATUS_OK);
  CHECK(as_catalog_len(cat) == 30);
  char *name = NULL;
  CHECK(as_catalog_name(cat, 0, &name) == AS_STATUS_OK);
  printf("%s\n", name);
  as_string_free(name);
  as_catalog_free(cat);
  return 0;
}
