/* Generated from the catquery-ffi crate. Do not edit. */

#ifndef CATQUERY_H
#define CATQUERY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes. Query errors follow the command-line exit codes' split
// between parse/safety, compile and runtime failures.
typedef enum CqStatus {
  CQ_STATUS_OK = 0,
  CQ_STATUS_NULL_ARGUMENT = 1,
  CQ_STATUS_INVALID_UTF8 = 2,
  // Reading or decoding input data failed.
  CQ_STATUS_LOAD = 3,
  // The query does not parse, or is not safe.
  CQ_STATUS_PARSE = 4,
  CQ_STATUS_COMPILE = 5,
  CQ_STATUS_RUNTIME = 6,
  CQ_STATUS_OUT_OF_RANGE = 7,
  // A panic was caught at the boundary.
  CQ_STATUS_INTERNAL = 8,
} CqStatus;

// A loaded instance category.
typedef struct CqCategory CqCategory;

// A query result with its cells rendered as text.
typedef struct CqRelation CqRelation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// The library version, as a static string.
const char *cq_version(void);

// The message of the last failure on this thread (empty if none). Valid
// until the next failing call on the same thread.
const char *cq_last_error(void);

// Loads a workspace file (TOML or JSON sources list) or a category JSON
// file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum CqStatus cq_category_load(const char *path, struct CqCategory **out);

// Builds a category from its JSON text.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum CqStatus cq_category_from_json(const char *json, struct CqCategory **out);

// Writes the category as JSON into a new string.
//
// # Safety
// `cat` must come from this library; `out` must be a valid pointer.
enum CqStatus cq_category_to_json(const struct CqCategory *cat, char **out);

// Number of objects, or 0 for a null handle.
//
// # Safety
// `cat` must be null or come from this library.
size_t cq_category_object_count(const struct CqCategory *cat);

// # Safety
// `cat` must be null or come from this library, and not be used again.
void cq_category_free(struct CqCategory *cat);

// Parses, compiles and evaluates a query.
//
// # Safety
// `cat` must come from this library, `query` must be a NUL-terminated
// string and `out` a valid pointer.
enum CqStatus cq_query_run(const struct CqCategory *cat,
                           const char *query,
                           struct CqRelation **out);

// Compiles a query and writes the plan text into a new string.
//
// # Safety
// As [`cq_query_run`], with `out` receiving a string.
enum CqStatus cq_query_compile(const struct CqCategory *cat, const char *query, char **out);

// # Safety
// `rel` must be null or come from this library.
size_t cq_relation_row_count(const struct CqRelation *rel);

// # Safety
// `rel` must be null or come from this library.
size_t cq_relation_column_count(const struct CqRelation *rel);

// The name of column `i`, borrowed from `rel`; null if out of range.
//
// # Safety
// `rel` must be null or come from this library.
const char *cq_relation_column_name(const struct CqRelation *rel, size_t i);

// The element in `row`, `col`, shown by label, borrowed from `rel`.
//
// # Safety
// `rel` must come from this library; `out` must be a valid pointer.
enum CqStatus cq_relation_cell(const struct CqRelation *rel,
                               size_t row,
                               size_t col,
                               const char **out);

// The result as JSON lines, borrowed from `rel`.
//
// # Safety
// `rel` must be null or come from this library.
const char *cq_relation_json(const struct CqRelation *rel);

// # Safety
// `rel` must be null or come from this library, and not be used again.
void cq_relation_free(struct CqRelation *rel);

// Releases a string returned through an out-parameter.
//
// # Safety
// `s` must be null or come from this library, and not be used again.
void cq_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CATQUERY_H */
