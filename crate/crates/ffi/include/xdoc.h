#ifndef XDOC_H
#define XDOC_H

/* Generated by cbindgen from crates/ffi. Do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every `xdoc_*` call.
 */
typedef enum XdocStatus {
  XDOC_STATUS_OK = 0,
  XDOC_STATUS_NULL_ARGUMENT = 1,
  XDOC_STATUS_INVALID_UTF8 = 2,
  /**
   * Bundle file unreadable or malformed.
   */
  XDOC_STATUS_RESOURCE_ERROR = 3,
  /**
   * Bundle loaded but validation reported errors.
   */
  XDOC_STATUS_INVALID_BUNDLE = 4,
  /**
   * Bad input text, tag file or stage list.
   */
  XDOC_STATUS_INPUT_ERROR = 5,
  /**
   * A sentence could not be analyzed in strict mode.
   */
  XDOC_STATUS_ANALYSIS_ERROR = 6,
  /**
   * A Rust panic was caught at the boundary.
   */
  XDOC_STATUS_PANIC = 7,
} XdocStatus;

/**
 * A loaded resource bundle.
 */
typedef struct XdocBundle XdocBundle;

/**
 * An analyzed document.
 */
typedef struct XdocDocument XdocDocument;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next `xdoc_*` call on the same thread.
 */
const char *xdoc_last_error_message(void);

/**
 * Loads a bundle from an XML file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum XdocStatus xdoc_bundle_load(const char *path, struct XdocBundle **out);

/**
 * Parses a bundle from XML held in memory.
 *
 * # Safety
 * `xml` must be a NUL-terminated string; `out` must be writable.
 */
enum XdocStatus xdoc_bundle_parse(const char *xml, struct XdocBundle **out);

/**
 * # Safety
 * `bundle` is NULL or a handle from `xdoc_bundle_load`/`xdoc_bundle_parse`
 * that has not been freed.
 */
void xdoc_bundle_free(struct XdocBundle *bundle);

/**
 * Counts validation findings. Either count pointer may be NULL.
 *
 * # Safety
 * `bundle` must be a live handle; non-NULL counts must be writable.
 */
enum XdocStatus xdoc_bundle_validate(const struct XdocBundle *bundle,
                                     size_t *errors,
                                     size_t *warnings);

/**
 * Canonical XML of the bundle. Free the result with `xdoc_string_free`.
 *
 * # Safety
 * `bundle` must be a live handle; `out` must be writable.
 */
enum XdocStatus xdoc_bundle_serialize(const struct XdocBundle *bundle, char **out);

/**
 * Analyzes `text`. `stages` is a comma-separated stage prefix such as
 * `"tok,sent,tag"`; NULL runs every stage. A bundle with validation errors
 * is refused with `XDOC_STATUS_INVALID_BUNDLE`.
 *
 * # Safety
 * `bundle` must be a live handle, `text` and non-NULL `stages` must be
 * NUL-terminated strings, and `out` must be writable.
 */
enum XdocStatus xdoc_analyze(const struct XdocBundle *bundle,
                             const char *text,
                             const char *stages,
                             bool lenient,
                             struct XdocDocument **out);

/**
 * Like `xdoc_analyze`, but starts from `form<TAB>tag` lines (blank line
 * between sentences) instead of raw text.
 *
 * # Safety
 * As for `xdoc_analyze`.
 */
enum XdocStatus xdoc_analyze_tagged(const struct XdocBundle *bundle,
                                    const char *tagged,
                                    const char *stages,
                                    bool lenient,
                                    struct XdocDocument **out);

/**
 * Number of sentences in the document.
 *
 * # Safety
 * `doc` must be a live handle; `out` must be writable.
 */
enum XdocStatus xdoc_document_sentence_count(const struct XdocDocument *doc, size_t *out);

/**
 * Annotated XML. Free the result with `xdoc_string_free`.
 *
 * # Safety
 * `doc` must be a live handle; `out` must be writable.
 */
enum XdocStatus xdoc_document_xml(const struct XdocDocument *doc, char **out);

/**
 * Relation table as tab-separated text with a header line. Requires the
 * `rel` stage. Free the result with `xdoc_string_free`.
 *
 * # Safety
 * `doc` must be a live handle; `out` must be writable.
 */
enum XdocStatus xdoc_document_relations_tsv(const struct XdocDocument *doc, char **out);

/**
 * # Safety
 * `doc` is NULL or a handle from `xdoc_analyze*` that has not been freed.
 */
void xdoc_document_free(struct XdocDocument *doc);

/**
 * # Safety
 * `s` is NULL or a string returned by this library that has not been freed.
 */
void xdoc_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* XDOC_H */
