/* C interface to the restpark triple store and request handler. Generated by cbindgen; edit src/lib.rs instead. */

#ifndef RESTPARK_H
#define RESTPARK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a fallible call. Anything but `Ok` is described by
 * `rp_last_error_message`.
 */
typedef enum RpStatus {
  RpStatus_Ok = 0,
  /**
   * A required pointer argument was NULL.
   */
  RpStatus_NullPointer = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  RpStatus_InvalidUtf8 = 2,
  /**
   * Document text failed to parse.
   */
  RpStatus_ParseError = 3,
  /**
   * Arguments were readable but unusable: a malformed pattern slot, a
   * page size out of range.
   */
  RpStatus_InvalidArgument = 4,
  /**
   * A file could not be read.
   */
  RpStatus_IoError = 5,
  /**
   * A bug in this library, caught at the boundary.
   */
  RpStatus_Internal = 6,
} RpStatus;

/**
 * One materialized HTTP response: status, ordered headers, body.
 */
typedef struct RpResponse RpResponse;

/**
 * An immutable, indexed triple collection.
 */
typedef struct RpStore RpStore;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Version of this library as a static NUL-terminated string. Never NULL,
 * never freed.
 */
const char *rp_version(void);

/**
 * Explanation of the most recent non-`Ok` status on this thread.
 * Borrowed; valid until the next failing call on the same thread.
 */
const char *rp_last_error_message(void);

/**
 * Parse N-Triples text into a new store. With `strict` set, the first
 * malformed line fails the whole call; otherwise malformed lines are
 * skipped. On success `*out_store` owns the store; release it with
 * `rp_store_free`.
 */
enum RpStatus rp_store_parse(const char *text, bool strict, struct RpStore **out_store);

/**
 * Read a file and parse it like `rp_store_parse`. An unreadable file is
 * `IoError`; malformed content is `ParseError`.
 */
enum RpStatus rp_store_load_file(const char *path, bool strict, struct RpStore **out_store);

/**
 * Release a store. NULL is a no-op.
 */
void rp_store_free(struct RpStore *store);

/**
 * Number of distinct triples, or 0 for NULL.
 */
size_t rp_store_len(const struct RpStore *store);

/**
 * Count the matches for a pattern without materializing them.
 */
enum RpStatus rp_store_count(const struct RpStore *store,
                             const char *subject,
                             const char *predicate,
                             const char *object,
                             size_t *out_count);

/**
 * One page of matches as the same flattened JSON-LD document the HTTP
 * resource serves. `page` and `page_size` of 0 select the defaults,
 * 1 and 100. On success `*out_json` is owned by the caller; release it
 * with `rp_string_free`.
 */
enum RpStatus rp_store_query_jsonld(const struct RpStore *store,
                                    const char *subject,
                                    const char *predicate,
                                    const char *object,
                                    size_t page,
                                    size_t page_size,
                                    char **out_json);

/**
 * Like `rp_store_query_jsonld`, but the page comes back as canonical
 * N-Triples text.
 */
enum RpStatus rp_store_query_ntriples(const struct RpStore *store,
                                      const char *subject,
                                      const char *predicate,
                                      const char *object,
                                      size_t page,
                                      size_t page_size,
                                      char **out_text);

/**
 * Release a string handed out by this library. NULL is a no-op.
 */
void rp_string_free(char *text);

/**
 * Answer one HTTP request against the store, exactly as the bundled
 * server would: same status, same headers (pagination links included),
 * same body bytes. `target` is the request target from the request line,
 * query string and all; `mount_prefix` is NULL or the path prefix the
 * resource is mounted under. On success `*out_response` owns the
 * response; release it with `rp_response_free`.
 */
enum RpStatus rp_handle_request(const struct RpStore *store,
                                const char *mount_prefix,
                                const char *method,
                                const char *target,
                                struct RpResponse **out_response);

/**
 * HTTP status code, or 0 for NULL.
 */
uint16_t rp_response_status(const struct RpResponse *response);

/**
 * Number of headers, or 0 for NULL.
 */
size_t rp_response_header_count(const struct RpResponse *response);

/**
 * Name of the header at `index`, 0-based in response order, or NULL when
 * out of range. Borrowed from the response.
 */
const char *rp_response_header_name(const struct RpResponse *response, size_t index);

/**
 * Value of the header at `index`, or NULL when out of range. Borrowed
 * from the response.
 */
const char *rp_response_header_value(const struct RpResponse *response, size_t index);

/**
 * Body as a NUL-terminated string, or NULL for NULL. Protocol bodies are
 * always UTF-8 text and never contain NUL bytes. Borrowed from the
 * response.
 */
const char *rp_response_body(const struct RpResponse *response);

/**
 * Body length in bytes, excluding the terminator, or 0 for NULL.
 */
size_t rp_response_body_len(const struct RpResponse *response);

/**
 * Release a response. NULL is a no-op.
 */
void rp_response_free(struct RpResponse *response);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RESTPARK_H */
