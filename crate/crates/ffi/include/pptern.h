#ifndef PPTERN_H
#define PPTERN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  PPTERN_STATUS_OK = 0,
  PPTERN_STATUS_NULL_ARGUMENT = 1,
  PPTERN_STATUS_INVALID_UTF8 = 2,
  PPTERN_STATUS_IO = 3,
  PPTERN_STATUS_FORMAT = 4,
  PPTERN_STATUS_NOT_FOUND = 5,
  PPTERN_STATUS_PRECONDITION = 6,
  PPTERN_STATUS_INVALID = 7,
  PPTERN_STATUS_PANIC = 8,
} PpternStatus;

/**
 * Opaque type lexicon handle.
 */
typedef struct PpternLexicon PpternLexicon;

/**
 * Opaque project handle.
 */
typedef struct PpternProject PpternProject;

/**
 * Template and instance counts of a project.
 */
typedef struct {
  uint64_t candidates;
  uint64_t accepted;
  uint64_t rejected;
  uint64_t relations;
  uint64_t instances;
  uint64_t judgments;
  uint64_t revision;
} PpternCounts;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *pptern_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *pptern_version(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and must not be used afterwards.
 */
void pptern_string_free(char *s);

/**
 * Creates an empty project over the bundled event types.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage.
 */
PpternStatus pptern_project_new(PpternProject **out);

/**
 * Loads a project file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
PpternStatus pptern_project_load(const char *path, PpternProject **out);

/**
 * Saves a project atomically; the previous file survives a failed write.
 *
 * # Safety
 * `project` must be a live handle and `path` a NUL-terminated string.
 */
PpternStatus pptern_project_save(const PpternProject *project, const char *path);

/**
 * Releases a project handle. NULL is ignored.
 *
 * # Safety
 * `project` must come from this library and must not be used afterwards.
 */
void pptern_project_free(PpternProject *project);

/**
 * Template counts by status plus relation, instance and judgment totals.
 *
 * # Safety
 * `project` must be a live handle and `out` a valid pointer.
 */
PpternStatus pptern_project_counts(const PpternProject *project, PpternCounts *out);

/**
 * Sets a template's status to `candidate`, `accepted` or `rejected`.
 *
 * # Safety
 * `project` must be a live handle; `template_id` and `status` must be
 * NUL-terminated strings.
 */
PpternStatus pptern_project_set_status(PpternProject *project,
                                       const char *template_id,
                                       const char *status);

/**
 * Labels the three argument slots of a template.
 *
 * # Safety
 * `project` must be a live handle; the other arguments must be
 * NUL-terminated strings.
 */
PpternStatus pptern_project_set_roles(PpternProject *project,
                                      const char *template_id,
                                      const char *role1,
                                      const char *role2,
                                      const char *role3);

/**
 * Records (or replaces) a verdict on a template of the given iteration.
 *
 * # Safety
 * `project` must be a live handle and `template_id` a NUL-terminated
 * string. `note` may be NULL.
 */
PpternStatus pptern_project_record_judgment(PpternProject *project,
                                            const char *template_id,
                                            uint32_t iteration,
                                            bool correct,
                                            const char *note);

/**
 * Judged and correct counts for an iteration. Both are 0 when nothing was
 * judged.
 *
 * # Safety
 * `project` must be a live handle; `correct` and `judged` valid pointers.
 */
PpternStatus pptern_project_precision(const PpternProject *project,
                                      uint32_t iteration,
                                      uint64_t *correct,
                                      uint64_t *judged);

/**
 * Per-iteration statistics as JSON, same shape as `pptern stats --json`.
 *
 * # Safety
 * `project` must be a live handle and `out` a valid pointer.
 */
PpternStatus pptern_project_stats_json(const PpternProject *project, char **out);

/**
 * Instance export TSV.
 *
 * # Safety
 * `project` must be a live handle and `out` a valid pointer.
 */
PpternStatus pptern_project_instances_tsv(const PpternProject *project, char **out);

/**
 * Template export TSV.
 *
 * # Safety
 * `project` must be a live handle and `out` a valid pointer.
 */
PpternStatus pptern_project_templates_tsv(const PpternProject *project, char **out);

/**
 * Loads a lexicon TSV file. Malformed lines are skipped as in the CLI.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
PpternStatus pptern_lexicon_load(const char *path, PpternLexicon **out);

/**
 * Releases a lexicon handle. NULL is ignored.
 *
 * # Safety
 * `lexicon` must come from this library and must not be used afterwards.
 */
void pptern_lexicon_free(PpternLexicon *lexicon);

/**
 * Types of a phrase, tab-separated, at most `max_per_source` per source.
 * An untypeable phrase yields an empty string.
 *
 * # Safety
 * `lexicon` must be a live handle, `phrase` a NUL-terminated string and
 * `out` a valid pointer.
 */
PpternStatus pptern_lexicon_resolve(const PpternLexicon *lexicon,
                                    const char *phrase,
                                    uint32_t max_per_source,
                                    char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PPTERN_H */
