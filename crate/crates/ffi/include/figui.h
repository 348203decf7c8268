#ifndef FIGUI_H
#define FIGUI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FiguiStatus {
  FIGUI_STATUS_OK = 0,
  FIGUI_STATUS_NULL_ARGUMENT = 1,
  FIGUI_STATUS_INVALID_UTF8 = 2,
  FIGUI_STATUS_PARSE_ERROR = 3,
  FIGUI_STATUS_REFINE_ERROR = 4,
  FIGUI_STATUS_IR_ERROR = 5,
  FIGUI_STATUS_CODEGEN_ERROR = 6,
  FIGUI_STATUS_METRICS_ERROR = 7,
  FIGUI_STATUS_IMAGE_ERROR = 8,
  FIGUI_STATUS_INVALID_ARGUMENT = 9,
  FIGUI_STATUS_PANIC = 99,
} FiguiStatus;

typedef enum FiguiMode {
  FIGUI_MODE_FAITHFUL_ABSOLUTE = 0,
  FIGUI_MODE_RESPONSIVE_FLOW = 1,
} FiguiMode;

// Parsed Figma document.
typedef struct FiguiDocument FiguiDocument;

// Intermediate representation of a page.
typedef struct FiguiIr FiguiIr;

// Metric report of one HTML document.
typedef struct FiguiMetrics FiguiMetrics;

// One metric as numerator, denominator and value (0 when the
// denominator is 0).
typedef struct FiguiFraction {
  uint64_t numerator;
  uint64_t denominator;
  double value;
} FiguiFraction;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until
// the next call on the same thread.
const char *figui_last_error_message(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be freed twice.
void figui_string_free(char *s);

// Parses a Figma file or node JSON (UTF-8, nul-terminated).
//
// # Safety
// `json` must be a valid C string and `out` a valid pointer.
enum FiguiStatus figui_document_parse(const char *json, struct FiguiDocument **out);

// # Safety
// `doc` must come from this library and not be freed twice.
void figui_document_free(struct FiguiDocument *doc);

// Runs the refinement pipeline with default settings and no asset files.
//
// # Safety
// `doc` must be a live handle and `out` a valid pointer.
enum FiguiStatus figui_document_refine(const struct FiguiDocument *doc, struct FiguiDocument **out);

// Pretty JSON of the document. Free with [`figui_string_free`].
//
// # Safety
// `doc` must be a live handle and `out` a valid pointer.
enum FiguiStatus figui_document_to_json(const struct FiguiDocument *doc, char **out);

// # Safety
// `doc` must be a live handle and `out` a valid pointer.
enum FiguiStatus figui_ir_from_document(const struct FiguiDocument *doc, struct FiguiIr **out);

// # Safety
// `ir` must come from this library and not be freed twice.
void figui_ir_free(struct FiguiIr *ir);

// # Safety
// `ir` must be a live handle and `out` a valid pointer.
enum FiguiStatus figui_ir_to_json(const struct FiguiIr *ir, char **out);

// Complete HTML document for the IR. Free with [`figui_string_free`].
//
// # Safety
// `ir` must be a live handle and `out` a valid pointer.
enum FiguiStatus figui_generate_html(const struct FiguiIr *ir, enum FiguiMode mode, char **out);

// Evaluates the eight code metrics of an HTML document.
//
// # Safety
// `html` must be a valid C string and `out` a valid pointer.
enum FiguiStatus figui_metrics_evaluate(const char *html, struct FiguiMetrics **out);

// Reads one metric by name: RUR, APR, FU, BC, STR, AVU, ISR or CCR.
//
// # Safety
// `m` must be a live handle, `name` a valid C string, `out` a valid pointer.
enum FiguiStatus figui_metrics_get(const struct FiguiMetrics *m,
                                   const char *name,
                                   struct FiguiFraction *out);

// # Safety
// `m` must come from this library and not be freed twice.
void figui_metrics_free(struct FiguiMetrics *m);

// MAE of two row-major RGB8 buffers; `b` is resized to `a` when needed.
//
// # Safety
// `a` must point to `a_w * a_h * 3` bytes, `b` to `b_w * b_h * 3` bytes.
enum FiguiStatus figui_mae_rgb(const uint8_t *a,
                               uint32_t a_w,
                               uint32_t a_h,
                               const uint8_t *b,
                               uint32_t b_w,
                               uint32_t b_h,
                               double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FIGUI_H */
