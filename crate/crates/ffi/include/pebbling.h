#ifndef PEBBLING_H
#define PEBBLING_H

#include <stddef.h>
#include <stdint.h>
#include <stdbool.h>

typedef enum PebStatus {
  PEB_STATUS_OK = 0,
  PEB_STATUS_NULL_ARGUMENT = 1,
  PEB_STATUS_INVALID_UTF8 = 2,
  PEB_STATUS_PARSE_ERROR = 3,
  PEB_STATUS_INVALID_SPEC = 4,
  PEB_STATUS_UNKNOWN_STRATEGY = 5,
  // The strategy does not apply to this graph.
  PEB_STATUS_PRECONDITION = 6,
  PEB_STATUS_SCHEDULE_FAILED = 7,
  PEB_STATUS_ILLEGAL_MOVE = 8,
  PEB_STATUS_NOT_FULL = 9,
  PEB_STATUS_PANIC = 10,
} PebStatus;

// A parsed or generated DAG.
typedef struct PebDag PebDag;

// A schedule with its bounds and simulated metrics.
typedef struct PebReport PebReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or an empty string. The
// pointer stays valid until the next call into this library on the thread.
const char *peb_last_error(void);

// Parses an edge list or DOT text into `*out`.
//
// # Safety
// `text` must be a nul-terminated string and `out` a valid pointer.
enum PebStatus peb_dag_parse(const char *text, struct PebDag **out);

// Generates an instance from a spec such as `grid:width=4,height=3,seed=1`.
//
// # Safety
// `spec` must be a nul-terminated string and `out` a valid pointer.
enum PebStatus peb_dag_generate(const char *spec, struct PebDag **out);

// # Safety
// `dag` must come from this library and not be used afterwards. Null is a no-op.
void peb_dag_free(struct PebDag *dag);

// # Safety
// `dag` must be a live handle or null (returns 0).
size_t peb_dag_vertex_count(const struct PebDag *dag);

// # Safety
// `dag` must be a live handle or null (returns 0).
size_t peb_dag_edge_count(const struct PebDag *dag);

// # Safety
// `dag` must be a live handle or null (returns 0).
size_t peb_dag_max_in_degree(const struct PebDag *dag);

// Runs the strategy named by `strategy` (e.g. `general`, `budget=3/2`) and
// simulates the result.
//
// # Safety
// `dag` must be a live handle, `strategy` a nul-terminated string and `out`
// a valid pointer.
enum PebStatus peb_schedule(const struct PebDag *dag, const char *strategy, struct PebReport **out);

// # Safety
// `report` must come from this library and not be used afterwards. Null is a no-op.
void peb_report_free(struct PebReport *report);

// Guaranteed upper bound on the peak pebble count.
//
// # Safety
// `report` must be a live handle or null (returns 0).
size_t peb_report_space_bound(const struct PebReport *report);

// Writes the move bound to `*out` and returns true when the strategy claims
// one that fits in 64 bits.
//
// # Safety
// `report` must be a live handle or null; `out` must be valid or null.
bool peb_report_move_bound(const struct PebReport *report, uint64_t *out);

// Simulated peak pebble count.
//
// # Safety
// `report` must be a live handle or null (returns 0).
size_t peb_report_peak(const struct PebReport *report);

// Simulated move count.
//
// # Safety
// `report` must be a live handle or null (returns 0).
uint64_t peb_report_moves(const struct PebReport *report);

// The schedule as `P v` / `S u v` / `R v` lines, using vertex names.
//
// # Safety
// `report` must be a live handle and `out` a valid pointer.
enum PebStatus peb_report_schedule_text(const struct PebReport *report, char **out);

// Checks a schedule given as text. Returns `Ok` when it is legal and
// pebbles every vertex, `IllegalMove` or `NotFull` otherwise; peak and move
// count are written when the schedule is legal and the pointers are non-null.
//
// # Safety
// `dag` must be a live handle and `schedule` a nul-terminated string.
enum PebStatus peb_verify(const struct PebDag *dag,
                          const char *schedule,
                          size_t *out_peak,
                          uint64_t *out_moves);

// # Safety
// `s` must come from this library and not be used afterwards. Null is a no-op.
void peb_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PEBBLING_H */
