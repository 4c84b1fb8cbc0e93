#ifndef SPSCHED_SCHEDULE_DSL_H
#define SPSCHED_SCHEDULE_DSL_H

#include <string_view>

#include "spsched/schedule.h"

namespace spsched {

/// Applies a schedule script to `stmt`, one directive per line:
///
///   split(i, i0, i1, 32)        divide(i, i0, i1, 4)      fuse(i, j, f)
///   reorder(i0, i1, j)          pos(j, jpos, A)           coord(jpos, j)
///   parallelize(i0, CPUThread, NoRaces)                   unroll(i1, 4)
///   bound(i, ib, 16, MaxExact)  precompute(label, i, ipre, w)
///
/// `NAME = <integer expression>` defines a constant usable in later integer
/// arguments (`+ - * /` and parentheses). `reorder` also accepts a braced
/// list, `pos` a full access such as `A(i,j)`, and `precompute` takes the
/// name of a sub-expression label of the assignment. `#` starts a comment.
/// Errors carry the line number; transformation errors keep their code.
ScheduledStmt applySchedule(const ScheduledStmt& stmt, std::string_view script);

}  // namespace spsched

#endif
