#ifndef SPSCHED_MERGE_LATTICE_H
#define SPSCHED_MERGE_LATTICE_H

#include <functional>
#include <string>
#include <vector>

#include "spsched/index_notation.h"

namespace spsched {

class ScheduledStmt;

/// Maximum number of sparse iterators co-iterated at one variable.
inline constexpr int kMaxMergeIterators = 3;

/// A set of sparse iterators (identified by access index, i.e. position in
/// the rhs left-to-right access order) that are advanced together, and the
/// sub-expression that is non-zero when exactly those iterators match.
struct LatticePoint {
  std::vector<int> iterators;  // sorted
  Expr expr;
};

struct MergeLattice {
  std::vector<LatticePoint> points;  // decreasing iterator count

  /// True when some point has no sparse iterator: the variable must then be
  /// visited densely.
  bool hasFullPoint() const;
  /// Union of all iterators.
  std::vector<int> iterators() const;
  std::string toString(const std::vector<Access>& accesses) const;
};

/// Builds the lattice of `rhs`. `isIterator(k)` says whether access number
/// k contributes a sparse iterator; every other operand behaves as always
/// present.
MergeLattice buildLattice(const Expr& rhs, const std::function<bool(int)>& isIterator);

/// Lattice at `var` where iterators are the accesses storing `var` in a
/// compressed level. More than kMaxMergeIterators iterators is an error.
MergeLattice mergeLattice(const ScheduledStmt& stmt, const IndexVar& var);

}  // namespace spsched

#endif
