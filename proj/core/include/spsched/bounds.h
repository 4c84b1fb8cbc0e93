#ifndef SPSCHED_BOUNDS_H
#define SPSCHED_BOUNDS_H

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spsched/ir.h"
#include "spsched/schedule.h"

namespace spsched {

/// Names of the runtime values a lowered kernel refers to. Array and
/// dimension names are derived from tensor names; position names from the
/// access (a tensor accessed twice gets a disambiguating suffix).
class Symbols {
public:
  Symbols(const ScheduledStmt& stmt,
          const std::map<std::string, std::vector<int>>* specializedDims = nullptr);

  const std::vector<Access>& accesses() const { return accesses_; }
  std::string accessPrefix(int access) const { return prefixes_.at(access); }

  /// Position of access `access` at `level` (0-based): "pA2" for A's level 1.
  std::string position(int access, int level) const;
  std::string posArray(const std::string& tensor, int level) const;
  std::string crdArray(const std::string& tensor, int level) const;
  std::string valsArray(const std::string& tensor) const { return tensor + "_vals"; }
  std::string dimensionName(const std::string& tensor, int level) const;
  /// Dimension symbol, or the literal extent when dims were specialized.
  ir::Expr dimension(const std::string& tensor, int level) const;
  /// Extent of an original variable, taken from the first input access
  /// that indexes it.
  ir::Expr extent(const IndexVar& original) const;
  LevelKind levelKind(int access, int level) const;

  /// (access, level) named by a position symbol, if `name` is one.
  std::optional<std::pair<int, int>> parsePosition(const std::string& name) const;

private:
  const ScheduledStmt* stmt_;
  std::vector<Access> accesses_;
  std::vector<std::string> prefixes_;
  std::map<std::string, std::pair<int, int>> positions_;
  const std::map<std::string, std::vector<int>>* specialized_;
};

/// Iteration range [lo, hi) of an index variable. `constant` is the extent
/// when it is known at compile time.
struct Domain {
  ir::Expr lo;
  ir::Expr hi;
  std::optional<int64_t> constant;

  ir::Expr extent() const;
};

/// Bounds of every variable in the provenance graph: split outer
/// [0, ceil(N/s)) inner [0, s); divide outer [0, k) inner [0, ceil(N/k));
/// fuse [0, Na*Nb); pos the level's position range under its parent
/// position; coord the coordinate range of the variable pos consumed;
/// bound [lo, lo + bound).
std::map<IndexVar, Domain> propagateBounds(const ScheduledStmt& stmt, const Symbols& symbols);

/// Position ranges of levels rel.firstLevel .. rel.level for a pos
/// relation, given that the parent position is the symbol for level
/// firstLevel - 1.
std::vector<std::pair<ir::Expr, ir::Expr>> positionRanges(const Relation& rel,
                                                           const Symbols& symbols);

/// Expression of `target` in terms of original coordinates (variables named
/// after the originals): split children by division and remainder, fused
/// variables by linearization, position variables by locating the
/// coordinates in the tensor with exact searches.
ir::Expr recoverDerived(const ScheduledStmt& stmt, const Symbols& symbols,
                        const std::map<IndexVar, Domain>& domains, const IndexVar& target);

}  // namespace spsched

#endif
