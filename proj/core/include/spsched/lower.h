#ifndef SPSCHED_LOWER_H
#define SPSCHED_LOWER_H

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spsched/ir.h"
#include "spsched/oracle.h"
#include "spsched/schedule.h"

namespace spsched {

struct LowerOptions {
  /// Recover coordinates above a position loop incrementally (a while loop
  /// over segment boundaries) instead of a binary search per iteration.
  bool enableTracking = true;
  /// Tensor dimensions to bake into the kernel as literals. Without them
  /// dimensions are runtime parameters and every tail gets a guard.
  std::optional<std::map<std::string, std::vector<int>>> specializedDims;
};

/// Lowers a scheduled statement to an imperative kernel over packed inputs.
/// The output is dense and zeroed by the kernel itself.
ir::Program lower(const ScheduledStmt& stmt, const LowerOptions& options = {});

/// Dimensions of every bound tensor, for LowerOptions::specializedDims.
std::map<std::string, std::vector<int>> tensorDims(const TensorMap& tensors);

}  // namespace spsched

#endif
