#ifndef SPSCHED_ITERATION_GRAPH_H
#define SPSCHED_ITERATION_GRAPH_H

#include <map>
#include <string>
#include <vector>

#include "spsched/index_notation.h"
#include "spsched/tensor.h"

namespace spsched {

class ScheduledStmt;
class ProvenanceGraph;

enum class MergeKind { Single, Intersection, Union };
const char* toString(MergeKind kind);

struct PathStep {
  IndexVar var;
  int level = 0;
};

/// The variables one input access threads through, outermost first.
struct TensorPath {
  int accessIndex = 0;
  Access access;
  std::vector<PathStep> steps;
};

/// Loop structure of a statement. Every schedule in this library keeps the
/// forest a single chain (root first), so it is stored as a vector.
struct IterationGraph {
  std::vector<IndexVar> forest;
  std::vector<TensorPath> paths;
  std::map<IndexVar, MergeKind> merge;  // original variables

  int depthOf(const IndexVar& var) const;  // -1 when absent
  bool contains(const IndexVar& var) const { return depthOf(var) >= 0; }
};

/// Builds the graph of an unscheduled statement iterated in `order`.
IterationGraph buildIterationGraph(const Assignment& assignment,
                                   const std::map<std::string, Format>& formats,
                                   const std::vector<IndexVar>& order);

/// Depth of the innermost loop each original variable's coordinate depends
/// on (-1 for variables that depend on no loop).
std::map<IndexVar, int> readyDepths(const ScheduledStmt& stmt);

/// Checks that leaves of the provenance graph match the forest, that every
/// compressed level is reached no earlier than the levels above it, and that
/// every loop's bounds only use values available outside it. Throws Error on
/// the first violation.
void validateGraph(const ScheduledStmt& stmt);

/// GraphViz text: the loop chain, derivation edges and tensor paths.
std::string toDot(const ScheduledStmt& stmt);

}  // namespace spsched

#endif
