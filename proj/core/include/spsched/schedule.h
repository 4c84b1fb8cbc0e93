#ifndef SPSCHED_SCHEDULE_H
#define SPSCHED_SCHEDULE_H

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spsched/index_notation.h"
#include "spsched/iteration_graph.h"
#include "spsched/provenance.h"
#include "spsched/tensor.h"

namespace spsched {

enum class ParallelUnit { CPUThread, CPUVector, GPUBlock, GPUWarp, GPUThread };
enum class RaceStrategy { NoRaces, IgnoreRaces, Atomics, Temporary };

const char* toString(ParallelUnit unit);
const char* toString(RaceStrategy strategy);
ParallelUnit parseParallelUnit(const std::string& text);
RaceStrategy parseRaceStrategy(const std::string& text);
BoundType parseBoundType(const std::string& text);

struct ParallelTag {
  ParallelUnit unit = ParallelUnit::CPUThread;
  RaceStrategy strategy = RaceStrategy::NoRaces;
};

/// `workspace[preVar] = expr` is computed in a producer loop over `preVar`
/// and read back by the loop over `var`.
struct PrecomputeRecord {
  Expr expr;
  IndexVar var;
  IndexVar preVar;
  std::string workspace;
};

/// An assignment together with its loop structure, derivation history and
/// per-variable tags. Values are immutable; every transformation returns a
/// new statement and validates it.
class ScheduledStmt {
public:
  const Assignment& assignment() const { return assignment_; }
  const std::map<std::string, Format>& formats() const { return formats_; }
  const IterationGraph& graph() const { return graph_; }
  const std::vector<IndexVar>& forest() const { return graph_.forest; }
  const ProvenanceGraph& provenance() const { return provenance_; }
  const std::map<IndexVar, ParallelTag>& parallelTags() const { return parallel_; }
  const std::map<IndexVar, int>& unrollTags() const { return unroll_; }
  const std::optional<PrecomputeRecord>& precomputeRecord() const { return precompute_; }

  std::optional<ParallelTag> parallelTag(const IndexVar& var) const;
  int unrollFactor(const IndexVar& var) const;  // 1 when untagged

  /// True when two iterations of a loop over `var` can update the same
  /// output location (the variable derives from a reduction variable).
  bool races(const IndexVar& var) const;

  ScheduledStmt reorder(const std::vector<IndexVar>& ordered) const;
  ScheduledStmt fuse(const IndexVar& outer, const IndexVar& inner, const IndexVar& fused) const;
  ScheduledStmt split(const IndexVar& var, const IndexVar& outer, const IndexVar& inner,
                      int64_t innerSize) const;
  ScheduledStmt divide(const IndexVar& var, const IndexVar& outer, const IndexVar& inner,
                       int64_t outerCount) const;
  ScheduledStmt pos(const IndexVar& var, const IndexVar& posVar, const Access& access) const;
  /// `tensor` must be accessed exactly once on the right-hand side.
  ScheduledStmt pos(const IndexVar& var, const IndexVar& posVar, const std::string& tensor) const;
  ScheduledStmt coord(const IndexVar& posVar, const IndexVar& coordVar) const;
  ScheduledStmt parallelize(const IndexVar& var, ParallelUnit unit, RaceStrategy strategy) const;
  ScheduledStmt unroll(const IndexVar& var, int factor) const;
  ScheduledStmt bound(const IndexVar& var, const IndexVar& bounded, int64_t bound,
                      BoundType type) const;
  ScheduledStmt precompute(const Expr& expr, const IndexVar& var, const IndexVar& preVar,
                           const std::string& workspace) const;

  std::string toString() const;

private:
  friend ScheduledStmt concretize(const Assignment&, const std::map<std::string, Format>&,
                                  std::optional<std::vector<IndexVar>>);

  ScheduledStmt checked() const;
  void requireInForest(const IndexVar& var, const char* op) const;
  void requireUntagged(const IndexVar& var, const char* op) const;
  void replaceInForest(const IndexVar& var, const std::vector<IndexVar>& with);

  Assignment assignment_;
  std::map<std::string, Format> formats_;
  IterationGraph graph_;
  ProvenanceGraph provenance_;
  std::map<IndexVar, ParallelTag> parallel_;
  std::map<IndexVar, int> unroll_;
  std::optional<PrecomputeRecord> precompute_;
};

/// Starts scheduling `assignment`. `formats` must bind every input tensor;
/// the output is always dense. `order` defaults to the output variables
/// followed by the reduction variables.
ScheduledStmt concretize(const Assignment& assignment,
                         const std::map<std::string, Format>& formats,
                         std::optional<std::vector<IndexVar>> order = std::nullopt);

}  // namespace spsched

#endif
