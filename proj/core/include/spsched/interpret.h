#ifndef SPSCHED_INTERPRET_H
#define SPSCHED_INTERPRET_H

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "spsched/ir.h"
#include "spsched/oracle.h"
#include "spsched/tensor.h"

namespace spsched {

struct ExecOptions {
  /// Threads for the outermost CPUThread loop; 1 runs everything in order.
  int threads = 1;
  /// Snapshot Program::visitSymbols at every unit of work.
  bool recordVisits = false;
};

struct ExecStats {
  /// Iterations per loop, keyed by the loop's statistics name.
  std::map<std::string, int64_t> loopIterations;
  /// For every parallel loop: units of work done by each of its iterations,
  /// in execution order (all instances of nested loops concatenated).
  std::map<std::string, std::vector<int64_t>> instanceWork;
  int64_t guardPasses = 0;
  int64_t guardFailures = 0;
  /// Number of output (or temporary) reductions of computed values.
  int64_t totalWork = 0;
  std::vector<std::string> visitSymbols;
  std::vector<std::vector<int64_t>> visits;
};

struct ExecResult {
  DenseTensor output;
  ExecStats stats;
};

/// Executes a lowered kernel. Parallel loops run sequentially unless
/// `options.threads` > 1, in which case the outermost CPUThread loop is
/// split into contiguous chunks, one per thread, with private outputs that
/// are summed in chunk order. Out-of-range array accesses and failed
/// checks throw.
ExecResult interpret(const ir::Program& program, const TensorMap& inputs,
                     const ExecOptions& options = {});

/// Evaluates an index expression of `program` with the given variable
/// bindings (dimensions are bound from `inputs`).
int64_t evaluate(const ir::Expr& expr, const std::map<std::string, int64_t>& env,
                 const ir::Program& program, const TensorMap& inputs);

}  // namespace spsched

#endif
