#ifndef SPSCHED_ORACLE_H
#define SPSCHED_ORACLE_H

#include <map>
#include <string>

#include "spsched/index_notation.h"
#include "spsched/tensor.h"

namespace spsched {

using TensorMap = std::map<std::string, Tensor>;

/// Extent of every index variable, checked for consistency across all the
/// accesses that use it.
std::map<IndexVar, int> indexVarExtents(const Assignment& assignment,
                                        const TensorMap& inputs);

/// Brute-force evaluation over the full Cartesian space of the index
/// variables. Variables absent from the output are summed. This is the
/// correctness oracle every scheduled kernel is compared against.
DenseTensor denseEval(const Assignment& assignment, const TensorMap& inputs);

}  // namespace spsched

#endif
