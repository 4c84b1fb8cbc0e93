#ifndef SPSCHED_GENERATE_H
#define SPSCHED_GENERATE_H

#include <cstdint>
#include <vector>

#include "spsched/tensor.h"

namespace spsched {

/// round(density * volume) distinct coordinates chosen uniformly, values
/// uniform in [-1, 1). Entries are sorted. Deterministic in `seed`.
CooTensor randomSparse(const std::vector<int>& dims, double density, uint64_t seed);

/// Every coordinate present, values uniform in [-1, 1).
CooTensor randomDense(const std::vector<int>& dims, uint64_t seed);

/// A rows × cols matrix with exactly `nnz` nonzeros whose row counts follow
/// base^r (largest-remainder rounding, capped at `cols`, overflow handed to
/// the heaviest rows with room). Rows are then shuffled and the columns of
/// each row drawn uniformly without replacement.
CooTensor skewedMatrix(int rows, int cols, int64_t nnz, double base, uint64_t seed);

}  // namespace spsched

#endif
