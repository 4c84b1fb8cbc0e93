#ifndef SPSCHED_CODEGEN_C_H
#define SPSCHED_CODEGEN_C_H

#include <string>
#include <vector>

#include "spsched/ir.h"

namespace spsched {

struct KernelSource {
  std::string language = "C99";
  std::string text;
  std::string entry = "compute";
  /// One line per parameter slot, e.g. "vals[0] = A_vals".
  std::vector<std::string> manifest;
};

/// Emits a C99 translation unit defining
///
///   void compute(double* out, const double** vals, const int32_t** pos,
///                const int32_t** crd, const int32_t* dims);
///
/// `out` is the dense row-major output, zeroed by the kernel. Slots follow
/// the program's manifest, which is repeated in a header comment. Output is
/// a pure function of the program.
KernelSource emitC(const ir::Program& program);

}  // namespace spsched

#endif
