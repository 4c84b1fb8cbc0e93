#ifndef SPSCHED_IO_H
#define SPSCHED_IO_H

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spsched/tensor.h"

namespace spsched {

enum class CooFormat { MatrixMarket, Frostt };

/// Parses MatrixMarket `coordinate real general` text or FROSTT `.tns` text
/// into a 0-based coordinate list with duplicates summed. Failures raise a
/// ParseError carrying the offending line number.
CooTensor parseCoo(std::string_view text, CooFormat format);

CooTensor parseMatrixMarket(std::string_view text);

/// FROSTT dims come from a `# dims: d1 ... dk` comment when present, else
/// from the per-dimension maxima; `dimsOverride` wins over both.
CooTensor parseFrostt(std::string_view text,
                      const std::optional<std::vector<int>>& dimsOverride = {});

/// Picks the parser from the file extension (.mtx vs anything else).
CooTensor readCooFile(const std::string& path);

std::string writeMatrixMarket(const CooTensor& coo);
std::string writeFrostt(const CooTensor& coo);
std::string writeDenseFrostt(const DenseTensor& tensor);

std::string readFile(const std::string& path);
void writeFile(const std::string& path, std::string_view contents);

}  // namespace spsched

#endif
