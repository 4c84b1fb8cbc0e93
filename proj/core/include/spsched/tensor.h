#ifndef SPSCHED_TENSOR_H
#define SPSCHED_TENSOR_H

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spsched {

enum class LevelKind { Dense, Compressed };

struct LevelFormat {
  LevelKind kind = LevelKind::Dense;
  bool ordered = true;

  bool operator==(const LevelFormat&) const = default;
};

using Format = std::vector<LevelFormat>;

/// Parses the per-dimension shorthand: `d` dense, `s` compressed. "ds" is CSR,
/// "ss" DCSR, "sss" CSF.
Format parseFormat(std::string_view shorthand);
std::string formatString(const Format& format);

struct CooEntry {
  std::vector<int> coord;
  double value = 0.0;
};

/// Coordinate-list tensor. Coordinates are 0-based.
struct CooTensor {
  std::vector<int> dims;
  std::vector<CooEntry> entries;

  size_t order() const { return dims.size(); }

  /// Sorts entries lexicographically and sums duplicates. Throws on entries
  /// that violate the dimension bounds.
  void normalize();
};

/// One level of a coordinate hierarchy. Compressed levels own pos/crd arrays;
/// dense levels are implicit.
struct Level {
  LevelFormat format;
  int size = 0;  // dimension extent
  std::vector<int32_t> pos;
  std::vector<int32_t> crd;

  /// Number of positions (stored coordinates) in this level.
  int64_t numPositions(int64_t parentPositions) const;
};

class Tensor {
public:
  Tensor() = default;
  Tensor(std::vector<int> dims, std::vector<Level> levels,
         std::vector<double> vals);

  size_t order() const { return dims_.size(); }
  const std::vector<int>& dims() const { return dims_; }
  const std::vector<Level>& levels() const { return levels_; }
  const Level& level(size_t k) const { return levels_.at(k); }
  const std::vector<double>& vals() const { return vals_; }
  Format format() const;

  /// Number of stored leaf positions (equals vals().size()).
  int64_t numLeafPositions() const { return static_cast<int64_t>(vals_.size()); }

  /// Checks the structural invariants of every level; throws on violation.
  void validate() const;

private:
  std::vector<int> dims_;
  std::vector<Level> levels_;
  std::vector<double> vals_;
};

/// Packs a coordinate list into a coordinate hierarchy with the given level
/// formats. Duplicates are summed; dense levels materialize zero slots.
Tensor pack(CooTensor coo, const Format& format);

/// Walks the hierarchy and returns every stored (coordinate, value) pair in
/// storage order, including explicit zeros of dense levels when
/// `includeZeros` is set.
std::vector<CooEntry> enumerate(const Tensor& tensor, bool includeZeros = false);

/// Row-major dense result buffer.
struct DenseTensor {
  std::vector<int> dims;
  std::vector<double> vals;

  DenseTensor() = default;
  explicit DenseTensor(std::vector<int> dims);

  size_t offset(std::span<const int> coord) const;
  double at(std::span<const int> coord) const { return vals[offset(coord)]; }
  double& at(std::span<const int> coord) { return vals[offset(coord)]; }
};

/// max |a - b| / max(1, |b|) over all elements; dims must match.
double maxRelativeError(const DenseTensor& a, const DenseTensor& b);

}  // namespace spsched

#endif
