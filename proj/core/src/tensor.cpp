#include "spsched/tensor.h"

#include <algorithm>
#include <cmath>
#include <functional>

#include "spsched/error.h"

namespace spsched {

Format parseFormat(std::string_view shorthand) {
  Format format;
  for (char c : shorthand) {
    switch (c) {
      case 'd':
        format.push_back({LevelKind::Dense, true});
        break;
      case 's':
        format.push_back({LevelKind::Compressed, true});
        break;
      default:
        throw Error(ErrorCode::InvalidArgument,
                    "unknown level format '" + std::string(1, c) +
                        "' (expected d or s)");
    }
  }
  return format;
}

std::string formatString(const Format& format) {
  std::string s;
  for (const LevelFormat& level : format) {
    s += level.kind == LevelKind::Dense ? 'd' : 's';
  }
  return s;
}

void CooTensor::normalize() {
  for (const CooEntry& e : entries) {
    if (e.coord.size() != dims.size()) {
      throw Error(ErrorCode::InvalidArgument,
                  "coordinate arity does not match tensor order");
    }
    for (size_t k = 0; k < dims.size(); ++k) {
      if (e.coord[k] < 0 || e.coord[k] >= dims[k]) {
        throw Error(ErrorCode::OutOfBounds,
                    "coordinate " + std::to_string(e.coord[k]) +
                        " outside dimension " + std::to_string(k) +
                        " of size " + std::to_string(dims[k]));
      }
    }
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const CooEntry& a, const CooEntry& b) {
                     return a.coord < b.coord;
                   });
  std::vector<CooEntry> merged;
  merged.reserve(entries.size());
  for (CooEntry& e : entries) {
    if (!merged.empty() && merged.back().coord == e.coord) {
      merged.back().value += e.value;
    } else {
      merged.push_back(std::move(e));
    }
  }
  entries = std::move(merged);
}

int64_t Level::numPositions(int64_t parentPositions) const {
  if (format.kind == LevelKind::Dense) {
    return parentPositions * size;
  }
  return static_cast<int64_t>(crd.size());
}

Tensor::Tensor(std::vector<int> dims, std::vector<Level> levels,
               std::vector<double> vals)
    : dims_(std::move(dims)), levels_(std::move(levels)), vals_(std::move(vals)) {
  validate();
}

Format Tensor::format() const {
  Format f;
  for (const Level& l : levels_) f.push_back(l.format);
  return f;
}

void Tensor::validate() const {
  if (levels_.size() != dims_.size()) {
    throw Error(ErrorCode::InvalidArgument, "level count does not match order");
  }
  int64_t positions = 1;
  for (size_t k = 0; k < levels_.size(); ++k) {
    const Level& l = levels_[k];
    if (l.size != dims_[k]) {
      throw Error(ErrorCode::InvalidArgument, "level size does not match dim");
    }
    if (l.format.kind == LevelKind::Compressed) {
      if (static_cast<int64_t>(l.pos.size()) != positions + 1 || l.pos[0] != 0 ||
          l.pos.back() != static_cast<int32_t>(l.crd.size())) {
        throw Error(ErrorCode::InvalidArgument,
                    "malformed pos array at level " + std::to_string(k));
      }
      for (int64_t q = 0; q < positions; ++q) {
        if (l.pos[q] > l.pos[q + 1]) {
          throw Error(ErrorCode::InvalidArgument,
                      "pos array not nondecreasing at level " + std::to_string(k));
        }
        for (int32_t p = l.pos[q]; p < l.pos[q + 1]; ++p) {
          if (l.crd[p] < 0 || l.crd[p] >= l.size ||
              (p > l.pos[q] && l.crd[p] <= l.crd[p - 1])) {
            throw Error(ErrorCode::InvalidArgument,
                        "crd segment not strictly increasing at level " +
                            std::to_string(k));
          }
        }
      }
    }
    positions = l.numPositions(positions);
  }
  if (static_cast<int64_t>(vals_.size()) != positions) {
    throw Error(ErrorCode::InvalidArgument,
                "vals length does not match the number of leaf positions");
  }
}

Tensor pack(CooTensor coo, const Format& format) {
  if (format.size() != coo.order()) {
    throw Error(ErrorCode::InvalidArgument,
                "format has " + std::to_string(format.size()) +
                    " levels but tensor has order " +
                    std::to_string(coo.order()));
  }
  coo.normalize();
  const size_t order = coo.order();
  const size_t n = coo.entries.size();

  std::vector<Level> levels(order);
  // Position of each entry in the previous level; the root has one position.
  std::vector<int64_t> parentPos(n, 0);
  int64_t parentPositions = 1;
  for (size_t k = 0; k < order; ++k) {
    Level& level = levels[k];
    level.format = format[k];
    level.size = coo.dims[k];
    std::vector<int64_t> entryPos(n);
    if (level.format.kind == LevelKind::Dense) {
      for (size_t e = 0; e < n; ++e) {
        entryPos[e] = parentPos[e] * level.size + coo.entries[e].coord[k];
      }
    } else {
      // Entries are sorted, so (parent position, coordinate) pairs appear in
      // nondecreasing order and equal pairs are contiguous.
      std::vector<int32_t> counts(parentPositions, 0);
      for (size_t e = 0; e < n; ++e) {
        bool fresh = e == 0 || parentPos[e] != parentPos[e - 1] ||
                     coo.entries[e].coord[k] != coo.entries[e - 1].coord[k];
        if (fresh) {
          level.crd.push_back(coo.entries[e].coord[k]);
          counts[parentPos[e]]++;
        }
        entryPos[e] = static_cast<int64_t>(level.crd.size()) - 1;
      }
      level.pos.assign(parentPositions + 1, 0);
      for (int64_t q = 0; q < parentPositions; ++q) {
        level.pos[q + 1] = level.pos[q] + counts[q];
      }
    }
    parentPositions = level.numPositions(parentPositions);
    parentPos = std::move(entryPos);
  }

  std::vector<double> vals(parentPositions, 0.0);
  for (size_t e = 0; e < n; ++e) {
    vals[parentPos[e]] = coo.entries[e].value;
  }
  return Tensor(coo.dims, std::move(levels), std::move(vals));
}

std::vector<CooEntry> enumerate(const Tensor& tensor, bool includeZeros) {
  std::vector<CooEntry> out;
  std::vector<int> coord(tensor.order());
  const auto& levels = tensor.levels();
  if (tensor.order() == 0) {
    if (!tensor.vals().empty() && (includeZeros || tensor.vals()[0] != 0.0)) {
      out.push_back({{}, tensor.vals()[0]});
    }
    return out;
  }
  std::function<void(size_t, int64_t)> walk = [&](size_t k, int64_t parent) {
    const Level& level = levels[k];
    auto visit = [&](int64_t p, int c) {
      coord[k] = c;
      if (k + 1 == levels.size()) {
        double v = tensor.vals()[p];
        if (includeZeros || v != 0.0 || level.format.kind == LevelKind::Compressed) {
          out.push_back({coord, v});
        }
      } else {
        walk(k + 1, p);
      }
    };
    if (level.format.kind == LevelKind::Dense) {
      for (int c = 0; c < level.size; ++c) visit(parent * level.size + c, c);
    } else {
      for (int32_t p = level.pos[parent]; p < level.pos[parent + 1]; ++p) {
        visit(p, level.crd[p]);
      }
    }
  };
  walk(0, 0);
  return out;
}

DenseTensor::DenseTensor(std::vector<int> d) : dims(std::move(d)) {
  size_t size = 1;
  for (int x : dims) size *= static_cast<size_t>(x);
  vals.assign(size, 0.0);
}

size_t DenseTensor::offset(std::span<const int> coord) const {
  size_t off = 0;
  for (size_t k = 0; k < dims.size(); ++k) {
    off = off * static_cast<size_t>(dims[k]) + static_cast<size_t>(coord[k]);
  }
  return off;
}

double maxRelativeError(const DenseTensor& a, const DenseTensor& b) {
  if (a.dims != b.dims || a.vals.size() != b.vals.size()) {
    throw Error(ErrorCode::DimensionMismatch, "result shapes differ");
  }
  double worst = 0.0;
  for (size_t i = 0; i < a.vals.size(); ++i) {
    double err = std::abs(a.vals[i] - b.vals[i]) / std::max(1.0, std::abs(b.vals[i]));
    if (std::isnan(err)) return err;
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace spsched
