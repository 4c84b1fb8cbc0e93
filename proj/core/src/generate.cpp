#include "spsched/generate.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_set>

#include "spsched/error.h"

namespace spsched {

namespace {

// Floyd's algorithm: k distinct values from [0, n), sorted.
std::vector<int64_t> sampleDistinct(int64_t n, int64_t k, std::mt19937_64& rng) {
  std::unordered_set<int64_t> chosen;
  chosen.reserve(static_cast<size_t>(k) * 2);
  for (int64_t j = n - k; j < n; ++j) {
    int64_t t = std::uniform_int_distribution<int64_t>(0, j)(rng);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<int64_t> out(chosen.begin(), chosen.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> unflatten(int64_t linear, const std::vector<int>& dims) {
  std::vector<int> c(dims.size());
  for (size_t d = dims.size(); d-- > 0;) {
    c[d] = static_cast<int>(linear % dims[d]);
    linear /= dims[d];
  }
  return c;
}

int64_t volume(const std::vector<int>& dims) {
  int64_t v = 1;
  for (int d : dims) {
    if (d <= 0) throw Error(ErrorCode::InvalidArgument, "dimensions must be positive");
    v *= d;
  }
  return v;
}

}  // namespace

CooTensor randomSparse(const std::vector<int>& dims, double density, uint64_t seed) {
  if (!(density >= 0.0 && density <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "density must lie in [0, 1]");
  }
  int64_t n = volume(dims);
  auto k = static_cast<int64_t>(std::llround(density * static_cast<double>(n)));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  CooTensor coo{dims, {}};
  for (int64_t linear : sampleDistinct(n, k, rng)) {
    coo.entries.push_back({unflatten(linear, dims), value(rng)});
  }
  return coo;
}

CooTensor randomDense(const std::vector<int>& dims, uint64_t seed) {
  int64_t n = volume(dims);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  CooTensor coo{dims, {}};
  coo.entries.reserve(static_cast<size_t>(n));
  for (int64_t linear = 0; linear < n; ++linear) {
    coo.entries.push_back({unflatten(linear, dims), value(rng)});
  }
  return coo;
}

CooTensor skewedMatrix(int rows, int cols, int64_t nnz, double base, uint64_t seed) {
  if (rows <= 0 || cols <= 0) throw Error(ErrorCode::InvalidArgument, "dimensions must be positive");
  if (nnz < 0 || nnz > static_cast<int64_t>(rows) * cols) {
    throw Error(ErrorCode::InvalidArgument, "nnz does not fit the matrix");
  }
  if (!(base > 0.0)) throw Error(ErrorCode::InvalidArgument, "base must be positive");

  // Weights base^r, normalised against the largest to stay finite.
  std::vector<double> share(rows);
  double logBase = std::log(base), top = logBase >= 0 ? (rows - 1) * logBase : 0.0;
  double total = 0.0;
  for (int r = 0; r < rows; ++r) total += share[r] = std::exp(r * logBase - top);
  std::vector<int64_t> count(rows);
  std::vector<std::pair<double, int>> remainder(rows);
  int64_t assigned = 0;
  for (int r = 0; r < rows; ++r) {
    double exact = static_cast<double>(nnz) * share[r] / total;
    count[r] = static_cast<int64_t>(std::floor(exact));
    assigned += count[r];
    remainder[r] = {exact - std::floor(exact), r};
  }
  std::stable_sort(remainder.begin(), remainder.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int64_t k = 0; k < nnz - assigned; ++k) ++count[remainder[k % rows].second];

  // Cap at the row width; spill to the heaviest rows that still have room.
  int64_t spill = 0;
  for (auto& c : count) {
    if (c > cols) {
      spill += c - cols;
      c = cols;
    }
  }
  for (int r = rows - 1; r >= 0 && spill > 0; r = r == 0 ? rows - 1 : r - 1) {
    if (count[r] < cols) {
      ++count[r];
      --spill;
    }
  }

  std::mt19937_64 rng(seed);
  std::vector<int> perm(rows);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  CooTensor coo{{rows, cols}, {}};
  coo.entries.reserve(static_cast<size_t>(nnz));
  for (int r = 0; r < rows; ++r) {
    for (int64_t c : sampleDistinct(cols, count[r], rng)) {
      coo.entries.push_back({{perm[r], static_cast<int>(c)}, value(rng)});
    }
  }
  coo.normalize();
  return coo;
}

}  // namespace spsched
