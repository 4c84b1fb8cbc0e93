#include <doctest.h>

#include <algorithm>
#include <map>

#include "spsched/error.h"
#include "spsched/generate.h"

using namespace spsched;

TEST_CASE("random sparse tensors have the requested size") {
  CooTensor a = randomSparse({20, 25, 30}, 0.05, 3);
  CHECK(a.entries.size() == 750);
  CooTensor b = randomSparse({20, 25, 30}, 0.05, 3);
  CHECK(a.entries.size() == b.entries.size());
  CHECK(a.entries.front().coord == b.entries.front().coord);
  CHECK(a.entries.back().value == b.entries.back().value);
  for (const auto& e : a.entries) {
    CHECK(e.value >= -1.0);
    CHECK(e.value < 1.0);
  }
  CHECK(std::is_sorted(a.entries.begin(), a.entries.end(),
                       [](const auto& x, const auto& y) { return x.coord < y.coord; }));
  CHECK_THROWS_AS(randomSparse({4}, 1.5, 1), Error);
  CHECK(randomDense({3, 4}, 1).entries.size() == 12);
}

TEST_CASE("skewed matrices") {
  CooTensor m = skewedMatrix(500, 400, 20000, 1.02, 5);
  CHECK(m.entries.size() == 20000);
  std::map<int, int> rows;
  for (const auto& e : m.entries) ++rows[e.coord[0]];
  int heaviest = 0;
  for (const auto& [r, n] : rows) heaviest = std::max(heaviest, n);
  CHECK(heaviest <= 400);
  CHECK(heaviest > 20000 / 500 * 5);

  CooTensor again = skewedMatrix(500, 400, 20000, 1.02, 5);
  CHECK(again.entries.front().coord == m.entries.front().coord);
  CooTensor other = skewedMatrix(500, 400, 20000, 1.02, 6);
  std::map<int, int> otherRows;
  for (const auto& e : other.entries) ++otherRows[e.coord[0]];
  CHECK(otherRows != rows);

  CooTensor flat = skewedMatrix(10, 10, 50, 1.0, 1);
  std::map<int, int> flatRows;
  for (const auto& e : flat.entries) ++flatRows[e.coord[0]];
  for (const auto& [r, n] : flatRows) CHECK(n == 5);
  CHECK_THROWS_AS(skewedMatrix(2, 2, 5, 1.1, 1), Error);
}
