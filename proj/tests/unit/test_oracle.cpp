#include <doctest.h>

#include "spsched/error.h"
#include "spsched/oracle.h"

using namespace spsched;

TEST_CASE("dense evaluation of SpMV") {
  CooTensor A{{2, 3}, {{{0, 0}, 1.0}, {{0, 2}, 2.0}, {{1, 1}, 3.0}}};
  CooTensor x{{3}, {{{0}, 1.0}, {{1}, 10.0}, {{2}, 100.0}}};
  TensorMap t{{"A", pack(A, parseFormat("ds"))}, {"x", pack(x, parseFormat("d"))}};
  DenseTensor y = denseEval(parseExpression("y(i) = A(i,j) * x(j)"), t);
  CHECK(y.dims == std::vector<int>{2});
  CHECK(y.vals == std::vector<double>{201.0, 30.0});
}

TEST_CASE("addition and literals") {
  CooTensor b{{2}, {{{0}, 1.0}}};
  CooTensor c{{2}, {{{1}, 4.0}}};
  TensorMap t{{"b", pack(b, parseFormat("s"))}, {"c", pack(c, parseFormat("s"))}};
  DenseTensor y = denseEval(parseExpression("y(i) = 2 * (b(i) + c(i))"), t);
  CHECK(y.vals == std::vector<double>{2.0, 8.0});
}

TEST_CASE("extent consistency") {
  CooTensor A{{2, 3}, {}};
  CooTensor x{{4}, {}};
  TensorMap t{{"A", pack(A, parseFormat("ds"))}, {"x", pack(x, parseFormat("d"))}};
  Assignment a = parseExpression("y(i) = A(i,j) * x(j)");
  CHECK_THROWS_AS(denseEval(a, t), Error);
  TensorMap missing{{"A", pack(A, parseFormat("ds"))}};
  CHECK_THROWS_AS(indexVarExtents(a, missing), Error);
}
