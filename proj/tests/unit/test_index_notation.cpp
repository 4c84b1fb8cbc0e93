#include <doctest.h>

#include "spsched/error.h"
#include "spsched/index_notation.h"

using namespace spsched;

TEST_CASE("expression parsing") {
  Assignment a = parseExpression("y(i) = A(i,j) * x(j)");
  CHECK(a.lhs.tensor == "y");
  CHECK(a.inputTensors() == std::vector<std::string>{"A", "x"});
  CHECK(a.reductionVars() == std::vector<IndexVar>{IndexVar("j")});
  CHECK(a.defaultOrder() == std::vector<IndexVar>{IndexVar("i"), IndexVar("j")});
  CHECK(a.isReduction(IndexVar("j")));
  CHECK_FALSE(a.isReduction(IndexVar("i")));
}

TEST_CASE("precedence and printing round-trip") {
  for (const char* text : {"y(i) = A(i,j) * x(j)", "C(i,k) = A(i,j) * B(j,k)",
                           "A(i,j) = B(i,k,l) * C(k,j) * D(l,j)", "y(i) = b(i) + A(i,j) * x(j)",
                           "y(i) = 2 * (b(i) + c(i))"}) {
    Assignment a = parseExpression(text);
    Assignment b = parseExpression(toString(a));
    CHECK(structurallyEqual(a.rhs, b.rhs));
    CHECK(toString(a) == toString(b));
  }
}

TEST_CASE("sub-expression labels") {
  Assignment a = parseProgram("# labelled\nt = A(i,j) * x(j)\ny(i) = t\n");
  REQUIRE(a.labels.count("t") == 1);
  CHECK(structurallyEqual(a.labels.at("t"), a.rhs));
  CHECK(collectAccesses(a.rhs).size() == 2);
}

TEST_CASE("syntax errors") {
  CHECK_THROWS_AS(parseExpression("y(i) = A(i,j) *"), Error);
  CHECK_THROWS_AS(parseExpression("y(i) A(i,j)"), Error);
  CHECK_THROWS_AS(parseProgram("y(i) = u\n"), Error);
  try {
    parseExpression("y(i) = A(i,j) * * x(j)");
    FAIL("expected syntax error");
  } catch (const Error& e) {
    CHECK(((e.code() == ErrorCode::Syntax)));
  }
}

TEST_CASE("sub-expression replacement") {
  Assignment a = parseProgram("t = A(i,j) * x(j)\ny(i) = b(i) + t\n");
  Expr w = makeWorkspaceRead("w", IndexVar("j"));
  Expr r = replaceSubexpr(a.rhs, a.labels.at("t"), w);
  REQUIRE((r != nullptr));
  CHECK(collectAccesses(r).size() == 1);
  Expr structural = parseExpression("z(i) = A(i,j) * x(j)").rhs;
  CHECK((replaceSubexpr(a.rhs, structural, w) != nullptr));
  CHECK((replaceSubexpr(a.rhs, parseExpression("z(i) = q(i)").rhs, w) == nullptr));
  CHECK(containsAdd(a.rhs));
  CHECK(containsVar(a.rhs, IndexVar("j")));
}
