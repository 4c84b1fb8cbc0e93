#include <doctest.h>

#include "spsched/error.h"
#include "spsched/iteration_graph.h"
#include "spsched/merge_lattice.h"
#include "spsched/schedule.h"
#include "support.h"

using namespace spsched;
using support::V;

TEST_CASE("merge kinds follow the operators") {
  std::map<std::string, Format> f{{"b", parseFormat("s")}, {"c", parseFormat("s")}};
  auto add = concretize(parseExpression("y(i) = b(i) + c(i)"), f);
  auto mul = concretize(parseExpression("y(i) = b(i) * c(i)"), f);
  CHECK((add.graph().merge.at(V("i")) == MergeKind::Union));
  CHECK((mul.graph().merge.at(V("i")) == MergeKind::Intersection));

  MergeLattice u = mergeLattice(add, V("i"));
  CHECK(u.points.size() == 3);
  CHECK_FALSE(u.hasFullPoint());
  MergeLattice m = mergeLattice(mul, V("i"));
  CHECK(m.points.size() == 1);
  CHECK(m.iterators() == std::vector<int>{0, 1});
}

TEST_CASE("dense operands do not add iterators") {
  std::map<std::string, Format> f{{"A", parseFormat("ds")}, {"x", parseFormat("d")}};
  auto s = concretize(parseExpression("y(i) = A(i,j) * x(j)"), f);
  MergeLattice j = mergeLattice(s, V("j"));
  CHECK(j.iterators() == std::vector<int>{0});
  CHECK(mergeLattice(s, V("i")).hasFullPoint());
}

TEST_CASE("tensor paths and depths") {
  std::map<std::string, Format> f{{"B", parseFormat("sss")}, {"C", parseFormat("dd")},
                                  {"D", parseFormat("dd")}};
  auto s = concretize(parseExpression("A(i,j) = B(i,k,l) * C(k,j) * D(l,j)"), f);
  CHECK(s.forest() == std::vector<IndexVar>{V("i"), V("j"), V("k"), V("l")});
  REQUIRE(s.graph().paths.size() == 3);
  CHECK(s.graph().paths[0].steps.size() == 3);
  CHECK(s.graph().depthOf(V("k")) == 2);
  CHECK(s.graph().depthOf(V("zz")) == -1);
  auto ready = readyDepths(s.pos(V("i"), V("ipos"), "B"));
  CHECK(ready.at(V("i")) == 0);
}

TEST_CASE("DOT output names loops and relations") {
  std::map<std::string, Format> f{{"A", parseFormat("ds")}, {"x", parseFormat("d")}};
  auto s = concretize(parseExpression("y(i) = A(i,j) * x(j)"), f).split(V("i"), V("i0"), V("i1"), 4);
  std::string dot = toDot(s);
  CHECK(dot.find("digraph") != std::string::npos);
  CHECK(dot.find("i0") != std::string::npos);
  CHECK(dot.find("i1") != std::string::npos);
}
