#include <doctest.h>

#include "spsched/bounds.h"
#include "spsched/error.h"
#include "spsched/lower.h"
#include "support.h"

using namespace spsched;
using support::V;

namespace {

std::map<std::string, Format> csr() {
  return {{"A", parseFormat("ds")}, {"x", parseFormat("d")}};
}

ScheduledStmt spmv() { return concretize(parseExpression("y(i) = A(i,j) * x(j)"), csr()); }

ScheduledStmt vec() {
  return concretize(parseExpression("y(i) = x(i)"), {{"x", parseFormat("d")}});
}

bool contains(const std::string& text, const std::string& part) {
  return text.find(part) != std::string::npos;
}

}  // namespace

TEST_CASE("bounds propagation") {
  std::map<std::string, std::vector<int>> dims{{"x", {30}}};
  ScheduledStmt s = vec().split(V("i"), V("i0"), V("i1"), 7);
  Symbols sym(s, &dims);
  auto d = propagateBounds(s, sym);
  CHECK(d.at(V("i0")).constant == 5);
  CHECK(d.at(V("i1")).constant == 7);

  std::map<std::string, std::vector<int>> ten{{"x", {10}}};
  ScheduledStmt v = vec().divide(V("i"), V("i0"), V("i1"), 4);
  Symbols sv(v, &ten);
  auto dv = propagateBounds(v, sv);
  CHECK(dv.at(V("i0")).constant == 4);
  CHECK(dv.at(V("i1")).constant == 3);

  ScheduledStmt b = vec().bound(V("i"), V("ib"), 16, BoundType::MaxExact);
  Symbols sb(b);
  CHECK(propagateBounds(b, sb).at(V("ib")).constant == 16);

  ScheduledStmt p = spmv().fuse(V("i"), V("j"), V("f")).pos(V("f"), V("fpos"), "A");
  Symbols sp(p);
  auto dp = propagateBounds(p, sp);
  CHECK(ir::print(dp.at(V("fpos")).hi) == "A2_pos[A1_dimension]");
  CHECK(ir::print(dp.at(V("f")).hi) == "A1_dimension * A2_dimension");
}

TEST_CASE("derived recovery expressions") {
  ScheduledStmt s = vec().split(V("i"), V("i0"), V("i1"), 7);
  Symbols sym(s);
  auto d = propagateBounds(s, sym);
  CHECK(ir::print(recoverDerived(s, sym, d, V("i0"))) == "i / 7");
  CHECK(ir::print(recoverDerived(s, sym, d, V("i1"))) == "i % 7");
  ScheduledStmt p = spmv().pos(V("j"), V("jpos"), "A");
  Symbols sp(p);
  std::string jpos = ir::print(recoverDerived(p, sp, propagateBounds(p, sp), V("jpos")));
  CHECK(contains(jpos, "find(A2_crd"));
}

TEST_CASE("unscheduled SpMV has the row-then-segment shape") {
  std::string ir = ir::print(lower(spmv()));
  CHECK(contains(ir, "for i in [0, A1_dimension)"));
  CHECK(contains(ir, "for pA2 in [A2_pos[i], A2_pos[i + 1])"));
  CHECK(contains(ir, "decl j = A2_crd[pA2]"));
  CHECK(contains(ir, "y_vals[i] += A_vals[pA2] * x_vals[j]"));
  CHECK_FALSE(contains(ir, "guard"));
}

TEST_CASE("position SpMV tracks rows") {
  ScheduledStmt p = spmv().fuse(V("i"), V("j"), V("f")).pos(V("f"), V("fpos"), "A");
  std::string tracked = ir::print(lower(p));
  CHECK(contains(tracked, "decl pA1 = segment_of(A2_pos, 0, A1_dimension, 0)"));
  CHECK(contains(tracked, "while A2_pos[pA1 + 1] <= fpos"));
  LowerOptions off;
  off.enableTracking = false;
  std::string searched = ir::print(lower(p, off));
  CHECK_FALSE(contains(searched, "while"));
  CHECK(contains(searched, "segment_of(A2_pos, 0, A1_dimension, fpos)"));
}

TEST_CASE("split tails are guarded unless they divide evenly") {
  ScheduledStmt s = vec().split(V("i"), V("i0"), V("i1"), 7);
  std::string runtime = ir::print(lower(s));
  CHECK(contains(runtime, "decl i = i0 * 7 + i1"));
  CHECK(contains(runtime, "guard i < x1_dimension"));
  LowerOptions fixed;
  fixed.specializedDims = std::map<std::string, std::vector<int>>{{"x", {30}}};
  CHECK(contains(ir::print(lower(s, fixed)), "guard i < 30"));
  fixed.specializedDims = std::map<std::string, std::vector<int>>{{"x", {28}}};
  CHECK_FALSE(contains(ir::print(lower(s, fixed)), "guard"));
}

TEST_CASE("bound emits a runtime check") {
  std::string ir = ir::print(lower(vec().bound(V("i"), V("ib"), 16, BoundType::MaxExact)));
  CHECK(contains(ir, "check x1_dimension == 16"));
}

TEST_CASE("union merges become while loops") {
  std::map<std::string, Format> f{{"b", parseFormat("s")}, {"c", parseFormat("s")}};
  ScheduledStmt s = concretize(parseExpression("y(i) = b(i) + c(i)"), f);
  std::string ir = ir::print(lower(s));
  CHECK(contains(ir, "while"));
  ScheduledStmt p = s.parallelize(V("i"), ParallelUnit::CPUThread, RaceStrategy::NoRaces);
  try {
    lower(p);
    FAIL("expected Unsupported");
  } catch (const Error& e) {
    CHECK(((e.code() == ErrorCode::Unsupported)));
  }
}

TEST_CASE("races select the write discipline") {
  ScheduledStmt s = spmv()
                        .fuse(V("i"), V("j"), V("f"))
                        .pos(V("f"), V("fpos"), "A")
                        .split(V("fpos"), V("b"), V("t"), 8);
  CHECK(contains(ir::print(lower(
                     s.parallelize(V("b"), ParallelUnit::CPUThread, RaceStrategy::Atomics))),
                 "(Atomics)"));
  std::string tmp = ir::print(lower(spmv()
                                        .split(V("j"), V("j0"), V("j1"), 4)
                                        .parallelize(V("j1"), ParallelUnit::CPUVector,
                                                     RaceStrategy::Temporary)));
  CHECK(contains(tmp, "alloc y_tmp"));
  CHECK(contains(tmp, "for y_tmp_i"));
}

TEST_CASE("manifest orders slots") {
  std::map<std::string, Format> f{{"B", parseFormat("sss")}, {"C", parseFormat("dd")},
                                  {"D", parseFormat("dd")}};
  ir::Program p =
      lower(concretize(parseExpression("A(i,j) = B(i,k,l) * C(k,j) * D(l,j)"), f));
  CHECK(p.inputTensors == std::vector<std::string>{"B", "C", "D"});
  std::vector<std::string> pos;
  for (const auto& a : p.arrays) {
    if (a.role == ir::ArrayRole::Pos) pos.push_back(a.name + "@" + std::to_string(a.slot));
    if (a.role == ir::ArrayRole::Vals && a.tensor == "D") CHECK(a.slot == 2);
  }
  CHECK(pos == std::vector<std::string>{"B1_pos@0", "B2_pos@1", "B3_pos@2"});
  CHECK(p.outputArray == "A_vals");
}

TEST_CASE("every corpus schedule lowers") {
  for (const auto& e : support::corpus()) {
    CAPTURE(e.schedule);
    CHECK_NOTHROW(lower(support::corpusSchedule(e)));
  }
}
