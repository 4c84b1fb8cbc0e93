#include <doctest.h>

#include <set>

#include "spsched/error.h"
#include "spsched/schedule.h"
#include "support.h"

using namespace spsched;
using support::V;

namespace {

std::map<std::string, Format> csr() {
  return {{"A", parseFormat("ds")}, {"x", parseFormat("d")}};
}

ScheduledStmt spmv() { return concretize(parseExpression("y(i) = A(i,j) * x(j)"), csr()); }

ErrorCode codeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

void checkLeavesMatchForest(const ScheduledStmt& s) {
  std::set<IndexVar> leaves;
  for (const auto& v : s.provenance().leaves()) {
    if (s.precomputeRecord() && v == s.precomputeRecord()->preVar) continue;
    leaves.insert(v);
  }
  std::set<IndexVar> forest(s.forest().begin(), s.forest().end());
  CHECK(leaves == forest);
}

}  // namespace

TEST_CASE("concretize uses output then reduction order") {
  ScheduledStmt s = spmv();
  CHECK(s.forest() == std::vector<IndexVar>{V("i"), V("j")});
  CHECK(s.races(V("j")));
  CHECK_FALSE(s.races(V("i")));
}

TEST_CASE("split and divide record relations and extents") {
  ScheduledStmt s = spmv().split(V("i"), V("i0"), V("i1"), 7);
  CHECK(s.forest() == std::vector<IndexVar>{V("i0"), V("i1"), V("j")});
  CHECK(s.provenance().structuralExtent(V("i1")) == 7);
  CHECK_FALSE(s.provenance().structuralExtent(V("i0")).has_value());
  ScheduledStmt d = spmv().divide(V("i"), V("i0"), V("i1"), 4);
  CHECK(d.provenance().structuralExtent(V("i0")) == 4);
  CHECK(d.provenance().origins(V("i1")) == std::set<IndexVar>{V("i")});
  CHECK(((codeOf([] { spmv().split(V("i"), V("a"), V("b"), 0); }) == ErrorCode::InvalidArgument)));
  CHECK(((codeOf([] { spmv().split(V("q"), V("a"), V("b"), 2); }) == ErrorCode::InvalidArgument)));
}

TEST_CASE("fuse requires direct nesting") {
  std::map<std::string, Format> mm{{"A", parseFormat("ds")}, {"B", parseFormat("dd")}};
  ScheduledStmt s = concretize(parseExpression("C(i,k) = A(i,j) * B(j,k)"), mm,
                                  std::vector<IndexVar>{V("i"), V("j"), V("k")});
  CHECK(((codeOf([&] { s.fuse(V("i"), V("k"), V("f")); }) == ErrorCode::NotDirectlyNested)));
  ScheduledStmt f = s.fuse(V("i"), V("j"), V("f"));
  CHECK(f.forest() == std::vector<IndexVar>{V("f"), V("k")});
  CHECK(f.provenance().constituents(V("f")) == std::vector<IndexVar>{V("i"), V("j")});
  checkLeavesMatchForest(f);
}

TEST_CASE("reorder checks contiguity and concordance") {
  std::map<std::string, Format> mm{{"A", parseFormat("ds")}, {"B", parseFormat("dd")}};
  ScheduledStmt s = concretize(parseExpression("C(i,k) = A(i,j) * B(j,k)"), mm,
                                  std::vector<IndexVar>{V("i"), V("j"), V("k")});
  CHECK(s.reorder({V("i"), V("k"), V("j")}).forest() ==
        std::vector<IndexVar>{V("i"), V("k"), V("j")});
  CHECK(((codeOf([&] { s.reorder({V("k"), V("i")}); }) == ErrorCode::NotDirectlyNested)));
  CHECK(((codeOf([&] { s.reorder({V("j"), V("i")}); }) == ErrorCode::DiscordantTraversal)));
  CHECK(((codeOf([&] { s.reorder({V("i"), V("i")}); }) == ErrorCode::InvalidArgument)));
}

TEST_CASE("pos and coord") {
  ScheduledStmt p = spmv().pos(V("j"), V("jpos"), "A");
  CHECK((p.provenance().space(V("jpos")) == Space::Position));
  const Relation* rel = p.provenance().producer(V("jpos"));
  REQUIRE(rel);
  CHECK((rel->kind == RelKind::Pos));
  CHECK(rel->level == 1);
  CHECK(rel->firstLevel == 1);
  ScheduledStmt c = p.coord(V("jpos"), V("j2"));
  CHECK((c.provenance().space(V("j2")) == Space::Coordinate));
  checkLeavesMatchForest(c);
  CHECK(((codeOf([&] { p.pos(V("jpos"), V("q"), "A"); }) == ErrorCode::InvalidArgument)));
  CHECK(((codeOf([] { spmv().coord(V("j"), V("q")); }) == ErrorCode::NotPositionSpace)));
  CHECK(((codeOf([] { spmv().pos(V("j"), V("q"), "Z"); }) == ErrorCode::UnboundTensor)));
  // fused positions span both levels
  ScheduledStmt f = spmv().fuse(V("i"), V("j"), V("f")).pos(V("f"), V("fpos"), "A");
  CHECK(f.provenance().producer(V("fpos"))->firstLevel == 0);
}

TEST_CASE("pos on a union merge is rejected") {
  std::map<std::string, Format> f{{"b", parseFormat("s")}, {"c", parseFormat("s")}};
  ScheduledStmt s = concretize(parseExpression("y(i) = b(i) + c(i)"), f);
  CHECK(((codeOf([&] { s.pos(V("i"), V("ip"), "b"); }) == ErrorCode::UnionMerge)));
}

TEST_CASE("parallelize detects races") {
  ScheduledStmt s = spmv().split(V("i"), V("i0"), V("i1"), 16);
  CHECK_NOTHROW(s.parallelize(V("i0"), ParallelUnit::CPUThread, RaceStrategy::NoRaces));
  CHECK((codeOf([&] { s.parallelize(V("j"), ParallelUnit::CPUThread, RaceStrategy::NoRaces); }) ==
        ErrorCode::RaceDetected));
  ScheduledStmt t = s.parallelize(V("i0"), ParallelUnit::CPUThread, RaceStrategy::NoRaces);
  CHECK((t.parallelTag(V("i0"))->unit == ParallelUnit::CPUThread));
  CHECK((codeOf([&] { t.parallelize(V("i0"), ParallelUnit::CPUThread, RaceStrategy::NoRaces); }) ==
        ErrorCode::DuplicateParallel));
  CHECK(((codeOf([&] { t.split(V("i0"), V("a"), V("b"), 2); }) == ErrorCode::TaggedVariable)));
}

TEST_CASE("unroll needs a constant extent") {
  ScheduledStmt s = spmv().split(V("i"), V("i0"), V("i1"), 4);
  CHECK(s.unroll(V("i1"), 4).unrollFactor(V("i1")) == 4);
  CHECK(s.unrollFactor(V("i1")) == 1);
  CHECK(((codeOf([&] { s.unroll(V("i0"), 2); }) == ErrorCode::NonConstantExtent)));
}

TEST_CASE("bound and precompute") {
  ScheduledStmt b = spmv().bound(V("i"), V("ib"), 16, BoundType::MaxExact);
  CHECK(b.provenance().structuralExtent(V("ib")) == 16);
  CHECK((parseBoundType("MaxExact") == BoundType::MaxExact));
  CHECK(((codeOf([] { parseBoundType("MinExact"); }) == ErrorCode::Unsupported)));

  Assignment a = parseProgram("t = A(i,j) * x(j)\ny(i) = t\n");
  ScheduledStmt s = concretize(a, csr());
  ScheduledStmt p = s.precompute(a.labels.at("t"), V("j"), V("jp"), "w");
  REQUIRE(p.precomputeRecord());
  CHECK(p.precomputeRecord()->workspace == "w");
  checkLeavesMatchForest(p);
  Expr other = parseExpression("z(i) = x(i)").rhs;
  CHECK(((codeOf([&] { s.precompute(other, V("j"), V("jp"), "w"); }) == ErrorCode::ExprNotFound)));
  CHECK((codeOf([&] { s.precompute(a.labels.at("t"), V("i"), V("ip"), "w"); }) ==
        ErrorCode::Unsupported));
}

TEST_CASE("every corpus schedule replays with leaves equal to loops") {
  for (const auto& e : support::corpus()) {
    CAPTURE(e.schedule);
    ScheduledStmt s = support::corpusSchedule(e);
    checkLeavesMatchForest(s);
  }
}
