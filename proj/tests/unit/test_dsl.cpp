#include <doctest.h>

#include "spsched/error.h"
#include "spsched/schedule_dsl.h"
#include "support.h"

using namespace spsched;
using support::V;

namespace {

ScheduledStmt base() {
  std::map<std::string, Format> f{{"A", parseFormat("ds")}, {"x", parseFormat("d")}};
  return concretize(parseProgram("t = A(i,j) * x(j)\ny(i) = t\n"), f);
}

}  // namespace

TEST_CASE("directives, constants and comments") {
  ScheduledStmt s = applySchedule(base(),
                                  "# tile rows\n"
                                  "ROWS = 4 * (2 + 2)\n"
                                  "split(i, i0, i1, ROWS / 2)   # eight rows\n"
                                  "reorder({i0, i1, j})\n"
                                  "parallelize(i0, CPUThread, NoRaces)\n");
  CHECK(s.forest() == std::vector<IndexVar>{V("i0"), V("i1"), V("j")});
  CHECK(s.provenance().structuralExtent(V("i1")) == 8);
  CHECK(s.parallelTag(V("i0")).has_value());
}

TEST_CASE("pos accepts a tensor name or an access") {
  ScheduledStmt a = applySchedule(base(), "pos(j, jpos, A)");
  ScheduledStmt b = applySchedule(base(), "pos(j, jpos, A(i, j))");
  CHECK(a.forest() == b.forest());
}

TEST_CASE("precompute resolves labels") {
  ScheduledStmt s = applySchedule(base(), "precompute(t, j, jpre, w)");
  REQUIRE(s.precomputeRecord());
  CHECK(s.precomputeRecord()->preVar == V("jpre"));
  try {
    applySchedule(base(), "\nprecompute(nope, j, jpre, w)");
    FAIL("expected an error");
  } catch (const ParseError& e) {
    CHECK(((e.code() == ErrorCode::ExprNotFound)));
    CHECK(e.line() == 2);
  }
}

TEST_CASE("errors carry line numbers and codes") {
  auto fails = [](const char* script, ErrorCode code, int line) {
    try {
      applySchedule(base(), script);
      FAIL("expected an error for " << script);
    } catch (const ParseError& e) {
      CHECK((e.code() == code));
      CHECK(e.line() == line);
    }
  };
  fails("frobnicate(i)", ErrorCode::Syntax, 1);
  fails("split(i, a, b)", ErrorCode::Syntax, 1);
  fails("split(i, a, b, N)", ErrorCode::Syntax, 1);
  fails("split(i, a, b, 4\n", ErrorCode::Syntax, 1);
  fails("# ok\nreorder(j, i)", ErrorCode::DiscordantTraversal, 2);
  fails("parallelize(j, CPUThread, NoRaces)", ErrorCode::RaceDetected, 1);
  fails("parallelize(i, Quantum, NoRaces)", ErrorCode::InvalidArgument, 1);
}

TEST_CASE("every corpus file parses") {
  for (const auto& e : support::corpus()) {
    CAPTURE(e.schedule);
    CHECK_NOTHROW(support::corpusSchedule(e));
  }
}
