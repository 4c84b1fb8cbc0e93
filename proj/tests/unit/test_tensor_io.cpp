#include <doctest.h>

#include "spsched/error.h"
#include "spsched/io.h"
#include "spsched/tensor.h"

using namespace spsched;

namespace {

CooTensor sample() {
  // 4x5:  row 0: (0,1)=1 (0,4)=2 ; row 2: (2,0)=3 ; row 3: (3,3)=4
  CooTensor c{{4, 5}, {{{2, 0}, 3.0}, {{0, 4}, 2.0}, {{3, 3}, 4.0}, {{0, 1}, 1.0}}};
  return c;
}

}  // namespace

TEST_CASE("format shorthand") {
  Format f = parseFormat("ds");
  REQUIRE(f.size() == 2);
  CHECK(f[0].kind == LevelKind::Dense);
  CHECK(f[1].kind == LevelKind::Compressed);
  CHECK(formatString(parseFormat("sss")) == "sss");
  CHECK_THROWS_AS(parseFormat("dx"), Error);
}

TEST_CASE("CSR packing") {
  Tensor t = pack(sample(), parseFormat("ds"));
  CHECK(t.level(1).pos == std::vector<int32_t>{0, 2, 2, 3, 4});
  CHECK(t.level(1).crd == std::vector<int32_t>{1, 4, 0, 3});
  CHECK(t.vals() == std::vector<double>{1, 2, 3, 4});
  CHECK_NOTHROW(t.validate());
}

TEST_CASE("DCSR packing skips empty rows") {
  Tensor t = pack(sample(), parseFormat("ss"));
  CHECK(t.level(0).pos == std::vector<int32_t>{0, 3});
  CHECK(t.level(0).crd == std::vector<int32_t>{0, 2, 3});
  CHECK(t.level(1).pos == std::vector<int32_t>{0, 2, 3, 4});
  CHECK(t.numLeafPositions() == 4);
}

TEST_CASE("dense packing materializes zeros") {
  Tensor t = pack(sample(), parseFormat("dd"));
  CHECK(t.vals().size() == 20);
  CHECK(t.vals()[0 * 5 + 4] == 2.0);
  CHECK(enumerate(t).size() == 4);
  CHECK(enumerate(t, true).size() == 20);
}

TEST_CASE("duplicates are summed") {
  CooTensor c{{2, 2}, {{{1, 1}, 1.0}, {{1, 1}, 2.5}}};
  Tensor t = pack(c, parseFormat("ds"));
  REQUIRE(t.vals().size() == 1);
  CHECK(t.vals()[0] == 3.5);
}

TEST_CASE("out of range coordinates are rejected") {
  CooTensor c{{2, 2}, {{{2, 0}, 1.0}}};
  CHECK_THROWS_AS(pack(c, parseFormat("ds")), Error);
}

TEST_CASE("enumerate round-trips every format") {
  CooTensor c = sample();
  c.normalize();
  for (const char* f : {"dd", "ds", "sd", "ss"}) {
    auto entries = enumerate(pack(c, parseFormat(f)));
    REQUIRE(entries.size() == c.entries.size());
    for (size_t k = 0; k < entries.size(); ++k) {
      CHECK(entries[k].coord == c.entries[k].coord);
      CHECK(entries[k].value == c.entries[k].value);
    }
  }
}

TEST_CASE("MatrixMarket parsing") {
  CooTensor c = parseMatrixMarket(
      "%%MatrixMarket matrix coordinate real general\n% comment\n3 4 2\n1 1 5\n3 4 -1.5\n");
  CHECK(c.dims == std::vector<int>{3, 4});
  REQUIRE(c.entries.size() == 2);
  CHECK(c.entries[1].coord == std::vector<int>{2, 3});
  CHECK(c.entries[1].value == -1.5);
}

TEST_CASE("MatrixMarket errors carry line numbers") {
  try {
    parseMatrixMarket("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 1\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parseMatrixMarket("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n"),
                  ParseError);
  CHECK_THROWS_AS(parseMatrixMarket("not a header\n"), ParseError);
}

TEST_CASE("FROSTT dims header and override") {
  CooTensor c = parseFrostt("# dims: 5 6 7\n1 2 3 1.0\n");
  CHECK(c.dims == std::vector<int>{5, 6, 7});
  CHECK(c.entries[0].coord == std::vector<int>{0, 1, 2});
  CooTensor d = parseFrostt("1 2 3 1.0\n2 1 1 2.0\n");
  CHECK(d.dims == std::vector<int>{2, 2, 3});
  CooTensor e = parseFrostt("1 2 1.0\n", std::vector<int>{9, 9});
  CHECK(e.dims == std::vector<int>{9, 9});
}

TEST_CASE("writers round-trip") {
  CooTensor c = sample();
  c.normalize();
  CooTensor m = parseMatrixMarket(writeMatrixMarket(c));
  CooTensor f = parseFrostt(writeFrostt(c));
  CHECK(m.dims == c.dims);
  CHECK(f.dims == c.dims);
  REQUIRE(m.entries.size() == c.entries.size());
  for (size_t k = 0; k < c.entries.size(); ++k) {
    CHECK(m.entries[k].coord == c.entries[k].coord);
    CHECK(f.entries[k].value == c.entries[k].value);
  }
}

TEST_CASE("relative error uses max(1, |b|)") {
  DenseTensor a({2}), b({2});
  a.vals = {1.0, 200.0};
  b.vals = {1.5, 100.0};
  CHECK(maxRelativeError(a, b) == doctest::Approx(1.0));
  b.vals = {1.0, 200.0};
  CHECK(maxRelativeError(a, b) == 0.0);
}
