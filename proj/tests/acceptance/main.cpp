// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any
// failure.
#include <dlfcn.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "spsched/bounds.h"
#include "spsched/codegen_c.h"
#include "spsched/error.h"
#include "spsched/interpret.h"
#include "spsched/lower.h"
#include "support.h"

using namespace spsched;
using support::V;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// 1. Every corpus schedule on 30 seeded inputs against the oracle.
Outcome corpusCorrectness() {
  auto start = Clock::now();
  double worst = 0.0;
  std::string worstName;
  for (const auto& e : support::corpus()) {
    ScheduledStmt stmt = support::corpusSchedule(e);
    ir::Program program = lower(stmt);
    for (uint64_t seed = 1; seed <= 30; ++seed) {
      TensorMap inputs = support::inputsFor(e.kernel, seed);
      double err = maxRelativeError(interpret(program, inputs).output,
                                    denseEval(stmt.assignment(), inputs));
      if (err > worst || worstName.empty()) {
        worst = std::max(worst, err);
        worstName = e.schedule;
      }
    }
  }
  double t = seconds(start);
  return {worst <= 1e-10 && t <= 60.0,
          "11 schedules x 30 inputs, max relative error " + fmt(worst) + " (" + worstName +
              "), " + fmt(t) + " s"};
}

// 2. Random compositions on an 8x9 space visit every coordinate once.
Outcome visitExactlyOnce() {
  auto start = Clock::now();
  std::mt19937_64 rng(20240601);
  auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<uint64_t>(n)); };
  const char* exprs[] = {"C(i,j) = A(i,j)", "y(i) = A(i,j) * x(j)"};
  const char* aFormats[] = {"dd", "ds"};
  std::map<std::string, int> opsApplied;
  int accepted = 0, attempts = 0, mismatches = 0;
  while (accepted < 200 && attempts < 50000) {
    ++attempts;
    Assignment asg = parseExpression(exprs[pick(2)]);
    std::map<std::string, Format> formats{{"A", parseFormat(aFormats[pick(2)])},
                                          {"x", parseFormat("d")}};
    TensorMap inputs{{"A", pack(randomDense({8, 9}, attempts), formats["A"])},
                     {"x", pack(randomDense({9}, attempts + 1), formats["x"])}};
    if (asg.inputTensors().size() == 1) {
      formats.erase("x");
      inputs.erase("x");
    }
    ScheduledStmt stmt = concretize(asg, formats);
    int fresh = 0;
    auto name = [&] { return IndexVar("v" + std::to_string(fresh++)); };
    std::vector<std::string> applied;
    int ops = 1 + pick(5);
    for (int k = 0; k < ops; ++k) {
      const auto& forest = stmt.forest();
      int n = static_cast<int>(forest.size());
      IndexVar v = forest[pick(n)];
      std::string kind;
      try {
        switch (pick(6)) {
          case 0:
            kind = "split";
            stmt = stmt.split(v, name(), name(), 1 + pick(10));
            break;
          case 1:
            kind = "divide";
            stmt = stmt.divide(v, name(), name(), 1 + pick(10));
            break;
          case 2: {
            kind = "fuse";
            if (n < 2) continue;
            int d = pick(n - 1);
            stmt = stmt.fuse(forest[d], forest[d + 1], name());
            break;
          }
          case 3: {
            kind = "reorder";
            if (n < 2) continue;
            int len = 2 + pick(std::min(n, 4) - 1);
            int d = pick(n - len + 1);
            std::vector<IndexVar> window(forest.begin() + d, forest.begin() + d + len);
            std::shuffle(window.begin(), window.end(), rng);
            stmt = stmt.reorder(window);
            break;
          }
          case 4:
            kind = "pos";
            stmt = stmt.pos(v, name(), "A");
            break;
          case 5: {
            kind = "coord";
            std::vector<IndexVar> posVars;
            for (const auto& f : forest) {
              const Relation* r = stmt.provenance().producer(f);
              if (r && r->kind == RelKind::Pos) posVars.push_back(f);
            }
            if (posVars.empty()) continue;
            stmt = stmt.coord(posVars[pick(static_cast<int>(posVars.size()))], name());
            break;
          }
        }
        applied.push_back(kind);
      } catch (const Error&) {
        // precondition violated: skip this op
      }
    }
    if (applied.empty()) continue;
    ir::Program program;
    try {
      program = lower(stmt);
    } catch (const Error&) {
      continue;
    }
    ExecOptions opts;
    opts.recordVisits = true;
    ExecResult r = interpret(program, inputs, opts);
    const auto& syms = r.stats.visitSymbols;
    auto col = [&](const char* s) {
      return static_cast<size_t>(std::find(syms.begin(), syms.end(), s) - syms.begin());
    };
    size_t ci = col("i"), cj = col("j");
    std::multiset<std::pair<int64_t, int64_t>> seen;
    for (const auto& row : r.stats.visits) seen.insert({row.at(ci), row.at(cj)});
    std::multiset<std::pair<int64_t, int64_t>> expected;
    for (int i = 0; i < 8; ++i) {
      for (int j = 0; j < 9; ++j) expected.insert({i, j});
    }
    bool ok = seen == expected &&
              maxRelativeError(r.output, denseEval(stmt.assignment(), inputs)) <= 1e-10;
    if (!ok) {
      ++mismatches;
      std::cerr << "visit mismatch for schedule:\n" << stmt.toString() << "\n";
    }
    for (const auto& k : applied) ++opsApplied[k];
    ++accepted;
  }
  double t = seconds(start);
  std::string mix;
  for (const auto& [k, n] : opsApplied) mix += " " + k + "=" + std::to_string(n);
  return {accepted >= 200 && mismatches == 0 && t <= 10.0 && opsApplied.size() == 6,
          std::to_string(accepted) + " schedules, " + std::to_string(mismatches) +
              " mismatches, ops" + mix + ", " + fmt(t) + " s"};
}

// 3. Tail handling for split and divide.
Outcome tailStrategy() {
  Assignment asg = parseExpression("y(i) = x(i)");
  std::map<std::string, Format> formats{{"x", parseFormat("d")}};
  TensorMap n30{{"x", pack(randomDense({30}, 1), formats["x"])}};
  ExecStats split = interpret(lower(concretize(asg, formats).split(V("i"), V("i0"), V("i1"), 7)),
                              n30)
                        .stats;
  TensorMap n10{{"x", pack(randomDense({10}, 2), formats["x"])}};
  ExecStats divide =
      interpret(lower(concretize(asg, formats)
                          .divide(V("i"), V("i0"), V("i1"), 4)
                          .parallelize(V("i0"), ParallelUnit::CPUThread, RaceStrategy::NoRaces)),
                n10)
          .stats;
  const auto& chunks = divide.instanceWork["i0"];
  std::string list;
  for (auto c : chunks) list += (list.empty() ? "" : ",") + std::to_string(c);
  bool pass = split.guardPasses == 30 && split.guardFailures == 5 &&
              chunks == std::vector<int64_t>{3, 3, 3, 1};
  return {pass, "split(30,7): " + std::to_string(split.guardPasses) + " passed / " +
                    std::to_string(split.guardFailures) + " failed guards; divide(10,4) chunks [" +
                    list + "]"};
}

ScheduledStmt posDivided(int64_t count) {
  std::map<std::string, Format> formats{{"A", parseFormat("ds")}, {"x", parseFormat("d")}};
  return concretize(parseExpression("y(i) = A(i,j) * x(j)"), formats)
      .fuse(V("i"), V("j"), V("f"))
      .pos(V("f"), V("fpos"), "A")
      .divide(V("fpos"), V("block"), V("nz"), count)
      .parallelize(V("block"), ParallelUnit::CPUThread, RaceStrategy::Atomics);
}

// 4. divide fixes the number of chunks regardless of nnz.
Outcome divideConstancy() {
  ir::Program program = lower(posDivided(4));
  std::string detail;
  bool pass = true;
  for (auto [side, nnz] : {std::pair{10, 10}, {100, 1000}, {1000, 100000}}) {
    double density = static_cast<double>(nnz) / (static_cast<double>(side) * side);
    TensorMap t{{"A", pack(randomSparse({side, side}, density, 3), parseFormat("ds"))},
                {"x", pack(randomDense({side}, 4), parseFormat("d"))}};
    ExecStats s = interpret(program, t).stats;
    const auto& w = s.instanceWork["block"];
    int64_t sum = 0;
    for (auto c : w) sum += c;
    pass = pass && s.loopIterations["block"] == 4 && w.size() == 4 && sum == nnz;
    detail += (detail.empty() ? "" : "; ") + std::string("nnz ") + std::to_string(nnz) + ": " +
              std::to_string(s.loopIterations["block"]) + " chunks";
  }
  return {pass, detail};
}

// 5. Nonzero-split chunks are exactly balanced; row chunks are not.
Outcome loadBalance() {
  ScheduledStmt gpu = support::corpusSchedule(support::corpus()[1]);
  ScheduledStmt rows = support::corpusSchedule(support::corpus()[0]);
  ir::Program gpuProgram = lower(gpu), rowProgram = lower(rows);
  bool pass = true;
  std::string detail;
  for (double base : {1.01, 1.02, 1.05}) {
    TensorMap t{{"A", pack(skewedMatrix(2000, 2000, 100000, base, 7), parseFormat("ds"))},
                {"x", pack(randomDense({2000}, 8), parseFormat("d"))}};
    auto blocks = interpret(gpuProgram, t).stats.instanceWork["block"];
    bool exact = blocks.size() > 1 &&
                 std::all_of(blocks.begin(), blocks.end() - 1, [](int64_t w) { return w == 48; });
    auto chunks = interpret(rowProgram, t).stats.instanceWork["i0"];
    double mean = 0;
    for (auto c : chunks) mean += static_cast<double>(c);
    mean /= static_cast<double>(chunks.size());
    double ratio = static_cast<double>(*std::max_element(chunks.begin(), chunks.end())) / mean;
    pass = pass && exact && ratio > 3.0;
    detail += (detail.empty() ? "" : "; ") + std::string("base ") + fmt(base) +
              ": nonzero chunks " + (exact ? "all 48" : "UNEQUAL") + ", row-chunk max/mean " +
              fmt(ratio);
  }
  return {pass, detail};
}

// 6. Derived values recomputed from recorded coordinates match the loop
// variables, and tracking does not change the visit sequence.
Outcome recoveryRoundTrips() {
  bool pass = true;
  int64_t checked = 0;
  std::string failures;
  for (const auto& e : support::corpus()) {
    ScheduledStmt stmt = support::corpusSchedule(e);
    Symbols symbols(stmt);
    auto domains = propagateBounds(stmt, symbols);
    LowerOptions searchOnly;
    searchOnly.enableTracking = false;
    ir::Program tracked = lower(stmt), searched = lower(stmt, searchOnly);
    const auto& prov = stmt.provenance();
    for (uint64_t seed = 1; seed <= 2; ++seed) {
      TensorMap inputs = support::inputsFor(e.kernel, seed);
      ExecOptions opts;
      opts.recordVisits = true;
      ExecStats a = interpret(tracked, inputs, opts).stats;
      ExecStats b = interpret(searched, inputs, opts).stats;
      if (a.visits != b.visits || a.visitSymbols != b.visitSymbols) {
        pass = false;
        failures += " " + e.schedule + "(track)";
      }
      const auto& syms = a.visitSymbols;
      auto column = [&](const std::string& s) {
        return static_cast<size_t>(std::find(syms.begin(), syms.end(), s) - syms.begin());
      };
      std::vector<std::pair<size_t, ir::Expr>> recover;
      for (const auto& v : stmt.forest()) {
        const Relation* r = prov.producer(v);
        if (r && r->kind == RelKind::Precompute) continue;  // producer-only loop
        recover.push_back({column(v.name()), recoverDerived(stmt, symbols, domains, v)});
      }
      for (const auto& row : a.visits) {
        std::map<std::string, int64_t> env;
        for (const auto& o : prov.originals()) env[o.name()] = row.at(column(o.name()));
        for (const auto& [col, expr] : recover) {
          ++checked;
          if (evaluate(expr, env, tracked, inputs) != row.at(col)) {
            pass = false;
            failures += " " + e.schedule + "(" + syms[col] + ")";
            break;
          }
        }
        if (!pass) break;
      }
    }
  }
  return {pass, std::to_string(checked) + " recovered values checked" +
                    (failures.empty() ? "" : ", failures:" + failures)};
}

// 7. Preconditions produce their errors.
Outcome preconditions() {
  std::map<std::string, Format> mv{{"A", parseFormat("ds")}, {"x", parseFormat("d")}};
  std::map<std::string, Format> mm{{"A", parseFormat("ds")}, {"B", parseFormat("dd")}};
  auto code = [](const std::function<void()>& f) -> std::optional<ErrorCode> {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return std::nullopt;
  };
  Assignment spmv = parseExpression("y(i) = A(i,j) * x(j)");
  Assignment spmm = parseExpression("C(i,k) = A(i,j) * B(j,k)");
  struct Case {
    const char* what;
    ErrorCode expected;
    std::function<void()> run;
  };
  std::vector<Case> cases = {
      {"non-contiguous reorder", ErrorCode::NotDirectlyNested,
       [&] { concretize(spmm, mm).reorder({V("j"), V("i")}); }},
      {"discordant CSR reorder", ErrorCode::DiscordantTraversal,
       [&] { concretize(spmv, mv).reorder({V("j"), V("i")}); }},
      {"NoRaces on nonzero-split block loop", ErrorCode::RaceDetected,
       [&] {
         concretize(spmv, mv)
             .fuse(V("i"), V("j"), V("f"))
             .pos(V("f"), V("fpos"), "A")
             .split(V("fpos"), V("block"), V("fpos1"), 48)
             .parallelize(V("block"), ParallelUnit::GPUBlock, RaceStrategy::NoRaces);
       }},
      {"MaxExact violation", ErrorCode::ContractViolation,
       [&] {
         std::map<std::string, Format> f{{"x", parseFormat("d")}};
         auto stmt = concretize(parseExpression("y(i) = x(i)"), f)
                         .bound(V("i"), V("ib"), 2, BoundType::MaxExact);
         interpret(lower(stmt), {{"x", pack(randomDense({3}, 1), f["x"])}});
       }},
  };
  bool pass = true;
  std::string detail;
  for (const auto& c : cases) {
    auto got = code(c.run);
    bool ok = got && *got == c.expected;
    pass = pass && ok;
    detail += (detail.empty() ? "" : "; ") + std::string(c.what) + " -> " +
              (got ? toString(*got) : "no error");
  }
  return {pass, detail};
}

ScheduledStmt referenceSpmv(bool position) {
  std::map<std::string, Format> mv{{"A", parseFormat("ds")}, {"x", parseFormat("d")}};
  ScheduledStmt s = concretize(parseExpression("y(i)=A(i,j)*x(j)"), mv);
  return position ? applySchedule(s, readFile(support::corpusPath("spmv_fused_pos.sched"))) : s;
}

std::string golden(const char* name) {
  return readFile(std::string(SPSCHED_GOLDEN_DIR) + "/" + name);
}

// 8. Emitted kernels match the committed goldens.
Outcome goldenStructure() {
  std::string b = emitC(lower(referenceSpmv(false))).text;
  std::string d = emitC(lower(referenceSpmv(true))).text;
  bool same = b == golden("spmv_csr.c") && d == golden("spmv_fused_pos.c");
  bool shape = d.find("while (") != std::string::npos &&
               d.find("static int64_t spsched_segment_of(") != std::string::npos;
  bool deterministic = emitC(lower(referenceSpmv(true))).text == d;
  return {same && shape && deterministic,
          std::string("byte-identical: ") + (same ? "yes" : "no") +
              ", tracking while + search helper: " + (shape ? "yes" : "no")};
}

using KernelFn = void (*)(double*, const double**, const int32_t**, const int32_t**,
                          const int32_t*);

struct CompiledKernel {
  void* handle = nullptr;
  KernelFn fn = nullptr;
  ~CompiledKernel() {
    if (handle) dlclose(handle);
  }
};

std::unique_ptr<CompiledKernel> compileKernel(const std::string& source, const std::string& stem) {
  namespace fs = std::filesystem;
  fs::path dir = SPSCHED_SCRATCH_DIR;
  fs::create_directories(dir);
  fs::path c = dir / (stem + ".c"), so = dir / (stem + ".so");
  writeFile(c.string(), source);
  std::string cmd = std::string(SPSCHED_HOST_CC) + " -std=c99 -O1 -shared -fPIC -w -o \"" +
                    so.string() + "\" \"" + c.string() + "\"";
  if (std::system(cmd.c_str()) != 0) throw std::runtime_error("compiler failed on " + stem);
  auto k = std::make_unique<CompiledKernel>();
  k->handle = dlopen(so.c_str(), RTLD_NOW | RTLD_LOCAL);
  if (!k->handle) throw std::runtime_error(dlerror());
  k->fn = reinterpret_cast<KernelFn>(dlsym(k->handle, "compute"));
  if (!k->fn) throw std::runtime_error("no compute symbol in " + stem);
  return k;
}

DenseTensor runCompiled(const CompiledKernel& k, const ir::Program& p, const TensorMap& inputs,
                        const std::vector<int>& outDims) {
  std::vector<const double*> vals;
  std::vector<const int32_t*> pos, crd;
  std::vector<int32_t> dims;
  auto put = [](auto& v, int slot, auto value) {
    if (static_cast<int>(v.size()) <= slot) v.resize(slot + 1);
    v[slot] = value;
  };
  for (const auto& a : p.arrays) {
    if (a.role == ir::ArrayRole::Vals) put(vals, a.slot, inputs.at(a.tensor).vals().data());
    if (a.role == ir::ArrayRole::Pos) {
      put(pos, a.slot, inputs.at(a.tensor).level(a.level).pos.data());
    }
    if (a.role == ir::ArrayRole::Crd) {
      put(crd, a.slot, inputs.at(a.tensor).level(a.level).crd.data());
    }
  }
  for (const auto& d : p.dims) put(dims, d.slot, inputs.at(d.tensor).dims()[d.level]);
  DenseTensor out(outDims);
  std::fill(out.vals.begin(), out.vals.end(), std::nan(""));  // the kernel must zero it
  k.fn(out.vals.data(), vals.data(), pos.data(), crd.data(), dims.data());
  return out;
}

// 9. Compiled kernels agree with the interpreter.
Outcome toolchainGate() {
  if (std::string(SPSCHED_HOST_CC).empty()) return {true, "skipped: no host C compiler"};
  double worst = 0.0;
  int kernels = 0;
  auto check = [&](const std::string& source, const std::string& stem, const ir::Program& p,
                   support::Kernel kind) {
    auto k = compileKernel(source, stem);
    ++kernels;
    for (uint64_t seed = 1; seed <= 30; ++seed) {
      TensorMap inputs = support::inputsFor(kind, seed);
      DenseTensor expected = interpret(p, inputs).output;
      worst = std::max(worst, maxRelativeError(runCompiled(*k, p, inputs, expected.dims),
                                               expected));
    }
  };
  check(golden("spmv_csr.c"), "spmv_csr", lower(referenceSpmv(false)), support::Kernel::SpMV);
  check(golden("spmv_fused_pos.c"), "spmv_fused_pos", lower(referenceSpmv(true)), support::Kernel::SpMV);
  for (const auto& e : support::corpus()) {
    ir::Program p = lower(support::corpusSchedule(e));
    check(emitC(p).text, e.schedule, p, e.kernel);
  }
  return {worst <= 1e-10, std::to_string(kernels) + " compiled kernels, max relative error " +
                              fmt(worst)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"corpus correctness", corpusCorrectness},
      {"visit exactly once", visitExactlyOnce},
      {"tail strategy", tailStrategy},
      {"divide constancy", divideConstancy},
      {"load balance", loadBalance},
      {"recovery round trips", recoveryRoundTrips},
      {"precondition enforcement", preconditions},
      {"golden structure", goldenStructure},
      {"compiled kernels", toolchainGate},
  };
  int failures = 0, n = 0;
  for (const auto& c : criteria) {
    ++n;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << n << " " << c.name << ": " << o.detail
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
