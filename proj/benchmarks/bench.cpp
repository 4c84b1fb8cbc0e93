// Compiler-side costs (lowering, emission) and interpreter throughput.
#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>

#include "spsched/codegen_c.h"
#include "spsched/generate.h"
#include "spsched/interpret.h"
#include "spsched/lower.h"
#include "spsched/schedule_dsl.h"

using namespace spsched;

namespace {

std::string slurp(const std::string& name) {
  std::ifstream in(std::string(SPSCHED_CORPUS_DIR) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::map<std::string, Format>& csr() {
  static const std::map<std::string, Format> f{{"A", parseFormat("ds")},
                                               {"x", parseFormat("d")}};
  return f;
}

ScheduledStmt spmv(const char* sched) {
  ScheduledStmt base = concretize(parseProgram(slurp("spmv_labelled.expr")), csr());
  return sched ? applySchedule(base, slurp(sched)) : base;
}

const char* scheduleFor(int64_t which) {
  switch (which) {
    case 1: return "spmv_cpu.sched";
    case 2: return "spmv_gpu.sched";
    default: return nullptr;
  }
}

void BM_Lower(benchmark::State& state) {
  ScheduledStmt s = spmv(scheduleFor(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(lower(s));
}
BENCHMARK(BM_Lower)->Arg(0)->Arg(1)->Arg(2);

void BM_EmitC(benchmark::State& state) {
  ir::Program p = lower(spmv(scheduleFor(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(emitC(p));
}
BENCHMARK(BM_EmitC)->Arg(0)->Arg(1)->Arg(2);

void BM_Interpret(benchmark::State& state) {
  ir::Program p = lower(spmv(scheduleFor(state.range(0))));
  const int n = 1000;
  TensorMap t{{"A", pack(randomSparse({n, n}, 0.01, 1), csr().at("A"))},
              {"x", pack(randomDense({n}, 2), csr().at("x"))}};
  ExecOptions opts;
  opts.threads = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(interpret(p, t, opts));
  state.SetItemsProcessed(state.iterations() * n * n / 100);
}
BENCHMARK(BM_Interpret)->ArgsProduct({{0, 1, 2}, {1, 4}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
