// Shared fixtures for the unit and acceptance tests.
#ifndef SPSCHED_TESTS_SUPPORT_H
#define SPSCHED_TESTS_SUPPORT_H

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "spsched/generate.h"
#include "spsched/index_notation.h"
#include "spsched/io.h"
#include "spsched/oracle.h"
#include "spsched/schedule.h"
#include "spsched/schedule_dsl.h"

namespace support {

using namespace spsched;

inline IndexVar V(const char* name) { return IndexVar(name); }

inline std::string corpusPath(const std::string& file) {
  return std::string(SPSCHED_CORPUS_DIR) + "/" + file;
}

enum class Kernel { SpMV, SpMM, MTTKRP };

struct CorpusEntry {
  std::string schedule;  // file stem under tests/corpus
  std::string expr;
  Kernel kernel;
};

inline const std::vector<CorpusEntry>& corpus() {
  static const std::vector<CorpusEntry> entries = {
      {"spmv_cpu", "spmv", Kernel::SpMV},
      {"spmv_gpu", "spmv_labelled", Kernel::SpMV},
      {"spmm_cpu", "spmm", Kernel::SpMM},
      {"spmm_gpu", "spmm", Kernel::SpMM},
      {"mttkrp_cpu", "mttkrp", Kernel::MTTKRP},
      {"mttkrp_gpu", "mttkrp", Kernel::MTTKRP},
      {"spmv_thread_per_row", "spmv", Kernel::SpMV},
      {"spmv_warp_per_row", "spmv_labelled", Kernel::SpMV},
      {"spmv_gpu_no_unroll", "spmv_labelled", Kernel::SpMV},
      {"spmm_cpu_tiled", "spmm", Kernel::SpMM},
      {"spmm_cpu_untiled", "spmm", Kernel::SpMM},
  };
  return entries;
}

inline std::map<std::string, Format> formatsFor(Kernel k) {
  switch (k) {
    case Kernel::SpMV: return {{"A", parseFormat("ds")}, {"x", parseFormat("d")}};
    case Kernel::SpMM: return {{"A", parseFormat("ds")}, {"B", parseFormat("dd")}};
    case Kernel::MTTKRP:
      return {{"B", parseFormat("sss")}, {"C", parseFormat("dd")}, {"D", parseFormat("dd")}};
  }
  return {};
}

// Dense operand width: the GPU schedules bound ceil(width / 8) to 1.
inline constexpr int kDenseWidth = 8;

inline TensorMap inputsFor(Kernel k, uint64_t seed) {
  auto f = formatsFor(k);
  TensorMap t;
  switch (k) {
    case Kernel::SpMV:
      t["A"] = pack(randomSparse({40, 50}, 0.1, seed), f["A"]);
      t["x"] = pack(randomDense({50}, seed + 1000), f["x"]);
      break;
    case Kernel::SpMM:
      t["A"] = pack(randomSparse({40, 50}, 0.1, seed), f["A"]);
      t["B"] = pack(randomDense({50, kDenseWidth}, seed + 1000), f["B"]);
      break;
    case Kernel::MTTKRP:
      t["B"] = pack(randomSparse({20, 25, 30}, 0.05, seed), f["B"]);
      t["C"] = pack(randomDense({25, kDenseWidth}, seed + 1000), f["C"]);
      t["D"] = pack(randomDense({30, kDenseWidth}, seed + 2000), f["D"]);
      break;
  }
  return t;
}

inline Assignment corpusAssignment(const CorpusEntry& e) {
  return parseProgram(readFile(corpusPath(e.expr + ".expr")));
}

inline ScheduledStmt corpusSchedule(const CorpusEntry& e) {
  return applySchedule(concretize(corpusAssignment(e), formatsFor(e.kernel)),
                       readFile(corpusPath(e.schedule + ".sched")));
}

}  // namespace support

#endif
