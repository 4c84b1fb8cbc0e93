// Command-line front end: parse, schedule, lower, then run / verify / emit.
#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <sstream>

#include "spsched/codegen_c.h"
#include "spsched/error.h"
#include "spsched/generate.h"
#include "spsched/interpret.h"
#include "spsched/io.h"
#include "spsched/lower.h"
#include "spsched/oracle.h"
#include "spsched/schedule_dsl.h"

using namespace spsched;

namespace {

constexpr double kTolerance = 1e-10;

std::vector<int> parseDims(const std::string& text) {
  std::vector<int> dims;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, 'x')) {
    try {
      size_t used = 0;
      int d = std::stoi(part, &used);
      if (used != part.size() || d <= 0) throw std::invalid_argument(part);
      dims.push_back(d);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "bad dimension list '" + text + "'");
    }
  }
  if (dims.empty()) throw Error(ErrorCode::InvalidArgument, "empty dimension list");
  return dims;
}

struct Binding {
  std::string name;
  std::string source;
  Format format;
};

// NAME=PATH:FMT, or NAME=random:DIMS[@DENSITY]:FMT for seeded random data.
Binding parseBinding(const std::string& text) {
  size_t eq = text.find('=');
  size_t colon = text.rfind(':');
  if (eq == std::string::npos || colon == std::string::npos || colon < eq) {
    throw Error(ErrorCode::InvalidArgument, "expected NAME=PATH:FMT, got '" + text + "'");
  }
  return {text.substr(0, eq), text.substr(eq + 1, colon - eq - 1),
          parseFormat(text.substr(colon + 1))};
}

CooTensor loadSource(const std::string& source, uint64_t seed) {
  if (source.rfind("random:", 0) != 0) return readCooFile(source);
  std::string spec = source.substr(7);
  size_t at = spec.find('@');
  std::vector<int> dims = parseDims(spec.substr(0, at));
  if (at == std::string::npos) return randomDense(dims, seed);
  return randomSparse(dims, std::stod(spec.substr(at + 1)), seed);
}

void output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
  } else {
    writeFile(path, text);
  }
}

std::string statsText(const ExecStats& s) {
  std::ostringstream os;
  os << "total work: " << s.totalWork << "\n";
  os << "guards: " << s.guardPasses << " passed, " << s.guardFailures << " failed\n";
  os << "loop iterations:\n";
  for (const auto& [name, n] : s.loopIterations) os << "  " << name << ": " << n << "\n";
  for (const auto& [name, work] : s.instanceWork) {
    os << "parallel loop " << name << ": " << work.size() << " instances\n";
    if (work.empty()) continue;
    auto describe = [&](const char* label, std::vector<int64_t>::const_iterator b,
                        std::vector<int64_t>::const_iterator e) {
      auto [mn, mx] = std::minmax_element(b, e);
      double mean = static_cast<double>(std::accumulate(b, e, int64_t{0})) /
                    static_cast<double>(e - b);
      os << "  " << label << ": min " << *mn << ", max " << *mx << ", mean " << mean;
      if (*mn > 0) os << ", max/min " << static_cast<double>(*mx) / static_cast<double>(*mn);
      if (mean > 0) os << ", max/mean " << static_cast<double>(*mx) / mean;
      os << "\n";
    };
    describe("all", work.begin(), work.end());
    if (work.size() > 1) describe("non-tail", work.begin(), work.end() - 1);
  }
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Schedule, lower and execute sparse tensor algebra kernels"};
  app.require_subcommand(0, 1);

  std::string exprArg, schedulePath, action = "run", outPath;
  std::vector<std::string> tensorArgs;
  uint64_t seed = 1;
  int threads = 1;
  bool noTrack = false, specialize = false;
  app.add_option("--expr", exprArg, "Expression text, or @FILE")->required(false);
  app.add_option("--tensor", tensorArgs,
                 "NAME=PATH:FMT (FMT per dimension: d dense, s compressed); "
                 "PATH may be random:DIMS[@DENSITY], e.g. random:40x50@0.1");
  app.add_option("--schedule", schedulePath, "Schedule file");
  app.add_option("--action", action, "What to do")
      ->check(CLI::IsMember({"run", "verify", "emit", "stats", "dump-graph", "dump-ir"}));
  app.add_option("--out", outPath, "Write the artifact here instead of stdout");
  app.add_option("--seed", seed, "Seed for random tensors");
  app.add_option("--threads", threads, "Threads for the outermost CPUThread loop")
      ->check(CLI::PositiveNumber);
  app.add_flag("--no-track", noTrack, "Recover coordinates by search instead of tracking");
  app.add_flag("--specialize", specialize, "Bake tensor dimensions into the kernel");

  auto* gen = app.add_subcommand("generate", "Write a random or skewed sparse tensor");
  std::string genKind = "random", genDims, genOut;
  double density = 0.1, base = 1.01;
  int64_t nnz = 0;
  gen->add_option("--kind", genKind)->check(CLI::IsMember({"random", "dense", "skewed"}));
  gen->add_option("--dims", genDims, "Dimensions, e.g. 1000x1000")->required();
  gen->add_option("--density", density, "Fraction of stored entries (random)");
  gen->add_option("--nnz", nnz, "Nonzero count (skewed)");
  gen->add_option("--base", base, "Row-count growth base (skewed)");
  gen->add_option("--seed", seed, "Seed");
  gen->add_option("--out", genOut, "Output path (.mtx for MatrixMarket, else FROSTT)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      std::vector<int> dims = parseDims(genDims);
      CooTensor coo;
      if (genKind == "skewed") {
        if (dims.size() != 2) throw Error(ErrorCode::InvalidArgument, "skewed needs 2 dimensions");
        coo = skewedMatrix(dims[0], dims[1], nnz, base, seed);
      } else if (genKind == "dense") {
        coo = randomDense(dims, seed);
      } else {
        coo = randomSparse(dims, density, seed);
      }
      bool mtx = genOut.size() >= 4 && genOut.compare(genOut.size() - 4, 4, ".mtx") == 0;
      writeFile(genOut, mtx ? writeMatrixMarket(coo) : writeFrostt(coo));
      return 0;
    }

    if (exprArg.empty()) throw Error(ErrorCode::InvalidArgument, "--expr is required");
    std::string exprText = exprArg[0] == '@' ? readFile(exprArg.substr(1)) : exprArg;
    Assignment assignment = parseProgram(exprText);

    std::map<std::string, Format> formats;
    TensorMap tensors;
    uint64_t tensorSeed = seed;
    for (const auto& arg : tensorArgs) {
      Binding b = parseBinding(arg);
      formats[b.name] = b.format;
      tensors[b.name] = pack(loadSource(b.source, tensorSeed++), b.format);
    }

    ScheduledStmt stmt = concretize(assignment, formats);
    if (!schedulePath.empty()) stmt = applySchedule(stmt, readFile(schedulePath));
    if (action == "dump-graph") {
      output(outPath, stmt.toString() + "\n" + toDot(stmt));
      return 0;
    }

    LowerOptions options;
    options.enableTracking = !noTrack;
    if (specialize) options.specializedDims = tensorDims(tensors);
    ir::Program program = lower(stmt, options);
    if (action == "dump-ir") {
      output(outPath, ir::print(program));
      return 0;
    }
    if (action == "emit") {
      output(outPath, emitC(program).text);
      return 0;
    }

    ExecOptions exec;
    exec.threads = threads;
    ExecResult result = interpret(program, tensors, exec);
    if (action == "run") {
      output(outPath, writeDenseFrostt(result.output));
    } else if (action == "stats") {
      output(outPath, statsText(result.stats));
    } else {  // verify
      double err = maxRelativeError(result.output, denseEval(assignment, tensors));
      bool pass = err <= kTolerance;
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.3e", err);
      output(outPath, std::string("max relative error: ") + buf + "\n" +
                          (pass ? "PASS" : "FAIL") + "\n");
      return pass ? 0 : 1;
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "error [" << toString(e.code()) << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
